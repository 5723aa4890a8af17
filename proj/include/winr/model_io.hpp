#pragma once

// JSON serialization of models (schema "winr-model-v1").
// Complex arrays are stored row-major with re/im interleaved. Doubles are
// written with round-trip precision so load(save(m)) == m bit for bit.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "winr/io.hpp"
#include "winr/model.hpp"

namespace winr {

inline constexpr const char* kModelSchema = "winr-model-v1";

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline json complex_array(std::span<const Cplx> v) {
  json a = json::array();
  for (const auto& z : v) {
    a.push_back(z.real());
    a.push_back(z.imag());
  }
  return a;
}

inline std::vector<Cplx> read_complex_array(const json& a, std::size_t expect, const std::string& where) {
  if (!a.is_array() || a.size() != 2 * expect)
    throw FormatError(where + ": expected " + std::to_string(2 * expect) + " interleaved values");
  std::vector<Cplx> v(expect);
  for (std::size_t i = 0; i < expect; ++i) v[i] = {a[2 * i].get<double>(), a[2 * i + 1].get<double>()};
  return v;
}

inline json activation_to_json(const ActivationSpec& a) {
  switch (a.kind) {
    case ActivationKind::Polynomial: return {{"kind", "polynomial"}, {"coeffs", complex_array(a.coeffs)}};
    case ActivationKind::ComplexSine: return {{"kind", "complex_sine"}, {"scale", a.scale}};
    case ActivationKind::Identity: return {{"kind", "identity"}};
  }
  return {};
}

inline ActivationSpec activation_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "identity") return ActivationSpec::identity();
  if (kind == "complex_sine") return ActivationSpec::complex_sine(j.at("scale").get<double>());
  if (kind == "polynomial") {
    const auto& c = j.at("coeffs");
    if (!c.is_array() || c.size() % 2 != 0) throw FormatError("activation: malformed coefficients");
    return ActivationSpec::polynomial(read_complex_array(c, c.size() / 2, "activation.coeffs"));
  }
  throw FormatError("activation: unknown kind '" + kind + "'");
}

inline json template_to_json(const TemplateSpec& t) {
  return {{"kind", to_string(t.kind)}, {"omega", t.omega}, {"sigma", t.sigma}, {"radius", t.radius}, {"dim", t.dim}};
}

inline TemplateSpec template_from_json(const json& j) {
  TemplateSpec t;
  t.kind = template_kind_from_string(j.at("kind").get<std::string>());
  t.omega = j.at("omega").get<double>();
  t.sigma = j.at("sigma").get<double>();
  t.radius = j.at("radius").get<double>();
  t.dim = j.at("dim").get<int>();
  t.validate();
  return t;
}

}  // namespace detail

inline nlohmann::json model_to_json(const INRModel& m) {
  using detail::json;
  json first{{"template", detail::template_to_json(m.first.template_spec())},
             {"constraint", to_string(m.first.constraint())},
             {"atoms", m.first.atoms()},
             {"weights", m.first.raw_weights()},
             {"biases", m.first.raw_biases()}};
  if (m.first.constraint() == WeightConstraint::ScaleOnly) first["log_scales"] = m.first.raw_log_scales();
  json hidden = json::array();
  for (const auto& h : m.hidden)
    hidden.push_back({{"rows", h.weights.rows()},
                      {"cols", h.weights.cols()},
                      {"weights", detail::complex_array(h.weights.data())},
                      {"bias", detail::complex_array(h.bias)},
                      {"activation", detail::activation_to_json(h.activation)}});
  const Cplx ob = m.output.bias;
  return {{"first", first},
          {"hidden", hidden},
          {"output",
           {{"cols", m.output.weights.cols()},
            {"weights", detail::complex_array(m.output.weights.data())},
            {"bias", {ob.real(), ob.imag()}}}}};
}

inline INRModel model_from_json(const nlohmann::json& j) {
  try {
    const auto& f = j.at("first");
    const auto tmpl = detail::template_from_json(f.at("template"));
    const auto constraint = weight_constraint_from_string(f.at("constraint").get<std::string>());
    const auto atoms = f.at("atoms").get<std::size_t>();
    const auto d = static_cast<std::size_t>(tmpl.dim);
    INRModel m;
    m.first = FirstLayer(tmpl, constraint, atoms);
    const auto w = f.at("weights").get<std::vector<double>>();
    const auto b = f.at("biases").get<std::vector<double>>();
    if (w.size() != atoms * d * d || b.size() != atoms * d) throw FormatError("first layer: shape mismatch");
    for (std::size_t t = 0; t < atoms; ++t)
      for (std::size_t i = 0; i < d; ++i) {
        m.first.set_bias(t, i, b[t * d + i]);
        if (constraint == WeightConstraint::Free)
          for (std::size_t k = 0; k < d; ++k) m.first.set_weight(t, i, k, w[t * d * d + i * d + k]);
      }
    if (constraint == WeightConstraint::ScaleOnly) {
      const auto ls = f.at("log_scales").get<std::vector<double>>();
      if (ls.size() != atoms * d) throw FormatError("first layer: log_scales shape mismatch");
      for (std::size_t t = 0; t < atoms; ++t)
        for (std::size_t i = 0; i < d; ++i) m.first.set_log_scale(t, i, ls[t * d + i]);
      for (std::size_t k = 0; k < w.size(); ++k)
        if (w[k] != m.first.raw_weights()[k]) throw FormatError("first layer: weights disagree with log_scales");
    }
    for (const auto& h : j.at("hidden")) {
      const auto rows = h.at("rows").get<std::size_t>(), cols = h.at("cols").get<std::size_t>();
      DenseLayer layer{CMatrix(rows, cols), {}, detail::activation_from_json(h.at("activation"))};
      const auto vals = detail::read_complex_array(h.at("weights"), rows * cols, "hidden.weights");
      std::copy(vals.begin(), vals.end(), layer.weights.data().begin());
      layer.bias = detail::read_complex_array(h.at("bias"), rows, "hidden.bias");
      m.hidden.push_back(std::move(layer));
    }
    const auto& o = j.at("output");
    const auto cols = o.at("cols").get<std::size_t>();
    m.output.weights = CMatrix(1, cols);
    const auto ow = detail::read_complex_array(o.at("weights"), cols, "output.weights");
    std::copy(ow.begin(), ow.end(), m.output.weights.data().begin());
    m.output.bias = detail::read_complex_array(o.at("bias"), 1, "output.bias")[0];
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  } catch (const SizeError& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
}

/// A document holding one or more named networks.
inline nlohmann::json models_document(const std::vector<std::pair<std::string, const INRModel*>>& nets) {
  nlohmann::json doc{{"schema", kModelSchema}, {"networks", nlohmann::json::array()}};
  for (const auto& [name, m] : nets) {
    auto j = model_to_json(*m);
    j["name"] = name;
    doc["networks"].push_back(std::move(j));
  }
  return doc;
}

inline nlohmann::json split_to_json(const SplitModel& s) {
  return models_document({{"scaling", &s.scaling}, {"gabor", &s.gabor}});
}

inline nlohmann::json model_document(const INRModel& m) { return models_document({{"model", &m}}); }

inline std::vector<std::pair<std::string, INRModel>> models_from_document(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != kModelSchema)
    throw FormatError(std::string("model JSON: schema must be '") + kModelSchema + "'");
  std::vector<std::pair<std::string, INRModel>> out;
  for (const auto& n : doc.at("networks")) out.emplace_back(n.value("name", ""), model_from_json(n));
  return out;
}

inline SplitModel split_from_json(const nlohmann::json& doc) {
  SplitModel s;
  bool have_scaling = false, have_gabor = false;
  for (auto& [name, m] : models_from_document(doc)) {
    if (name == "scaling") {
      s.scaling = std::move(m);
      have_scaling = true;
    } else if (name == "gabor") {
      s.gabor = std::move(m);
      have_gabor = true;
    }
  }
  if (!have_scaling || !have_gabor) throw FormatError("model JSON: split model needs 'scaling' and 'gabor' networks");
  return s;
}

}  // namespace winr
