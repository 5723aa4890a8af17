#pragma once

// Command layer of the `winr` tool: strict winr-config-v1 parsing, flag
// overrides, and dispatch to the experiment runners. Exit codes: 0 success,
// 1 verification or experiment failure, 2 usage or configuration error.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "winr/experiments.hpp"
#include "winr/io.hpp"
#include "winr/model_io.hpp"
#include "winr/signals.hpp"
#include "winr/spectral.hpp"
#include "winr/verify/suites.hpp"

namespace winr::cli {

using nlohmann::json;

inline constexpr const char* kConfigSchema = "winr-config-v1";

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"verify", "fit1d", "fit2d", "init-bench", "fig3", "spectrum", "gen"};
  return c;
}

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::size_t jobs = 1;
  std::optional<std::string> suite;
};

// ---------------------------------------------------------------------------
// Strict JSON reading

/// Reads typed fields from one JSON object and rejects any key that was not read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  void get(const char* key, std::size_t& out) { read(key, out, [&](const json& v) { return as_count(v, key); }); }
  void get(const char* key, double& out) {
    read(key, out, [&](const json& v) {
      if (!v.is_number()) throw ConfigError(where(key) + "expected a number");
      return v.get<double>();
    });
  }
  void get(const char* key, bool& out) {
    read(key, out, [&](const json& v) {
      if (!v.is_boolean()) throw ConfigError(where(key) + "expected true or false");
      return v.get<bool>();
    });
  }
  void get(const char* key, std::string& out) {
    read(key, out, [&](const json& v) {
      if (!v.is_string()) throw ConfigError(where(key) + "expected a string");
      return v.get<std::string>();
    });
  }
  void get(const char* key, std::vector<std::size_t>& out) {
    read(key, out, [&](const json& v) {
      if (!v.is_array()) throw ConfigError(where(key) + "expected an array of non-negative integers");
      std::vector<std::size_t> r;
      for (const auto& e : v) r.push_back(as_count(e, key));
      return r;
    });
  }
  void get(const char* key, std::vector<std::string>& out) {
    read(key, out, [&](const json& v) {
      if (!v.is_array()) throw ConfigError(where(key) + "expected an array of strings");
      std::vector<std::string> r;
      for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError(where(key) + "expected an array of strings");
        r.push_back(e.get<std::string>());
      }
      return r;
    });
  }

  /// Nested object; consumed like any other key.
  std::optional<Section> child(const char* key) {
    if (!j_.contains(key)) return std::nullopt;
    used_.insert(key);
    return Section(j_.at(key), path_ + key + ".");
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ConfigError("unknown configuration key '" + path_ + k + "'");
  }

  std::string where(const char* key = "") const { return "config " + path_ + key + ": "; }

 private:
  template <class T, class F>
  void read(const char* key, T& out, F&& conv) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    out = conv(j_.at(key));
  }

  std::size_t as_count(const json& v, const char* key) const {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
    throw ConfigError(where(key) + "expected a non-negative integer");
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// ---------------------------------------------------------------------------
// Per-command settings

inline void read_arch(Section& s, SplitArch& a) {
  s.get("coord_scale", a.coord_scale);
  s.get("lattice", a.lattice);
  s.get("hidden", a.hidden);
  require(a.coord_scale > 0 && std::isfinite(a.coord_scale), s.where("coord_scale") + "must be positive");
  require(a.lattice >= 2, s.where("lattice") + "must be >= 2");
  for (auto w : a.hidden) require(w >= 1, s.where("hidden") + "widths must be >= 1");
}

inline json arch_json(const SplitArch& a) {
  return {{"coord_scale", a.coord_scale}, {"lattice", a.lattice}, {"hidden", a.hidden}};
}

inline void check_signal(Section& s, const std::string& name, std::size_t n) {
  bool known = false;
  for (const char* k : kSignalNames) known = known || name == k;
  require(known, s.where("signal") + "unknown signal '" + name + "' (blocks, bumps, heavisine, doppler)");
  require(n >= 16 && is_pow2(n), s.where("n") + "must be a power of two >= 16");
}

inline void check_training(Section& s, std::size_t steps, double lr) {
  require(steps >= 1, s.where("steps") + "must be >= 1");
  require(lr >= 0 && std::isfinite(lr), s.where("lr") + "must be finite and >= 0");
}

struct VerifySettings {
  std::vector<std::uint64_t> seeds = verify::default_seeds();
  std::vector<std::string> suites = verify::suite_names();
  bool inject_wrong_beta = false;  // test hook: corrupts one expansion coefficient
};

inline void read_section(Section& s, VerifySettings& v) {
  std::vector<std::size_t> seeds(v.seeds.begin(), v.seeds.end());
  s.get("seeds", seeds);
  v.seeds.assign(seeds.begin(), seeds.end());
  s.get("suites", v.suites);
  s.get("inject_wrong_beta", v.inject_wrong_beta);
  require(!v.seeds.empty(), s.where("seeds") + "must not be empty");
  for (const auto& n : v.suites) {
    const auto& all = verify::suite_names();
    require(std::find(all.begin(), all.end(), n) != all.end(), s.where("suites") + "unknown suite '" + n + "'");
  }
}

inline json to_json(const VerifySettings& v) {
  return {{"seeds", v.seeds}, {"suites", v.suites}, {"inject_wrong_beta", v.inject_wrong_beta}};
}

inline void read_section(Section& s, Fit1DConfig& c) {
  std::string init = to_string(c.init);
  s.get("signal", c.signal);
  s.get("n", c.n);
  s.get("init", init);
  s.get("K", c.K);
  s.get("steps", c.steps);
  s.get("lr", c.lr);
  read_arch(s, c.arch);
  try {
    c.init = init_scheme_from_string(init);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.where("init") + e.what());
  }
  check_signal(s, c.signal, c.n);
  require(c.K >= 1, s.where("K") + "must be >= 1");
  check_training(s, c.steps, c.lr);
}

inline json to_json(const Fit1DConfig& c) {
  return {{"signal", c.signal}, {"n", c.n},         {"init", to_string(c.init)},
          {"K", c.K},           {"steps", c.steps}, {"lr", c.lr},
          {"coord_scale", c.arch.coord_scale}, {"lattice", c.arch.lattice}, {"hidden", c.arch.hidden}};
}

inline void read_section(Section& s, InitBenchConfig& c) {
  s.get("signal", c.signal);
  s.get("n", c.n);
  s.get("Ks", c.Ks);
  s.get("trials", c.trials);
  s.get("steps", c.steps);
  s.get("lr", c.lr);
  s.get("ratio_bound", c.ratio_bound);
  read_arch(s, c.arch);
  check_signal(s, c.signal, c.n);
  require(!c.Ks.empty(), s.where("Ks") + "must not be empty");
  for (auto k : c.Ks) require(k >= 1, s.where("Ks") + "entries must be >= 1");
  require(c.trials >= 1, s.where("trials") + "must be >= 1");
  require(c.ratio_bound > 0, s.where("ratio_bound") + "must be positive");
  check_training(s, c.steps, c.lr);
}

inline json to_json(const InitBenchConfig& c) {
  json j{{"signal", c.signal}, {"n", c.n},         {"Ks", c.Ks},
         {"trials", c.trials}, {"steps", c.steps}, {"lr", c.lr},
         {"ratio_bound", c.ratio_bound}};
  j.update(arch_json(c.arch));
  return j;
}

inline std::string to_string(ImageKind k) {
  return k == ImageKind::Disk ? "disk" : k == ImageKind::Annulus ? "annulus" : "step";
}

inline void read_image(Section& s, ImageSpec& im) {
  std::string kind = to_string(im.kind);
  s.get("kind", kind);
  s.get("size", im.size);
  s.get("radius", im.radius);
  s.get("inner_radius", im.inner_radius);
  s.get("step_position", im.step_position);
  s.get("blur_sigma", im.blur_sigma);
  try {
    im.kind = image_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.where("kind") + e.what());
  }
  require(im.size >= 32 && is_pow2(im.size), s.where("size") + "must be a power of two >= 32");
  require(im.blur_sigma >= 0, s.where("blur_sigma") + "must be >= 0");
  try {
    gen_image(im);
  } catch (const std::exception& e) {
    throw ConfigError(s.where() + e.what());
  }
}

inline json image_json(const ImageSpec& im) {
  return {{"kind", to_string(im.kind)}, {"size", im.size}, {"radius", im.radius}, {"inner_radius", im.inner_radius},
          {"step_position", im.step_position}, {"blur_sigma", im.blur_sigma}};
}

inline void read_section(Section& s, Fit2DConfig& c) {
  if (auto im = s.child("image")) {
    read_image(*im, c.image);
    im->finish();
  }
  s.get("input", c.input);
  s.get("K", c.K);
  s.get("edge_points", c.edge_points);
  s.get("steps", c.steps);
  s.get("lr", c.lr);
  if (auto cs = s.child("canny")) {
    cs->get("sigma", c.canny.sigma);
    cs->get("low", c.canny.low);
    cs->get("high", c.canny.high);
    cs->finish();
    try {
      c.canny.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(cs->where() + e.what());
    }
  }
  read_arch(s, c.arch);
  require(c.K >= 1, s.where("K") + "must be >= 1");
  require(c.edge_points >= 1, s.where("edge_points") + "must be >= 1");
  check_training(s, c.steps, c.lr);
}

inline json to_json(const Fit2DConfig& c) {
  json j{{"image", image_json(c.image)}, {"input", c.input}, {"K", c.K}, {"edge_points", c.edge_points},
         {"steps", c.steps}, {"lr", c.lr},
         {"canny", {{"sigma", c.canny.sigma}, {"low", c.canny.low}, {"high", c.canny.high}}}};
  j.update(arch_json(c.arch));
  return j;
}

struct Fig3Settings {
  Fig3Params params;
  std::size_t pool = 4;
};

inline void read_section(Section& s, Fig3Settings& f) {
  s.get("n", f.params.n);
  s.get("half_width", f.params.half_width);
  s.get("pool", f.pool);
  require(f.params.n >= 64 && is_pow2(f.params.n), s.where("n") + "must be a power of two >= 64");
  require(f.params.half_width > 0, s.where("half_width") + "must be positive");
  require(f.pool >= 1 && f.params.n % f.pool == 0, s.where("pool") + "must divide n");
}

inline json to_json(const Fig3Settings& f) {
  return {{"n", f.params.n}, {"half_width", f.params.half_width}, {"pool", f.pool}};
}

struct SpectrumSettings {
  std::string model;          // model document path; empty selects `signal`
  std::string network = "sum";
  std::string signal = "bumps";
  std::size_t n = 4096;
};

inline void read_section(Section& s, SpectrumSettings& c) {
  s.get("model", c.model);
  s.get("network", c.network);
  s.get("signal", c.signal);
  s.get("n", c.n);
  if (c.model.empty()) check_signal(s, c.signal, c.n);
  require(c.n >= 16 && is_pow2(c.n), s.where("n") + "must be a power of two >= 16");
}

inline json to_json(const SpectrumSettings& c) {
  return {{"model", c.model}, {"network", c.network}, {"signal", c.signal}, {"n", c.n}};
}

struct GenSettings {
  std::string signal = "bumps";
  std::size_t n = 2048;
  std::optional<ImageSpec> image;
};

inline void read_section(Section& s, GenSettings& g) {
  s.get("signal", g.signal);
  s.get("n", g.n);
  if (auto im = s.child("image")) {
    g.image.emplace();
    read_image(*im, *g.image);
    im->finish();
  }
  if (!g.image) check_signal(s, g.signal, g.n);
}

inline json to_json(const GenSettings& g) {
  if (g.image) return {{"image", image_json(*g.image)}};
  return {{"signal", g.signal}, {"n", g.n}};
}

// ---------------------------------------------------------------------------
// Resolution

struct Resolved {
  std::string command;
  std::uint64_t seed = 0;
  std::string out;
  VerifySettings verify;
  Fit1DConfig fit1d;
  InitBenchConfig init_bench;
  Fit2DConfig fit2d;
  Fig3Settings fig3;
  SpectrumSettings spectrum;
  GenSettings gen;

  /// Echo written into every report. Output location and thread count are
  /// left out so reports do not depend on them.
  json echo() const {
    json j{{"schema", kConfigSchema}, {"experiment", command}, {"seed", seed}};
    if (command == "verify") j["verify"] = to_json(verify);
    if (command == "fit1d") j["fit1d"] = to_json(fit1d);
    if (command == "init-bench") j["init-bench"] = to_json(init_bench);
    if (command == "fit2d") j["fit2d"] = to_json(fit2d);
    if (command == "fig3") j["fig3"] = to_json(fig3);
    if (command == "spectrum") j["spectrum"] = to_json(spectrum);
    if (command == "gen") j["gen"] = to_json(gen);
    return j;
  }
};

/// Validates `config` (may be null) against winr-config-v1 and applies flag
/// overrides. Throws ConfigError on any violation.
inline Resolved resolve(const Options& opt, const json& config) {
  Resolved r;
  r.command = opt.command;
  if (std::find(commands().begin(), commands().end(), opt.command) == commands().end())
    throw ConfigError("unknown command '" + opt.command + "'");
  std::string out;
  if (!config.is_null()) {
    Section top(config, "");
    std::string schema, experiment;
    top.get("schema", schema);
    require(schema == kConfigSchema, std::string("config: \"schema\" must be \"") + kConfigSchema + "\"");
    top.get("experiment", experiment);
    if (!experiment.empty()) {
      const std::string e = experiment == "verify-expansion" ? "verify" : experiment;
      require(e == opt.command, "config: experiment '" + experiment + "' does not match command '" + opt.command + "'");
    }
    std::size_t seed = 0;
    top.get("seed", seed);
    r.seed = seed;
    top.get("out", out);
    const auto section = [&](const char* key, auto& dest) {
      if (auto s = top.child(key)) {
        read_section(*s, dest);
        s->finish();
      }
    };
    section("verify", r.verify);
    section("fit1d", r.fit1d);
    section("init-bench", r.init_bench);
    section("fit2d", r.fit2d);
    section("fig3", r.fig3);
    section("spectrum", r.spectrum);
    section("gen", r.gen);
    top.finish();
  }
  if (opt.seed) r.seed = *opt.seed;
  if (opt.suite) {
    const auto& all = verify::suite_names();
    require(std::find(all.begin(), all.end(), *opt.suite) != all.end(), "--suite: unknown suite '" + *opt.suite + "'");
    r.verify.suites = {*opt.suite};
  }
  require(opt.jobs >= 1, "--jobs must be >= 1");
  if (opt.out) {
    r.out = *opt.out;
  } else if (!out.empty()) {
    r.out = out;
  } else {
    const char* root = std::getenv("WINR_OUT");
    r.out = (std::filesystem::path(root && *root ? root : "winr_out") / opt.command).string();
  }
  r.fit1d.seed = r.init_bench.seed = r.fit2d.seed = r.seed;
  r.init_bench.jobs = opt.jobs;
  return r;
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_verify(const Resolved& r, std::ostream& out, std::ostream& err) {
  json suites = json::array(), failures = json::array();
  std::vector<std::string> failed;
  for (const auto& name : r.verify.suites) {
    verify::SuiteResult res;
    if (name == "expansion-equivalence" && r.verify.inject_wrong_beta)
      res = verify::expansion_equivalence(r.verify.seeds, 1e-9, [](PolynomialExpansion& e) {
        if (!e.terms.empty()) e.terms.front().beta += Cplx(1.0, 0.0);
      });
    else
      res = verify::run_suite(name, r.verify.seeds);
    out << "suite " << res.name << ": " << (res.passed ? "PASS" : "FAIL") << " (" << res.cases
        << " cases, worst " << format_double(res.worst) << ", tolerance " << format_double(res.tolerance) << ")\n";
    suites.push_back({{"name", res.name},
                      {"passed", res.passed},
                      {"cases", res.cases},
                      {"worst", res.worst},
                      {"tolerance", res.tolerance}});
    for (const auto& f : res.failures) failures.push_back({{"suite", res.name}, {"detail", f}});
    if (!res.passed) failed.push_back(res.name);
  }
  detail::ensure_directory(r.out);
  save_json_report(detail::join(r.out, "report.json"),
                   {{"experiment", "verify"}, {"passed", failed.empty()}, {"suites", suites}, {"failures", failures}},
                   r.echo());
  if (!failed.empty()) {
    err << "verification failed:";
    for (const auto& f : failed) err << " " << f;
    err << "\n";
    return kFailure;
  }
  return kOk;
}

inline int cmd_fit1d(const Resolved& r, std::ostream& out, std::ostream& err) {
  const auto res = run_fit1d(r.fit1d, r.out, r.echo());
  if (res.aborted) {
    err << "fit1d: training aborted at step " << res.failed_step << ": " << res.abort_reason
        << "; partial artifacts in " << r.out << "\n";
    return kFailure;
  }
  out << "fit1d: final MSE " << format_double(res.mse) << ", linear baseline MSE " << format_double(res.linear_mse)
      << ", " << res.wmm_points << " WMM points\n";
  return kOk;
}

inline int cmd_init_bench(const Resolved& r, std::ostream& out, std::ostream&) {
  const auto res = run_init_bench(r.init_bench, r.out, r.echo());
  for (const auto& c : res.payload["cells"])
    out << "K=" << c["K"].get<std::size_t>() << ": median random " << format_double(c["random"]["median"])
        << ", median wmm " << format_double(c["wmm"]["median"]) << ", ratio "
        << format_double(c["median_ratio"]) << "\n";
  out << "init-bench: " << (res.passed ? "ratio bound met for every K" : "ratio bound not met") << "\n";
  return kOk;
}

inline int cmd_fit2d(const Resolved& r, std::ostream& out, std::ostream&) {
  const auto res = run_fit2d(r.fit2d, r.out, r.echo());
  out << "fit2d: PSNR random " << format_double(res.random_psnr) << " dB, canny " << format_double(res.wmm_psnr)
      << " dB\n";
  return kOk;
}

inline int cmd_fig3(const Resolved& r, std::ostream& out, std::ostream& err) {
  const auto res = run_fig3(r.fig3.params, r.out, r.echo(), r.fig3.pool);
  out << "fig3: low-frequency energy " << format_double(res.result.low_frequency_fraction)
      << ", dilated-cone energy " << format_double(res.result.dilated_cone_fraction) << "\n";
  if (!res.passed) {
    err << "fig3: construction does not meet its energy bounds\n";
    return kFailure;
  }
  return kOk;
}

inline int cmd_spectrum(const Resolved& r, std::ostream& out, std::ostream&) {
  const auto& c = r.spectrum;
  json payload{{"experiment", "spectrum"}};
  SpectrumReport rep;
  if (c.model.empty()) {
    const auto sig = gen_signal(c.signal, c.n);
    std::vector<Cplx> v(sig.values.begin(), sig.values.end());
    rep = sampled_spectrum(v, sig.grid);
    payload["source"] = "signal " + c.signal;
  } else {
    json doc;
    std::vector<std::pair<std::string, INRModel>> nets;
    try {
      doc = json::parse(read_text_file(c.model));
      nets = models_from_document(doc);
    } catch (const std::exception& e) {
      throw ConfigError("spectrum.model: " + std::string(e.what()));
    }
    const double scale = doc.value("coord_scale", 1.0);
    if (nets.empty()) throw FormatError("model JSON: no networks");
    std::vector<const INRModel*> chosen;
    for (const auto& [name, m] : nets)
      if (c.network == "sum" || c.network == name) chosen.push_back(&m);
    if (chosen.empty()) throw ConfigError("spectrum.network: no network named '" + c.network + "' in " + c.model);
    const int dim = chosen.front()->dim();
    const std::size_t side = dim == 1 ? c.n : std::min<std::size_t>(c.n, 512);
    const Grid1D axis{0.0, 1.0, side};
    const auto eval = [&](std::span<const double> p) {
      std::array<double, 2> q{};
      for (std::size_t i = 0; i < p.size(); ++i) q[i] = scale * p[i];
      Cplx s = 0.0;
      for (const auto* m : chosen) s += forward(*m, std::span<const double>(q.data(), p.size()));
      return s;
    };
    if (dim == 1) {
      std::vector<Cplx> v(side);
      for (std::size_t i = 0; i < side; ++i) {
        const double x = axis.point(i);
        v[i] = eval(std::span<const double>(&x, 1));
      }
      rep = sampled_spectrum(v, axis);
    } else {
      const Grid2D grid{axis, axis};
      const auto pts = grid.points();
      std::vector<Cplx> v(grid.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = eval(std::span<const double>(pts).subspan(2 * i, 2));
      rep = sampled_spectrum(v, grid);
    }
    payload["source"] = "model " + c.model + " (" + c.network + ")";
  }
  detail::ensure_directory(r.out);
  CsvTable t;
  if (rep.dim == 1) {
    t = {{"freq", "magnitude"}, std::vector<std::vector<double>>(2)};
  } else {
    t = {{"fx", "fy", "magnitude"}, std::vector<std::vector<double>>(3)};
  }
  double negative = 0.0;
  for (std::size_t i = 0; i < rep.size(); ++i) {
    t.columns[0].push_back(rep.fx(i));
    if (rep.dim == 2) t.columns[1].push_back(rep.fy(i));
    t.columns.back().push_back(rep.magnitude(i));
    if (rep.fx(i) < 0) negative += rep.energy(i);
  }
  save_csv(detail::join(r.out, "spectrum.csv"), t);
  payload["total_energy"] = rep.total_energy;
  if (rep.total_energy > 0) payload["negative_frequency_fraction"] = negative / rep.total_energy;
  save_json_report(detail::join(r.out, "report.json"), payload, r.echo());
  out << "spectrum: " << rep.size() << " bins written to " << detail::join(r.out, "spectrum.csv") << "\n";
  return kOk;
}

inline int cmd_gen(const Resolved& r, std::ostream& out, std::ostream&) {
  detail::ensure_directory(r.out);
  std::string file;
  if (r.gen.image) {
    file = detail::join(r.out, "image.pgm");
    save_pgm(file, gen_image(*r.gen.image));
  } else {
    file = detail::join(r.out, "signal.csv");
    save_csv_signal(file, gen_signal(r.gen.signal, r.gen.n));
  }
  save_json_report(detail::join(r.out, "report.json"), {{"experiment", "gen"}}, r.echo());
  out << "gen: wrote " << file << "\n";
  return kOk;
}

/// Runs one command; never throws.
inline int run(const Options& opt, std::ostream& out, std::ostream& err) {
  Resolved r;
  try {
    json config;
    if (opt.config_path) {
      std::string text;
      try {
        text = read_text_file(*opt.config_path);
      } catch (const IoError& e) {
        throw ConfigError(e.what());
      }
      try {
        config = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ConfigError("config " + *opt.config_path + ": " + e.what());
      }
    }
    r = resolve(opt, config);
    if (r.command == "fit2d" && !r.fit2d.input.empty()) {
      try {
        load_pgm(r.fit2d.input);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("fit2d.input: ") + e.what());
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  try {
    if (r.command == "verify") return cmd_verify(r, out, err);
    if (r.command == "fit1d") return cmd_fit1d(r, out, err);
    if (r.command == "init-bench") return cmd_init_bench(r, out, err);
    if (r.command == "fit2d") return cmd_fit2d(r, out, err);
    if (r.command == "fig3") return cmd_fig3(r, out, err);
    if (r.command == "spectrum") return cmd_spectrum(r, out, err);
    return cmd_gen(r, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << r.command << ": " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace winr::cli
