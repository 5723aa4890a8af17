#pragma once

// End-to-end experiments on the split (scaling + Gabor) architecture: 1D
// fits, the random-vs-WMM initialization benchmark, 2D image fits and the
// two-cone construction. Every runner writes its artifacts into a directory
// and returns the JSON payload of its report.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "winr/init.hpp"
#include "winr/io.hpp"
#include "winr/model_io.hpp"
#include "winr/signals.hpp"
#include "winr/spectral.hpp"
#include "winr/training.hpp"

namespace winr {

// ---------------------------------------------------------------------------
// Split architecture

/// Shape of the split model. The scaling network is a fixed lattice of
/// gaussian atoms (per axis in 2D) with no hidden layers; the Gabor network
/// has K atoms per initialization point.
struct SplitArch {
  double coord_scale = 32.0;
  std::size_t lattice = 33;
  std::vector<std::size_t> hidden{32, 32};
};

inline INRModel scaling_network(int dim, const SplitArch& arch, std::uint64_t seed) {
  const std::size_t ns = arch.lattice;
  if (ns < 2) throw std::invalid_argument("scaling_network: lattice must have at least 2 points per axis");
  const std::size_t atoms = dim == 1 ? ns : ns * ns;
  auto m = make_model(scaling_template(dim), WeightConstraint::ScaleOnly, atoms, {}, ActivationSpec::identity());
  const double step = 1.0 / static_cast<double>(ns - 1);
  const double scale = static_cast<double>(ns - 1) / arch.coord_scale;
  for (std::size_t t = 0; t < atoms; ++t) {
    const std::array<double, 2> c{static_cast<double>(t % ns) * step, static_cast<double>(t / ns) * step};
    detail::place_atom(m.first, t, std::span<const double>(c.data(), static_cast<std::size_t>(dim)), scale,
                       arch.coord_scale);
  }
  initialize_dense_layers(m, seed);
  return m;
}

/// Gabor-network architecture. 2D atoms use free weights initialized to s I.
inline InitArch gabor_arch(int dim, std::size_t first_width, const SplitArch& arch) {
  InitArch a;
  a.tmpl = gabor_template(dim);
  a.constraint = dim == 1 ? WeightConstraint::ScaleOnly : WeightConstraint::Free;
  a.first_width = first_width;
  a.hidden_widths = arch.hidden;
  a.coord_scale = arch.coord_scale;
  a.domain.dim = dim;
  return a;
}

enum class InitScheme { Random, Wmm };

inline std::string to_string(InitScheme s) { return s == InitScheme::Random ? "random" : "wmm"; }

inline InitScheme init_scheme_from_string(const std::string& s) {
  if (s == "random") return InitScheme::Random;
  if (s == "wmm") return InitScheme::Wmm;
  throw std::invalid_argument("unknown init scheme '" + s + "' (expected random or wmm)");
}

/// Split model with F1 = K * |points| Gabor atoms placed by `scheme`.
inline SplitModel make_split_model(int dim, const SplitArch& arch, InitScheme scheme, const WMMPointSet& points,
                                   std::size_t K, std::uint64_t seed, std::string* warning = nullptr) {
  const std::size_t f1 = K * std::max<std::size_t>(points.size(), 1);
  const auto ga = gabor_arch(dim, f1, arch);
  SplitModel s;
  s.scaling = scaling_network(dim, arch, seed);
  auto first = scheme == InitScheme::Wmm ? wmm_initialize(ga, points, K, seed, warning) : random_initialize(ga, K, seed);
  s.gabor = build_model(ga, std::move(first), seed);
  return s;
}

/// Default modulus-maxima points of a 1D signal.
inline WMMPointSet signal_wmm_points(const Signal1D& sig) {
  const auto cwt = cwt_1d(sig.values, sig.grid, dyadic_scales());
  return wmm_points_1d(cwt);
}

namespace detail {

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline CsvTable history_table(const std::vector<double>& loss) {
  CsvTable t{{"step", "loss"}, {{}, loss}};
  for (std::size_t i = 0; i < loss.size(); ++i) t.columns[0].push_back(static_cast<double>(i));
  return t;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Sample standard deviation.
inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Runs task(i) for i in [0, count) on up to `jobs` threads.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& task) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < jobs; ++j)
    pool.emplace_back([&, j] {
      try {
        for (std::size_t i = next++; i < count; i = next++) task(i);
      } catch (...) {
        errors[j] = std::current_exception();
        next = count;
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::vector<Cplx> split_outputs(const INRModel& m, const Dataset& data) {
  std::vector<Cplx> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = forward(m, data.point(i));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// 1D fit

struct Fit1DConfig {
  std::string signal = "bumps";
  std::size_t n = 2048;
  InitScheme init = InitScheme::Wmm;
  std::size_t K = 3;
  std::size_t steps = 1000;
  double lr = 5e-3;
  std::uint64_t seed = 0;
  SplitArch arch;
};

struct Fit1DResult {
  bool aborted = false;
  std::size_t failed_step = 0;
  std::string abort_reason;
  double mse = 0.0;
  double psnr = 0.0;
  double linear_mse = 0.0;
  std::size_t wmm_points = 0;
  nlohmann::json payload;
};

inline constexpr std::array<const char*, 6> kFit1DFiles{"model.json",     "history.csv", "spectrum.csv",
                                                        "decomposition.csv", "wmm.csv",  "report.json"};

/// Trains the split model on a generated signal and writes the six files of
/// kFit1DFiles into `out_dir`. A non-finite loss stops training; the files
/// are still written, describing the model at the failing step, and the
/// report carries status "aborted".
inline Fit1DResult run_fit1d(const Fit1DConfig& cfg, const std::string& out_dir, const nlohmann::json& config_echo) {
  const auto sig = gen_signal(cfg.signal, cfg.n);
  const auto points = signal_wmm_points(sig);
  std::string warning;
  auto split = make_split_model(1, cfg.arch, cfg.init, points, cfg.K, cfg.seed, &warning);
  const auto data = make_dataset(sig.grid, sig.values, cfg.arch.coord_scale);

  TrainConfig tc;
  tc.steps = cfg.steps;
  tc.lr = cfg.lr;
  tc.seed = cfg.seed;
  std::vector<double> history;
  Fit1DResult res;
  res.wmm_points = points.size();
  try {
    res.mse = train(split, data, tc, [&](std::size_t, double l) { history.push_back(l); }).final_mse;
  } catch (const TrainingError& e) {
    // train() leaves the networks at the parameters of the failing step.
    res.aborted = true;
    res.failed_step = e.step();
    res.abort_reason = e.what();
    res.mse = std::numeric_limits<double>::quiet_NaN();
  }
  res.psnr = psnr_from_mse(res.mse);

  const auto zs = detail::split_outputs(split.scaling, data), zg = detail::split_outputs(split.gabor, data);
  const FirstLayer* layers[] = {&split.scaling.first, &split.gabor.first};
  LinearFit lin;
  bool have_linear = !res.aborted;
  if (have_linear) {
    try {
      lin = fit_linear(layers, data);
      res.linear_mse = lin.mse;
    } catch (const std::exception& e) {
      have_linear = false;
      warning += (warning.empty() ? "" : "; ") + std::string("linear baseline: ") + e.what();
    }
  }

  detail::ensure_directory(out_dir);
  auto doc = split_to_json(split);
  doc["coord_scale"] = cfg.arch.coord_scale;
  write_text_file(detail::join(out_dir, "model.json"), dump_json(doc));
  save_csv(detail::join(out_dir, "history.csv"), detail::history_table(history));

  std::vector<Cplx> combined(zs.size()), target(sig.values.begin(), sig.values.end());
  for (std::size_t i = 0; i < zs.size(); ++i) combined[i] = zs[i] + zg[i];
  {
    const auto st = sampled_spectrum(target, sig.grid), sc = sampled_spectrum(combined, sig.grid),
               ss = sampled_spectrum(zs, sig.grid), sg = sampled_spectrum(zg, sig.grid);
    CsvTable t{{"freq", "target", "combined", "scaling", "gabor"}, std::vector<std::vector<double>>(5)};
    for (std::size_t i = 0; i < st.size(); ++i) {
      t.columns[0].push_back(st.fx(i));
      t.columns[1].push_back(st.magnitude(i));
      t.columns[2].push_back(sc.magnitude(i));
      t.columns[3].push_back(ss.magnitude(i));
      t.columns[4].push_back(sg.magnitude(i));
    }
    save_csv(detail::join(out_dir, "spectrum.csv"), t);
  }
  {
    CsvTable t{{"x", "target", "combined", "scaling_re", "scaling_im", "gabor_re", "gabor_im", "linear"},
               std::vector<std::vector<double>>(8)};
    for (std::size_t i = 0; i < zs.size(); ++i) {
      t.columns[0].push_back(sig.grid.point(i));
      t.columns[1].push_back(sig.values[i]);
      t.columns[2].push_back(combined[i].real());
      t.columns[3].push_back(zs[i].real());
      t.columns[4].push_back(zs[i].imag());
      t.columns[5].push_back(zg[i].real());
      t.columns[6].push_back(zg[i].imag());
      t.columns[7].push_back(have_linear ? lin.fitted[i] : std::numeric_limits<double>::quiet_NaN());
    }
    save_csv(detail::join(out_dir, "decomposition.csv"), t);
  }
  {
    CsvTable t{{"u", "s", "strength"}, std::vector<std::vector<double>>(3)};
    for (const auto& p : points.points) {
      t.columns[0].push_back(p.location[0]);
      t.columns[1].push_back(p.scale);
      t.columns[2].push_back(p.strength);
    }
    save_csv(detail::join(out_dir, "wmm.csv"), t);
  }

  auto& p = res.payload;
  p["experiment"] = "fit1d";
  p["status"] = res.aborted ? "aborted" : "ok";
  if (res.aborted) {
    p["failed_step"] = res.failed_step;
    p["abort_reason"] = res.abort_reason;
  }
  p["signal"] = cfg.signal;
  p["n"] = cfg.n;
  p["init"] = to_string(cfg.init);
  p["K"] = cfg.K;
  p["wmm_points"] = points.size();
  p["gabor_atoms"] = split.gabor.first.atoms();
  p["scaling_atoms"] = split.scaling.first.atoms();
  p["steps_completed"] = history.size();
  p["final_mse"] = res.mse;
  p["final_psnr"] = res.psnr;
  if (have_linear) {
    p["linear_mse"] = lin.mse;
    p["beats_linear"] = res.mse < lin.mse;
  }
  if (!warning.empty()) p["warning"] = warning;
  p["files"] = kFit1DFiles;
  save_json_report(detail::join(out_dir, "report.json"), p, config_echo);
  return res;
}

// ---------------------------------------------------------------------------
// Initialization benchmark

struct InitBenchConfig {
  std::string signal = "bumps";
  std::size_t n = 2048;
  std::vector<std::size_t> Ks{1, 3, 5, 7};
  std::size_t trials = 10;
  std::size_t steps = 1000;
  double lr = 5e-3;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  double ratio_bound = 1.0 / 3.0;
  SplitArch arch;
};

struct InitBenchRow {
  std::size_t K = 0;
  InitScheme scheme = InitScheme::Random;
  std::size_t trial = 0;
  double mse = 0.0;
};

struct InitBenchResult {
  std::vector<InitBenchRow> rows;
  bool passed = false;
  nlohmann::json payload;
};

/// For each K and scheme, `trials` seeded runs; trial i uses seed + i for
/// both schemes so the dense layers match. Writes init_bench.csv and
/// report.json.
inline InitBenchResult run_init_bench(const InitBenchConfig& cfg, const std::string& out_dir,
                                      const nlohmann::json& config_echo) {
  if (cfg.Ks.empty() || cfg.trials == 0) throw std::invalid_argument("init-bench: need at least one K and one trial");
  const auto sig = gen_signal(cfg.signal, cfg.n);
  const auto points = signal_wmm_points(sig);
  const auto data = make_dataset(sig.grid, sig.values, cfg.arch.coord_scale);
  std::string warning;
  if (points.empty()) warning = "no WMM points detected; the wmm scheme falls back to random initialization";

  InitBenchResult res;
  for (auto K : cfg.Ks)
    for (auto scheme : {InitScheme::Random, InitScheme::Wmm})
      for (std::size_t t = 0; t < cfg.trials; ++t) res.rows.push_back({K, scheme, t, 0.0});
  detail::parallel_for(res.rows.size(), cfg.jobs, [&](std::size_t i) {
    auto& row = res.rows[i];
    const std::uint64_t seed = cfg.seed + row.trial;
    auto split = make_split_model(1, cfg.arch, row.scheme, points, row.K, seed);
    TrainConfig tc;
    tc.steps = cfg.steps;
    tc.lr = cfg.lr;
    tc.seed = seed;
    row.mse = train(split, data, tc).final_mse;
  });

  detail::ensure_directory(out_dir);
  CsvTable t{{"K", "scheme", "trial", "mse"}, std::vector<std::vector<double>>(4)};
  for (const auto& r : res.rows) {
    t.columns[0].push_back(static_cast<double>(r.K));
    t.columns[1].push_back(r.scheme == InitScheme::Random ? 0.0 : 1.0);
    t.columns[2].push_back(static_cast<double>(r.trial));
    t.columns[3].push_back(r.mse);
  }
  save_csv(detail::join(out_dir, "init_bench.csv"), t);

  auto& p = res.payload;
  p["experiment"] = "init-bench";
  p["signal"] = cfg.signal;
  p["n"] = cfg.n;
  p["wmm_points"] = points.size();
  p["scheme_codes"] = {{"0", "random"}, {"1", "wmm"}};
  p["ratio_bound"] = cfg.ratio_bound;
  res.passed = true;
  nlohmann::json cells = nlohmann::json::array();
  for (auto K : cfg.Ks) {
    nlohmann::json cell{{"K", K}, {"F1", K * std::max<std::size_t>(points.size(), 1)}};
    double medians[2] = {0.0, 0.0};
    for (auto scheme : {InitScheme::Random, InitScheme::Wmm}) {
      std::vector<double> v;
      for (const auto& r : res.rows)
        if (r.K == K && r.scheme == scheme) v.push_back(r.mse);
      const double med = detail::median(v);
      medians[scheme == InitScheme::Wmm] = med;
      cell[to_string(scheme)] = {{"mean", detail::mean(v)}, {"std", detail::stddev(v)}, {"median", med}};
    }
    const double ratio = medians[1] / medians[0];
    cell["median_ratio"] = ratio;
    cell["passed"] = ratio <= cfg.ratio_bound;
    res.passed = res.passed && ratio <= cfg.ratio_bound;
    cells.push_back(std::move(cell));
  }
  p["cells"] = std::move(cells);
  p["passed"] = res.passed;
  if (!warning.empty()) p["warning"] = warning;
  save_json_report(detail::join(out_dir, "report.json"), p, config_echo);
  return res;
}

// ---------------------------------------------------------------------------
// 2D fit

struct Fit2DConfig {
  ImageSpec image;
  std::string input;  // PGM path; overrides `image` when set
  std::size_t K = 1;
  std::size_t edge_points = 64;
  std::size_t steps = 2000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  CannyParams canny;
  SplitArch arch{32.0, 9, {16, 16}};
};

struct Fit2DResult {
  double random_psnr = 0.0;
  double wmm_psnr = 0.0;
  nlohmann::json payload;
};

/// Fits the image with random and Canny-edge initializations. Writes, per
/// scheme, {scheme}_psnr.csv, {scheme}_recon.pgm and {scheme}_error.pgm,
/// plus target.pgm, edges.pgm and report.json.
inline Fit2DResult run_fit2d(const Fit2DConfig& cfg, const std::string& out_dir, const nlohmann::json& config_echo) {
  const Image img = cfg.input.empty() ? gen_image(cfg.image) : load_pgm(cfg.input);
  const Grid2D grid = image_grid(img);
  const auto edges = canny_edges(img, cfg.canny);
  const auto points = edge_points(edges, grid, cfg.edge_points);
  const auto data = make_dataset(grid, img.pixels, cfg.arch.coord_scale);

  detail::ensure_directory(out_dir);
  save_pgm(detail::join(out_dir, "target.pgm"), img);
  Image edge_img(edges.width, edges.height);
  for (std::size_t i = 0; i < edges.mask.size(); ++i) edge_img.pixels[i] = edges.mask[i] ? 1.0 : 0.0;
  save_pgm(detail::join(out_dir, "edges.pgm"), edge_img);

  Fit2DResult res;
  auto& p = res.payload;
  p["experiment"] = "fit2d";
  p["width"] = img.width;
  p["height"] = img.height;
  p["edge_pixels"] = edges.count();
  p["K"] = cfg.K;
  p["gabor_atoms"] = cfg.K * std::max<std::size_t>(points.size(), 1);
  for (auto scheme : {InitScheme::Random, InitScheme::Wmm}) {
    const std::string name = scheme == InitScheme::Random ? "random" : "canny";
    std::string warning;
    auto split = make_split_model(2, cfg.arch, scheme, points, cfg.K, cfg.seed, &warning);
    TrainConfig tc;
    tc.steps = cfg.steps;
    tc.lr = cfg.lr;
    tc.seed = cfg.seed;
    const auto h = train(split, data, tc);
    CsvTable t{{"step", "mse", "psnr"}, std::vector<std::vector<double>>(3)};
    for (std::size_t s = 0; s <= h.loss.size(); ++s) {
      const double mse = s < h.loss.size() ? h.loss[s] : h.final_mse;
      t.columns[0].push_back(static_cast<double>(s));
      t.columns[1].push_back(mse);
      t.columns[2].push_back(psnr_from_mse(mse));
    }
    save_csv(detail::join(out_dir, name + "_psnr.csv"), t);
    Image recon(img.width, img.height), err(img.width, img.height);
    for (std::size_t i = 0; i < data.size(); ++i) {
      recon.pixels[i] = split_forward_real(split, data.point(i));
      err.pixels[i] = std::abs(recon.pixels[i] - img.pixels[i]);
    }
    save_pgm(detail::join(out_dir, name + "_recon.pgm"), recon);
    save_pgm(detail::join(out_dir, name + "_error.pgm"), err);
    (scheme == InitScheme::Random ? res.random_psnr : res.wmm_psnr) = h.final_psnr;
    p[name] = {{"final_mse", h.final_mse}, {"final_psnr", h.final_psnr}};
    if (!warning.empty()) p[name]["warning"] = warning;
  }
  p["psnr_gap_db"] = res.wmm_psnr - res.random_psnr;
  save_json_report(detail::join(out_dir, "report.json"), p, config_echo);
  return res;
}

// ---------------------------------------------------------------------------
// Two-cone construction

struct Fig3Outcome {
  Fig3Result result;
  bool passed = false;
  nlohmann::json payload;
};

/// Writes fig3_spectrum.csv (energies pooled over `pool` x `pool` bins, before
/// and after the nonlinearity) and report.json.
inline Fig3Outcome run_fig3(const Fig3Params& params, const std::string& out_dir, const nlohmann::json& config_echo,
                            std::size_t pool = 4) {
  Fig3Outcome out;
  out.result = fig3_construction(params);
  const auto& r = out.result;
  out.passed = r.low_frequency_fraction <= 1e-3 && r.dilated_cone_fraction >= 0.95;

  detail::ensure_directory(out_dir);
  const std::size_t nx = r.post.freq_x.size(), ny = r.post.freq_y.size();
  if (pool == 0 || nx % pool || ny % pool) throw std::invalid_argument("run_fig3: pool must divide the grid size");
  CsvTable t{{"fx", "fy", "pre_energy", "post_energy"}, std::vector<std::vector<double>>(4)};
  for (std::size_t by = 0; by < ny / pool; ++by)
    for (std::size_t bx = 0; bx < nx / pool; ++bx) {
      double fx = 0.0, fy = 0.0, e0 = 0.0, e1 = 0.0;
      for (std::size_t j = 0; j < pool; ++j)
        for (std::size_t i = 0; i < pool; ++i) {
          const std::size_t k = (by * pool + j) * nx + bx * pool + i;
          fx += r.post.fx(k);
          fy += r.post.fy(k);
          e0 += r.pre.energy(k);
          e1 += r.post.energy(k);
        }
      const double a = static_cast<double>(pool * pool);
      t.columns[0].push_back(fx / a);
      t.columns[1].push_back(fy / a);
      t.columns[2].push_back(e0);
      t.columns[3].push_back(e1);
    }
  save_csv(detail::join(out_dir, "fig3_spectrum.csv"), t);

  auto& p = out.payload;
  p["experiment"] = "fig3";
  p["r_min"] = r.r_min;
  p["low_frequency_fraction"] = r.low_frequency_fraction;
  p["low_frequency_radius"] = 0.9 * r.r_min;
  p["dilated_cone_fraction"] = r.dilated_cone_fraction;
  p["atom_box_fraction"] = r.atom_box_fraction;
  nlohmann::json cones = nlohmann::json::array();
  for (const auto& c : r.dilated_cones) cones.push_back(c.describe());
  p["dilated_cones"] = cones;
  p["passed"] = out.passed;
  save_json_report(detail::join(out_dir, "report.json"), p, config_echo);
  return out;
}

}  // namespace winr
