#pragma once

// Test signals (Donoho-Johnstone), cartoon images, PGM/CSV I/O and JSON reports.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "winr/io.hpp"
#include "winr/numerics.hpp"

namespace winr {

struct Signal1D {
  Grid1D grid;
  std::vector<double> values;
};

inline constexpr std::array<const char*, 4> kSignalNames{"blocks", "bumps", "heavisine", "doppler"};

namespace detail {

inline constexpr std::array<double, 11> kDjPositions{0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81};
inline constexpr std::array<double, 11> kBlocksHeights{4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2};
inline constexpr std::array<double, 11> kBumpsHeights{4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2};
inline constexpr std::array<double, 11> kBumpsWidths{0.005, 0.005, 0.006, 0.01, 0.01, 0.03,
                                                     0.01,  0.01,  0.005, 0.008, 0.005};

inline double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace detail

/// Samples t_i = i/n on [0, 1), scaled so that max|value| = 1. Blocks uses
/// right-continuous steps, so each breakpoint is a single jump between samples.
inline Signal1D gen_signal(std::string_view name, std::size_t n) {
  if (!is_pow2(n)) throw SizeError("gen_signal: n must be a power of two, got " + std::to_string(n));
  Signal1D s{Grid1D{0.0, 1.0, n}, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = s.grid.point(i);
    double v = 0.0;
    if (name == "blocks") {
      for (std::size_t j = 0; j < 11; ++j) v += t >= detail::kDjPositions[j] ? detail::kBlocksHeights[j] : 0.0;
    } else if (name == "bumps") {
      for (std::size_t j = 0; j < 11; ++j)
        v += detail::kBumpsHeights[j] *
             std::pow(1.0 + std::abs((t - detail::kDjPositions[j]) / detail::kBumpsWidths[j]), -4.0);
    } else if (name == "heavisine") {
      v = 4.0 * std::sin(4.0 * std::numbers::pi * t) - detail::sgn(t - 0.3) - detail::sgn(0.72 - t);
    } else if (name == "doppler") {
      constexpr double eps = 0.05;
      v = std::sqrt(t * (1.0 - t)) * std::sin(2.0 * std::numbers::pi * (1.0 + eps) / (t + eps));
    } else {
      throw std::invalid_argument("gen_signal: unknown signal '" + std::string(name) + "'");
    }
    s.values[i] = v;
  }
  double peak = 0.0;
  for (double v : s.values) peak = std::max(peak, std::abs(v));
  for (auto& v : s.values) v /= peak;
  return s;
}

// ---------------------------------------------------------------------------
// Images

enum class ImageKind { Disk, Annulus, Step };

/// Geometry in pixel units; pixel (x, y) is tested at its index coordinates.
/// A negative center selects the image midpoint size/2.
struct ImageSpec {
  ImageKind kind = ImageKind::Disk;
  std::size_t size = 128;
  double radius = 32.0;        // disk radius, annulus outer radius
  double inner_radius = 16.0;  // annulus
  double cx = -1.0, cy = -1.0;
  double step_position = -1.0; // step: column of the first bright pixel
  double blur_sigma = 0.0;     // pixels; 0 keeps the image binary
};

inline ImageKind image_kind_from_string(const std::string& s) {
  if (s == "disk") return ImageKind::Disk;
  if (s == "annulus") return ImageKind::Annulus;
  if (s == "step") return ImageKind::Step;
  throw std::invalid_argument("unknown image kind '" + s + "'");
}

inline Image gen_image(const ImageSpec& spec) {
  const auto n = spec.size;
  if (n < 32) throw SizeError("gen_image: size must be >= 32");
  const double N = static_cast<double>(n);
  const double cx = spec.cx < 0 ? N / 2 : spec.cx, cy = spec.cy < 0 ? N / 2 : spec.cy;
  Image img(n, n);
  if (spec.kind == ImageKind::Step) {
    const double pos = spec.step_position < 0 ? N / 2 : spec.step_position;
    if (!(pos > 0 && pos < N)) throw std::invalid_argument("gen_image: step position outside the frame");
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) img(x, y) = static_cast<double>(x) >= pos ? 1.0 : 0.0;
  } else {
    const double r = spec.radius;
    const double ri = spec.kind == ImageKind::Annulus ? spec.inner_radius : 0.0;
    if (!(r > 0) || cx - r < 0 || cy - r < 0 || cx + r > N || cy + r > N)
      throw std::invalid_argument("gen_image: shape extends outside the frame");
    if (spec.kind == ImageKind::Annulus && !(ri > 0 && ri < r))
      throw std::invalid_argument("gen_image: annulus needs 0 < inner_radius < radius");
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        const double d = std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy);
        img(x, y) = d <= r && d >= ri ? 1.0 : 0.0;
      }
  }
  if (spec.blur_sigma > 0) img = gaussian_blur(img, spec.blur_sigma);
  return img;
}

/// Sample grid of an image on [0, 1)^2.
inline Grid2D image_grid(const Image& img) { return {{0.0, 1.0, img.width}, {0.0, 1.0, img.height}}; }

// ---------------------------------------------------------------------------
// PGM

class PgmError : public std::runtime_error {
 public:
  PgmError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses binary P5 data. Samples are divided by maxval and clamped to [0, 1].
inline Image parse_pgm(std::string_view data) {
  std::size_t pos = 0;
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; };
  const auto skip = [&] {
    while (pos < data.size()) {
      if (is_space(data[pos])) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  const auto number = [&](const char* what) {
    skip();
    const std::size_t start = pos;
    unsigned long v = 0;
    while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
      v = v * 10 + static_cast<unsigned long>(data[pos] - '0');
      if (v > 1u << 24) throw PgmError(std::string("PGM: ") + what + " too large", start);
      ++pos;
    }
    if (pos == start) throw PgmError(std::string("PGM: expected ") + what, start);
    return static_cast<std::size_t>(v);
  };

  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') throw PgmError("PGM: missing P5 magic", 0);
  pos = 2;
  const std::size_t w = number("width"), h = number("height"), maxval = number("maxval");
  if (w == 0 || h == 0) throw PgmError("PGM: zero image dimension", pos);
  if (maxval == 0 || maxval > 65535) throw PgmError("PGM: maxval must be in [1, 65535]", pos);
  if (pos >= data.size() || !is_space(data[pos])) throw PgmError("PGM: expected whitespace after maxval", pos);
  ++pos;

  const std::size_t bytes = maxval > 255 ? 2 : 1;
  const std::size_t expected = w * h * bytes, actual = data.size() - pos;
  if (actual < expected)
    throw PgmError("PGM: truncated payload, expected " + std::to_string(expected) + " bytes but found " +
                       std::to_string(actual),
                   data.size());
  Image img(w, h);
  for (std::size_t i = 0; i < w * h; ++i) {
    unsigned v = static_cast<unsigned char>(data[pos + i * bytes]);
    if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(data[pos + i * bytes + 1]);
    img.pixels[i] = std::clamp(static_cast<double>(v) / static_cast<double>(maxval), 0.0, 1.0);
  }
  return img;
}

inline std::string encode_pgm(const Image& img, int bits = 8) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("encode_pgm: bits must be 8 or 16");
  if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height)
    throw SizeError("encode_pgm: malformed image");
  const unsigned maxval = bits == 8 ? 255u : 65535u;
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                    std::to_string(maxval) + "\n";
  for (double p : img.pixels) {
    const auto v = static_cast<unsigned>(std::lround(std::clamp(p, 0.0, 1.0) * maxval));
    if (bits == 16) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

inline Image load_pgm(const std::string& path) { return parse_pgm(read_text_file(path)); }
inline void save_pgm(const std::string& path, const Image& img, int bits = 8) {
  write_text_file(path, encode_pgm(img, bits));
}

// ---------------------------------------------------------------------------
// CSV

/// Header row plus equal-length numeric columns; values use 17 significant digits.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

inline std::string encode_csv(const CsvTable& t) {
  if (t.header.size() != t.columns.size()) throw SizeError("encode_csv: header/column count mismatch");
  for (const auto& c : t.columns)
    if (c.size() != t.rows()) throw SizeError("encode_csv: ragged columns");
  std::string out;
  for (std::size_t j = 0; j < t.header.size(); ++j) out += (j ? "," : "") + t.header[j];
  out += "\n";
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      if (j) out += ",";
      out += format_double(t.columns[j][i]);
    }
    out += "\n";
  }
  return out;
}

inline CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t pos = 0, line_no = 0;
  const auto next_line = [&] {
    const auto end = text.find('\n', pos);
    const auto line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    return line;
  };
  const auto split = [](std::string_view line) {
    std::vector<std::string_view> f;
    std::size_t s = 0;
    while (true) {
      const auto c = line.find(',', s);
      f.push_back(line.substr(s, c == std::string_view::npos ? line.size() - s : c - s));
      if (c == std::string_view::npos) break;
      s = c + 1;
    }
    return f;
  };
  if (text.empty()) throw std::invalid_argument("CSV: missing header");
  for (auto f : split(next_line())) t.header.emplace_back(f);
  t.columns.resize(t.header.size());
  while (pos < text.size()) {
    const auto fields = split(next_line());
    if (fields.size() != t.header.size())
      throw std::invalid_argument("CSV: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(t.header.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      const auto r = std::from_chars(fields[j].data(), fields[j].data() + fields[j].size(), v);
      if (r.ec != std::errc() || r.ptr != fields[j].data() + fields[j].size())
        throw std::invalid_argument("CSV: line " + std::to_string(line_no) + ": bad number '" +
                                    std::string(fields[j]) + "'");
      t.columns[j].push_back(v);
    }
  }
  return t;
}

inline void save_csv(const std::string& path, const CsvTable& t) { write_text_file(path, encode_csv(t)); }
inline CsvTable load_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

/// Columns (x, value).
inline void save_csv_signal(const std::string& path, const Signal1D& s) {
  if (s.values.size() != (s.values.empty() ? 0 : s.grid.n)) throw SizeError("save_csv_signal: size mismatch");
  CsvTable t{{"x", "value"}, {{}, s.values}};
  for (std::size_t i = 0; i < s.values.size(); ++i) t.columns[0].push_back(s.grid.point(i));
  save_csv(path, t);
}

// ---------------------------------------------------------------------------
// Reports

inline constexpr const char* kReportSchema = "winr-report-v1";

inline std::string config_hash(const nlohmann::json& config) { return fnv1a_hex(config.dump()); }

/// {"schema", "config", "config_hash", ...payload}.
inline nlohmann::json make_report(const nlohmann::json& payload, const nlohmann::json& config) {
  nlohmann::json r = payload.is_object() ? payload : nlohmann::json{{"payload", payload}};
  r["schema"] = kReportSchema;
  r["config"] = config;
  r["config_hash"] = config_hash(config);
  return r;
}

inline void save_json_report(const std::string& path, const nlohmann::json& payload, const nlohmann::json& config) {
  write_text_file(path, dump_json(make_report(payload, config)));
}

}  // namespace winr
