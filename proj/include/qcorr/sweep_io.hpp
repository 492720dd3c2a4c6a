#pragma once

// Sweep-table serialization: CSV writing with a fixed numeric format,
// FNV-1a digests for reproducibility manifests, and the grid utilities
// (quadratic maximum location, linear crossing location) shared by the
// spin-chain and Bose-Hubbard sweep drivers.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qcorr::io {

inline constexpr const char* version = "1.0.0";

// 12 significant digits, period decimal separator, locale-independent
inline std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

// binary mode: LF line endings on every platform
inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

// CSV assembly: header plus pre-formatted rows
class CsvBuilder {
 public:
  explicit CsvBuilder(std::string header) { buf_ = std::move(header) + "\n"; }
  void add_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) buf_ += ',';
      buf_ += fields[i];
    }
    buf_ += '\n';
  }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

// Run manifest: everything needed to reproduce the outputs bit-identically
struct RunManifest {
  std::string command;
  nlohmann::json params;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> output_digests;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["params"] = params;
    j["seed"] = seed;
    j["version"] = version;
    j["outputs"] = output_digests;
    return j;
  }
};

// writes `name` under dir and records its digest in the manifest
inline void emit_output(const std::string& dir, const std::string& name,
                        const std::string& content, RunManifest& manifest) {
  write_text_file(dir + "/" + name, content);
  manifest.output_digests[name] = fnv1a64_hex(content);
}

inline void emit_manifest(const std::string& dir, const RunManifest& manifest) {
  write_text_file(dir + "/manifest.json", manifest.to_json().dump(2) + "\n");
}

// ---- grid utilities ----

// Location of the maximum of y(x), refined by a quadratic through the
// bracketing grid triple.  Returns the boundary point if the maximum sits
// on the grid edge.
struct GridExtremum {
  double x = 0;
  double y = 0;
};

inline GridExtremum locate_max(const std::vector<double>& x,
                               const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("locate_max: need at least 3 grid points");
  std::size_t im = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[im]) im = i;
  if (im == 0 || im + 1 == y.size()) return {x[im], y[im]};
  const double x0 = x[im - 1], x1 = x[im], x2 = x[im + 1];
  const double y0 = y[im - 1], y1 = y[im], y2 = y[im + 1];
  // vertex of the interpolating parabola (uniform or non-uniform grid)
  const double d1 = (y1 - y0) / (x1 - x0);
  const double d2 = (y2 - y1) / (x2 - x1);
  const double curv = (d2 - d1) / (x2 - x0);
  if (curv >= 0) return {x1, y1};
  const double xv = 0.5 * (x0 + x1 - d1 / curv);
  const double yv = y0 + d1 * (xv - x0) + curv * (xv - x0) * (xv - x1);
  return {xv, yv};
}

// First x where f = a - b changes sign from negative to positive, linearly
// interpolated; NaN when no crossing exists on the grid.
inline double locate_crossing(const std::vector<double>& x,
                              const std::vector<double>& a,
                              const std::vector<double>& b) {
  if (x.size() != a.size() || x.size() != b.size() || x.size() < 2)
    throw std::invalid_argument("locate_crossing: inconsistent grids");
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double f0 = a[i - 1] - b[i - 1];
    const double f1 = a[i] - b[i];
    if (f0 < 0 && f1 >= 0) {
      if (f1 == f0) return x[i];
      return x[i - 1] + (x[i] - x[i - 1]) * (-f0) / (f1 - f0);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// First x where y rises above the threshold and stays above for the next
// point as well, linearly interpolated back to the threshold; NaN if never.
inline double locate_onset(const std::vector<double>& x,
                           const std::vector<double>& y, double threshold) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("locate_onset: inconsistent grids");
  for (std::size_t i = 1; i < x.size(); ++i) {
    const bool next_ok = (i + 1 >= x.size()) || (y[i + 1] > threshold);
    if (y[i - 1] <= threshold && y[i] > threshold && next_ok) {
      const double t = (threshold - y[i - 1]) / (y[i] - y[i - 1]);
      return x[i - 1] + t * (x[i] - x[i - 1]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline std::vector<double> make_grid(double lo, double hi, int steps) {
  if (steps < 1 || hi < lo) throw std::invalid_argument("make_grid: bad range");
  std::vector<double> g(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i)
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / steps;
  return g;
}

}  // namespace qcorr::io
