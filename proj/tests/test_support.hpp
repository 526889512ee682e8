#pragma once

// Shared oracles and builders for the test suite. Everything here is written
// against the definitions directly (plain loops), not against the library's
// internal code paths, so tests stay independent of the implementation.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "avgraph/graph.hpp"
#include "avgraph/util/rng.hpp"

namespace testsup {

inline constexpr double kPi = 3.14159265358979323846;

// O(n^2) reference DFT.
inline std::vector<std::complex<double>> dft(
    const std::vector<std::complex<double>>& x, bool inverse = false) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> s{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      const double ang =
          sign * 2.0 * kPi * static_cast<double>(k) * static_cast<double>(t) /
          static_cast<double>(n);
      s += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = inverse ? s / static_cast<double>(n) : s;
  }
  return out;
}

// O(n^4) reference 2D DFT of a real matrix.
inline Eigen::MatrixXcd dft2(const Eigen::MatrixXd& m) {
  const Eigen::Index R = m.rows(), C = m.cols();
  Eigen::MatrixXcd out(R, C);
  for (Eigen::Index u = 0; u < R; ++u) {
    for (Eigen::Index v = 0; v < C; ++v) {
      std::complex<double> s{0.0, 0.0};
      for (Eigen::Index i = 0; i < R; ++i) {
        for (Eigen::Index j = 0; j < C; ++j) {
          const double ang = -2.0 * kPi *
                             (static_cast<double>(u * i) / static_cast<double>(R) +
                              static_cast<double>(v * j) / static_cast<double>(C));
          s += m(i, j) * std::complex<double>(std::cos(ang), std::sin(ang));
        }
      }
      out(u, v) = s;
    }
  }
  return out;
}

inline double pearson_ref(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0 || vb <= 0) return 0.0;
  return num / std::sqrt(va * vb);
}

// Random multimodal event records on a 40 ms grid; never empty, valid widths.
inline std::vector<avgraph::graph::FeatureRecord> random_records(avgraph::Rng& rng,
                                                                 int n) {
  using avgraph::graph::FeatureRecord;
  using avgraph::graph::GraphConfig;
  using avgraph::graph::Modality;
  const Modality kinds[4] = {Modality::Image, Modality::Audio, Modality::Action,
                             Modality::Output};
  auto dims = GraphConfig::default_feature_dims();
  std::vector<FeatureRecord> recs;
  recs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    FeatureRecord r;
    r.modality = kinds[rng.below(4)];
    r.timestamp_ms = static_cast<std::int64_t>(40 * rng.below(16));
    r.features.assign(static_cast<std::size_t>(dims[r.modality]), 0.0);
    for (auto& f : r.features) f = rng.uniform(-1.0, 1.0);
    recs.push_back(std::move(r));
  }
  return recs;
}

inline avgraph::graph::HeteroTemporalGraph random_event_graph(avgraph::Rng& rng,
                                                              int n_nodes) {
  avgraph::graph::GraphConfig cfg;
  return avgraph::graph::build_graph(random_records(rng, n_nodes), std::nullopt, cfg);
}

// Scratch directory under the system temp root, unique per tag.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("avgraph_test_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace testsup
