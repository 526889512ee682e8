#include "avgraph/keyframe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace avgraph::keyframes {

const char* layer_name(Layer l) {
  switch (l) {
    case Layer::Base: return "Base";
    case Layer::Quality: return "Quality";
    case Layer::Tactic: return "Tactic";
    case Layer::Noise: return "Noise";
  }
  return "?";
}

std::vector<int> select_base_layer(int n_frames, double source_fps, double base_fps) {
  if (n_frames <= 0) return {};
  if (!(source_fps > 0.0) || !(base_fps > 0.0))
    throw std::invalid_argument("select_base_layer: fps values must be positive");
  if (base_fps > source_fps)
    throw std::invalid_argument("select_base_layer: base_fps exceeds source fps");

  const double stride = source_fps / base_fps;  // >= 1
  const int count = static_cast<int>(std::ceil(static_cast<double>(n_frames) / stride));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    int idx = static_cast<int>(std::llround(static_cast<double>(k) * stride));
    if (idx >= n_frames) idx = n_frames - 1;
    out.push_back(idx);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::vector<double> normalized_sharpness(const std::vector<frames::FrameQualityRecord>& rs) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& r : rs) {
    lo = std::min(lo, static_cast<double>(r.edge_count));
    hi = std::max(hi, static_cast<double>(r.edge_count));
  }
  std::vector<double> out(rs.size(), 0.0);
  if (hi > lo) {
    for (std::size_t i = 0; i < rs.size(); ++i)
      out[i] = (rs[i].edge_count - lo) / (hi - lo) * 100.0;
  }
  return out;
}

}  // namespace

QualitySelection select_quality_layer(
    const std::vector<frames::FrameQualityRecord>& records, const LayerConfig& cfg) {
  if (records.empty())
    throw std::invalid_argument("select_quality_layer: records empty");
  const auto sharp = normalized_sharpness(records);

  auto pass = [&](int step) {
    const double relax = std::pow(0.9, step);
    const double b_min = cfg.quality_brightness_min * relax;
    const double e_min = cfg.quality_edge_min * relax;
    const double blur_lim = cfg.invert_blur_predicate
                                ? cfg.quality_blur_max * relax
                                : cfg.quality_blur_max * std::pow(1.1, step);
    std::vector<int> sel;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      bool blur_ok = cfg.invert_blur_predicate ? (r.blur_laplacian_var > blur_lim)
                                               : (r.blur_laplacian_var < blur_lim);
      if (r.brightness_mean > b_min && sharp[i] > e_min && blur_ok)
        sel.push_back(static_cast<int>(i));
    }
    return sel;
  };

  QualitySelection qs;
  qs.indices = pass(0);
  while (static_cast<int>(qs.indices.size()) < 20 && qs.relax_steps < 5) {
    ++qs.relax_steps;
    qs.indices = pass(qs.relax_steps);
  }
  if (qs.indices.size() > 30) {
    std::vector<int> by_sharp = qs.indices;
    std::sort(by_sharp.begin(), by_sharp.end(), [&](int a, int b) {
      if (records[static_cast<std::size_t>(a)].edge_count != records[static_cast<std::size_t>(b)].edge_count)
        return records[static_cast<std::size_t>(a)].edge_count > records[static_cast<std::size_t>(b)].edge_count;
      return a < b;
    });
    by_sharp.resize(30);
    std::sort(by_sharp.begin(), by_sharp.end());
    qs.indices = std::move(by_sharp);
  }
  return qs;
}

std::vector<int> select_tactic_layer(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& windows,
    double source_fps, int n_frames, int per_window_cap) {
  if (!(source_fps > 0.0))
    throw std::invalid_argument("select_tactic_layer: fps must be positive");
  if (per_window_cap < 1)
    throw std::invalid_argument("select_tactic_layer: cap must be >= 1");

  std::vector<int> out;
  for (const auto& [start, end] : windows) {
    if (start > end)
      throw std::invalid_argument("select_tactic_layer: inverted window");
    std::vector<int> in_window;
    for (int i = 0; i < n_frames; ++i) {
      auto ts = static_cast<std::int64_t>(std::llround(i * 1000.0 / source_fps));
      if (ts >= start && ts < end) in_window.push_back(i);
    }
    const int m = static_cast<int>(in_window.size());
    if (m <= per_window_cap) {
      out.insert(out.end(), in_window.begin(), in_window.end());
    } else if (per_window_cap == 1) {
      out.push_back(in_window.front());
    } else {
      for (int j = 0; j < per_window_cap; ++j) {
        auto pos = static_cast<std::size_t>(
            std::llround(static_cast<double>(j) * (m - 1) / (per_window_cap - 1)));
        out.push_back(in_window[pos]);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> select_noise_layer(
    const std::vector<frames::FrameQualityRecord>& records, double quantile, int cap) {
  if (!(quantile > 0.0 && quantile < 0.5))
    throw std::invalid_argument("select_noise_layer: quantile must be in (0, 0.5)");
  const int n = static_cast<int>(records.size());
  if (n == 0) return {};
  const int k = std::max(1, static_cast<int>(std::floor(quantile * n)));

  auto bottom_by = [&](auto key) {
    std::vector<int> idx(records.size());
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      double ka = key(records[static_cast<std::size_t>(a)]);
      double kb = key(records[static_cast<std::size_t>(b)]);
      if (ka != kb) return ka < kb;
      return a < b;
    });
    idx.resize(static_cast<std::size_t>(std::min(k, n)));
    return idx;
  };

  auto by_bright = bottom_by([](const frames::FrameQualityRecord& r) { return r.brightness_mean; });
  auto by_blur = bottom_by([](const frames::FrameQualityRecord& r) { return r.blur_laplacian_var; });

  // rank = depth into either bottom list; lower is more extreme
  std::map<int, int> rank;
  for (std::size_t p = 0; p < by_bright.size(); ++p) {
    auto it = rank.find(by_bright[p]);
    int v = static_cast<int>(p);
    if (it == rank.end() || v < it->second) rank[by_bright[p]] = v;
  }
  for (std::size_t p = 0; p < by_blur.size(); ++p) {
    auto it = rank.find(by_blur[p]);
    int v = static_cast<int>(p);
    if (it == rank.end() || v < it->second) rank[by_blur[p]] = v;
  }

  std::vector<std::pair<int, int>> scored;  // (rank, index)
  scored.reserve(rank.size());
  for (auto [idx, r] : rank) scored.emplace_back(r, idx);
  std::sort(scored.begin(), scored.end());
  if (static_cast<int>(scored.size()) > cap) scored.resize(static_cast<std::size_t>(cap));

  std::vector<int> out;
  out.reserve(scored.size());
  for (auto [r, idx] : scored) out.push_back(idx);
  std::sort(out.begin(), out.end());
  return out;
}

KeyframeSet merge_layers(const std::vector<int>& base, const std::vector<int>& quality,
                         const std::vector<int>& tactic, const std::vector<int>& noise,
                         double source_fps) {
  std::map<int, unsigned> mask;
  auto add = [&](const std::vector<int>& v, Layer l) {
    for (int i : v) mask[i] |= static_cast<unsigned>(l);
  };
  add(base, Layer::Base);
  add(quality, Layer::Quality);
  add(tactic, Layer::Tactic);
  add(noise, Layer::Noise);

  KeyframeSet ks;
  ks.entries.reserve(mask.size());
  for (auto [idx, m] : mask) {
    KeyframeEntry e;
    e.frame_index = idx;
    e.timestamp_ms = std::llround(idx * 1000.0 / source_fps);
    e.layer_mask = m;
    ks.entries.push_back(e);
  }
  return ks;
}

KeyframeSet select_keyframes(const std::vector<frames::FrameQualityRecord>& records,
                             double source_fps, const LayerConfig& cfg) {
  if (records.empty()) throw std::invalid_argument("select_keyframes: records empty");
  const int n = static_cast<int>(records.size());

  auto quality = select_quality_layer(records, cfg);
  auto tactic = select_tactic_layer(cfg.tactic_windows, source_fps, n, cfg.tactic_per_window_cap);
  auto noise = select_noise_layer(records, cfg.noise_quantile, cfg.noise_cap);

  double base_fps = std::min(cfg.base_fps, source_fps);
  int adjust = 0;
  KeyframeSet ks;
  for (int iter = 0; iter < 16; ++iter) {
    auto base = select_base_layer(n, source_fps, base_fps);
    ks = merge_layers(base, quality.indices, tactic, noise, source_fps);
    const int total = static_cast<int>(ks.entries.size());
    if (total < cfg.target_min && adjust >= 0 && base_fps < source_fps) {
      base_fps = std::min(source_fps, base_fps * 1.25);
      ++adjust;
      continue;
    }
    if (total > cfg.target_max && adjust <= 0 && base_fps > 0.1) {
      base_fps = std::max(0.1, base_fps / 1.25);
      --adjust;
      continue;
    }
    break;
  }
  ks.base_adjust_steps = adjust;
  ks.quality_relax_steps = quality.relax_steps;
  ks.base_fps_used = base_fps;
  return ks;
}

std::string manifest_json(const KeyframeSet& ks) {
  nlohmann::json j;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : ks.entries) {
    nlohmann::json layers = nlohmann::json::array();
    for (Layer l : {Layer::Base, Layer::Quality, Layer::Tactic, Layer::Noise})
      if (e.in(l)) layers.push_back(layer_name(l));
    j["entries"].push_back({{"frame_index", e.frame_index},
                            {"timestamp_ms", e.timestamp_ms},
                            {"layers", layers}});
  }
  j["base_adjust_steps"] = ks.base_adjust_steps;
  j["quality_relax_steps"] = ks.quality_relax_steps;
  j["base_fps_used"] = ks.base_fps_used;
  return j.dump(2);
}

void write_manifest(const std::string& path, const KeyframeSet& ks) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("keyframes: cannot write " + path);
  f << manifest_json(ks) << "\n";
}

}  // namespace avgraph::keyframes
