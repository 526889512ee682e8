#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "avgraph/frame_metrics.hpp"

namespace avgraph::keyframes {

enum class Layer : unsigned { Base = 1, Quality = 2, Tactic = 4, Noise = 8 };

const char* layer_name(Layer l);

struct LayerConfig {
  double base_fps = 1.5;
  double quality_brightness_min = 60.0;
  double quality_edge_min = 20.0;   // against 0-100 normalized sharpness
  double quality_blur_max = 10.0;   // against raw blur_laplacian_var
  bool invert_blur_predicate = false;  // flips blur test to "> max"
  std::vector<std::pair<std::int64_t, std::int64_t>> tactic_windows;  // [start,end) ms
  int tactic_per_window_cap = 8;
  double noise_quantile = 0.05;
  int noise_cap = 15;
  int target_min = 80;
  int target_max = 120;
};

struct KeyframeEntry {
  int frame_index = 0;
  std::int64_t timestamp_ms = 0;
  unsigned layer_mask = 0;

  bool in(Layer l) const { return layer_mask & static_cast<unsigned>(l); }
};

struct KeyframeSet {
  std::vector<KeyframeEntry> entries;  // sorted by frame_index, unique
  int base_adjust_steps = 0;           // >0 densified, <0 thinned
  int quality_relax_steps = 0;
  double base_fps_used = 0.0;
};

// Uniform temporal stride: index_k = round(k * source_fps / base_fps), so the
// set size is exactly ceil(n_frames / (source_fps / base_fps)).
std::vector<int> select_base_layer(int n_frames, double source_fps, double base_fps);

struct QualitySelection {
  std::vector<int> indices;
  int relax_steps = 0;
};

// Sharpness is edge_count min-max normalized to 0-100 over the record set
// (all-equal degenerates to 0). Thresholds relax multiplicatively by 10% per
// step (max 5) while fewer than 20 frames qualify; over 30 keeps the top-30
// by raw edge_count.
QualitySelection select_quality_layer(
    const std::vector<frames::FrameQualityRecord>& records, const LayerConfig& cfg);

// Frames whose timestamp falls in any half-open window, per window uniformly
// subsampled to the cap. Throws on an inverted window.
std::vector<int> select_tactic_layer(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& windows,
    double source_fps, int n_frames, int per_window_cap);

// Bottom-quantile by brightness union bottom-quantile by blur metric. When
// the union exceeds the cap, keeps the most extreme by best (lowest) rank in
// either ordering, frame index breaking ties.
std::vector<int> select_noise_layer(
    const std::vector<frames::FrameQualityRecord>& records, double quantile,
    int cap = 15);

// Pure union with tags; no size adjustment.
KeyframeSet merge_layers(const std::vector<int>& base, const std::vector<int>& quality,
                         const std::vector<int>& tactic, const std::vector<int>& noise,
                         double source_fps);

// Full selection: builds all four layers and re-strides the base layer until
// the merged total lands in [target_min, target_max] or adjustment limits hit.
KeyframeSet select_keyframes(const std::vector<frames::FrameQualityRecord>& records,
                             double source_fps, const LayerConfig& cfg);

// Manifest JSON: {"entries":[{"frame_index","timestamp_ms","layers":[...]}],...}
std::string manifest_json(const KeyframeSet& ks);
void write_manifest(const std::string& path, const KeyframeSet& ks);

}  // namespace avgraph::keyframes
