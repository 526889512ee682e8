#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <vector>

#include "avgraph/keyframe.hpp"
#include "doctest.h"
#include "test_support.hpp"

namespace kf = avgraph::keyframes;
using avgraph::frames::FrameQualityRecord;

namespace {

std::vector<FrameQualityRecord> make_records(int n) {
  std::vector<FrameQualityRecord> rs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& r = rs[static_cast<std::size_t>(i)];
    r.frame_index = i;
    r.timestamp_ms = static_cast<std::int64_t>(std::llround(i * 40.0));
  }
  return rs;
}

}  // namespace

TEST_CASE("base layer: uniform stride with exact count") {
  auto idx = kf::select_base_layer(800, 25.0, 1.0);
  REQUIRE(idx.size() == 32);  // ceil(800 / 25)
  for (std::size_t k = 0; k < idx.size(); ++k)
    CHECK(idx[k] == static_cast<int>(25 * k));

  auto half = kf::select_base_layer(800, 25.0, 2.0);
  CHECK(half.size() == 64);  // ceil(800 / 12.5)
  CHECK(half[0] == 0);
  CHECK(half[1] == 13);  // llround(12.5)
  CHECK(half[3] == 38);  // llround(37.5)
  CHECK(std::is_sorted(half.begin(), half.end()));
  CHECK(std::adjacent_find(half.begin(), half.end()) == half.end());

  CHECK(kf::select_base_layer(10, 25.0, 25.0).size() == 10);
  CHECK(kf::select_base_layer(0, 25.0, 1.0).empty());
  CHECK_THROWS(kf::select_base_layer(10, 25.0, 30.0));
  CHECK_THROWS(kf::select_base_layer(10, 0.0, 1.0));
}

TEST_CASE("quality layer: strict thresholds with multiplicative relaxation") {
  // 200 records, sharpness normalized from edge_count = index. Only blur < 10
  // holds for i < 50, so the pass set grows from {40..49} as thresholds relax
  // by 10% per step until 20 frames qualify at step 3 ({30..49}).
  auto rs = make_records(200);
  for (int i = 0; i < 200; ++i) {
    auto& r = rs[static_cast<std::size_t>(i)];
    r.brightness_mean = 100.0;
    r.edge_count = i;
    r.blur_laplacian_var = i < 50 ? 5.0 : 50.0;
  }
  kf::LayerConfig cfg;
  auto qs = kf::select_quality_layer(rs, cfg);
  CHECK(qs.relax_steps == 3);
  REQUIRE(qs.indices.size() == 20);
  for (int k = 0; k < 20; ++k) CHECK(qs.indices[static_cast<std::size_t>(k)] == 30 + k);
}

TEST_CASE("quality layer: oversize pass set keeps the 30 sharpest") {
  auto rs = make_records(100);
  for (int i = 0; i < 100; ++i) {
    auto& r = rs[static_cast<std::size_t>(i)];
    r.brightness_mean = 200.0;
    r.edge_count = 100 + i;  // strictly increasing sharpness
    r.blur_laplacian_var = 1.0;
  }
  kf::LayerConfig cfg;
  cfg.quality_edge_min = 5.0;  // nearly all pass
  auto qs = kf::select_quality_layer(rs, cfg);
  REQUIRE(qs.indices.size() == 30);
  // top-30 by edge_count = indices 70..99, reported sorted
  for (int k = 0; k < 30; ++k) CHECK(qs.indices[static_cast<std::size_t>(k)] == 70 + k);
}

TEST_CASE("quality layer: inverted blur predicate flips the comparison") {
  auto rs = make_records(40);
  for (int i = 0; i < 40; ++i) {
    auto& r = rs[static_cast<std::size_t>(i)];
    r.brightness_mean = 100.0;
    r.edge_count = 100 + i;
    r.blur_laplacian_var = i < 20 ? 5.0 : 50.0;
  }
  kf::LayerConfig cfg;
  cfg.quality_edge_min = 1.0;
  cfg.quality_blur_max = 10.0;
  cfg.invert_blur_predicate = true;  // now requires blur metric > threshold
  auto qs = kf::select_quality_layer(rs, cfg);
  for (int i : qs.indices) CHECK(rs[static_cast<std::size_t>(i)].blur_laplacian_var > 10.0);
}

TEST_CASE("tactic layer: half-open windows, per-window uniform cap") {
  std::vector<std::pair<std::int64_t, std::int64_t>> windows{{1000, 2000}};
  auto idx = kf::select_tactic_layer(windows, 25.0, 100, 8);
  const std::vector<int> expect{25, 28, 32, 35, 39, 42, 46, 49};
  CHECK(idx == expect);

  // window smaller than the cap keeps every member
  auto small = kf::select_tactic_layer({{1000, 1130}}, 25.0, 100, 8);
  const std::vector<int> expect_small{25, 26, 27, 28};  // ts 1000,1040,1080,1120
  CHECK(small == expect_small);

  // end is exclusive
  auto edge = kf::select_tactic_layer({{1000, 1120}}, 25.0, 100, 8);
  CHECK(edge == std::vector<int>{25, 26, 27});

  CHECK(kf::select_tactic_layer({}, 25.0, 100, 8).empty());
  CHECK_THROWS(kf::select_tactic_layer({{2000, 1000}}, 25.0, 100, 8));
  CHECK_THROWS(kf::select_tactic_layer(windows, 25.0, 100, 0));
}

TEST_CASE("noise layer: bottom-quantile union ranked by extremity") {
  auto rs = make_records(10);
  const double bright[] = {50, 40, 30, 20, 10, 60, 70, 80, 90, 100};
  const double blur[] = {5, 6, 7, 8, 9, 1, 2, 3, 4, 10};
  for (int i = 0; i < 10; ++i) {
    rs[static_cast<std::size_t>(i)].brightness_mean = bright[i];
    rs[static_cast<std::size_t>(i)].blur_laplacian_var = blur[i];
  }
  // k = floor(0.2 * 10) = 2: bottom brightness {4,3}, bottom blur {5,6}
  auto full = kf::select_noise_layer(rs, 0.2, 15);
  CHECK(full == std::vector<int>{3, 4, 5, 6});

  // cap 3 keeps rank-0 entries {4,5} then the first rank-1 entry by index {3}
  auto capped = kf::select_noise_layer(rs, 0.2, 3);
  CHECK(capped == std::vector<int>{3, 4, 5});

  CHECK_THROWS(kf::select_noise_layer(rs, 0.0, 15));
  CHECK_THROWS(kf::select_noise_layer(rs, 0.5, 15));
}

TEST_CASE("merge_layers: union with per-layer masks") {
  auto ks = kf::merge_layers({0, 5}, {5, 9}, {7}, {0}, 25.0);
  REQUIRE(ks.entries.size() == 4);
  CHECK(ks.entries[0].frame_index == 0);
  CHECK(ks.entries[0].layer_mask ==
        (static_cast<unsigned>(kf::Layer::Base) | static_cast<unsigned>(kf::Layer::Noise)));
  CHECK(ks.entries[1].frame_index == 5);
  CHECK(ks.entries[1].in(kf::Layer::Base));
  CHECK(ks.entries[1].in(kf::Layer::Quality));
  CHECK_FALSE(ks.entries[1].in(kf::Layer::Tactic));
  CHECK(ks.entries[2].frame_index == 7);
  CHECK(ks.entries[2].timestamp_ms == 280);
  CHECK(ks.entries[3].frame_index == 9);
}

TEST_CASE("select_keyframes: densifies the base layer to hit the target") {
  auto rs = make_records(200);
  for (int i = 0; i < 200; ++i) {
    auto& r = rs[static_cast<std::size_t>(i)];
    r.brightness_mean = 100.0;
    r.edge_count = i;
    r.blur_laplacian_var = i < 50 ? 5.0 : 50.0;
  }
  kf::LayerConfig cfg;
  cfg.tactic_windows = {{1000, 2000}};
  auto ks = kf::select_keyframes(rs, 25.0, cfg);
  CHECK(ks.base_adjust_steps > 0);
  CHECK(ks.base_fps_used > cfg.base_fps);
  CHECK(ks.entries.size() >= 80);
  CHECK(ks.entries.size() <= 120);
  CHECK(std::is_sorted(ks.entries.begin(), ks.entries.end(),
                       [](const kf::KeyframeEntry& a, const kf::KeyframeEntry& b) {
                         return a.frame_index < b.frame_index;
                       }));
}

TEST_CASE("select_keyframes: thins the base layer when over target") {
  auto rs = make_records(400);
  for (int i = 0; i < 400; ++i) {
    auto& r = rs[static_cast<std::size_t>(i)];
    r.brightness_mean = 0.0;  // quality layer stays empty even after relaxing
    r.edge_count = i;
    r.blur_laplacian_var = 10.0 + i;
  }
  kf::LayerConfig cfg;
  cfg.target_min = 1;
  cfg.target_max = 20;
  auto ks = kf::select_keyframes(rs, 25.0, cfg);
  CHECK(ks.base_adjust_steps < 0);
  CHECK(ks.base_fps_used < cfg.base_fps);
  CHECK(ks.entries.size() <= 20);
}

TEST_CASE("manifest_json: entries, layer names, adjustment metadata") {
  auto ks = kf::merge_layers({0}, {0}, {}, {3}, 25.0);
  ks.base_adjust_steps = 2;
  ks.quality_relax_steps = 1;
  ks.base_fps_used = 2.34;
  auto j = nlohmann::json::parse(kf::manifest_json(ks));
  REQUIRE(j.at("entries").size() == 2);
  CHECK(j["entries"][0]["frame_index"] == 0);
  CHECK(j["entries"][0]["timestamp_ms"] == 0);
  auto layers0 = j["entries"][0]["layers"].get<std::vector<std::string>>();
  CHECK(layers0 == std::vector<std::string>{"Base", "Quality"});
  auto layers1 = j["entries"][1]["layers"].get<std::vector<std::string>>();
  CHECK(layers1 == std::vector<std::string>{"Noise"});
  CHECK(j["base_adjust_steps"] == 2);
  CHECK(j["quality_relax_steps"] == 1);
  CHECK(j["base_fps_used"] == doctest::Approx(2.34));
}
