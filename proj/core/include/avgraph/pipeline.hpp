#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avgraph/graph.hpp"
#include "avgraph/keyframe.hpp"

namespace avgraph::pipeline {

// Stage failures carry the stage name and the process exit code the CLI maps
// them to: 2 ingest, 3 stage, 4 config.
struct StageError : std::runtime_error {
  StageError(std::string stage_name, int exit_code, const std::string& msg)
      : std::runtime_error(msg), stage(std::move(stage_name)), code(exit_code) {}
  std::string stage;
  int code;
};

struct IndoorWeights {
  double cool_cast = 8.0;
  double brightness = 4.0;
  double rolloff = 1.0;
  double bias = -3.0;
};

// Logistic blend of a blue-over-red cast term, a triangular moderate-brightness
// term peaking at 125, and the low-frequency rolloff of the audio spectrum.
double indoor_probability(double brightness_mean,
                          const std::array<double, 3>& channel_means,
                          double low_freq_drop_ratio,
                          const IndoorWeights& w = {});

struct PipelineConfig {
  std::filesystem::path frames_dir;
  std::filesystem::path audio_path;
  double fps = 25.0;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 42;
  bool emit_melspec = false;
  bool skip_device = false;

  keyframes::LayerConfig layers;
  graph::GraphConfig graph;

  double theta = 1.0;
  double epsilon = 0.5;
  int embed_k = 8;  // clamped to node count at run time

  int gat_heads = 1;
  int gat_out_dim = 8;
  std::filesystem::path gat_params_path;  // empty -> seeded defaults
  std::filesystem::path rules_path;       // empty -> built-in rules
  std::filesystem::path prototypes_path;  // empty -> accent skipped

  IndoorWeights indoor;
  std::filesystem::path config_path;  // recorded for the input digest
};

// Flat key=value text; '#' starts a comment. Unknown keys are config errors.
PipelineConfig config_from_file(const std::filesystem::path& path);
void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

// frame_*.pgm / frame_*.ppm under dir, sorted by filename.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

struct AnalysisReport {
  nlohmann::json report;
  std::filesystem::path report_path;
};

// Runs every stage and writes report.json, quality.csv, keyframes.json,
// paths.json (and melspec.csv when requested) under out_dir.
AnalysisReport run(const PipelineConfig& cfg);

}  // namespace avgraph::pipeline
