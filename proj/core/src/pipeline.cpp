#include "avgraph/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "avgraph/audio_features.hpp"
#include "avgraph/device_fingerprint.hpp"
#include "avgraph/frame_metrics.hpp"
#include "avgraph/gat.hpp"
#include "avgraph/signal/wav.hpp"
#include "avgraph/spectral.hpp"
#include "avgraph/util/digest.hpp"
#include "avgraph/version.hpp"

namespace avgraph::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;

double indoor_probability(double brightness_mean,
                          const std::array<double, 3>& channel_means,
                          double low_freq_drop_ratio, const IndoorWeights& w) {
  const double cool =
      std::max(0.0, channel_means[2] - channel_means[0]) / 255.0;
  const double tri =
      std::max(0.0, 1.0 - std::abs(brightness_mean - 125.0) / 125.0);
  const double x = w.cool_cast * cool + w.brightness * tri +
                   w.rolloff * low_freq_drop_ratio + w.bias;
  return 1.0 / (1.0 + std::exp(-x));
}

namespace {

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw StageError("config", 4, "bad numeric value for " + key + ": " + value);
  }
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v != std::floor(v))
    throw StageError("config", 4, "expected integer for " + key + ": " + value);
  return static_cast<std::int64_t>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw StageError("config", 4, "expected boolean for " + key + ": " + value);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "fps") cfg.fps = to_double(key, value);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(key, value));
  else if (key == "emit_melspec") cfg.emit_melspec = to_bool(key, value);
  else if (key == "skip_device") cfg.skip_device = to_bool(key, value);
  else if (key == "window_ms") cfg.graph.window_ms = to_int(key, value);
  else if (key == "causal_max_lag_ms") cfg.graph.causal_max_lag_ms = to_int(key, value);
  else if (key == "base_fps") cfg.layers.base_fps = to_double(key, value);
  else if (key == "quality_brightness_min")
    cfg.layers.quality_brightness_min = to_double(key, value);
  else if (key == "quality_edge_min") cfg.layers.quality_edge_min = to_double(key, value);
  else if (key == "quality_blur_max") cfg.layers.quality_blur_max = to_double(key, value);
  else if (key == "invert_blur_predicate")
    cfg.layers.invert_blur_predicate = to_bool(key, value);
  else if (key == "tactic_per_window_cap")
    cfg.layers.tactic_per_window_cap = static_cast<int>(to_int(key, value));
  else if (key == "noise_quantile") cfg.layers.noise_quantile = to_double(key, value);
  else if (key == "noise_cap") cfg.layers.noise_cap = static_cast<int>(to_int(key, value));
  else if (key == "target_min") cfg.layers.target_min = static_cast<int>(to_int(key, value));
  else if (key == "target_max") cfg.layers.target_max = static_cast<int>(to_int(key, value));
  else if (key == "theta") cfg.theta = to_double(key, value);
  else if (key == "epsilon") cfg.epsilon = to_double(key, value);
  else if (key == "embed_k") cfg.embed_k = static_cast<int>(to_int(key, value));
  else if (key == "gat_heads") cfg.gat_heads = static_cast<int>(to_int(key, value));
  else if (key == "gat_out_dim") cfg.gat_out_dim = static_cast<int>(to_int(key, value));
  else if (key == "gat_params_path") cfg.gat_params_path = value;
  else if (key == "rules_path") cfg.rules_path = value;
  else if (key == "prototypes_path") cfg.prototypes_path = value;
  else if (key == "indoor_w_cool") cfg.indoor.cool_cast = to_double(key, value);
  else if (key == "indoor_w_bright") cfg.indoor.brightness = to_double(key, value);
  else if (key == "indoor_w_rolloff") cfg.indoor.rolloff = to_double(key, value);
  else if (key == "indoor_bias") cfg.indoor.bias = to_double(key, value);
  else throw StageError("config", 4, "unknown config key: " + key);
}

PipelineConfig config_from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StageError("config", 4, "cannot open config file: " + path.string());
  PipelineConfig cfg;
  cfg.config_path = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw StageError("config", 4,
                       "expected key=value at line " + std::to_string(lineno));
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw StageError("ingest", 2, "frames directory not found: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const std::string ext = entry.path().extension().string();
    if (name.rfind("frame_", 0) == 0 && (ext == ".pgm" || ext == ".ppm"))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  if (out.empty())
    throw StageError("ingest", 2, "no frame_*.pgm/.ppm files in " + dir.string());
  return out;
}

namespace {

constexpr int kGatInDim = 10;  // widest per-modality feature layout

double finite_or(double v, double fallback) {
  return std::isfinite(v) ? v : fallback;
}

json encode_sentinel(double v) {
  if (std::isnan(v)) return "undef";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void write_text(const fs::path& path, const std::string& text,
                const char* stage) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError(stage, 3, "cannot write " + path.string());
  out << text;
  if (!out) throw StageError(stage, 3, "short write to " + path.string());
}

}  // namespace

AnalysisReport run(const PipelineConfig& cfg) {
  if (cfg.fps <= 0) throw StageError("config", 4, "fps must be positive");

  // --- ingest ---------------------------------------------------------
  const std::vector<fs::path> frame_paths = list_frames(cfg.frames_dir);
  std::vector<img::Frame> frames;
  frames.reserve(frame_paths.size());
  try {
    for (const auto& p : frame_paths) frames.push_back(img::read_image(p.string()));
  } catch (const std::exception& e) {
    throw StageError("ingest", 2, e.what());
  }

  signal::WavData wav;
  try {
    wav = signal::read_wav(cfg.audio_path.string());
  } catch (const std::exception& e) {
    throw StageError("ingest", 2, e.what());
  }

  std::vector<std::string> digest_inputs;
  for (const auto& p : frame_paths) digest_inputs.push_back(p.string());
  digest_inputs.push_back(cfg.audio_path.string());
  for (const auto& extra :
       {cfg.gat_params_path, cfg.rules_path, cfg.prototypes_path, cfg.config_path}) {
    if (!extra.empty()) digest_inputs.push_back(extra.string());
  }
  std::string digest;
  try {
    digest = input_digest(digest_inputs);
  } catch (const std::exception& e) {
    throw StageError("ingest", 2, e.what());
  }

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw StageError("ingest", 2, "cannot create " + cfg.out_dir.string());

  json report;
  report["versions"] = {{"avgraph", kVersion}};
  report["input_digest"] = digest;

  // --- frame metrics ---------------------------------------------------
  std::vector<frames::FrameQualityRecord> quality;
  try {
    quality = frames::quality_table(frames, cfg.fps);
    frames::write_quality_csv((cfg.out_dir / "quality.csv").string(), quality);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("frame-metrics", 3, e.what());
  }
  {
    double b = 0, blur = 0, edges = 0;
    for (const auto& r : quality) {
      b += r.brightness_mean;
      blur += r.blur_laplacian_var;
      edges += r.edge_count;
    }
    const double n = static_cast<double>(quality.size());
    report["quality_summary"] = {{"frames", quality.size()},
                                 {"brightness_mean", b / n},
                                 {"blur_laplacian_var_mean", blur / n},
                                 {"edge_count_mean", edges / n}};
  }

  // --- audio features --------------------------------------------------
  audio::AcousticVariables acoustics;
  std::vector<audio::Segment> segments;
  std::vector<audio::RegionPrototype> prototypes;
  try {
    if (!cfg.prototypes_path.empty())
      prototypes = audio::load_prototypes(cfg.prototypes_path.string());
    acoustics = audio::extract_acoustics(wav.samples, wav.sample_rate_hz, prototypes);
    auto [analysis, analysis_rate] =
        audio::resample_for_analysis(wav.samples, wav.sample_rate_hz);
    const auto env = audio::energy_envelope(analysis, analysis_rate);
    segments = audio::voice_activity(env);
    if (cfg.emit_melspec) {
      const auto mel = audio::mel_spectrogram(analysis, analysis_rate);
      write_text(cfg.out_dir / "melspec.csv", audio::melspec_csv(mel),
                 "audio-features");
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("audio-features", 3, e.what());
  }
  {
    json dist = json::array();
    for (size_t i = 0; i < acoustics.accent_probability_distribution.size(); ++i) {
      dist.push_back(
          {{"region", i < prototypes.size() ? prototypes[i].region : "?"},
           {"probability", acoustics.accent_probability_distribution[i]}});
    }
    report["acoustics"] = {
        {"wpm_rate", acoustics.wpm_rate},
        {"pitch_variance", acoustics.pitch_variance},
        {"pause_gap_ratio", acoustics.pause_gap_ratio},
        {"command_slope", acoustics.command_slope},
        {"accent_similarity_score", acoustics.accent_similarity_score},
        {"accent_class_top1", acoustics.accent_class_top1},
        {"accent_distribution", std::move(dist)},
        {"no_speech", acoustics.no_speech},
        {"unvoiced", acoustics.unvoiced},
        {"accent_skipped", acoustics.accent_skipped},
        {"speech_segments", segments.size()},
    };
  }

  // --- keyframe selection ----------------------------------------------
  keyframes::LayerConfig layer_cfg = cfg.layers;
  layer_cfg.tactic_windows.clear();
  for (const auto& s : segments)
    layer_cfg.tactic_windows.emplace_back(s.start_ms, s.end_ms);
  keyframes::KeyframeSet keyset;
  try {
    keyset = keyframes::select_keyframes(quality, cfg.fps, layer_cfg);
    keyframes::write_manifest((cfg.out_dir / "keyframes.json").string(), keyset);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("keyframe-select", 3, e.what());
  }
  report["keyframes"] = {{"count", keyset.entries.size()},
                         {"base_fps_used", keyset.base_fps_used},
                         {"base_adjust_steps", keyset.base_adjust_steps},
                         {"quality_relax_steps", keyset.quality_relax_steps}};

  // --- device fingerprint ----------------------------------------------
  std::optional<device::ImageSpectralFeatures> img_features;
  std::optional<device::AudioSpectralFeatures> audio_features;
  std::optional<device::DeviceFingerprint> fingerprint;
  if (!cfg.skip_device) {
    try {
      std::vector<device::ImageSpectralFeatures> per_frame;
      for (const auto& e : keyset.entries)
        per_frame.push_back(
            device::image_spectral_features(frames[e.frame_index].gray));
      img_features = device::average_features(per_frame);
      audio_features =
          device::audio_spectral_features(wav.samples, wav.sample_rate_hz);
      const device::RuleSet rules = cfg.rules_path.empty()
                                        ? device::default_rules()
                                        : device::load_rules(cfg.rules_path.string());
      fingerprint = device::classify_device(*img_features, audio_features, rules);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError("device-fingerprint", 3, e.what());
    }
    json trace = json::array();
    for (const auto& t : fingerprint->rule_trace)
      trace.push_back({{"rule_id", t.rule_id},
                       {"fired_inputs", t.fired_inputs},
                       {"contribution", t.contribution}});
    report["device_fingerprint"] = {
        {"codec_type_label", device::codec_name(fingerprint->codec_type_label)},
        {"device_class_label",
         device::device_class_name(fingerprint->device_class_label)},
        {"compression_pass_count",
         device::pass_count_name(fingerprint->compression_pass_count)},
        {"rule_trace", std::move(trace)},
        {"image_features",
         {{"fft_mid_energy_ratio", img_features->fft_mid_energy_ratio},
          {"fft_high_energy_suppression", img_features->fft_high_energy_suppression},
          {"fft_symmetry_score", img_features->fft_symmetry_score},
          {"compression_entropy", img_features->compression_entropy},
          {"center_energy_region", img_features->center_energy_region},
          {"sharpness_post_filter", img_features->sharpness_post_filter}}},
        {"audio_features",
         {{"mid_freq_energy_density", audio_features->mid_freq_energy_density},
          {"high_freq_suppression_rate", audio_features->high_freq_suppression_rate},
          {"spectral_symmetry_index", audio_features->spectral_symmetry_index},
          {"noise_peak_dispersion", audio_features->noise_peak_dispersion},
          {"low_freq_drop_ratio", audio_features->low_freq_drop_ratio}}},
    };
  } else {
    report["device_fingerprint"] = {{"skipped", true},
                                    {"reason", "disabled by --no-device"}};
  }

  // --- graph construction ----------------------------------------------
  graph::HeteroTemporalGraph g;
  std::vector<int> pool;
  try {
    std::vector<graph::FeatureRecord> records;
    for (const auto& e : keyset.entries) {
      const auto& q = quality[e.frame_index];
      graph::FeatureRecord rec;
      rec.modality = graph::Modality::Image;
      rec.timestamp_ms = q.timestamp_ms;
      rec.features = {
          q.brightness_mean / 255.0,
          q.blur_laplacian_var / (q.blur_laplacian_var + 100.0),
          static_cast<double>(q.edge_count) / (q.edge_count + 1000.0),
          q.contrast_std / 255.0,
          q.r_mean / 255.0,
          q.g_mean / 255.0,
          q.b_mean / 255.0,
          static_cast<double>(std::popcount(e.layer_mask)) / 4.0,
      };
      rec.tags = {{"frame", std::to_string(q.frame_index)}};
      records.push_back(std::move(rec));
    }
    auto audio_record = [&](std::int64_t ts) {
      graph::FeatureRecord rec;
      rec.modality = graph::Modality::Audio;
      rec.timestamp_ms = ts;
      rec.features = {(acoustics.wpm_rate - 50.0) / 150.0,
                      acoustics.pitch_variance / 1.5,
                      acoustics.pause_gap_ratio,
                      (acoustics.command_slope + 1.5) / 3.5,
                      acoustics.accent_similarity_score};
      return rec;
    };
    if (segments.empty()) {
      records.push_back(audio_record(0));
    } else {
      for (const auto& s : segments) records.push_back(audio_record(s.start_ms));
    }
    if (!keyset.entries.empty()) {
      graph::FeatureRecord out;
      out.modality = graph::Modality::Output;
      out.timestamp_ms = keyset.entries.back().timestamp_ms;
      out.features = {0.0, 0.0, 0.0, 0.0};
      out.tags = {{"role", "readout"}};
      records.push_back(std::move(out));
    }

    std::optional<graph::FeatureRecord> device_record;
    if (img_features && audio_features) {
      graph::FeatureRecord dev;
      dev.modality = graph::Modality::Device;
      dev.timestamp_ms = 0;
      dev.features = {audio_features->mid_freq_energy_density,
                      audio_features->high_freq_suppression_rate,
                      img_features->fft_symmetry_score,
                      std::min(img_features->compression_entropy, 8.0) / 8.0,
                      img_features->center_energy_region};
      dev.tags = {{"source", "device"}};
      device_record = std::move(dev);
    }

    g = graph::build_graph(records, device_record, cfg.graph);
    pool = graph::output_adjacent_indices(g);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("graph-core", 3, e.what());
  }
  report["graph"] = {{"nodes", g.nodes.size()},
                     {"edges", g.edges.size()},
                     {"window_ms", g.window_ms}};

  // --- attention propagation and readout --------------------------------
  json threat;
  try {
    gat::GatLayer layer;
    gat::ReadoutHead head;
    bool seeded = true;
    if (!cfg.gat_params_path.empty()) {
      std::ifstream in(cfg.gat_params_path);
      if (!in)
        throw std::runtime_error("cannot open " + cfg.gat_params_path.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      gat::params_from_json(ss.str(), layer, head);
      seeded = false;
    } else {
      // Average-mode hidden width equals out_dim regardless of head count.
      layer = gat::seeded_layer(kGatInDim, cfg.gat_out_dim, cfg.gat_heads, cfg.seed);
      head = gat::seeded_readout(cfg.gat_out_dim, cfg.seed + 1);
    }

    Eigen::MatrixXd features =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.nodes.size()),
                              layer.in_dim());
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      const auto& f = g.nodes[i].features;
      for (size_t d = 0; d < f.size() && d < static_cast<size_t>(layer.in_dim());
           ++d)
        features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = f[d];
    }

    const Eigen::MatrixXd hidden =
        gat::multi_head_forward(layer, g, features, gat::HeadMode::Average);
    const gat::ReadoutResult ro = gat::readout(hidden, pool, head);

    std::vector<const graph::GraphEdge*> attention;
    for (const auto& e : g.edges)
      if (e.kind == graph::EdgeKind::Attention) attention.push_back(&e);
    std::sort(attention.begin(), attention.end(),
              [](const graph::GraphEdge* a, const graph::GraphEdge* b) {
                if (a->weight != b->weight) return a->weight > b->weight;
                if (a->src != b->src) return a->src < b->src;
                return a->dst < b->dst;
              });
    json explanation = json::array();
    for (size_t k = 0; k < attention.size() && k < 5; ++k) {
      explanation.push_back({{"src", attention[k]->src},
                             {"dst", attention[k]->dst},
                             {"weight", attention[k]->weight}});
    }

    std::vector<std::int64_t> chain_ids;
    for (const auto& e : g.edges) {
      if (e.kind != graph::EdgeKind::TemporalCausal) continue;
      chain_ids.push_back(e.src);
      chain_ids.push_back(e.dst);
    }
    std::sort(chain_ids.begin(), chain_ids.end());
    chain_ids.erase(std::unique(chain_ids.begin(), chain_ids.end()),
                    chain_ids.end());
    std::sort(chain_ids.begin(), chain_ids.end(),
              [&](std::int64_t a, std::int64_t b) {
                const auto& na = g.nodes[g.index_of(a)];
                const auto& nb = g.nodes[g.index_of(b)];
                if (na.timestamp_ms != nb.timestamp_ms)
                  return na.timestamp_ms < nb.timestamp_ms;
                return a < b;
              });

    threat = {{"threat_score", ro.y1},
              {"mission_type_class", graph::mission_name(ro.y2)},
              {"intent_confidence", ro.y3},
              {"causal_chain", chain_ids},
              {"explanation", std::move(explanation)},
              {"uncalibrated", seeded},
              {"input_digest", digest}};
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("gat-engine", 3, e.what());
  }
  report["threat"] = std::move(threat);

  // --- spectral path analysis -------------------------------------------
  try {
    const int n = static_cast<int>(g.nodes.size());
    if (n >= 3) {
      const Eigen::MatrixXd A =
          graph::adjacency_matrix(g, graph::AdjacencyMode::Weighted, true);
      const int K = std::clamp(cfg.embed_k, 1, n);
      const spectral::SpectralEmbedding emb = spectral::embed_adjacency(A, K);
      spectral::PathAnalysis pa =
          spectral::analyze_paths(emb.Z, cfg.theta, cfg.epsilon);
      write_text(cfg.out_dir / "paths.json", spectral::path_analysis_json(pa),
                 "spectral-embed");

      const auto constrained = spectral::spectral_constraint_filter(emb.Z, cfg.epsilon);
      json main_list = json::array();
      for (auto [i, j] : pa.main_paths) main_list.push_back({i, j});
      json constrained_list = json::array();
      for (auto [i, j] : constrained) {
        if (std::find(pa.main_paths.begin(), pa.main_paths.end(),
                      std::make_pair(i, j)) != pa.main_paths.end())
          constrained_list.push_back({i, j});
      }
      json clusters = json::array();
      json generators = json::array();
      for (const auto& c : pa.clusters) {
        clusters.push_back(c);
        json tree = json::array();
        for (auto [i, j] : spectral::minimal_generator_graph(c, pa.delta))
          tree.push_back({i, j});
        generators.push_back(std::move(tree));
      }
      report["path_analysis"] = {
          {"k", K},
          {"theta", encode_sentinel(cfg.theta)},
          {"epsilon", cfg.epsilon},
          {"eigenvalue_min", emb.eigenvalues.minCoeff()},
          {"eigenvalue_max", emb.eigenvalues.maxCoeff()},
          {"main_paths", std::move(main_list)},
          {"main_path_subspace", std::move(constrained_list)},
          {"clusters", std::move(clusters)},
          {"generator_trees", std::move(generators)},
          {"generator_note",
           "generator trees are a maximum-discernibility spanning construction"},
      };
    } else {
      report["path_analysis"] = {{"skipped", true},
                                 {"reason", "graph has fewer than 3 nodes"}};
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("spectral-embed", 3, e.what());
  }

  // --- scene and region signals ------------------------------------------
  try {
    double brightness = 0.0;
    std::array<double, 3> channels{0.0, 0.0, 0.0};
    if (!keyset.entries.empty()) {
      for (const auto& e : keyset.entries) {
        const auto& q = quality[e.frame_index];
        brightness += q.brightness_mean;
        channels[0] += q.r_mean;
        channels[1] += q.g_mean;
        channels[2] += q.b_mean;
      }
      const double n = static_cast<double>(keyset.entries.size());
      brightness /= n;
      for (auto& c : channels) c /= n;
    }
    const double rolloff =
        audio_features ? audio_features->low_freq_drop_ratio : 0.0;
    report["indoor_probability"] =
        finite_or(indoor_probability(brightness, channels, rolloff, cfg.indoor), 0.0);

    json region;
    region["caveat"] =
        "directional signal only; not a confirmed geographic attribution";
    if (!acoustics.accent_skipped) {
      region["top1"] = acoustics.accent_class_top1;
      double top1_prob = 0.0;
      for (double p : acoustics.accent_probability_distribution)
        top1_prob = std::max(top1_prob, p);
      region["top1_prob"] = top1_prob;
    } else {
      region["top1"] = "Unknown";
      region["top1_prob"] = 0.0;
      region["skipped_reason"] = "no region prototypes supplied";
    }
    report["region_signal"] = std::move(region);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("report", 3, e.what());
  }

  AnalysisReport result;
  result.report = report;
  result.report_path = cfg.out_dir / "report.json";
  write_text(result.report_path, report.dump(2) + "\n", "report");
  return result;
}

}  // namespace avgraph::pipeline
