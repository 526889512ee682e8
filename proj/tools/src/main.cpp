#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "avgraph/device_fingerprint.hpp"
#include "avgraph/frame_metrics.hpp"
#include "avgraph/graph.hpp"
#include "avgraph/image/raster.hpp"
#include "avgraph/pipeline.hpp"
#include "avgraph/signal/wav.hpp"
#include "avgraph/spectral.hpp"
#include "avgraph/synthetic.hpp"
#include "avgraph/version.hpp"

namespace {

using json = nlohmann::json;

void print_error(const std::string& stage, const std::string& message) {
  json j;
  j["error"] = {{"stage", stage}, {"message", message}};
  std::cerr << j.dump(2) << "\n";
}

int run_analyze(avgraph::pipeline::PipelineConfig& cfg) {
  const auto result = avgraph::pipeline::run(cfg);
  std::cout << "report written to " << result.report_path.string() << "\n";
  return 0;
}

int run_metrics(const std::string& frames_dir, double fps,
                const std::string& out_csv) {
  const auto paths = avgraph::pipeline::list_frames(frames_dir);
  std::vector<avgraph::img::Frame> frames;
  try {
    for (const auto& p : paths) frames.push_back(avgraph::img::read_image(p.string()));
  } catch (const std::exception& e) {
    throw avgraph::pipeline::StageError("ingest", 2, e.what());
  }
  try {
    const auto table = avgraph::frames::quality_table(frames, fps);
    avgraph::frames::write_quality_csv(out_csv, table);
  } catch (const std::exception& e) {
    throw avgraph::pipeline::StageError("frame-metrics", 3, e.what());
  }
  std::cout << "quality table written to " << out_csv << "\n";
  return 0;
}

int run_fingerprint(const std::string& frames_dir, const std::string& audio_path,
                    const std::string& rules_path) {
  const auto paths = avgraph::pipeline::list_frames(frames_dir);
  std::vector<avgraph::device::ImageSpectralFeatures> rows;
  try {
    for (const auto& p : paths) {
      const auto frame = avgraph::img::read_image(p.string());
      rows.push_back(avgraph::device::image_spectral_features(frame.gray));
    }
  } catch (const std::exception& e) {
    throw avgraph::pipeline::StageError("ingest", 2, e.what());
  }

  try {
    const auto img_features = avgraph::device::average_features(rows);
    std::optional<avgraph::device::AudioSpectralFeatures> audio_features;
    if (!audio_path.empty()) {
      const auto wav = avgraph::signal::read_wav(audio_path);
      audio_features = avgraph::device::audio_spectral_features(wav.samples,
                                                                wav.sample_rate_hz);
    }
    const auto rules = rules_path.empty()
                           ? avgraph::device::default_rules()
                           : avgraph::device::load_rules(rules_path);
    const auto fp =
        avgraph::device::classify_device(img_features, audio_features, rules);

    json j = json::parse(avgraph::device::fingerprint_json(fp));
    j["image_features"] = {
        {"fft_mid_energy_ratio", img_features.fft_mid_energy_ratio},
        {"fft_high_energy_suppression", img_features.fft_high_energy_suppression},
        {"fft_symmetry_score", img_features.fft_symmetry_score},
        {"compression_entropy", img_features.compression_entropy},
        {"center_energy_region", img_features.center_energy_region},
        {"sharpness_post_filter", img_features.sharpness_post_filter}};
    if (audio_features) {
      j["audio_features"] = {
          {"mid_freq_energy_density", audio_features->mid_freq_energy_density},
          {"high_freq_suppression_rate", audio_features->high_freq_suppression_rate},
          {"spectral_symmetry_index", audio_features->spectral_symmetry_index},
          {"noise_peak_dispersion", audio_features->noise_peak_dispersion},
          {"low_freq_drop_ratio", audio_features->low_freq_drop_ratio}};
    }
    std::cout << j.dump(2) << "\n";
  } catch (const avgraph::pipeline::StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw avgraph::pipeline::StageError("device-fingerprint", 3, e.what());
  }
  return 0;
}

int run_spectral(const std::string& graph_path, int k, double theta,
                 double epsilon) {
  avgraph::graph::HeteroTemporalGraph g;
  try {
    g = avgraph::graph::load_graph(graph_path);
  } catch (const std::exception& e) {
    throw avgraph::pipeline::StageError("ingest", 2, e.what());
  }
  try {
    const int n = static_cast<int>(g.nodes.size());
    if (n < 3)
      throw std::runtime_error("path analysis needs at least 3 nodes");
    const auto A = avgraph::graph::adjacency_matrix(
        g, avgraph::graph::AdjacencyMode::Weighted, true);
    const int kk = std::clamp(k, 1, n);
    const auto emb = avgraph::spectral::embed_adjacency(A, kk);
    const auto pa = avgraph::spectral::analyze_paths(emb.Z, theta, epsilon);
    std::cout << avgraph::spectral::path_analysis_json(pa) << "\n";
  } catch (const std::exception& e) {
    throw avgraph::pipeline::StageError("spectral-embed", 3, e.what());
  }
  return 0;
}

int run_simulate(const std::string& spec_path, std::uint64_t seed, double sigma,
                 const std::string& out_dir) {
  avgraph::synth::ScenarioSpec spec;
  try {
    if (!spec_path.empty()) {
      std::ifstream in(spec_path);
      if (!in) throw std::runtime_error("cannot open spec file: " + spec_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      spec = avgraph::synth::scenario_from_json(ss.str());
    } else {
      spec = avgraph::synth::default_scenario(seed, sigma);
    }
  } catch (const std::exception& e) {
    throw avgraph::pipeline::StageError("ingest", 2, e.what());
  }

  try {
    const auto data = avgraph::synth::generate(spec);
    const auto result = avgraph::synth::evaluate(data, data.truth);

    std::filesystem::create_directories(out_dir);
    std::ofstream scenario(std::filesystem::path(out_dir) / "scenario.json",
                           std::ios::binary);
    scenario << avgraph::synth::scenario_json(spec) << "\n";

    json j;
    j["scenario_id"] = data.scenario_id;
    j["chain_recognized"] = result.chain_recognized;
    j["recognized_fraction"] = result.recognized_fraction;
    j["mean_abs_lag_error_ms"] = result.mean_abs_lag_error_ms;
    j["alignment_accuracy"] = result.alignment_accuracy;
    j["pairs_total"] = result.pairs_total;
    j["pairs_recognized"] = result.pairs_recognized;
    json slopes = json::array();
    for (const auto& [start, vars] : data.window_acoustics)
      slopes.push_back({{"window_start_ms", start},
                        {"command_slope", vars.command_slope}});
    j["window_acoustics"] = std::move(slopes);
    std::ofstream eval(std::filesystem::path(out_dir) / "eval.json",
                       std::ios::binary);
    eval << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
  } catch (const std::exception& e) {
    throw avgraph::pipeline::StageError("synthetic", 3, e.what());
  }
  return 0;
}

int run_sweep(const std::string& sigmas_arg, int seeds, std::uint64_t base_seed,
              const std::string& out_path) {
  std::vector<double> sigmas;
  std::stringstream ss(sigmas_arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      sigmas.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw avgraph::pipeline::StageError("config", 4, "bad sigma value: " + item);
    }
  }
  if (sigmas.empty())
    throw avgraph::pipeline::StageError("config", 4, "no sigma values given");

  try {
    const auto rows = avgraph::synth::sweep(sigmas, seeds, base_seed);
    const std::string csv = avgraph::synth::sweep_csv(rows);
    if (out_path.empty()) {
      std::cout << csv;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + out_path);
      out << csv;
      std::cout << "sweep written to " << out_path << "\n";
    }
  } catch (const avgraph::pipeline::StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw avgraph::pipeline::StageError("synthetic", 3, e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"audio/video heterogeneous temporal graph analyzer"};
  app.set_version_flag("--version", std::string(avgraph::kVersion));
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "run the full pipeline");
  std::string an_frames, an_audio, an_out, an_config, an_gat, an_rules, an_protos;
  double an_fps = 0;
  std::uint64_t an_seed = 0;
  bool an_melspec = false, an_nodevice = false;
  double an_theta = 0, an_epsilon = 0;
  int an_k = 0;
  analyze->add_option("--frames", an_frames, "frame directory")->required();
  analyze->add_option("--audio", an_audio, "WAV file")->required();
  analyze->add_option("--out", an_out, "output directory")->required();
  analyze->add_option("--fps", an_fps, "frame rate of the sequence");
  analyze->add_option("--config", an_config, "key=value config file");
  analyze->add_option("--seed", an_seed, "deterministic seed");
  analyze->add_option("--gat-params", an_gat, "trained attention parameters JSON");
  analyze->add_option("--rules", an_rules, "device rule set JSON");
  analyze->add_option("--prototypes", an_protos, "region prototype JSON");
  analyze->add_option("--theta", an_theta, "discernibility threshold");
  analyze->add_option("--epsilon", an_epsilon, "spectral constraint");
  analyze->add_option("--k", an_k, "embedding dimension");
  analyze->add_flag("--emit-melspec", an_melspec, "write melspec.csv");
  analyze->add_flag("--no-device", an_nodevice, "skip device fingerprinting");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "per-frame quality table");
  std::string me_frames, me_out;
  double me_fps = 25.0;
  metrics->add_option("--frames", me_frames, "frame directory")->required();
  metrics->add_option("--fps", me_fps, "frame rate")->required();
  metrics->add_option("--out", me_out, "output CSV path")->required();

  // fingerprint
  auto* fingerprint = app.add_subcommand("fingerprint", "device/codec inference");
  std::string fp_frames, fp_audio, fp_rules;
  fingerprint->add_option("--frames", fp_frames, "frame directory")->required();
  fingerprint->add_option("--audio", fp_audio, "WAV file");
  fingerprint->add_option("--rules", fp_rules, "rule set JSON");

  // spectral
  auto* spectral = app.add_subcommand("spectral", "path analysis of a graph file");
  std::string sp_graph;
  int sp_k = 8;
  double sp_theta = 1.0, sp_epsilon = 0.5;
  spectral->add_option("--graph", sp_graph, "graph JSON file")->required();
  spectral->add_option("--k", sp_k, "embedding dimension");
  spectral->add_option("--theta", sp_theta, "discernibility threshold");
  spectral->add_option("--epsilon", sp_epsilon, "spectral constraint");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "synthetic scenario run");
  std::string si_spec, si_out = "sim_out";
  std::uint64_t si_seed = 1;
  double si_sigma = 0.0;
  simulate->add_option("--spec", si_spec, "scenario JSON file");
  simulate->add_option("--seed", si_seed, "seed for the default scenario");
  simulate->add_option("--sigma", si_sigma, "noise level for the default scenario");
  simulate->add_option("--out", si_out, "output directory");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "noise sweep over synthetic scenarios");
  std::string sw_sigmas = "0,0.25,0.5,1,2", sw_out;
  int sw_seeds = 20;
  std::uint64_t sw_base = 0;
  sweep->add_option("--sigmas", sw_sigmas, "comma-separated noise levels");
  sweep->add_option("--seeds", sw_seeds, "seeds per level");
  sweep->add_option("--base-seed", sw_base, "seed offset");
  sweep->add_option("--out", sw_out, "output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;
  }

  try {
    if (analyze->parsed()) {
      avgraph::pipeline::PipelineConfig cfg;
      if (!an_config.empty()) cfg = avgraph::pipeline::config_from_file(an_config);
      cfg.frames_dir = an_frames;
      cfg.audio_path = an_audio;
      cfg.out_dir = an_out;
      if (analyze->count("--fps")) cfg.fps = an_fps;
      if (analyze->count("--seed")) cfg.seed = an_seed;
      if (analyze->count("--gat-params")) cfg.gat_params_path = an_gat;
      if (analyze->count("--rules")) cfg.rules_path = an_rules;
      if (analyze->count("--prototypes")) cfg.prototypes_path = an_protos;
      if (analyze->count("--theta")) cfg.theta = an_theta;
      if (analyze->count("--epsilon")) cfg.epsilon = an_epsilon;
      if (analyze->count("--k")) cfg.embed_k = an_k;
      if (an_melspec) cfg.emit_melspec = true;
      if (an_nodevice) cfg.skip_device = true;
      return run_analyze(cfg);
    }
    if (metrics->parsed()) return run_metrics(me_frames, me_fps, me_out);
    if (fingerprint->parsed()) return run_fingerprint(fp_frames, fp_audio, fp_rules);
    if (spectral->parsed())
      return run_spectral(sp_graph, sp_k, sp_theta, sp_epsilon);
    if (simulate->parsed()) return run_simulate(si_spec, si_seed, si_sigma, si_out);
    if (sweep->parsed()) return run_sweep(sw_sigmas, sw_seeds, sw_base, sw_out);
  } catch (const avgraph::pipeline::StageError& e) {
    print_error(e.stage, e.what());
    return e.code;
  } catch (const std::exception& e) {
    print_error("unknown", e.what());
    return 3;
  }
  return 0;
}
