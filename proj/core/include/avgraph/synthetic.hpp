#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "avgraph/audio_features.hpp"
#include "avgraph/graph.hpp"

namespace avgraph::synth {

enum class EventKind { WeaponHold, CommandPeak, ActionExec, ThreatConfirm };

const char* event_kind_name(EventKind k);
EventKind event_kind_from_name(const std::string& s);

struct ScriptedEvent {
  EventKind kind = EventKind::WeaponHold;
  std::int64_t time_ms = 0;
  graph::Modality modality = graph::Modality::Image;
};

// Event times must ascend strictly; consecutive gaps are the injected lags and
// must lie in (0, 300] ms so the causal-edge builder can link the chain.
struct ScenarioSpec {
  std::string id = "default";
  std::uint64_t seed = 1;
  std::int64_t duration_ms = 2000;
  std::int64_t frame_period_ms = 40;
  double noise_sigma = 0.0;
  double distractor_rate = 0.0;  // expected distractor spikes per second
  std::vector<ScriptedEvent> events;
};

// Four-event chain on a 40 ms grid: WeaponHold(Image) 1000, CommandPeak(Audio)
// 1120, ActionExec(Action) 1240, ThreatConfirm(Output) 1400.
ScenarioSpec default_scenario(std::uint64_t seed, double noise_sigma);

ScenarioSpec scenario_from_json(const std::string& text);
std::string scenario_json(const ScenarioSpec& spec);

struct GroundTruth {
  std::string scenario_id;
  std::vector<ScriptedEvent> chain;  // ascending by time
  std::vector<std::int64_t> lags_ms; // chain[k+1].time - chain[k].time
};

constexpr double kSpikeAmplitude = 3.0;

// Per-modality signal sampled on the frame grid: baseline N(0, sigma) noise,
// +3.0 at each scripted event's nearest grid slot, distractor spikes at the
// configured rate. Channel 0 of every emitted record carries the signal.
struct SyntheticData {
  std::string scenario_id;
  std::int64_t frame_period_ms = 40;
  std::array<std::vector<double>, 5> series;  // indexed by Modality
  std::vector<graph::FeatureRecord> records;  // one per grid slot per modality
  std::vector<std::pair<std::int64_t, audio::AcousticVariables>> window_acoustics;
  GroundTruth truth;
};

SyntheticData generate(const ScenarioSpec& spec);

struct EvalParams {
  double detect_threshold = 1.5;  // half the spike amplitude
  int detect_channel = 0;
  std::int64_t match_tol_ms = 0;   // 0 -> frame_period / 2
  std::int64_t align_window_ms = 150;
};

struct EvalResult {
  bool chain_recognized = false;
  double recognized_fraction = 0.0;
  double mean_abs_lag_error_ms = 0.0;
  double alignment_accuracy = 0.0;
  int pairs_total = 0;
  int pairs_recognized = 0;
};

// Detects events (signal above threshold), rebuilds the temporal graph from
// the detections, and scores consecutive truth pairs: both endpoints detected
// within tolerance, in time order, joined by a TemporalCausal edge.
EvalResult evaluate(const SyntheticData& data, const GroundTruth& truth,
                    const EvalParams& params = {});

struct SweepRow {
  double sigma = 0.0;
  int seeds = 0;
  double recognized_mean = 0.0;
  double recognized_std = 0.0;
  double chain_rate = 0.0;
  double lag_err_mean = 0.0;
  double lag_err_std = 0.0;
  double align_mean = 0.0;
  double align_std = 0.0;
};

// Runs default-script scenarios at each sigma across seeds base_seed+1..+n.
std::vector<SweepRow> sweep(const std::vector<double>& sigmas, int n_seeds,
                            std::uint64_t base_seed = 0);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace avgraph::synth
