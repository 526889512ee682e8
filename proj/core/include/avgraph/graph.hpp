#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace avgraph::graph {

enum class Modality { Image, Audio, Action, Device, Output };
enum class EdgeKind { Attention, TemporalCausal, Semantic, Information };

const char* modality_name(Modality m);
const char* edge_kind_name(EdgeKind k);
Modality modality_from_name(const std::string& s);
EdgeKind edge_kind_from_name(const std::string& s);

struct ModalityNode {
  int id = 0;
  Modality modality = Modality::Image;
  std::int64_t timestamp_ms = 0;
  std::vector<double> features;
  std::map<std::string, std::string> tags;
};

struct GraphEdge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::Attention;
  double weight = 1.0;          // [0,1]
  int lag_ms = 0;               // TemporalCausal only, 0 < lag <= 300
  double semantic_entropy = 0;  // [0,2]
};

struct HeteroTemporalGraph {
  std::vector<ModalityNode> nodes;
  std::vector<GraphEdge> edges;
  int window_ms = 150;

  // position of a node id in `nodes`; -1 when absent
  int index_of(int id) const;
};

enum class MissionType { Deployment, Response, Hidden, Unknown };
const char* mission_name(MissionType m);

struct ThreatReport {
  double threat_score = 0.0;
  MissionType mission_type_class = MissionType::Unknown;
  double intent_confidence = 0.0;
  std::vector<int> causal_chain;
  std::vector<std::pair<GraphEdge, double>> explanation;  // (edge, contribution)
  std::string input_digest;
};

struct FeatureRecord {
  Modality modality = Modality::Image;
  std::int64_t timestamp_ms = 0;
  std::vector<double> features;
  std::map<std::string, std::string> tags;
};

struct GraphConfig {
  int window_ms = 150;
  // 0 means "derive from the latest record"; otherwise records beyond this
  // are rejected.
  std::int64_t media_duration_ms = 0;
  int causal_max_lag_ms = 300;
  // fixed feature width per modality; a record that disagrees is rejected
  std::map<Modality, int> feature_dims = default_feature_dims();

  static std::map<Modality, int> default_feature_dims();
};

// Builds the temporal graph.
//  - node ids assigned in (timestamp, modality order, input order) sort
//  - Attention edges: distinct modalities, |dt| <= window_ms (stored once per
//    pair, src = earlier node; undirected for propagation)
//  - TemporalCausal edges: 0 < dt <= causal_max_lag_ms, any modalities
//  - the Device record (if any) joins only via Information edges to nodes
//    adjacent to an Output node
// Throws on empty input ("empty graph"), a timestamp outside media duration,
// or a feature-width mismatch; messages carry the offending record.
HeteroTemporalGraph build_graph(const std::vector<FeatureRecord>& records,
                                const std::optional<FeatureRecord>& device,
                                const GraphConfig& config);

// Nodes sharing an Attention/TemporalCausal edge with any Output node.
// Positions into g.nodes, sorted. Empty when the graph has no Output node.
std::vector<int> output_adjacent_indices(const HeteroTemporalGraph& g);

enum class AdjacencyMode { Binary, Weighted };

// A[i][j] over node positions; parallel edges of different kinds collapse to
// the max weight. Diagonal stays zero. symmetrize takes max(A, A^T).
Eigen::MatrixXd adjacency_matrix(const HeteroTemporalGraph& g, AdjacencyMode mode,
                                 bool symmetrize);

// Throws when a structural invariant is violated; used by loaders and tests.
void validate_graph(const HeteroTemporalGraph& g);

std::string graph_json(const HeteroTemporalGraph& g);
HeteroTemporalGraph graph_from_json(const std::string& text);
HeteroTemporalGraph load_graph(const std::string& path);
void save_graph(const std::string& path, const HeteroTemporalGraph& g);

}  // namespace avgraph::graph
