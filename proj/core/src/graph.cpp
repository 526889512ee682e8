#include "avgraph/graph.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

namespace avgraph::graph {

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::Image: return "Image";
    case Modality::Audio: return "Audio";
    case Modality::Action: return "Action";
    case Modality::Device: return "Device";
    case Modality::Output: return "Output";
  }
  return "?";
}

const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Attention: return "Attention";
    case EdgeKind::TemporalCausal: return "TemporalCausal";
    case EdgeKind::Semantic: return "Semantic";
    case EdgeKind::Information: return "Information";
  }
  return "?";
}

Modality modality_from_name(const std::string& s) {
  for (Modality m : {Modality::Image, Modality::Audio, Modality::Action,
                     Modality::Device, Modality::Output})
    if (s == modality_name(m)) return m;
  throw std::invalid_argument("unknown modality: " + s);
}

EdgeKind edge_kind_from_name(const std::string& s) {
  for (EdgeKind k : {EdgeKind::Attention, EdgeKind::TemporalCausal, EdgeKind::Semantic,
                     EdgeKind::Information})
    if (s == edge_kind_name(k)) return k;
  throw std::invalid_argument("unknown edge kind: " + s);
}

const char* mission_name(MissionType m) {
  switch (m) {
    case MissionType::Deployment: return "Deployment";
    case MissionType::Response: return "Response";
    case MissionType::Hidden: return "Hidden";
    case MissionType::Unknown: return "Unknown";
  }
  return "?";
}

int HeteroTemporalGraph::index_of(int id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

std::map<Modality, int> GraphConfig::default_feature_dims() {
  return {{Modality::Image, 8},
          {Modality::Audio, 5},
          {Modality::Action, 10},
          {Modality::Device, 5},
          {Modality::Output, 4}};
}

HeteroTemporalGraph build_graph(const std::vector<FeatureRecord>& records,
                                const std::optional<FeatureRecord>& device,
                                const GraphConfig& config) {
  if (records.empty()) throw std::invalid_argument("build_graph: empty graph");
  if (config.window_ms <= 0)
    throw std::invalid_argument("build_graph: window_ms must be positive");

  std::int64_t duration = config.media_duration_ms;
  if (duration <= 0) {
    for (const auto& r : records) duration = std::max(duration, r.timestamp_ms);
    if (device) duration = std::max(duration, device->timestamp_ms);
  }

  auto check_record = [&](const FeatureRecord& r, std::size_t pos) {
    if (r.timestamp_ms < 0 || r.timestamp_ms > duration)
      throw std::invalid_argument("build_graph: record " + std::to_string(pos) +
                                  " timestamp " + std::to_string(r.timestamp_ms) +
                                  " outside media duration");
    auto it = config.feature_dims.find(r.modality);
    if (it == config.feature_dims.end() ||
        static_cast<int>(r.features.size()) != it->second)
      throw std::invalid_argument("build_graph: record " + std::to_string(pos) +
                                  " feature width " + std::to_string(r.features.size()) +
                                  " does not match config for " +
                                  modality_name(r.modality));
  };

  // (timestamp, modality order, arrival order) sort defines node ids
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    check_record(records[i], i);
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].timestamp_ms != records[b].timestamp_ms)
      return records[a].timestamp_ms < records[b].timestamp_ms;
    return static_cast<int>(records[a].modality) < static_cast<int>(records[b].modality);
  });

  HeteroTemporalGraph g;
  g.window_ms = config.window_ms;
  g.nodes.reserve(records.size() + 1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = records[order[k]];
    ModalityNode n;
    n.id = static_cast<int>(k);
    n.modality = r.modality;
    n.timestamp_ms = r.timestamp_ms;
    n.features = r.features;
    n.tags = r.tags;
    g.nodes.push_back(std::move(n));
  }

  int device_id = -1;
  if (device) {
    if (device->modality != Modality::Device)
      throw std::invalid_argument("build_graph: device record must have Device modality");
    check_record(*device, records.size());
    ModalityNode n;
    n.id = static_cast<int>(g.nodes.size());
    n.modality = Modality::Device;
    n.timestamp_ms = device->timestamp_ms;
    n.features = device->features;
    n.tags = device->tags;
    device_id = n.id;
    g.nodes.push_back(std::move(n));
  }

  const int n_event = device_id < 0 ? static_cast<int>(g.nodes.size())
                                    : static_cast<int>(g.nodes.size()) - 1;
  std::set<std::tuple<int, int, int>> seen;
  auto push_edge = [&](GraphEdge e) {
    auto key = std::make_tuple(e.src, e.dst, static_cast<int>(e.kind));
    if (seen.insert(key).second) g.edges.push_back(e);
  };

  for (int i = 0; i < n_event; ++i) {
    for (int j = i + 1; j < n_event; ++j) {
      const auto& u = g.nodes[static_cast<std::size_t>(i)];
      const auto& v = g.nodes[static_cast<std::size_t>(j)];
      const std::int64_t dt = v.timestamp_ms - u.timestamp_ms;  // >= 0 by sort
      if (u.modality != v.modality && dt <= config.window_ms) {
        GraphEdge e;
        e.src = u.id;
        e.dst = v.id;
        e.kind = EdgeKind::Attention;
        push_edge(e);
      }
      if (dt > 0 && dt <= config.causal_max_lag_ms) {
        GraphEdge e;
        e.src = u.id;
        e.dst = v.id;
        e.kind = EdgeKind::TemporalCausal;
        e.lag_ms = static_cast<int>(dt);
        push_edge(e);
      }
    }
  }

  if (device_id >= 0) {
    for (int idx : output_adjacent_indices(g)) {
      const auto& n = g.nodes[static_cast<std::size_t>(idx)];
      if (n.id == device_id) continue;
      GraphEdge e;
      e.src = device_id;
      e.dst = n.id;
      e.kind = EdgeKind::Information;
      push_edge(e);
    }
  }

  std::sort(g.edges.begin(), g.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    if (a.src != b.src) return a.src < b.src;
    if (a.dst != b.dst) return a.dst < b.dst;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return g;
}

std::vector<int> output_adjacent_indices(const HeteroTemporalGraph& g) {
  std::set<int> output_ids;
  for (const auto& n : g.nodes)
    if (n.modality == Modality::Output) output_ids.insert(n.id);
  if (output_ids.empty()) return {};

  std::set<int> adjacent;
  for (const auto& e : g.edges) {
    if (e.kind != EdgeKind::Attention && e.kind != EdgeKind::TemporalCausal) continue;
    if (output_ids.count(e.src) && !output_ids.count(e.dst)) adjacent.insert(e.dst);
    if (output_ids.count(e.dst) && !output_ids.count(e.src)) adjacent.insert(e.src);
  }
  std::vector<int> out;
  for (int id : adjacent) {
    int idx = g.index_of(id);
    if (idx >= 0) out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd adjacency_matrix(const HeteroTemporalGraph& g, AdjacencyMode mode,
                                 bool symmetrize) {
  if (g.nodes.empty()) throw std::invalid_argument("adjacency_matrix: empty graph");
  const auto n = static_cast<Eigen::Index>(g.nodes.size());
  std::map<int, Eigen::Index> pos;
  for (Eigen::Index i = 0; i < n; ++i) pos[g.nodes[static_cast<std::size_t>(i)].id] = i;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges) {
    auto si = pos.find(e.src), di = pos.find(e.dst);
    if (si == pos.end() || di == pos.end())
      throw std::invalid_argument("adjacency_matrix: edge endpoint missing from node list");
    if (si->second == di->second) continue;
    const double w = mode == AdjacencyMode::Binary ? 1.0 : e.weight;
    a(si->second, di->second) = std::max(a(si->second, di->second), w);
  }
  if (symmetrize) {
    Eigen::MatrixXd at = a.transpose();
    a = a.cwiseMax(at);
  }
  return a;
}

void validate_graph(const HeteroTemporalGraph& g) {
  std::set<int> ids;
  std::map<int, const ModalityNode*> by_id;
  for (const auto& n : g.nodes) {
    if (!ids.insert(n.id).second)
      throw std::invalid_argument("graph: duplicate node id " + std::to_string(n.id));
    if (n.timestamp_ms < 0)
      throw std::invalid_argument("graph: negative timestamp on node " + std::to_string(n.id));
    by_id[n.id] = &n;
  }
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& e : g.edges) {
    if (!by_id.count(e.src) || !by_id.count(e.dst))
      throw std::invalid_argument("graph: edge endpoint not in node list");
    if (e.src == e.dst) throw std::invalid_argument("graph: self-loop forbidden");
    if (!(e.weight >= 0.0 && e.weight <= 1.0))
      throw std::invalid_argument("graph: edge weight outside [0,1]");
    if (!(e.semantic_entropy >= 0.0 && e.semantic_entropy <= 2.0))
      throw std::invalid_argument("graph: semantic_entropy outside [0,2]");
    if (e.kind == EdgeKind::TemporalCausal) {
      if (std::abs(e.lag_ms) > 300)
        throw std::invalid_argument("graph: |lag_ms| exceeds 300");
      const auto* s = by_id[e.src];
      const auto* d = by_id[e.dst];
      if (d->timestamp_ms < s->timestamp_ms)
        throw std::invalid_argument("graph: TemporalCausal edge runs backwards in time");
      if (d->timestamp_ms - s->timestamp_ms != e.lag_ms)
        throw std::invalid_argument("graph: lag_ms disagrees with timestamps");
    }
    if (!seen.insert({e.src, e.dst, static_cast<int>(e.kind)}).second)
      throw std::invalid_argument("graph: duplicate (src,dst,kind) edge");
  }
}

namespace {

nlohmann::json node_to_json(const ModalityNode& n) {
  return {{"id", n.id},
          {"modality", modality_name(n.modality)},
          {"timestamp_ms", n.timestamp_ms},
          {"features", n.features},
          {"tags", n.tags}};
}

nlohmann::json edge_to_json(const GraphEdge& e) {
  return {{"src", e.src},
          {"dst", e.dst},
          {"kind", edge_kind_name(e.kind)},
          {"weight", e.weight},
          {"lag_ms", e.lag_ms},
          {"semantic_entropy", e.semantic_entropy}};
}

}  // namespace

std::string graph_json(const HeteroTemporalGraph& g) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  j["edges"] = nlohmann::json::array();
  for (const auto& n : g.nodes) j["nodes"].push_back(node_to_json(n));
  for (const auto& e : g.edges) j["edges"].push_back(edge_to_json(e));
  j["window_ms"] = g.window_ms;
  return j.dump(2);
}

HeteroTemporalGraph graph_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  HeteroTemporalGraph g;
  g.window_ms = j.value("window_ms", 150);
  for (const auto& jn : j.at("nodes")) {
    ModalityNode n;
    n.id = jn.at("id").get<int>();
    n.modality = modality_from_name(jn.at("modality").get<std::string>());
    n.timestamp_ms = jn.at("timestamp_ms").get<std::int64_t>();
    if (jn.contains("features")) n.features = jn["features"].get<std::vector<double>>();
    if (jn.contains("tags")) n.tags = jn["tags"].get<std::map<std::string, std::string>>();
    g.nodes.push_back(std::move(n));
  }
  for (const auto& je : j.at("edges")) {
    GraphEdge e;
    e.src = je.at("src").get<int>();
    e.dst = je.at("dst").get<int>();
    e.kind = edge_kind_from_name(je.at("kind").get<std::string>());
    e.weight = je.value("weight", 1.0);
    e.lag_ms = je.value("lag_ms", 0);
    e.semantic_entropy = je.value("semantic_entropy", 0.0);
    g.edges.push_back(e);
  }
  validate_graph(g);
  return g;
}

HeteroTemporalGraph load_graph(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("graph: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return graph_from_json(text);
}

void save_graph(const std::string& path, const HeteroTemporalGraph& g) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("graph: cannot write " + path);
  f << graph_json(g) << "\n";
}

}  // namespace avgraph::graph
