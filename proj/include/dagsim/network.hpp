#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dagsim/error.hpp"
#include "dagsim/random.hpp"

namespace dagsim {

using NodeId = std::uint32_t;

enum class TopologyKind { Ring, Line, FullyConnected, CoreEdge, Custom };

constexpr std::string_view to_string(TopologyKind kind) noexcept {
  switch (kind) {
    case TopologyKind::Ring: return "ring";
    case TopologyKind::Line: return "line";
    case TopologyKind::FullyConnected: return "fully_connected";
    case TopologyKind::CoreEdge: return "core_edge";
    case TopologyKind::Custom: return "custom";
  }
  return "custom";
}

inline TopologyKind parse_topology_kind(std::string_view name) {
  for (auto kind : {TopologyKind::Ring, TopologyKind::Line, TopologyKind::FullyConnected,
                    TopologyKind::CoreEdge, TopologyKind::Custom}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(Errc::InvalidArgument, "unknown topology kind '" + std::string(name) + "'");
}

struct Edge {
  NodeId u;
  NodeId v;
  double delay;
};

/// Undirected weighted graph over nodes 0..n-1. Edge weights are per-hop
/// propagation delays in seconds. Immutable once constructed; the constructor
/// rejects self-loops, parallel edges, non-positive delays and disconnected
/// graphs.
class Topology {
 public:
  struct Neighbor {
    NodeId node;
    double delay;
  };

  Topology(std::size_t node_count, std::vector<Edge> edges, TopologyKind kind = TopologyKind::Custom)
      : edges_(std::move(edges)), adjacency_(node_count), kind_(kind) {
    if (node_count == 0) throw Error(Errc::InvalidTopology, "topology has no nodes");
    for (const auto& e : edges_) {
      if (e.u >= node_count || e.v >= node_count)
        throw Error(Errc::InvalidTopology, "edge references node outside 0.." + std::to_string(node_count - 1));
      if (e.u == e.v) throw Error(Errc::InvalidTopology, "self-loop at node " + std::to_string(e.u));
      if (!(e.delay > 0.0) || !std::isfinite(e.delay))
        throw Error(Errc::InvalidTopology, "edge delay must be positive and finite");
      adjacency_[e.u].push_back({e.v, e.delay});
      adjacency_[e.v].push_back({e.u, e.delay});
    }
    for (NodeId n = 0; n < node_count; ++n) {
      auto& list = adjacency_[n];
      std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
      auto dup = std::adjacent_find(list.begin(), list.end(),
                                    [](const Neighbor& a, const Neighbor& b) { return a.node == b.node; });
      if (dup != list.end())
        throw Error(Errc::InvalidTopology,
                    "parallel edge between " + std::to_string(n) + " and " + std::to_string(dup->node));
    }
    if (reachable_count(0) != node_count) throw Error(Errc::InvalidTopology, "topology is not connected");
  }

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool contains(NodeId node) const noexcept { return node < adjacency_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Neighbor>& neighbors(NodeId node) const { return adjacency_.at(node); }
  std::size_t degree(NodeId node) const { return adjacency_.at(node).size(); }
  TopologyKind kind() const noexcept { return kind_; }

  std::size_t reachable_count(NodeId source) const {
    std::vector<char> seen(node_count(), 0);
    std::vector<NodeId> stack{source};
    seen[source] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      for (const auto& nb : adjacency_[n]) {
        if (!seen[nb.node]) {
          seen[nb.node] = 1;
          ++count;
          stack.push_back(nb.node);
        }
      }
    }
    return count;
  }

  // Hop counts from `source` (unweighted BFS).
  std::vector<std::size_t> hop_distances(NodeId source) const {
    if (!contains(source)) throw Error(Errc::UnknownNode, "node " + std::to_string(source));
    std::vector<std::size_t> dist(node_count(), std::numeric_limits<std::size_t>::max());
    std::queue<NodeId> queue;
    dist[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
      NodeId n = queue.front();
      queue.pop();
      for (const auto& nb : adjacency_[n]) {
        if (dist[nb.node] == std::numeric_limits<std::size_t>::max()) {
          dist[nb.node] = dist[n] + 1;
          queue.push(nb.node);
        }
      }
    }
    return dist;
  }

  // Copy of this topology with every delay multiplied by `factor`.
  Topology scaled(double factor) const {
    std::vector<Edge> edges = edges_;
    for (auto& e : edges) e.delay *= factor;
    return Topology(node_count(), std::move(edges), kind_);
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  TopologyKind kind_;
};

/// Per-edge delay assigner.
class DelayModel {
 public:
  enum class Kind { Constant, Exponential };

  static DelayModel constant(double seconds) { return DelayModel(Kind::Constant, seconds); }
  static DelayModel exponential(double mean_seconds) { return DelayModel(Kind::Exponential, mean_seconds); }

  Kind kind() const noexcept { return kind_; }
  double param() const noexcept { return param_; }

  // Exponential draws at or below this floor are redrawn.
  double floor() const noexcept { return std::min(1e-3, param_ / 100.0); }

  double draw(Rng& rng) const {
    if (kind_ == Kind::Constant) return param_;
    const double lo = floor();
    for (;;) {
      double d = dagsim::exponential(rng, param_);
      if (d > lo) return d;
    }
  }

 private:
  DelayModel(Kind kind, double param) : kind_(kind), param_(param) {
    if (!(param > 0.0) || !std::isfinite(param))
      throw Error(Errc::NonPositiveInterval, "delay model parameter must be positive");
  }

  Kind kind_;
  double param_;
};

inline DelayModel build_delay_model(DelayModel::Kind kind, double param) {
  return kind == DelayModel::Kind::Constant ? DelayModel::constant(param) : DelayModel::exponential(param);
}

inline Topology build_ring(std::size_t n, const DelayModel& delays, Rng& rng) {
  if (n < 3) throw Error(Errc::InvalidArgument, "ring needs at least 3 nodes");
  std::vector<Edge> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n), delays.draw(rng)});
  return Topology(n, std::move(edges), TopologyKind::Ring);
}

inline Topology build_ring(std::size_t n, double hop_delay) {
  Rng unused(0);
  return build_ring(n, DelayModel::constant(hop_delay), unused);
}

inline Topology build_line(std::size_t n, const DelayModel& delays, Rng& rng) {
  if (n < 2) throw Error(Errc::InvalidArgument, "line needs at least 2 nodes");
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(i + 1), delays.draw(rng)});
  return Topology(n, std::move(edges), TopologyKind::Line);
}

inline Topology build_line(std::size_t n, double hop_delay) {
  Rng unused(0);
  return build_line(n, DelayModel::constant(hop_delay), unused);
}

inline Topology build_fully_connected(std::size_t n, const DelayModel& delays, Rng& rng) {
  if (n < 2) throw Error(Errc::InvalidArgument, "fully connected topology needs at least 2 nodes");
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), delays.draw(rng)});
  return Topology(n, std::move(edges), TopologyKind::FullyConnected);
}

inline Topology build_fully_connected(std::size_t n, double hop_delay) {
  Rng unused(0);
  return build_fully_connected(n, DelayModel::constant(hop_delay), unused);
}

struct CoreEdgeParams {
  double core_fraction = 0.1;
  std::size_t core_degree = 30;
  std::size_t edge_degree = 3;
};

inline std::size_t core_size(std::size_t n, double core_fraction) {
  return std::min(n, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * core_fraction))));
}

/// Strongly connected core plus weakly connected edge. Core nodes are
/// 0..core_size-1 and get a near-regular random subgraph of degree
/// `core_degree` (capped at core_size-1); every later node links to `edge_degree` distinct nodes
/// drawn uniformly from the nodes placed before it.
inline Topology build_core_edge(std::size_t n, const CoreEdgeParams& params, const DelayModel& delays, Rng& rng) {
  if (n < 2) throw Error(Errc::InvalidArgument, "core-edge topology needs at least 2 nodes");
  if (!(params.core_fraction > 0.0 && params.core_fraction <= 1.0))
    throw Error(Errc::InvalidArgument, "core_fraction must lie in (0, 1]");
  const std::size_t core = core_size(n, params.core_fraction);
  if (params.core_degree == 0) throw Error(Errc::InvalidArgument, "core_degree must be positive");
  // Small cores (desk-scale runs) become complete graphs.
  const std::size_t core_degree = std::min(params.core_degree, core - 1);
  if (params.edge_degree == 0 || (core < n && params.edge_degree > core))
    throw Error(Errc::InvalidArgument, "edge_degree " + std::to_string(params.edge_degree) + " infeasible");

  std::vector<std::vector<NodeId>> adj(n);
  auto linked = [&](NodeId a, NodeId b) {
    const auto& la = adj[a];
    return std::find(la.begin(), la.end(), b) != la.end();
  };
  auto link = [&](NodeId a, NodeId b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  };

  // Core: repeatedly pair random nodes that still have free stubs.
  std::vector<NodeId> open(core);
  std::iota(open.begin(), open.end(), NodeId{0});
  std::size_t stalls = 0;
  while (open.size() > 1 && stalls < 64 * core) {
    const auto i = uniform_index(rng, open.size());
    const auto j = uniform_index(rng, open.size());
    const NodeId a = open[i], b = open[j];
    if (a == b || linked(a, b)) {
      ++stalls;
      continue;
    }
    link(a, b);
    auto saturate = [&](NodeId x) {
      if (adj[x].size() >= core_degree) {
        auto it = std::find(open.begin(), open.end(), x);
        *it = open.back();
        open.pop_back();
      }
    };
    saturate(a);
    saturate(b);
  }

  for (std::size_t node = core; node < n; ++node) {
    const auto targets = std::min(params.edge_degree, node);
    while (adj[node].size() < targets) {
      const auto peer = static_cast<NodeId>(uniform_index(rng, node));
      if (!linked(static_cast<NodeId>(node), peer)) link(static_cast<NodeId>(node), peer);
    }
  }

  // Re-wire: bridge any core component not reachable from node 0.
  std::vector<int> component(n, -1);
  int components = 0;
  for (NodeId start = 0; start < n; ++start) {
    if (component[start] >= 0) continue;
    std::vector<NodeId> stack{start};
    component[start] = components;
    while (!stack.empty()) {
      NodeId x = stack.back();
      stack.pop_back();
      for (NodeId y : adj[x])
        if (component[y] < 0) {
          component[y] = components;
          stack.push_back(y);
        }
    }
    if (components > 0) {
      NodeId anchor;
      do anchor = static_cast<NodeId>(uniform_index(rng, core));
      while (component[anchor] != 0);
      link(start, anchor);
    }
    ++components;
  }

  std::vector<Edge> edges;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b : adj[a])
      if (a < b) edges.push_back({a, b, 0.0});
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return std::pair(x.u, x.v) < std::pair(y.u, y.v); });
  for (auto& e : edges) e.delay = delays.draw(rng);
  return Topology(n, std::move(edges), TopologyKind::CoreEdge);
}

/// Minimum cumulative delay from `source` to every node (Dijkstra).
inline std::vector<double> propagation_delays(const Topology& topo, NodeId source) {
  if (!topo.contains(source)) throw Error(Errc::UnknownNode, "source node " + std::to_string(source));
  std::vector<double> dist(topo.node_count(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, n] = heap.top();
    heap.pop();
    if (d > dist[n]) continue;
    for (const auto& nb : topo.neighbors(n)) {
      const double candidate = d + nb.delay;
      if (candidate < dist[nb.node]) {
        dist[nb.node] = candidate;
        heap.push({candidate, nb.node});
      }
    }
  }
  return dist;
}

/// Lazily filled per-source delay table over a shared topology. Safe for
/// concurrent readers.
class DelayCache {
 public:
  explicit DelayCache(std::shared_ptr<const Topology> topo) : topo_(std::move(topo)) {}

  const Topology& topology() const noexcept { return *topo_; }

  std::shared_ptr<const std::vector<double>> from(NodeId source) const {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(source);
    if (it != cache_.end()) return it->second;
    auto delays = std::make_shared<const std::vector<double>>(propagation_delays(*topo_, source));
    cache_.emplace(source, delays);
    return delays;
  }

  double between(NodeId from_node, NodeId to_node) const { return from(from_node)->at(to_node); }

 private:
  std::shared_ptr<const Topology> topo_;
  mutable std::mutex mutex_;
  mutable std::map<NodeId, std::shared_ptr<const std::vector<double>>> cache_;
};

/// Largest shortest-path delay seen from the given sources.
inline double eccentricity_max(const Topology& topo, const std::vector<NodeId>& sources) {
  double worst = 0.0;
  for (NodeId s : sources) {
    auto d = propagation_delays(topo, s);
    worst = std::max(worst, *std::max_element(d.begin(), d.end()));
  }
  return worst;
}

/// Weighted diameter estimate: exact for small graphs, otherwise the maximum
/// eccentricity over `samples` random sources refined by a double sweep.
inline double estimate_diameter_delay(const Topology& topo, Rng& rng, std::size_t samples = 16) {
  const std::size_t n = topo.node_count();
  if (n <= samples) {
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    return eccentricity_max(topo, all);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    auto source = static_cast<NodeId>(uniform_index(rng, n));
    auto d = propagation_delays(topo, source);
    auto far = static_cast<NodeId>(std::max_element(d.begin(), d.end()) - d.begin());
    worst = std::max(worst, d[far]);
    auto back = propagation_delays(topo, far);
    worst = std::max(worst, *std::max_element(back.begin(), back.end()));
  }
  return worst;
}

/// Rescales every delay so the estimated diameter delay equals `target`.
inline Topology calibrate_diameter(const Topology& topo, double target, Rng& rng) {
  if (!(target > 0.0)) throw Error(Errc::NonPositiveInterval, "target diameter delay must be positive");
  const double current = estimate_diameter_delay(topo, rng);
  return topo.scaled(target / current);
}

// Edge-list text format: one "u v delay_seconds" line per edge. Lines starting
// with '#' are comments.
inline void write_edge_list(std::ostream& out, const Topology& topo) {
  out << "# nodes " << topo.node_count() << " kind " << to_string(topo.kind()) << '\n';
  char buf[64];
  for (const auto& e : topo.edges()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.delay);
    out << e.u << ' ' << e.v << ' ' << buf << '\n';
  }
}

inline Topology read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::size_t declared = 0;
  TopologyKind kind = TopologyKind::Custom;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    if (line[0] == '#') {
      std::string hash, key;
      fields >> hash;
      while (fields >> key) {
        std::string value;
        if (!(fields >> value)) break;
        if (key == "nodes") declared = std::stoull(value);
        if (key == "kind") kind = parse_topology_kind(value);
      }
      continue;
    }
    Edge e{};
    if (!(fields >> e.u >> e.v >> e.delay))
      throw Error(Errc::InvalidTopology, "malformed edge on line " + std::to_string(line_no));
    edges.push_back(e);
  }
  std::size_t n = declared;
  for (const auto& e : edges) n = std::max<std::size_t>(n, std::max(e.u, e.v) + std::size_t{1});
  return Topology(n, std::move(edges), kind);
}

inline void save_edge_list(const std::string& path, const Topology& topo) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path);
  write_edge_list(out, topo);
  if (!out) throw Error(Errc::Io, "write failed for " + path);
}

inline Topology load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read " + path);
  return read_edge_list(in);
}

}  // namespace dagsim
