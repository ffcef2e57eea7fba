#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "dagsim/config.hpp"
#include "dagsim/engine.hpp"
#include "dagsim/ledger.hpp"
#include "dagsim/network.hpp"
#include "dagsim/params.hpp"

namespace dagsim {

// Topology, miners and the reporting group of each miner for one run.
struct RunSetup {
  std::shared_ptr<const Topology> topo;
  std::vector<MinerSpec> miners;
  std::vector<std::string> groups;  // aligned with miners
};

/// One point of an experiment's parameter grid. The swept values are kept as
/// labels so every CSV row can be traced back to (and re-run as) its point.
struct SweepPoint {
  double alpha = NAN;
  long k = -1;
  double dtau = NAN;
  std::string scenario;
  std::string topology;
  std::string placement;
  SimConfig cfg;
  std::function<RunSetup(std::uint64_t run_seed, std::uint32_t run)> setup;
};

struct ExperimentSpec {
  std::string name;
  std::vector<SweepPoint> points;
  std::uint32_t runs = 10;
  std::uint64_t seed = 1;
};

struct ExperimentOptions {
  std::uint64_t seed = 1;
  std::uint32_t runs = 10;
  double scale = 1.0;
  Params params;
};

struct MinerRow {
  std::size_t point;
  std::uint32_t run;
  std::uint64_t seed;
  MinerId miner;
  NodeId node;
  std::string group;
  std::string strategy;
  double power;
  double reward;
  double reward_share;
  double profit_factor;
};

struct RunRow {
  std::size_t point;
  std::uint32_t run;
  std::uint64_t seed;
  std::size_t blocks;
  std::size_t total_inclusions;
  std::size_t duplicate_inclusions;
  double collision_rate;
  double throughput_ratio;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<MinerRow> miners;  // ordered by (point, run, miner)
  std::vector<RunRow> runs;      // ordered by (point, run)
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"exp1_duel",      "exp2_multi_greedy", "exp3_pool_duel",
                                              "exp4_collision", "complex1",          "complex2",
                                              "topology_study", "flat_fee_duel",     "flat_fee_multi",
                                              "custom"};
  return names;
}

inline std::string experiment_list() {
  std::string out;
  for (const auto& n : experiment_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

namespace detail {

inline constexpr std::uint64_t kPlacementStream = 100;
inline constexpr std::uint64_t kTopologyStream = 101;
inline constexpr std::uint64_t kCalibrationStream = 102;

inline std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  const auto count = static_cast<long>(std::llround((hi - lo) / step));
  for (long i = 0; i <= count; ++i) out.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  return out;
}

inline std::size_t scaled_count(double nodes, double scale) {
  return static_cast<std::size_t>(std::llround(nodes / scale));
}

// Settings shared by every experiment, before experiment-specific overrides.
inline SimConfig base_config(const ExperimentOptions& opt, const Params& p) {
  SimConfig cfg;
  cfg.block_interval = p.get_double("lambda", 20.0);
  cfg.block_capacity = static_cast<std::uint32_t>(p.get_unsigned("capacity", 100));
  cfg.mempool_target = static_cast<std::uint32_t>(p.get_unsigned("mempool", 10000));
  cfg.injection = parse_injection(p.get("injection", "60"));
  cfg.fee_model = parse_fee_model(p.get("fee", "exp:1"));
  cfg.duration = p.get_double("duration", 100000.0) / opt.scale;
  cfg.seed = opt.seed;
  cfg.runs = opt.runs;
  return cfg;
}

inline std::shared_ptr<const Topology> ring_topology(const Params& p) {
  return std::make_shared<const Topology>(build_ring(10, p.get_double("hop_delay", 1.0)));
}

inline void check_alpha(double alpha, double hi, const std::string& experiment) {
  if (!(alpha > 0.0 && alpha <= hi))
    throw Error(Errc::InvalidArgument, experiment + ": alpha " + std::to_string(alpha) + " outside (0, " +
                                           std::to_string(hi) + "]");
}

// Distinct random nodes, optionally restricted to [lo, hi).
inline std::vector<NodeId> distinct_nodes(Rng& rng, std::size_t count, NodeId lo, NodeId hi, std::vector<NodeId> taken = {}) {
  if (hi <= lo || hi - lo < count + taken.size())
    throw Error(Errc::InvalidArgument, "not enough nodes to place " + std::to_string(count) + " miners");
  std::vector<NodeId> out;
  while (out.size() < count) {
    const auto node = static_cast<NodeId>(lo + uniform_index(rng, hi - lo));
    if (std::find(taken.begin(), taken.end(), node) != taken.end()) continue;
    taken.push_back(node);
    out.push_back(node);
  }
  return out;
}

inline std::vector<SweepPoint> exp1_points(const ExperimentOptions& opt, const Params& p, const SimConfig& cfg,
                                           const std::string& name) {
  auto topo = ring_topology(p);
  std::vector<SweepPoint> points;
  for (double alpha : p.get_doubles("alpha", grid(0.1, 0.9, 0.1))) {
    check_alpha(alpha, 1.0 - 1e-12, name);
    SweepPoint pt;
    pt.alpha = alpha;
    pt.topology = "ring";
    pt.cfg = cfg;
    pt.setup = [topo, alpha](std::uint64_t, std::uint32_t) {
      RunSetup s{topo, {}, {}};
      s.miners = {{0, alpha, StrategyDescriptor::greedy(), 0}, {1, 1.0 - alpha, StrategyDescriptor::rts(), 5}};
      s.groups = {"greedy", "honest"};
      return s;
    };
    points.push_back(std::move(pt));
  }
  (void)opt;
  return points;
}

// k greedy and 10-k honest miners with power 0.1 each, one per ring node;
// greedy miners are spread evenly around the ring.
inline RunSetup ring_of_ten(std::shared_ptr<const Topology> topo, long k) {
  RunSetup s{std::move(topo), {}, {}};
  std::vector<char> greedy(10, 0);
  for (long j = 0; j < k; ++j) greedy[static_cast<std::size_t>(j * 10 / k)] = 1;
  for (NodeId i = 0; i < 10; ++i) {
    s.miners.push_back({i, 0.1, greedy[i] ? StrategyDescriptor::greedy() : StrategyDescriptor::rts(), i});
    s.groups.push_back(greedy[i] ? "greedy" : "honest");
  }
  return s;
}

inline std::vector<SweepPoint> exp2_points(const Params& p, const SimConfig& cfg) {
  auto topo = ring_topology(p);
  std::vector<SweepPoint> points;
  for (auto k : p.get_unsigneds("k", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10})) {
    if (k > 10) throw Error(Errc::InvalidArgument, "k must lie in 0..10");
    SweepPoint pt;
    pt.k = static_cast<long>(k);
    pt.topology = "ring";
    pt.cfg = cfg;
    pt.setup = [topo, k](std::uint64_t, std::uint32_t) { return ring_of_ten(topo, static_cast<long>(k)); };
    points.push_back(std::move(pt));
  }
  return points;
}

inline std::vector<SweepPoint> exp3_points(const Params& p, const SimConfig& cfg) {
  auto topo = ring_topology(p);
  std::vector<SweepPoint> points;
  for (double alpha : p.get_doubles("alpha", grid(0.1, 0.5, 0.1))) {
    check_alpha(alpha, 0.5, "exp3_pool_duel");
    SweepPoint pt;
    pt.alpha = alpha;
    pt.topology = "ring";
    pt.cfg = cfg;
    pt.setup = [topo, alpha](std::uint64_t, std::uint32_t) {
      RunSetup s{topo, {}, {}};
      s.miners.push_back({0, alpha, StrategyDescriptor::greedy(), 0});
      s.groups.push_back("greedy_pool");
      s.miners.push_back({5, alpha, StrategyDescriptor::rts(), 5});
      s.groups.push_back("honest_pool");
      const double rest = 1.0 - 2.0 * alpha;
      if (rest > 1e-12) {
        for (NodeId n : {1u, 2u, 3u, 4u, 6u, 7u, 8u, 9u}) {
          s.miners.push_back({n, rest / 8.0, StrategyDescriptor::rts(), n});
          s.groups.push_back("honest_rest");
        }
      }
      return s;
    };
    points.push_back(std::move(pt));
  }
  return points;
}

inline std::vector<SweepPoint> exp4_points(const Params& p, const SimConfig& cfg) {
  auto topo = ring_topology(p);
  std::vector<SweepPoint> points;
  const auto ks = p.get_unsigneds("k", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  for (double lambda : p.get_doubles("lambdas", {10.0, 20.0, 60.0})) {
    for (auto k : ks) {
      if (k > 10) throw Error(Errc::InvalidArgument, "k must lie in 0..10");
      SweepPoint pt;
      pt.k = static_cast<long>(k);
      pt.topology = "ring";
      pt.cfg = cfg;
      pt.cfg.block_interval = lambda;
      pt.setup = [topo, k](std::uint64_t, std::uint32_t) { return ring_of_ten(topo, static_cast<long>(k)); };
      points.push_back(std::move(pt));
    }
  }
  return points;
}

// Greedy miners go to the core or the edge; honest miners anywhere.
inline RunSetup place_miners(std::shared_ptr<const Topology> topo, std::size_t core, const std::vector<double>& greedy_powers,
                             std::size_t honest_count, double honest_power, bool greedy_in_core, Rng& rng) {
  RunSetup s{topo, {}, {}};
  const auto n = static_cast<NodeId>(topo->node_count());
  const auto greedy_nodes = greedy_in_core ? distinct_nodes(rng, greedy_powers.size(), 0, static_cast<NodeId>(core))
                                           : distinct_nodes(rng, greedy_powers.size(), static_cast<NodeId>(core), n);
  const auto honest_nodes = distinct_nodes(rng, honest_count, 0, n, greedy_nodes);
  MinerId id = 0;
  for (std::size_t i = 0; i < greedy_powers.size(); ++i) {
    s.miners.push_back({id++, greedy_powers[i], StrategyDescriptor::greedy(), greedy_nodes[i]});
    s.groups.push_back("greedy");
  }
  for (std::size_t i = 0; i < honest_count; ++i) {
    s.miners.push_back({id++, honest_power, StrategyDescriptor::rts(), honest_nodes[i]});
    s.groups.push_back("honest");
  }
  return s;
}

inline bool core_placement(const std::string& placement, std::uint32_t run) {
  if (placement == "core") return true;
  if (placement == "edge") return false;
  if (placement == "alternate") return run % 2 == 0;
  throw Error(Errc::InvalidArgument, "placement must be core, edge or alternate");
}

inline std::vector<SweepPoint> complex_points(const ExperimentOptions& opt, const Params& p, SimConfig cfg) {
  const std::size_t nodes = scaled_count(static_cast<double>(p.get_unsigned("nodes", 7592)), opt.scale);
  CoreEdgeParams shape;
  shape.core_fraction = p.get_double("core_fraction", shape.core_fraction);
  shape.core_degree = p.get_unsigned("core_degree", shape.core_degree);
  shape.edge_degree = p.get_unsigned("edge_degree", shape.edge_degree);
  const std::string placement = p.get("placement", "alternate");
  const std::size_t core = core_size(nodes, shape.core_fraction);
  const auto alphas = p.get_doubles("alpha", grid(0.1, 0.4, 0.1));
  const auto ks = p.get_unsigneds("k", {2, 3, 4});
  const double per_greedy = p.get_double("multi_alpha", 0.1);
  const std::size_t miner_count = p.get_unsigned("miners", 10);
  core_placement(placement, 0);

  std::vector<SweepPoint> points;
  for (double dtau : p.get_doubles("dtau", {5.0, 0.5})) {
    auto make_topo = [=](std::uint64_t run_seed) {
      Rng rng = make_stream(run_seed, kTopologyStream);
      return std::make_shared<const Topology>(build_core_edge(nodes, shape, DelayModel::constant(dtau), rng));
    };
    auto add = [&](double alpha, long k, const std::string& scenario, std::vector<double> greedy_powers) {
      const double greedy_total = std::accumulate(greedy_powers.begin(), greedy_powers.end(), 0.0);
      if (greedy_powers.size() >= miner_count || greedy_total >= 1.0)
        throw Error(Errc::InvalidArgument, "greedy miners leave no honest power");
      const std::size_t honest = miner_count - greedy_powers.size();
      const double honest_power = (1.0 - greedy_total) / static_cast<double>(honest);
      SweepPoint pt;
      pt.alpha = alpha;
      pt.k = k;
      pt.dtau = dtau;
      pt.scenario = scenario;
      pt.topology = "core_edge";
      pt.placement = placement;
      pt.cfg = cfg;
      pt.setup = [=](std::uint64_t run_seed, std::uint32_t run) {
        Rng rng = make_stream(run_seed, kPlacementStream);
        return place_miners(make_topo(run_seed), core, greedy_powers, honest, honest_power,
                            core_placement(placement, run), rng);
      };
      points.push_back(std::move(pt));
    };
    for (double alpha : alphas) {
      check_alpha(alpha, 1.0 - 1e-12, "complex");
      add(alpha, 1, "single", {alpha});
    }
    for (auto k : ks) {
      if (k == 0) throw Error(Errc::InvalidArgument, "complex multi scenario needs k >= 1");
      add(per_greedy * static_cast<double>(k), static_cast<long>(k), "multi",
          std::vector<double>(static_cast<std::size_t>(k), per_greedy));
    }
  }
  return points;
}

inline std::shared_ptr<const Topology> study_topology(TopologyKind kind, std::size_t nodes, double tau,
                                                      std::uint64_t run_seed) {
  Rng rng = make_stream(run_seed, kTopologyStream);
  const auto unit = DelayModel::exponential(1.0);
  Topology raw = [&] {
    switch (kind) {
      case TopologyKind::Line: return build_line(nodes, unit, rng);
      case TopologyKind::FullyConnected:
        if (nodes > 2500)
          throw Error(Errc::InvalidArgument, "fully connected topology of " + std::to_string(nodes) +
                                                 " nodes exceeds the memory budget; use --scale");
        return build_fully_connected(nodes, unit, rng);
      case TopologyKind::CoreEdge: return build_core_edge(nodes, CoreEdgeParams{}, unit, rng);
      default: throw Error(Errc::InvalidArgument, "topology study supports line, core_edge and fully_connected");
    }
  }();
  Rng calibration = make_stream(run_seed, kCalibrationStream);
  return std::make_shared<const Topology>(calibrate_diameter(raw, tau, calibration));
}

inline std::vector<SweepPoint> topology_points(const ExperimentOptions& opt, const Params& p, SimConfig cfg) {
  const std::size_t nodes = scaled_count(static_cast<double>(p.get_unsigned("nodes", 7000)), opt.scale);
  const double tau = p.get_double("tau", 5.0);
  const std::size_t miner_count = p.get_unsigned("miners", 10);
  std::vector<SweepPoint> points;
  for (const auto& kind_name : p.get_strings("kinds", {"line", "core_edge", "fully_connected"})) {
    const TopologyKind kind = parse_topology_kind(kind_name);
    for (double alpha : p.get_doubles("alpha", grid(0.1, 0.4, 0.1))) {
      check_alpha(alpha, 1.0 - 1e-12, "topology_study");
      SweepPoint pt;
      pt.alpha = alpha;
      pt.k = 1;
      pt.topology = kind_name;
      pt.placement = "random";
      pt.cfg = cfg;
      pt.setup = [=](std::uint64_t run_seed, std::uint32_t) {
        auto topo = study_topology(kind, nodes, tau, run_seed);
        Rng rng = make_stream(run_seed, kPlacementStream);
        const auto all = distinct_nodes(rng, miner_count, 0, static_cast<NodeId>(topo->node_count()));
        RunSetup s{topo, {}, {}};
        s.miners.push_back({0, alpha, StrategyDescriptor::greedy(), all[0]});
        s.groups.push_back("greedy");
        for (std::size_t i = 1; i < miner_count; ++i) {
          s.miners.push_back({static_cast<MinerId>(i), (1.0 - alpha) / static_cast<double>(miner_count - 1),
                              StrategyDescriptor::rts(), all[i]});
          s.groups.push_back("honest");
        }
        return s;
      };
      points.push_back(std::move(pt));
    }
  }
  return points;
}

// One greedy miner with power alpha and nine honest miners sharing the rest.
inline std::vector<SweepPoint> flat_multi_points(const Params& p, const SimConfig& cfg) {
  auto topo = ring_topology(p);
  std::vector<SweepPoint> points;
  for (double alpha : p.get_doubles("alpha", grid(0.1, 0.9, 0.1))) {
    check_alpha(alpha, 1.0 - 1e-12, "flat_fee_multi");
    SweepPoint pt;
    pt.alpha = alpha;
    pt.k = 1;
    pt.topology = "ring";
    pt.cfg = cfg;
    pt.setup = [topo, alpha](std::uint64_t, std::uint32_t) {
      RunSetup s{topo, {}, {}};
      s.miners.push_back({0, alpha, StrategyDescriptor::greedy(), 0});
      s.groups.push_back("greedy");
      for (NodeId n = 1; n < 10; ++n) {
        s.miners.push_back({n, (1.0 - alpha) / 9.0, StrategyDescriptor::rts(), n});
        s.groups.push_back("honest");
      }
      return s;
    };
    points.push_back(std::move(pt));
  }
  return points;
}

// "greedy:0.3@0,rts:0.7@5" -> miners with ids in listed order.
inline std::vector<MinerSpec> parse_miners(const std::string& text) {
  std::vector<MinerSpec> out;
  for (const auto& item : split(text, ',')) {
    const auto at = item.rfind('@');
    const auto colon = item.rfind(':', at);
    if (at == std::string::npos || colon == std::string::npos || colon == 0)
      throw Error(Errc::InvalidArgument, "miner '" + item + "' is not <strategy>:<power>@<node>");
    MinerSpec m;
    m.id = static_cast<MinerId>(out.size());
    m.strategy = parse_strategy(item.substr(0, colon));
    m.power = parse_double(item.substr(colon + 1, at - colon - 1), "miner power");
    m.node = static_cast<NodeId>(parse_unsigned(item.substr(at + 1), "miner node"));
    out.push_back(m);
  }
  return out;
}

// "ring:10" | "line:N" | "fully_connected:N" | "core_edge:N" | "file:<path>"
inline std::shared_ptr<const Topology> parse_topology(const std::string& text, double hop_delay, std::uint64_t seed) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(Errc::InvalidArgument, "topology '" + text + "' is not <kind>:<arg>");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  if (kind == "file") return std::make_shared<const Topology>(load_edge_list(arg));
  const auto n = parse_unsigned(arg, "topology size");
  Rng rng = make_stream(seed, kTopologyStream);
  const auto delays = DelayModel::constant(hop_delay);
  switch (parse_topology_kind(kind)) {
    case TopologyKind::Ring: return std::make_shared<const Topology>(build_ring(n, delays, rng));
    case TopologyKind::Line: return std::make_shared<const Topology>(build_line(n, delays, rng));
    case TopologyKind::FullyConnected: return std::make_shared<const Topology>(build_fully_connected(n, delays, rng));
    case TopologyKind::CoreEdge: return std::make_shared<const Topology>(build_core_edge(n, CoreEdgeParams{}, delays, rng));
    default: break;
  }
  throw Error(Errc::InvalidArgument, "unsupported topology '" + text + "'");
}

inline std::vector<SweepPoint> custom_points(const ExperimentOptions& opt, const Params& p, const SimConfig& cfg) {
  const double hop = p.get_double("hop_delay", 1.0);
  auto topo = parse_topology(p.get("topology", "ring:10"), hop, opt.seed);
  const auto miners = parse_miners(p.get("miners", "greedy:0.5@0,rts:0.5@5"));
  validate_config(cfg, miners, *topo);
  SweepPoint pt;
  pt.topology = to_string(topo->kind());
  pt.cfg = cfg;
  pt.setup = [topo, miners](std::uint64_t, std::uint32_t) {
    RunSetup s{topo, miners, {}};
    for (const auto& m : miners) s.groups.push_back(to_string(m.strategy));
    return s;
  };
  return {pt};
}

}  // namespace detail

/// Expands a named experiment into its sweep grid. Unknown names and unused
/// parameters are errors.
inline ExperimentSpec build_experiment(const std::string& name, const ExperimentOptions& opt) {
  if (std::find(experiment_names().begin(), experiment_names().end(), name) == experiment_names().end())
    throw Error(Errc::UnknownExperiment, "unknown experiment '" + name + "'; valid experiments: " + experiment_list());
  if (!(opt.scale >= 1.0)) throw Error(Errc::InvalidArgument, "scale must be >= 1");
  if (opt.runs == 0) throw Error(Errc::InvalidArgument, "runs must be positive");

  const Params& p = opt.params;
  Params defaults = p;
  if (name == "complex1" || name == "complex2" || name == "topology_study") {
    if (!defaults.has("injection")) defaults.set("injection", "30:120");
  }
  if (name == "flat_fee_duel" || name == "flat_fee_multi") {
    if (!defaults.has("fee")) defaults.set("fee", "fixed:1");
  }
  SimConfig cfg = detail::base_config(opt, defaults);

  ExperimentSpec spec;
  spec.name = name;
  spec.runs = opt.runs;
  spec.seed = opt.seed;
  if (name == "exp1_duel" || name == "flat_fee_duel") spec.points = detail::exp1_points(opt, defaults, cfg, name);
  else if (name == "exp2_multi_greedy") spec.points = detail::exp2_points(defaults, cfg);
  else if (name == "exp3_pool_duel") spec.points = detail::exp3_points(defaults, cfg);
  else if (name == "exp4_collision") spec.points = detail::exp4_points(defaults, cfg);
  else if (name == "complex1" || name == "complex2") spec.points = detail::complex_points(opt, defaults, cfg);
  else if (name == "topology_study") spec.points = detail::topology_points(opt, defaults, cfg);
  else if (name == "flat_fee_multi") spec.points = detail::flat_multi_points(defaults, cfg);
  else spec.points = detail::custom_points(opt, defaults, cfg);

  auto leftovers = defaults.unused();
  if (!leftovers.empty()) {
    std::string keys;
    for (const auto& k : leftovers) keys += (keys.empty() ? "" : ", ") + k;
    throw Error(Errc::InvalidArgument, "parameter(s) not used by " + name + ": " + keys);
  }
  return spec;
}

struct RunOutcome {
  std::vector<MinerRow> miners;
  RunRow run;
};

inline RunOutcome simulate_point(const SweepPoint& pt, std::size_t point_index, std::uint32_t run, std::uint64_t base_seed) {
  const std::uint64_t seed = base_seed + run;
  RunSetup setup = pt.setup(seed, run);
  SimConfig cfg = pt.cfg;
  cfg.seed = seed;
  const SimulationTrace trace = Simulation(cfg, setup.miners, setup.topo).run();

  OrderedLedger ledger = total_order(trace.blocks);
  attribute_rewards(ledger, std::span<const Transaction>(trace.transactions));
  const MetricsReport report = collision_metrics(ledger);
  const double total = total_reward(ledger);
  const auto pf = profit_factor(ledger, setup.miners);

  RunOutcome out;
  out.run = {point_index, run, seed, trace.blocks.size(), report.total_inclusions, report.duplicate_inclusions,
             report.collision_rate, report.throughput_ratio};
  for (std::size_t i = 0; i < setup.miners.size(); ++i) {
    const auto& m = setup.miners[i];
    if (m.power <= 0.0) continue;
    auto it = ledger.reward_of.find(m.id);
    const double reward = it == ledger.reward_of.end() ? 0.0 : it->second;
    out.miners.push_back({point_index, run, seed, m.id, m.node, setup.groups[i], to_string(m.strategy), m.power, reward,
                          reward / total, pf.at(m.id)});
  }
  return out;
}

/// Executes every (point, run) pair on a worker pool. Results are merged in
/// (point, run) order, so the output does not depend on the thread count.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = 0) {
  const std::size_t jobs = spec.points.size() * spec.runs;
  std::vector<RunOutcome> outcomes(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      try {
        outcomes[j] = simulate_point(spec.points[j / spec.runs], j / spec.runs, static_cast<std::uint32_t>(j % spec.runs), spec.seed);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  result.spec = spec;
  for (auto& o : outcomes) {
    result.runs.push_back(o.run);
    for (auto& row : o.miners) result.miners.push_back(std::move(row));
  }
  return result;
}

inline ExperimentResult run_experiment(const std::string& name, const ExperimentOptions& opt, unsigned threads = 0) {
  return run_experiment(build_experiment(name, opt), threads);
}

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

inline Stat describe(const std::vector<double>& xs) {
  Stat s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct GroupSummary {
  std::size_t point;
  std::string group;
  std::size_t miners;
  Stat profit_factor;  // per-run mean of P over the group's miners
  Stat reward_share;   // per-run sum of the group's reward shares
};

struct CollisionSummary {
  std::size_t point;
  Stat collision_rate;
  Stat throughput_ratio;
};

inline std::vector<GroupSummary> summarize_groups(const ExperimentResult& r) {
  std::vector<GroupSummary> out;
  for (std::size_t p = 0; p < r.spec.points.size(); ++p) {
    std::vector<std::string> order;
    std::map<std::string, std::map<std::uint32_t, std::pair<double, double>>> per_run;  // sum P, sum share
    std::map<std::string, std::map<std::uint32_t, std::size_t>> count;
    for (const auto& row : r.miners) {
      if (row.point != p) continue;
      if (std::find(order.begin(), order.end(), row.group) == order.end()) order.push_back(row.group);
      auto& acc = per_run[row.group][row.run];
      acc.first += row.profit_factor;
      acc.second += row.reward_share;
      ++count[row.group][row.run];
    }
    for (const auto& g : order) {
      std::vector<double> pfs, shares;
      std::size_t miners = 0;
      for (const auto& [run, acc] : per_run[g]) {
        const auto c = count[g][run];
        miners = c;
        pfs.push_back(acc.first / static_cast<double>(c));
        shares.push_back(acc.second);
      }
      out.push_back({p, g, miners, describe(pfs), describe(shares)});
    }
  }
  return out;
}

inline const GroupSummary* find_group(const std::vector<GroupSummary>& s, std::size_t point, const std::string& group) {
  for (const auto& g : s)
    if (g.point == point && g.group == group) return &g;
  return nullptr;
}

inline std::vector<CollisionSummary> summarize_collisions(const ExperimentResult& r) {
  std::vector<CollisionSummary> out;
  for (std::size_t p = 0; p < r.spec.points.size(); ++p) {
    std::vector<double> c, t;
    for (const auto& row : r.runs)
      if (row.point == p) {
        c.push_back(row.collision_rate);
        t.push_back(row.throughput_ratio);
      }
    out.push_back({p, describe(c), describe(t)});
  }
  return out;
}

// ---- CSV ---------------------------------------------------------------

namespace detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string point_columns(const ExperimentResult& r, std::size_t p) {
  const auto& pt = r.spec.points[p];
  std::string out = r.spec.name + "," + std::to_string(p) + "," + num(pt.alpha) + "," +
                    (pt.k >= 0 ? std::to_string(pt.k) : std::string()) + "," + num(pt.cfg.block_interval) + "," +
                    num(pt.dtau) + "," + pt.scenario + "," + pt.topology + "," + pt.placement + "," +
                    to_string(pt.cfg.fee_model) + "," + num(pt.cfg.duration);
  return out;
}

inline constexpr const char* kPointHeader =
    "experiment,point,alpha,k,lambda,dtau,scenario,topology,placement,fee_model,duration";

}  // namespace detail

inline void write_profit_csv(std::ostream& out, const ExperimentResult& r) {
  out << detail::kPointHeader << ",run,seed,miner,node,group,strategy,power,reward,reward_share,profit_factor\n";
  for (const auto& row : r.miners)
    out << detail::point_columns(r, row.point) << ',' << row.run << ',' << row.seed << ',' << row.miner << ','
        << row.node << ',' << row.group << ',' << row.strategy << ',' << detail::num(row.power) << ','
        << detail::num(row.reward) << ',' << detail::num(row.reward_share) << ',' << detail::num(row.profit_factor)
        << '\n';
}

inline void write_collision_csv(std::ostream& out, const ExperimentResult& r) {
  out << detail::kPointHeader << ",run,seed,blocks,total_inclusions,duplicate_inclusions,collision_rate,throughput_ratio\n";
  for (const auto& row : r.runs)
    out << detail::point_columns(r, row.point) << ',' << row.run << ',' << row.seed << ',' << row.blocks << ','
        << row.total_inclusions << ',' << row.duplicate_inclusions << ',' << detail::num(row.collision_rate) << ','
        << detail::num(row.throughput_ratio) << '\n';
}

inline void write_summary_csv(std::ostream& out, const ExperimentResult& r) {
  out << detail::kPointHeader
      << ",base_seed,runs,group,miners,profit_factor_mean,profit_factor_std,reward_share_mean,reward_share_std\n";
  for (const auto& g : summarize_groups(r))
    out << detail::point_columns(r, g.point) << ',' << r.spec.seed << ',' << r.spec.runs << ',' << g.group << ','
        << g.miners << ',' << detail::num(g.profit_factor.mean) << ',' << detail::num(g.profit_factor.stddev) << ','
        << detail::num(g.reward_share.mean) << ',' << detail::num(g.reward_share.stddev) << '\n';
}

inline void write_collision_summary_csv(std::ostream& out, const ExperimentResult& r) {
  out << detail::kPointHeader
      << ",base_seed,runs,collision_rate_mean,collision_rate_std,throughput_ratio_mean,throughput_ratio_std\n";
  for (const auto& c : summarize_collisions(r))
    out << detail::point_columns(r, c.point) << ',' << r.spec.seed << ',' << r.spec.runs << ','
        << detail::num(c.collision_rate.mean) << ',' << detail::num(c.collision_rate.stddev) << ','
        << detail::num(c.throughput_ratio.mean) << ',' << detail::num(c.throughput_ratio.stddev) << '\n';
}

}  // namespace dagsim
