// dagsim: run experiments, analyze the base game, export topologies.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dagsim/dagsim.hpp"
#include "dagsim/ini.hpp"

namespace fs = std::filesystem;
using namespace dagsim;

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw Error(Errc::Io, "write to '" + path.string() + "' failed");
}

int run_command(const std::string& name_arg, const std::string& out_dir, const std::string& config,
                std::optional<std::uint64_t> seed, std::optional<std::uint32_t> runs, std::optional<double> scale,
                unsigned threads, const std::vector<std::string>& params) {
  ExperimentOptions opt;
  std::string name = name_arg;
  if (!config.empty()) {
    const std::string from_file = load_ini(config, opt);
    if (name.empty()) name = from_file;
  }
  if (name.empty()) throw Error(Errc::UnknownExperiment, "no experiment given; valid experiments: " + experiment_list());
  if (seed) opt.seed = *seed;
  if (runs) opt.runs = *runs;
  if (scale) opt.scale = *scale;
  for (const auto& p : params) opt.params.set_assignment(p);

  const ExperimentSpec spec = build_experiment(name, opt);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    throw Error(Errc::Io, "cannot create output directory '" + out_dir + "'");

  const ExperimentResult result = run_experiment(spec, threads);
  const fs::path dir(out_dir);
  write_file(dir / (name + "_profit.csv"), [&](std::ostream& o) { write_profit_csv(o, result); });
  write_file(dir / (name + "_collision.csv"), [&](std::ostream& o) { write_collision_csv(o, result); });
  write_file(dir / (name + "_summary.csv"), [&](std::ostream& o) { write_summary_csv(o, result); });
  write_file(dir / (name + "_collision_summary.csv"), [&](std::ostream& o) { write_collision_summary_csv(o, result); });
  std::printf("%s: %zu points x %u runs -> %s\n", name.c_str(), spec.points.size(), spec.runs, out_dir.c_str());
  return 0;
}

int game_command(const std::vector<std::string>& payoffs) {
  if (payoffs.size() != 4) throw Error(Errc::InvalidArgument, "game needs exactly four payoffs: a b c d");
  double v[4];
  for (int i = 0; i < 4; ++i) v[i] = parse_double(payoffs[static_cast<std::size_t>(i)], "payoff");
  std::cout << game::describe(game::BaseGame::from_doubles(v[0], v[1], v[2], v[3]));
  return 0;
}

int topo_command(const std::string& kind_name, std::size_t n, const std::string& out, double delay,
                 const std::string& delay_kind, std::uint64_t seed) {
  const TopologyKind kind = parse_topology_kind(kind_name);
  Rng rng = make_stream(seed, 101);
  if (delay_kind != "exp" && delay_kind != "const")
    throw Error(Errc::InvalidArgument, "delay model must be const or exp");
  const DelayModel model = delay_kind == "exp" ? DelayModel::exponential(delay) : DelayModel::constant(delay);
  Topology topo = [&] {
    switch (kind) {
      case TopologyKind::Ring: return build_ring(n, model, rng);
      case TopologyKind::Line: return build_line(n, model, rng);
      case TopologyKind::FullyConnected: return build_fully_connected(n, model, rng);
      case TopologyKind::CoreEdge: return build_core_edge(n, CoreEdgeParams{}, model, rng);
      default: throw Error(Errc::InvalidArgument, "cannot generate topology kind '" + kind_name + "'");
    }
  }();
  if (out.empty() || out == "-") {
    write_edge_list(std::cout, topo);
  } else {
    save_edge_list(out, topo);
    std::printf("%s: %zu nodes, %zu edges -> %s\n", kind_name.c_str(), topo.node_count(), topo.edge_count(), out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DAG PoW transaction-selection simulator"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list", list, "List experiments");

  auto* run = app.add_subcommand("run", "Run an experiment and write CSVs");
  std::string exp_name, out_dir = "results", config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> runs;
  std::optional<double> scale;
  unsigned threads = 0;
  std::vector<std::string> params;
  run->add_option("experiment", exp_name, "Experiment name (see --list)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--config", config, "INI config file");
  run->add_option("--seed", seed, "Base seed (run r uses seed + r)");
  run->add_option("--runs", runs, "Runs per sweep point");
  run->add_option("--scale", scale, "Divide node counts and duration by this factor");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_option("--param", params, "Parameter override key=value")->take_all();

  auto* gm = app.add_subcommand("game", "Analyze the symmetric 2x2 base game a b c d");
  std::vector<std::string> payoffs;
  gm->add_option("payoffs", payoffs, "a b c d")->expected(4)->required();

  auto* tp = app.add_subcommand("topo", "Generate a topology edge list");
  std::string kind_name, topo_out, delay_kind = "const";
  std::size_t nodes = 10;
  double delay = 1.0;
  std::uint64_t topo_seed = 1;
  tp->add_option("kind", kind_name, "ring | line | fully_connected | core_edge")->required();
  tp->add_option("--n", nodes, "Node count");
  tp->add_option("--out", topo_out, "Output file ('-' for stdout)");
  tp->add_option("--delay", delay, "Per-edge delay or mean delay in seconds");
  tp->add_option("--delay-model", delay_kind, "const | exp");
  tp->add_option("--seed", topo_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (list) {
      for (const auto& n : experiment_names()) std::printf("%s\n", n.c_str());
      return 0;
    }
    if (*run) return run_command(exp_name, out_dir, config, seed, runs, scale, threads, params);
    if (*gm) return game_command(payoffs);
    if (*tp) return topo_command(kind_name, nodes, topo_out, delay, delay_kind, topo_seed);
    std::cerr << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
