// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion;
// exit status is nonzero if any selected criterion fails.
//
//   acceptance [--only N]... [--out DIR] [--runs R] [--seed S] [--topology-scale X]

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dagsim/dagsim.hpp"

#ifndef DAGSIM_CLI
#define DAGSIM_CLI "dagsim"
#endif

namespace fs = std::filesystem;
using namespace dagsim;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Settings {
  std::uint32_t runs = 10;
  std::uint64_t seed = 1;
  double topology_scale = 10.0;
  fs::path out = "acceptance_out";
};

Settings settings;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pct(double v) { return fmt("%.1f%%", 100.0 * v); }
std::string num(double v) { return fmt("%.4g", v); }

struct Shell {
  int status;
  std::string out;
};

Shell shell(const std::string& cmd) {
  Shell r{-1, {}};
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  r.status = pclose(p);
  return r;
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon != std::string::npos) kv[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return kv;
}

std::map<std::string, std::string> cli_game(const std::string& payoffs) {
  const auto r = shell(std::string(DAGSIM_CLI) + " game " + payoffs);
  if (r.status != 0) throw Error(Errc::Io, "game " + payoffs + " exited with " + std::to_string(r.status) + ": " + r.out);
  return key_values(r.out);
}

// Experiments are run once per process and written to the output directory.
const ExperimentResult& experiment(const std::string& name, const std::map<std::string, std::string>& params = {},
                                   double scale = 1.0, const std::string& tag = "") {
  static std::map<std::string, std::unique_ptr<ExperimentResult>> cache;
  const std::string key = tag.empty() ? name : tag;
  auto& slot = cache[key];
  if (!slot) {
    ExperimentOptions opt;
    opt.seed = settings.seed;
    opt.runs = settings.runs;
    opt.scale = scale;
    for (const auto& [k, v] : params) opt.params.set(k, v);
    slot = std::make_unique<ExperimentResult>(run_experiment(name, opt));
    fs::create_directories(settings.out);
    std::ofstream s(settings.out / (key + "_summary.csv"));
    write_summary_csv(s, *slot);
    std::ofstream c(settings.out / (key + "_collision_summary.csv"));
    write_collision_summary_csv(c, *slot);
  }
  return *slot;
}

double group_mean_pf(const ExperimentResult& r, std::size_t point, const std::string& group) {
  const auto s = summarize_groups(r);
  const auto* g = find_group(s, point, group);
  if (!g) throw Error(Errc::EmptyInput, "no group " + group + " at point " + std::to_string(point));
  return g->profit_factor.mean;
}

double group_mean_share(const ExperimentResult& r, std::size_t point, const std::string& group) {
  const auto s = summarize_groups(r);
  const auto* g = find_group(s, point, group);
  if (!g) throw Error(Errc::EmptyInput, "no group " + group + " at point " + std::to_string(point));
  return g->reward_share.mean;
}

double collision_mean(const ExperimentResult& r, std::size_t point) {
  return summarize_collisions(r).at(point).collision_rate.mean;
}

// ---- game theory --------------------------------------------------------

Outcome c01() {
  auto kv = cli_game("2 0 3 1");
  const auto g = game::BaseGame::from_doubles(2, 0, 3, 1);
  const bool ok = kv["scenario"] == "S3" && kv["g_dominates_h"] == "true" && kv["pne"] == "(G,G)" &&
                  kv["delta_min"] == "0.5" && kv["delta_min_exact"] == "1/2" &&
                  game::min_discount_factor(g) == game::Rational(1, 2);
  return {ok, "scenario " + kv["scenario"] + ", pne " + kv["pne"] + ", G dominates " + kv["g_dominates_h"] +
                  ", delta_min " + kv["delta_min_exact"]};
}

Outcome c02() {
  auto kv = cli_game("2 1 3 0");
  const bool ok = kv["pne"] == "(H,G) (G,H)" && kv["mne_p_h"] == "1/2" && kv["mne_payoff"] == "3/2";
  return {ok, "pne " + kv["pne"] + ", p_H " + kv["mne_p_h"] + ", payoff " + kv["mne_payoff"]};
}

Outcome c03() {
  auto kv = cli_game("1 0.5 1.5 1");
  const bool ok = kv["scenario"] == "S5" && kv["pne"] == "(G,G)";
  return {ok, "scenario " + kv["scenario"] + ", pne " + kv["pne"]};
}

Outcome c04() {
  const std::vector<std::pair<std::string, std::string>> games{
      {"S1", "1 0 2 3"}, {"S2", "1 0 3 2"}, {"S3", "2 0 3 1"}, {"S4", "2 1 3 0"}, {"S5", "1 0.5 1.5 1"}};
  bool ok = true;
  std::string detail;
  for (const auto& [label, payoffs] : games) {
    auto kv = cli_game(payoffs);
    const std::string& pne = kv["pne"];
    const bool has_gg = pne.find("(G,G)") != std::string::npos;
    const bool has_hh = pne.find("(H,H)") != std::string::npos;
    if (kv["scenario"] != label || has_hh) ok = false;
    if ((label == "S1" || label == "S2") && !has_gg) ok = false;
    detail += (detail.empty() ? "" : "; ") + label + " pne " + pne;
  }
  return {ok, detail};
}

Outcome c05() {
  const auto g = game::BaseGame::from_doubles(2, 0, 3, 1);
  const std::uint64_t horizon = 1000000;
  double lo = 0.0, hi = 0.99;
  if (game::grim_trigger_compare(g, lo, horizon) != game::GrimChoice::Deviate ||
      game::grim_trigger_compare(g, hi, horizon) != game::GrimChoice::Comply)
    return {false, "no sign change on [0, 0.99]"};
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (game::grim_trigger_compare(g, mid, horizon) == game::GrimChoice::Comply ? hi : lo) = mid;
  }
  const double flip = 0.5 * (lo + hi);
  return {std::fabs(flip - 0.5) <= 1e-6, "flip at delta = " + fmt("%.9f", flip)};
}

// ---- engine statistics -----------------------------------------------------

Outcome c06() {
  Rng rng = make_stream(settings.seed, stream::kBlockTimes);
  const int n = 100000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample_inter_block_time(20.0, rng);
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = 1.0 - std::exp(-xs[static_cast<std::size_t>(i)] / 20.0);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double critical = 1.628 / std::sqrt(static_cast<double>(n));
  return {d < critical, "KS D = " + fmt("%.5f", d) + " (1% critical " + fmt("%.5f", critical) + ")"};
}

Outcome c07() {
  std::vector<MinerSpec> miners;
  const std::vector<double> powers{0.05, 0.15, 0.3, 0.5};
  for (std::size_t i = 0; i < powers.size(); ++i)
    miners.push_back({static_cast<MinerId>(i), powers[i], StrategyDescriptor::rts(), 0});
  Rng rng = make_stream(settings.seed, stream::kMinerPick);
  const int n = 100000;
  std::vector<int> counts(powers.size(), 0);
  for (int i = 0; i < n; ++i) ++counts[pick_miner_index(miners, rng)];
  bool ok = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double sigma = std::sqrt(n * powers[i] * (1 - powers[i]));
    const double z = std::fabs(counts[i] - n * powers[i]) / sigma;
    worst = std::max(worst, z);
    ok = ok && z <= 4.0;
  }
  return {ok, "largest deviation " + fmt("%.2f", worst) + " sigma"};
}

Outcome c08() {
  std::string miners;
  for (int i = 0; i < 10; ++i) miners += (i ? "," : "") + std::string("rts:0.1@") + std::to_string(i);
  const auto& r = experiment("custom", {{"miners", miners}, {"duration", "110000"}}, 1.0, "all_honest");
  std::map<MinerId, std::vector<double>> per_miner;
  for (const auto& row : r.miners) per_miner[row.miner].push_back(row.profit_factor);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [id, pfs] : per_miner) {
    const double mean = std::accumulate(pfs.begin(), pfs.end(), 0.0) / static_cast<double>(pfs.size());
    lo = std::min(lo, mean);
    hi = std::max(hi, mean);
  }
  std::size_t min_blocks = SIZE_MAX;
  double worst_collision = 0.0;
  for (const auto& run : r.runs) {
    min_blocks = std::min(min_blocks, run.blocks);
    worst_collision = std::max(worst_collision, run.collision_rate);
  }
  const bool ok = lo >= 0.9 && hi <= 1.1 && min_blocks >= 5000 && worst_collision < 0.02;
  return {ok, "P in [" + num(lo) + ", " + num(hi) + "], fewest blocks " + std::to_string(min_blocks) +
                  ", max collision rate " + num(worst_collision)};
}

// ---- replication ----------------------------------------------------------

Outcome c09() {
  const auto& r = experiment("exp1_duel");
  bool ok = true;
  int inversions = 0;
  double prev = INFINITY;
  std::string detail;
  for (std::size_t p = 0; p < r.spec.points.size(); ++p) {
    const double g = group_mean_pf(r, p, "greedy");
    const double h = group_mean_pf(r, p, "honest");
    if (!(g > 1.15 && h < 1.0)) ok = false;
    if (g > prev) ++inversions;
    prev = g;
    detail += (detail.empty() ? "" : " ") + num(r.spec.points[p].alpha) + ":" + fmt("%.3f", g) + "/" + fmt("%.3f", h);
  }
  ok = ok && inversions <= 1;
  return {ok, "alpha:greedyP/honestP " + detail + "; inversions " + std::to_string(inversions)};
}

Outcome c10() {
  const auto& r = experiment("exp2_multi_greedy");
  bool ok = true;
  std::string detail;
  double prev = INFINITY;
  for (std::size_t p = 0; p < r.spec.points.size(); ++p) {
    const long k = r.spec.points[p].k;
    std::string cell = "k" + std::to_string(k) + ":";
    if (k >= 1) {
      const double g = group_mean_pf(r, p, "greedy");
      if (k <= 4) {
        if (!(g < prev)) ok = false;
        prev = g;
      }
      cell += fmt("%.3f", g);
    }
    if (k >= 1 && k <= 9) {
      const double h = group_mean_pf(r, p, "honest");
      if (!(h < 1.0)) ok = false;
      cell += "/" + fmt("%.3f", h);
    }
    detail += (detail.empty() ? "" : " ") + cell;
  }
  return {ok, "greedyP/honestP " + detail};
}

Outcome c11() {
  const auto& r = experiment("exp3_pool_duel");
  bool ok = true;
  double prev_gap = -INFINITY;
  std::string detail;
  for (std::size_t p = 0; p < r.spec.points.size(); ++p) {
    const double g = group_mean_share(r, p, "greedy_pool");
    const double h = group_mean_share(r, p, "honest_pool");
    const double gap = g - h;
    if (!(g > h) || !(gap > prev_gap)) ok = false;
    prev_gap = gap;
    detail += (detail.empty() ? "" : " ") + num(r.spec.points[p].alpha) + ":" + pct(g) + "/" + pct(h);
  }
  return {ok, "alpha:greedy/honest pool share " + detail};
}

Outcome c12() {
  const auto& r = experiment("exp4_collision");
  std::map<double, std::map<long, double>> rate;  // lambda -> k -> mean
  for (std::size_t p = 0; p < r.spec.points.size(); ++p)
    rate[r.spec.points[p].cfg.block_interval][r.spec.points[p].k] = collision_mean(r, p);
  bool increasing = true, lambda_order = true, exact = true;
  std::string detail;
  for (const auto& [lambda, by_k] : rate) {
    double prev = -INFINITY;
    detail += (detail.empty() ? "" : "; ") + std::string("lambda ") + num(lambda) + ":";
    for (const auto& [k, v] : by_k) {
      if (!(v > prev)) {
        increasing = false;
        detail += " [k" + std::to_string(k) + " not above k" + std::to_string(k - 1) + "]";
      }
      prev = v;
      detail += " " + fmt("%.4f", v);
    }
  }
  for (const auto& [k, v] : rate.at(10.0)) {
    if (k < 1) continue;
    if (!(v > rate.at(20.0).at(k) && rate.at(20.0).at(k) > rate.at(60.0).at(k))) lambda_order = false;
  }
  for (const auto& row : r.runs)
    if (row.throughput_ratio != 1.0 - row.collision_rate) exact = false;
  detail += std::string("; increasing in k ") + (increasing ? "yes" : "no") + ", lambda order " +
            (lambda_order ? "yes" : "no") + ", throughput exact " + (exact ? "yes" : "no");
  return {increasing && lambda_order && exact, detail};
}

const ExperimentResult& complex_full() { return experiment("complex1"); }

Outcome c13() {
  const auto& r = complex_full();
  std::map<double, std::map<double, double>> share;  // dtau -> alpha -> greedy share
  for (std::size_t p = 0; p < r.spec.points.size(); ++p) {
    const auto& pt = r.spec.points[p];
    if (pt.scenario == "single") share[pt.dtau][pt.alpha] = group_mean_share(r, p, "greedy");
  }
  Rng rng = make_stream(settings.seed, 0);
  const auto topo = r.spec.points.front().setup(settings.seed, 0).topo;
  const double diameter = estimate_diameter_delay(*topo, rng);

  const auto& slow = share.at(5.0);
  const auto& fast = share.at(0.5);
  const bool magnitude = std::fabs(slow.at(0.1) - 0.33) <= 0.06 && std::fabs(slow.at(0.4) - 0.75) <= 0.06;
  bool ordering = true, smaller = true;
  double prev_slow = -INFINITY, prev_fast = -INFINITY;
  std::string detail = "nodes " + std::to_string(topo->node_count()) + ", diameter " + num(diameter) + "s;";
  for (const auto& [alpha, s] : slow) {
    const double f = fast.at(alpha);
    if (!(s > prev_slow) || !(f > prev_fast)) ordering = false;
    if (!(f < s)) smaller = false;
    prev_slow = s;
    prev_fast = f;
    detail += " " + num(alpha) + ":" + pct(s) + "(5s)/" + pct(f) + "(0.5s)";
  }
  detail += std::string("; 5s magnitudes ") + (magnitude ? "in band" : "out of band") + ", orderings " +
            (ordering ? "hold" : "broken") + ", 0.5s smaller " + (smaller ? "yes" : "no");
  return {magnitude && ordering && smaller, detail};
}

Outcome c14() {
  const auto& r = complex_full();
  // k * 0.1 is not bit-equal to the swept alpha, so key by rounded power
  std::map<double, std::map<double, double>> single, multi;  // dtau -> total greedy power -> rate
  for (std::size_t p = 0; p < r.spec.points.size(); ++p) {
    const auto& pt = r.spec.points[p];
    (pt.scenario == "single" ? single : multi)[pt.dtau][std::round(pt.alpha * 1e6) / 1e6] = collision_mean(r, p);
  }
  bool decreasing = true, competing = true;
  std::string detail;
  for (const auto& [dtau, by_alpha] : single) {
    double prev = INFINITY;
    detail += (detail.empty() ? "" : "; ") + std::string("dtau ") + num(dtau) + " single:";
    for (const auto& [alpha, v] : by_alpha) {
      if (dtau == 5.0 && !(v < prev)) decreasing = false;
      prev = v;
      detail += " " + fmt("%.5f", v);
    }
    detail += " multi:";
    for (const auto& [alpha, v] : multi.at(dtau)) {
      if (!(v > by_alpha.at(alpha))) competing = false;
      detail += " " + fmt("%.5f", v);
    }
  }
  detail += std::string("; single decreasing at 5s ") + (decreasing ? "yes" : "no") + ", multi above single " +
            (competing ? "yes" : "no");
  return {decreasing && competing, detail};
}

Outcome c15() {
  const auto& r = experiment("topology_study", {}, settings.topology_scale);
  std::map<double, std::vector<double>> by_alpha;
  bool above_one = true;
  std::string detail = "nodes " + std::to_string(r.spec.points.front().setup(settings.seed, 0).topo->node_count()) + ";";
  for (std::size_t p = 0; p < r.spec.points.size(); ++p) {
    const double g = group_mean_pf(r, p, "greedy");
    by_alpha[r.spec.points[p].alpha].push_back(g);
    if (!(g > 1.0)) above_one = false;
  }
  bool narrow = true;
  for (const auto& [alpha, ps] : by_alpha) {
    const auto [lo, hi] = std::minmax_element(ps.begin(), ps.end());
    const double mean = std::accumulate(ps.begin(), ps.end(), 0.0) / static_cast<double>(ps.size());
    const double spread = (*hi - *lo) / mean;
    if (!(spread < 0.2)) narrow = false;
    detail += " " + num(alpha) + ": P " + fmt("%.3f", *lo) + ".." + fmt("%.3f", *hi) + " spread " + pct(spread);
  }
  return {narrow && above_one, detail};
}

Outcome c16() {
  bool in_band = true;
  double lo = INFINITY, hi = -INFINITY;
  for (const char* name : {"flat_fee_duel", "flat_fee_multi"}) {
    const auto& r = experiment(name);
    for (const auto& g : summarize_groups(r)) {
      lo = std::min(lo, g.profit_factor.mean);
      hi = std::max(hi, g.profit_factor.mean);
    }
  }
  in_band = lo >= 0.93 && hi <= 1.07;

  // Collision check on the multi-greedy ring geometry with fixed fees.
  const auto& c = experiment("exp4_collision", {{"fee", "fixed:1"}, {"lambdas", "20"}}, 1.0, "flat_fee_collision");
  const double baseline = collision_mean(c, 0);
  bool elevated = true;
  std::string rates;
  for (std::size_t p = 1; p < c.spec.points.size(); ++p) {
    const double v = collision_mean(c, p);
    if (c.spec.points[p].k >= 2 && !(v > baseline)) elevated = false;
    rates += " k" + std::to_string(c.spec.points[p].k) + ":" + fmt("%.4f", v);
  }
  return {in_band && elevated, "P in [" + num(lo) + ", " + num(hi) + "]; all-honest rate " + fmt("%.4f", baseline) +
                                   ", greedy rates" + rates};
}

Outcome c17() {
  const fs::path a = settings.out / "determinism_a", b = settings.out / "determinism_b";
  std::string detail;
  bool ok = true;
  for (const std::string args : {"run exp1_duel --runs 2 --seed 7 --scale 10", "run complex1 --runs 2 --seed 7 --scale 20",
                                 "run exp4_collision --runs 2 --seed 7 --scale 20 --param k=0,3,10"}) {
    for (const auto& dir : {a, b}) {
      fs::remove_all(dir);
      const auto r = shell(std::string(DAGSIM_CLI) + " " + args + " --out " + dir.string());
      if (r.status != 0) return {false, args + " failed: " + r.out};
    }
    for (const auto& entry : fs::directory_iterator(a)) {
      std::ifstream x(entry.path(), std::ios::binary), y(b / entry.path().filename(), std::ios::binary);
      std::stringstream sx, sy;
      sx << x.rdbuf();
      sy << y.rdbuf();
      if (sx.str() != sy.str() || sx.str().empty()) {
        ok = false;
        detail += " differs:" + entry.path().filename().string();
      }
    }
  }
  return {ok, ok ? "CSV output byte-identical across reruns" : detail};
}

const std::vector<std::function<Outcome()>> criteria{c01, c02, c03, c04, c05, c06, c07, c08, c09,
                                                    c10, c11, c12, c13, c14, c15, c16, c17};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "missing value for %s\n", arg.c_str());
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--only") only.insert(std::stoi(value()));
    else if (arg == "--out") settings.out = value();
    else if (arg == "--runs") settings.runs = static_cast<std::uint32_t>(std::stoul(value()));
    else if (arg == "--seed") settings.seed = std::stoull(value());
    else if (arg == "--topology-scale") settings.topology_scale = std::stod(value());
    else {
      std::fprintf(stderr, "unknown argument %s\n", arg.c_str());
      return 2;
    }
  }

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %02d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
