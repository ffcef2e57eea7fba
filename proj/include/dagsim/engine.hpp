#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dagsim/config.hpp"
#include "dagsim/domain.hpp"
#include "dagsim/error.hpp"
#include "dagsim/mempool.hpp"
#include "dagsim/network.hpp"
#include "dagsim/random.hpp"
#include "dagsim/strategy.hpp"

namespace dagsim {

/// Draw from the exponential inter-block distribution with mean `block_interval`.
inline double sample_inter_block_time(double block_interval, Rng& rng) {
  if (!(block_interval > 0.0)) throw Error(Errc::NonPositiveInterval, "block interval must be positive");
  return exponential(rng, block_interval);
}

/// Index of the miner that finds the next block; miner i wins with
/// probability power_i. Zero-power miners are never chosen.
inline std::size_t pick_miner_index(std::span<const MinerSpec> miners, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  std::size_t last_powered = miners.size();
  for (std::size_t i = 0; i < miners.size(); ++i) {
    if (miners[i].power <= 0.0) continue;
    cumulative += miners[i].power;
    last_powered = i;
    if (u < cumulative) return i;
  }
  if (last_powered == miners.size()) throw Error(Errc::PowerSumInvalid, "no miner has positive power");
  return last_powered;  // rounding slack when the powers sum to 1 - eps
}

inline MinerId pick_miner(std::span<const MinerSpec> miners, Rng& rng) { return miners[pick_miner_index(miners, rng)].id; }

struct SimulationTrace {
  std::uint32_t block_capacity = 0;
  std::vector<Block> blocks;               // mining order; block id == index
  std::vector<Transaction> transactions;   // injection order; tx id == index
  std::vector<MinerId> miner_ids;
  std::vector<std::size_t> final_mempool_sizes;  // aligned with miner_ids

  friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;
};

enum class EventKind : std::uint8_t { InjectTransactions, MineBlock, BlockArrival };

struct Event {
  double time;
  std::uint64_t sequence;
  EventKind kind;
  std::uint32_t block = 0;  // BlockArrival only
  std::uint32_t miner = 0;  // BlockArrival only: receiving miner index

  // Orders a std::priority_queue so the earliest (time, sequence) is on top.
  friend bool operator>(const Event& a, const Event& b) noexcept {
    if (a.time != b.time) return a.time > b.time;
    return a.sequence > b.sequence;
  }
};

namespace stream {
inline constexpr std::uint64_t kBlockTimes = 1;
inline constexpr std::uint64_t kMinerPick = 2;
inline constexpr std::uint64_t kFees = 3;
inline constexpr std::uint64_t kInjection = 4;
inline constexpr std::uint64_t kMinerBase = 1000;
}  // namespace stream

/// Observer hooks for tests; all default to no-ops.
struct RunObserver {
  virtual ~RunObserver() = default;
  virtual void on_event(const Event&) {}
  virtual void after_injection(double /*time*/, std::span<const Mempool* const> /*mempools*/) {}
  virtual void after_arrival(std::size_t /*miner*/, const Block&, const Mempool&) {}
};

/// Single-threaded discrete-event run. Blocks are found by one network-wide
/// Poisson process thinned by miner power; every powered or relay miner keeps
/// its own mempool, which learns of a block after the shortest-path delay
/// between the two miners' nodes. Transaction injection is synchronous.
class Simulation {
 public:
  Simulation(SimConfig cfg, std::vector<MinerSpec> miners, std::shared_ptr<const Topology> topo)
      : cfg_(std::move(cfg)), miners_(std::move(miners)), delays_(std::move(topo)) {
    validate_config(cfg_, miners_, delays_.topology());
  }

  SimulationTrace run(RunObserver* observer = nullptr) {
    RunObserver none;
    observer_ = observer ? observer : &none;

    block_rng_ = make_stream(cfg_.seed, stream::kBlockTimes);
    pick_rng_ = make_stream(cfg_.seed, stream::kMinerPick);
    fee_rng_ = make_stream(cfg_.seed, stream::kFees);
    injection_rng_ = make_stream(cfg_.seed, stream::kInjection);

    const std::size_t m = miners_.size();
    states_.clear();
    for (std::size_t i = 0; i < m; ++i)
      states_.push_back(MinerState{Mempool(miners_[i].strategy.kind() != StrategyKind::Rts, cfg_.mempool_target), {},
                                   make_stream(cfg_.seed, stream::kMinerBase + i)});
    mempools_view_.clear();

    delay_.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      auto from = delays_.from(miners_[i].node);
      for (std::size_t j = 0; j < m; ++j) delay_[i][j] = (*from)[miners_[j].node];
    }

    trace_ = SimulationTrace{};
    trace_.block_capacity = cfg_.block_capacity;
    for (const auto& spec : miners_) trace_.miner_ids.push_back(spec.id);
    queue_ = {};
    sequence_ = 0;

    if (cfg_.duration > 0.0) {
      schedule({0.0, 0, EventKind::InjectTransactions});
      schedule({sample_inter_block_time(cfg_.block_interval, block_rng_), 0, EventKind::MineBlock});
    }

    while (!queue_.empty() && queue_.top().time <= cfg_.duration) {
      Event ev = queue_.top();
      queue_.pop();
      observer_->on_event(ev);
      switch (ev.kind) {
        case EventKind::InjectTransactions: inject(ev.time); break;
        case EventKind::MineBlock: mine(ev.time); break;
        case EventKind::BlockArrival: deliver(ev.miner, ev.block); break;
      }
    }

    for (const auto& st : states_) trace_.final_mempool_sizes.push_back(st.mempool.size());
    observer_ = nullptr;
    return std::move(trace_);
  }

  const std::vector<MinerSpec>& miners() const noexcept { return miners_; }
  const SimConfig& config() const noexcept { return cfg_; }

 private:
  struct MinerState {
    Mempool mempool;
    std::vector<char> known;  // indexed by block id
    Rng rng;
  };

  void schedule(Event ev) {
    ev.sequence = sequence_++;
    queue_.push(ev);
  }

  double draw_fee() {
    return cfg_.fee_model.kind == FeeModel::Kind::Fixed ? cfg_.fee_model.value
                                                        : exponential(fee_rng_, cfg_.fee_model.value);
  }

  void inject(double now) {
    // One fresh batch shared by all mempools; each takes the prefix it needs
    // to reach the target, so every mempool ends exactly at the target.
    std::size_t batch = 0;
    for (const auto& st : states_) batch = std::max(batch, cfg_.mempool_target - std::min<std::size_t>(st.mempool.size(), cfg_.mempool_target));
    const TxId first = trace_.transactions.size();
    for (std::size_t k = 0; k < batch; ++k) trace_.transactions.push_back(Transaction{first + k, draw_fee(), now});
    for (auto& st : states_) {
      const std::size_t need = cfg_.mempool_target - std::min<std::size_t>(st.mempool.size(), cfg_.mempool_target);
      for (std::size_t k = 0; k < need; ++k) st.mempool.insert(trace_.transactions[first + k]);
    }
    mempools_view_.clear();
    for (const auto& st : states_) mempools_view_.push_back(&st.mempool);
    observer_->after_injection(now, mempools_view_);

    double period = cfg_.injection.lo;
    if (!cfg_.injection.is_fixed()) period += (cfg_.injection.hi - cfg_.injection.lo) * uniform01(injection_rng_);
    schedule({now + period, 0, EventKind::InjectTransactions});
  }

  void mine(double now) {
    const std::size_t winner = pick_miner_index(miners_, pick_rng_);
    auto& st = states_[winner];
    auto txs = select(miners_[winner].strategy, st.mempool, cfg_.block_capacity, st.rng);
    const auto id = static_cast<BlockId>(trace_.blocks.size());
    trace_.blocks.emplace_back(id, miners_[winner].id, std::move(txs), now, cfg_.block_capacity);

    for (std::size_t j = 0; j < states_.size(); ++j) {
      const double d = delay_[winner][j];
      if (j == winner || d == 0.0)
        deliver(j, static_cast<std::uint32_t>(id));
      else
        schedule({now + d, 0, EventKind::BlockArrival, static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(j)});
    }
    schedule({now + sample_inter_block_time(cfg_.block_interval, block_rng_), 0, EventKind::MineBlock});
  }

  void deliver(std::size_t miner, std::uint32_t block) {
    auto& st = states_[miner];
    if (st.known.size() <= block) st.known.resize(block + 1, 0);
    st.known[block] = 1;
    const Block& b = trace_.blocks[block];
    for (TxId tx : b.txs()) st.mempool.erase(tx);
    observer_->after_arrival(miner, b, st.mempool);
  }

  SimConfig cfg_;
  std::vector<MinerSpec> miners_;
  DelayCache delays_;

  RunObserver* observer_ = nullptr;
  Rng block_rng_, pick_rng_, fee_rng_, injection_rng_;
  std::vector<MinerState> states_;
  std::vector<const Mempool*> mempools_view_;
  std::vector<std::vector<double>> delay_;
  SimulationTrace trace_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t sequence_ = 0;
};

inline SimulationTrace run(const SimConfig& cfg, const std::vector<MinerSpec>& miners, std::shared_ptr<const Topology> topo) {
  return Simulation(cfg, miners, std::move(topo)).run();
}

inline SimulationTrace run(const SimConfig& cfg, const std::vector<MinerSpec>& miners, const Topology& topo) {
  return run(cfg, miners, std::make_shared<const Topology>(topo));
}

// Line-oriented trace file:
//   # capacity <c>
//   T <id> <fee> <t>
//   B <id> <miner> <t> <tx_count> <tx ids...>
//   M <miner> <final mempool size>
inline void write_trace(std::ostream& out, const SimulationTrace& trace) {
  char buf[64];
  out << "# capacity " << trace.block_capacity << '\n';
  for (const auto& tx : trace.transactions) {
    out << "T " << tx.id;
    std::snprintf(buf, sizeof buf, " %.17g %.17g\n", tx.fee, tx.created_at);
    out << buf;
  }
  for (const auto& b : trace.blocks) {
    out << "B " << b.id() << ' ' << b.miner();
    std::snprintf(buf, sizeof buf, " %.17g ", b.mined_at());
    out << buf << b.txs().size();
    for (TxId id : b.txs()) out << ' ' << id;
    out << '\n';
  }
  for (std::size_t i = 0; i < trace.miner_ids.size(); ++i)
    out << "M " << trace.miner_ids[i] << ' ' << trace.final_mempool_sizes[i] << '\n';
}

inline SimulationTrace read_trace(std::istream& in) {
  SimulationTrace trace;
  struct RawBlock {
    BlockId id;
    MinerId miner;
    double t;
    std::vector<TxId> txs;
  };
  std::vector<RawBlock> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream f(line);
    std::string tag;
    f >> tag;
    bool ok = true;
    if (tag == "#") {
      std::string key;
      if (f >> key && key == "capacity") ok = static_cast<bool>(f >> trace.block_capacity);
    } else if (tag == "T") {
      Transaction tx;
      ok = static_cast<bool>(f >> tx.id >> tx.fee >> tx.created_at);
      if (ok) trace.transactions.push_back(make_transaction(tx.id, tx.fee, tx.created_at));
    } else if (tag == "B") {
      RawBlock b{};
      std::size_t count = 0;
      ok = static_cast<bool>(f >> b.id >> b.miner >> b.t >> count);
      for (std::size_t k = 0; ok && k < count; ++k) {
        TxId id;
        ok = static_cast<bool>(f >> id);
        b.txs.push_back(id);
      }
      if (ok) raw.push_back(std::move(b));
    } else if (tag == "M") {
      MinerId miner;
      std::size_t size;
      ok = static_cast<bool>(f >> miner >> size);
      if (ok) {
        trace.miner_ids.push_back(miner);
        trace.final_mempool_sizes.push_back(size);
      }
    } else {
      ok = false;
    }
    if (!ok) throw Error(Errc::InvalidArgument, "malformed trace record on line " + std::to_string(line_no));
  }
  std::uint32_t capacity = trace.block_capacity;
  for (const auto& b : raw) capacity = std::max<std::uint32_t>(capacity, static_cast<std::uint32_t>(b.txs.size()));
  if (capacity == 0) capacity = 1;
  if (trace.block_capacity == 0) trace.block_capacity = capacity;
  for (auto& b : raw) trace.blocks.emplace_back(b.id, b.miner, std::move(b.txs), b.t, capacity);
  return trace;
}

}  // namespace dagsim
