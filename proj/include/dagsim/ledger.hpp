#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <type_traits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dagsim/config.hpp"
#include "dagsim/domain.hpp"
#include "dagsim/error.hpp"

namespace dagsim {

/// Blocks in their canonical total order plus first-inclusion reward
/// attribution. Ordering is by (mined_at, block id).
struct OrderedLedger {
  std::vector<Block> blocks;
  std::map<MinerId, double> reward_of;
  std::unordered_map<TxId, BlockId> first_inclusion;
};

struct MetricsReport {
  std::map<MinerId, double> profit_factor;
  double collision_rate = 0.0;
  double throughput_ratio = 1.0;
  std::size_t duplicate_inclusions = 0;
  std::size_t total_inclusions = 0;
};

inline bool precedes(const Block& a, const Block& b) noexcept {
  if (a.mined_at() != b.mined_at()) return a.mined_at() < b.mined_at();
  return a.id() < b.id();
}

inline OrderedLedger total_order(std::vector<Block> blocks) {
  std::sort(blocks.begin(), blocks.end(), precedes);
  std::unordered_set<BlockId> seen;
  seen.reserve(blocks.size());
  for (const auto& b : blocks)
    if (!seen.insert(b.id()).second)
      throw Error(Errc::DuplicateBlock, "block id " + std::to_string(b.id()) + " appears twice");
  OrderedLedger ledger;
  ledger.blocks = std::move(blocks);
  return ledger;
}

// Reward multiplier applied to a block's first-inclusion fees. The simulated
// protocol never discounts, so the default is the constant 1.
using RewardDiscount = std::function<double(const Block&)>;

inline double no_discount(const Block&) { return 1.0; }

/// Credits each transaction's fee to the miner of the first block (in total
/// order) that includes it. `fee_of(id)` must return the fee or throw.
template <class FeeLookup>
  requires std::is_invocable_r_v<double, FeeLookup&, TxId>
void attribute_rewards(OrderedLedger& ledger, FeeLookup&& fee_of, const RewardDiscount& discount = no_discount) {
  ledger.reward_of.clear();
  ledger.first_inclusion.clear();
  for (const auto& b : ledger.blocks) {
    double earned = 0.0;
    for (TxId tx : b.txs()) {
      if (ledger.first_inclusion.try_emplace(tx, b.id()).second) earned += fee_of(tx);
    }
    ledger.reward_of[b.miner()] += earned * discount(b);
  }
}

inline void attribute_rewards(OrderedLedger& ledger, const std::unordered_map<TxId, double>& fees,
                              const RewardDiscount& discount = no_discount) {
  attribute_rewards(
      ledger,
      [&](TxId id) {
        auto it = fees.find(id);
        if (it == fees.end()) throw Error(Errc::UnknownFee, "no fee known for transaction " + std::to_string(id));
        return it->second;
      },
      discount);
}

// Dense lookup for traces whose transaction ids are 0..n-1.
inline void attribute_rewards(OrderedLedger& ledger, std::span<const Transaction> txs,
                              const RewardDiscount& discount = no_discount) {
  attribute_rewards(
      ledger,
      [&](TxId id) {
        if (id >= txs.size() || txs[id].id != id)
          throw Error(Errc::UnknownFee, "no fee known for transaction " + std::to_string(id));
        return txs[id].fee;
      },
      discount);
}

inline double total_reward(const OrderedLedger& ledger) {
  double sum = 0.0;
  for (const auto& [miner, reward] : ledger.reward_of) sum += reward;
  return sum;
}

/// P_i = (reward_i / total reward) / power_i for every powered miner.
inline std::map<MinerId, double> profit_factor(const OrderedLedger& ledger, std::span<const MinerSpec> miners) {
  const double total = total_reward(ledger);
  if (!(total > 0.0)) throw Error(Errc::ZeroTotalReward, "no fees were earned");
  std::map<MinerId, double> out;
  for (const auto& m : miners) {
    if (m.power <= 0.0) continue;
    auto it = ledger.reward_of.find(m.id);
    const double reward = it == ledger.reward_of.end() ? 0.0 : it->second;
    out[m.id] = (reward / total) / m.power;
  }
  return out;
}

inline MetricsReport collision_metrics(const OrderedLedger& ledger) {
  MetricsReport report;
  std::unordered_set<TxId> distinct;
  for (const auto& b : ledger.blocks) {
    report.total_inclusions += b.txs().size();
    distinct.insert(b.txs().begin(), b.txs().end());
  }
  report.duplicate_inclusions = report.total_inclusions - distinct.size();
  report.collision_rate = report.total_inclusions == 0
                              ? 0.0
                              : static_cast<double>(report.duplicate_inclusions) / static_cast<double>(report.total_inclusions);
  report.throughput_ratio = 1.0 - report.collision_rate;
  return report;
}

/// Mean of P_i over the miners in `group` and over all reports.
inline double averaged_profit_factor(std::span<const MetricsReport> reports, std::span<const MinerId> group) {
  if (reports.empty() || group.empty()) throw Error(Errc::EmptyInput, "averaged profit factor needs reports and a group");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : reports)
    for (MinerId id : group) {
      auto it = r.profit_factor.find(id);
      if (it == r.profit_factor.end())
        throw Error(Errc::EmptyInput, "miner " + std::to_string(id) + " has no profit factor");
      sum += it->second;
      ++count;
    }
  return sum / static_cast<double>(count);
}

}  // namespace dagsim
