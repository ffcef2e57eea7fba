#pragma once

#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "dagsim/domain.hpp"
#include "dagsim/error.hpp"
#include "dagsim/network.hpp"
#include "dagsim/strategy.hpp"

namespace dagsim {

struct MinerSpec {
  MinerId id = 0;
  double power = 0.0;  // fraction of total mining power; 0 for relays
  StrategyDescriptor strategy = StrategyDescriptor::rts();
  NodeId node = 0;
};

inline constexpr double kPowerSumTolerance = 1e-9;

/// Checks every configuration invariant in a fixed order and throws on the
/// first violation. A duration of zero is accepted and simulates nothing.
inline void validate_config(const SimConfig& cfg, const std::vector<MinerSpec>& miners, const Topology& topo) {
  if (!(cfg.block_interval > 0.0) || !std::isfinite(cfg.block_interval))
    throw Error(Errc::NonPositiveInterval, "block interval must be positive");
  if (!(cfg.injection.lo > 0.0) || !(cfg.injection.hi >= cfg.injection.lo) || !std::isfinite(cfg.injection.hi))
    throw Error(Errc::NonPositiveInterval, "injection period must be positive with lo <= hi");
  if (!(cfg.duration >= 0.0) || !std::isfinite(cfg.duration))
    throw Error(Errc::NonPositiveInterval, "duration must be non-negative");
  if (cfg.block_capacity == 0) throw Error(Errc::InvalidConfig, "block capacity must be at least 1");
  if (cfg.mempool_target < cfg.block_capacity)
    throw Error(Errc::CapacityExceedsMempool, "block capacity " + std::to_string(cfg.block_capacity) +
                                                  " exceeds mempool target " + std::to_string(cfg.mempool_target));
  if (cfg.runs == 0) throw Error(Errc::InvalidConfig, "runs must be positive");
  const bool fee_ok = cfg.fee_model.kind == FeeModel::Kind::Fixed ? cfg.fee_model.value >= 0.0 : cfg.fee_model.value > 0.0;
  if (!fee_ok || !std::isfinite(cfg.fee_model.value)) throw Error(Errc::InvalidConfig, "invalid fee model parameter");

  if (miners.empty()) throw Error(Errc::InvalidConfig, "no miners configured");
  std::unordered_set<MinerId> ids;
  double total = 0.0;
  for (const auto& m : miners) {
    if (!ids.insert(m.id).second) throw Error(Errc::InvalidConfig, "duplicate miner id " + std::to_string(m.id));
    if (!(m.power >= 0.0 && m.power <= 1.0))
      throw Error(Errc::PowerSumInvalid, "miner " + std::to_string(m.id) + " power outside [0, 1]");
    total += m.power;
  }
  if (std::abs(total - 1.0) > kPowerSumTolerance)
    throw Error(Errc::PowerSumInvalid, "miner powers sum to " + std::to_string(total));
  for (const auto& m : miners)
    if (!topo.contains(m.node))
      throw Error(Errc::UnknownNode, "miner " + std::to_string(m.id) + " sits on unknown node " + std::to_string(m.node));
}

}  // namespace dagsim
