#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dagsim/error.hpp"

namespace dagsim {

using TxId = std::uint64_t;
using BlockId = std::uint64_t;
using MinerId = std::uint32_t;

struct Transaction {
  TxId id = 0;
  double fee = 0.0;
  double created_at = 0.0;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

inline Transaction make_transaction(TxId id, double fee, double created_at) {
  if (!(fee >= 0.0) || !std::isfinite(fee))
    throw Error(Errc::InvalidArgument, "transaction " + std::to_string(id) + " has negative fee");
  return Transaction{id, fee, created_at};
}

// A mined block. Construction validates the capacity and uniqueness
// invariants, so every Block in circulation satisfies them.
class Block {
 public:
  Block(BlockId id, MinerId miner, std::vector<TxId> txs, double mined_at, std::uint32_t capacity)
      : id_(id), miner_(miner), txs_(std::move(txs)), mined_at_(mined_at), capacity_(capacity) {
    if (capacity_ == 0) throw Error(Errc::InvalidArgument, "block capacity must be positive");
    if (txs_.size() > capacity_)
      throw Error(Errc::InvalidArgument, "block " + std::to_string(id) + " exceeds its capacity");
    if (!(mined_at_ >= 0.0)) throw Error(Errc::InvalidArgument, "block " + std::to_string(id) + " mined before t=0");
    std::vector<TxId> sorted = txs_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(Errc::InvalidArgument, "block " + std::to_string(id) + " repeats a transaction");
  }

  BlockId id() const noexcept { return id_; }
  MinerId miner() const noexcept { return miner_; }
  const std::vector<TxId>& txs() const noexcept { return txs_; }
  double mined_at() const noexcept { return mined_at_; }
  std::uint32_t capacity() const noexcept { return capacity_; }

  friend bool operator==(const Block&, const Block&) = default;

 private:
  BlockId id_;
  MinerId miner_;
  std::vector<TxId> txs_;
  double mined_at_;
  std::uint32_t capacity_;
};

struct FeeModel {
  enum class Kind { Exponential, Fixed };
  Kind kind = Kind::Exponential;
  double value = 1.0;  // mean for Exponential, the fee itself for Fixed

  static FeeModel exponential(double mean) { return {Kind::Exponential, mean}; }
  static FeeModel fixed(double fee) { return {Kind::Fixed, fee}; }

  friend bool operator==(const FeeModel&, const FeeModel&) = default;
};

// Fixed period when lo == hi, otherwise a fresh uniform draw per injection.
struct InjectionPeriod {
  double lo = 60.0;
  double hi = 60.0;

  static InjectionPeriod fixed(double seconds) { return {seconds, seconds}; }
  static InjectionPeriod uniform(double lo, double hi) { return {lo, hi}; }
  bool is_fixed() const noexcept { return lo == hi; }

  friend bool operator==(const InjectionPeriod&, const InjectionPeriod&) = default;
};

struct SimConfig {
  double block_interval = 20.0;  // λ, seconds between blocks network-wide
  std::uint32_t block_capacity = 100;
  std::uint32_t mempool_target = 10000;
  InjectionPeriod injection = InjectionPeriod::fixed(60.0);
  FeeModel fee_model = FeeModel::exponential(1.0);
  double duration = 100000.0;
  std::uint64_t seed = 1;
  std::uint32_t runs = 1;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

}  // namespace dagsim
