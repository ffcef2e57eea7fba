#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dagsim/domain.hpp"
#include "dagsim/error.hpp"
#include "dagsim/random.hpp"

namespace dagsim {

enum class StrategyKind { Rts, Greedy, Hybrid };

// Transaction-selection policy. `priority_fraction` is only set for Hybrid.
class StrategyDescriptor {
 public:
  static StrategyDescriptor rts() { return StrategyDescriptor(StrategyKind::Rts, std::nullopt); }
  static StrategyDescriptor greedy() { return StrategyDescriptor(StrategyKind::Greedy, std::nullopt); }
  static StrategyDescriptor hybrid(double priority_fraction = 0.1) {
    if (!(priority_fraction >= 0.0 && priority_fraction <= 1.0))
      throw Error(Errc::InvalidArgument, "hybrid priority fraction must lie in [0, 1]");
    return StrategyDescriptor(StrategyKind::Hybrid, priority_fraction);
  }

  StrategyKind kind() const noexcept { return kind_; }
  std::optional<double> priority_fraction() const noexcept { return rho_; }
  bool is_honest() const noexcept { return kind_ == StrategyKind::Rts; }

  // Slots a Hybrid fills by fee before sampling the rest.
  std::size_t priority_slots(std::size_t capacity) const {
    switch (kind_) {
      case StrategyKind::Rts: return 0;
      case StrategyKind::Greedy: return capacity;
      case StrategyKind::Hybrid:
        return std::min(capacity, static_cast<std::size_t>(std::ceil(*rho_ * capacity - 1e-9)));
    }
    return 0;
  }

  friend bool operator==(const StrategyDescriptor&, const StrategyDescriptor&) = default;

 private:
  StrategyDescriptor(StrategyKind kind, std::optional<double> rho) : kind_(kind), rho_(rho) {}

  StrategyKind kind_;
  std::optional<double> rho_;
};

// "rts" | "greedy" | "hybrid:<rho>" ("hybrid" alone means rho = 0.1).
inline StrategyDescriptor parse_strategy(std::string_view text) {
  if (text == "rts") return StrategyDescriptor::rts();
  if (text == "greedy") return StrategyDescriptor::greedy();
  if (text == "hybrid") return StrategyDescriptor::hybrid();
  if (text.substr(0, 7) == "hybrid:") {
    const std::string value(text.substr(7));
    std::size_t used = 0;
    double rho = 0.0;
    try {
      rho = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size())
      throw Error(Errc::InvalidArgument, "malformed hybrid fraction in '" + std::string(text) + "'");
    return StrategyDescriptor::hybrid(rho);
  }
  throw Error(Errc::InvalidArgument, "unknown strategy '" + std::string(text) + "' (expected rts, greedy or hybrid:<rho>)");
}

inline std::string to_string(const StrategyDescriptor& s) {
  switch (s.kind()) {
    case StrategyKind::Rts: return "rts";
    case StrategyKind::Greedy: return "greedy";
    case StrategyKind::Hybrid: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "hybrid:%g", *s.priority_fraction());
      return buf;
    }
  }
  return "rts";
}

// Fee-index key: iterates fee descending, then id ascending.
struct FeeKey {
  double fee;
  TxId id;

  friend bool operator<(const FeeKey& a, const FeeKey& b) noexcept {
    if (a.fee != b.fee) return a.fee > b.fee;
    return a.id < b.id;
  }
  friend bool operator==(const FeeKey&, const FeeKey&) = default;
};

/// Mempool snapshot a strategy selects from: random access by position (any
/// stable order), position lookup by id, and the best `count` ids in fee
/// order (fee descending, id ascending).
template <class V>
concept MempoolView = requires(const V& view, std::size_t pos, TxId id) {
  { view.size() } -> std::convertible_to<std::size_t>;
  { view.at_position(pos) } -> std::convertible_to<TxId>;
  { view.position_of(id) } -> std::convertible_to<std::size_t>;
  { view.top_by_fee(pos) } -> std::convertible_to<std::vector<TxId>>;
};

namespace detail {

// Floyd's algorithm: `count` distinct values from [0, population), in draw order.
inline std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count, Rng& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(count);
  if (count == 0) return picked;
  std::vector<char> taken(population, 0);
  for (std::size_t j = population - count; j < population; ++j) {
    const auto t = static_cast<std::size_t>(uniform_index(rng, j + 1));
    const std::size_t chosen = taken[t] ? j : t;
    taken[chosen] = 1;
    picked.push_back(chosen);
  }
  return picked;
}

}  // namespace detail

/// Fills one block: min(capacity, |view|) distinct transaction ids.
template <MempoolView View>
std::vector<TxId> select(const StrategyDescriptor& strategy, const View& view, std::size_t capacity, Rng& rng) {
  const std::size_t n = view.size();
  const std::size_t take = std::min(capacity, n);
  const std::size_t by_fee = std::min(strategy.priority_slots(capacity), take);

  std::vector<TxId> chosen;
  if (by_fee > 0) chosen = view.top_by_fee(by_fee);
  chosen.reserve(take);

  const std::size_t random_slots = take - by_fee;
  if (random_slots == 0) return chosen;

  if (by_fee == 0) {
    if (take == n) {
      for (std::size_t pos = 0; pos < n; ++pos) chosen.push_back(view.at_position(pos));
      return chosen;
    }
    for (std::size_t pos : detail::sample_indices(n, random_slots, rng)) chosen.push_back(view.at_position(pos));
    return chosen;
  }

  // Hybrid remainder: uniform over the positions the fee-ordered part left.
  std::vector<char> excluded(n, 0);
  for (TxId id : chosen) excluded[view.position_of(id)] = 1;
  std::vector<std::size_t> rest;
  rest.reserve(n - by_fee);
  for (std::size_t pos = 0; pos < n; ++pos)
    if (!excluded[pos]) rest.push_back(pos);
  for (std::size_t k : detail::sample_indices(rest.size(), random_slots, rng))
    chosen.push_back(view.at_position(rest[k]));
  return chosen;
}

}  // namespace dagsim
