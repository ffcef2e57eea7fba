#pragma once

#include <cstdint>
#include <limits>
#include <algorithm>
#include <vector>

#include "dagsim/domain.hpp"
#include "dagsim/error.hpp"
#include "dagsim/strategy.hpp"

namespace dagsim {

/// Per-miner transaction store indexed two ways: a dense slot array with an
/// id -> slot table (uniform sampling, O(1) removal by swap) and a fee index
/// (fee descending, id ascending) for fee-driven selection.
///
/// Transaction ids are assumed dense (the engine numbers them 0, 1, 2, ...),
/// so the id -> slot table is a flat array. The fee index is a max-heap with
/// lazy deletion: erase only drops the slot, and stale heap entries are
/// skipped (and discarded) by the next top_by_fee. It can be switched off for
/// miners whose strategy never reads it.
///
/// top_by_fee is logically const but reorganizes the heap, so a Mempool must
/// not be shared between threads.
class Mempool {
 public:
  explicit Mempool(bool fee_index = true, std::size_t expected = 0) : fee_index_(fee_index) { slots_.reserve(expected); }

  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }
  bool has_fee_index() const noexcept { return fee_index_; }

  bool contains(TxId id) const noexcept { return id < position_.size() && position_[id] != kAbsent; }

  TxId at_position(std::size_t pos) const { return slots_[pos].id; }
  double fee_at(std::size_t pos) const { return slots_[pos].fee; }

  std::size_t position_of(TxId id) const {
    if (!contains(id)) throw Error(Errc::InvalidArgument, "transaction " + std::to_string(id) + " not in mempool");
    return position_[id];
  }

  // The min(count, size()) best transactions, best first.
  std::vector<TxId> top_by_fee(std::size_t count) const {
    if (!fee_index_) throw Error(Errc::InvalidArgument, "mempool has no fee index");
    count = std::min(count, slots_.size());
    std::vector<TxId> out;
    out.reserve(count);
    std::vector<Entry> keep;
    keep.reserve(count);
    while (out.size() < count) {
      std::pop_heap(heap_.begin(), heap_.end(), worse);
      const Entry e = heap_.back();
      heap_.pop_back();
      if (!live(e)) continue;
      out.push_back(e.key.id);
      keep.push_back(e);
    }
    for (const auto& e : keep) {
      heap_.push_back(e);
      std::push_heap(heap_.begin(), heap_.end(), worse);
    }
    return out;
  }

  // Returns false when the id is already present.
  bool insert(TxId id, double fee) {
    if (contains(id)) return false;
    if (id >= position_.size()) position_.resize(std::max<std::size_t>(id + 1, position_.size() * 2), kAbsent);
    position_[id] = static_cast<std::uint32_t>(slots_.size());
    slots_.push_back({id, fee, ++generation_});
    if (fee_index_) {
      heap_.push_back({{fee, id}, generation_});
      std::push_heap(heap_.begin(), heap_.end(), worse);
    }
    return true;
  }

  bool insert(const Transaction& tx) { return insert(tx.id, tx.fee); }

  // Returns false when the id is absent.
  bool erase(TxId id) {
    if (!contains(id)) return false;
    const std::uint32_t slot = position_[id];
    position_[id] = kAbsent;
    if (slot + 1 != slots_.size()) {
      slots_[slot] = slots_.back();
      position_[slots_[slot].id] = slot;
    }
    slots_.pop_back();
    if (fee_index_ && heap_.size() > 2 * slots_.size() + 1024) rebuild_heap();
    return true;
  }

 private:
  static constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();

  struct Slot {
    TxId id;
    double fee;
    std::uint64_t generation;
  };

  struct Entry {
    FeeKey key;
    std::uint64_t generation;  // tells a re-inserted id from its stale entry
  };

  static bool worse(const Entry& a, const Entry& b) noexcept { return b.key < a.key; }

  bool live(const Entry& e) const noexcept {
    return contains(e.key.id) && slots_[position_[e.key.id]].generation == e.generation;
  }

  void rebuild_heap() {
    heap_.clear();
    for (const auto& s : slots_) heap_.push_back({{s.fee, s.id}, s.generation});
    std::make_heap(heap_.begin(), heap_.end(), worse);
  }

  bool fee_index_;
  std::uint64_t generation_ = 0;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> position_;
  mutable std::vector<Entry> heap_;
};

static_assert(MempoolView<Mempool>);

}  // namespace dagsim
