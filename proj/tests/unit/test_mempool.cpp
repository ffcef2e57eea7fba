#include <gtest/gtest.h>

#include <map>

#include "dagsim/mempool.hpp"

using namespace dagsim;

TEST(Mempool, InsertEraseContains) {
  Mempool pool;
  EXPECT_TRUE(pool.insert(3, 1.5));
  EXPECT_FALSE(pool.insert(3, 9.0));
  EXPECT_TRUE(pool.contains(3));
  EXPECT_FALSE(pool.contains(4));
  EXPECT_FALSE(pool.contains(1u << 30));
  EXPECT_TRUE(pool.erase(3));
  EXPECT_FALSE(pool.erase(3));
  EXPECT_TRUE(pool.empty());
  EXPECT_THROW(pool.position_of(3), Error);
}

TEST(Mempool, TopByFeeSkipsErasedAndReinserted) {
  Mempool pool;
  pool.insert(1, 5.0);
  pool.insert(2, 4.0);
  pool.insert(3, 3.0);
  pool.erase(1);
  EXPECT_EQ(pool.top_by_fee(2), (std::vector<TxId>{2, 3}));
  pool.insert(1, 1.0);
  EXPECT_EQ(pool.top_by_fee(3), (std::vector<TxId>{2, 3, 1}));
  EXPECT_EQ(pool.top_by_fee(3), (std::vector<TxId>{2, 3, 1}));
}

TEST(Mempool, FeeIndexIsOptional) {
  Mempool pool(false);
  pool.insert(0, 1.0);
  EXPECT_FALSE(pool.has_fee_index());
  EXPECT_THROW(pool.top_by_fee(1), Error);
}

// Random operation sequences checked against a std::map model.
TEST(Mempool, MatchesReferenceModel) {
  Rng rng = make_stream(11, 0);
  Mempool pool;
  std::map<TxId, double> model;
  for (int step = 0; step < 20000; ++step) {
    const TxId id = uniform_index(rng, 500);
    if (uniform01(rng) < 0.6) {
      const double fee = std::floor(exponential(rng, 4.0));
      EXPECT_EQ(pool.insert(id, fee), model.emplace(id, fee).second);
    } else {
      EXPECT_EQ(pool.erase(id), model.erase(id) == 1);
    }
    if (step % 500 == 0) {
      ASSERT_EQ(pool.size(), model.size());
      for (std::size_t pos = 0; pos < pool.size(); ++pos) EXPECT_EQ(pool.position_of(pool.at_position(pos)), pos);
      std::vector<FeeKey> keys;
      for (auto [k, f] : model) keys.push_back({f, k});
      std::sort(keys.begin(), keys.end());
      std::vector<TxId> expected;
      for (const auto& k : keys) expected.push_back(k.id);
      EXPECT_EQ(pool.top_by_fee(pool.size() + 5), expected);
      expected.resize(std::min<std::size_t>(expected.size(), 7));
      EXPECT_EQ(pool.top_by_fee(7), expected);
    }
  }
}
