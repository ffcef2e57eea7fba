#include <gtest/gtest.h>

#include "dagsim/params.hpp"

using namespace dagsim;

TEST(Params, ParsesNumbersStrictly) {
  EXPECT_DOUBLE_EQ(parse_double(" 2.5 ", "x"), 2.5);
  EXPECT_THROW(parse_double("2.5x", "x"), Error);
  EXPECT_THROW(parse_double("", "x"), Error);
  EXPECT_EQ(parse_unsigned("17", "n"), 17u);
  EXPECT_THROW(parse_unsigned("-1", "n"), Error);
}

TEST(Params, FeeAndInjectionSyntax) {
  EXPECT_EQ(parse_fee_model("exp:2"), FeeModel::exponential(2.0));
  EXPECT_EQ(parse_fee_model("fixed:1"), FeeModel::fixed(1.0));
  EXPECT_THROW(parse_fee_model("uniform:1"), Error);
  EXPECT_EQ(parse_injection("60"), InjectionPeriod::fixed(60.0));
  EXPECT_EQ(parse_injection("30:120"), InjectionPeriod::uniform(30.0, 120.0));
  EXPECT_THROW(parse_injection("1:2:3"), Error);
}

TEST(Params, TracksUnusedKeys) {
  Params p;
  p.set_assignment("alpha=0.1,0.2");
  p.set_assignment("typo=3");
  EXPECT_EQ(p.get_doubles("alpha", {}), (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(p.unused(), std::vector<std::string>{"typo"});
  EXPECT_THROW(p.set_assignment("novalue"), Error);
  EXPECT_EQ(p.get_unsigned("missing", 7), 7u);
}
