#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "asmplan/strips.hpp"

namespace asmplan {
namespace {

bool contains(const std::vector<Operator>& ops, const Operator& op) {
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

bool holds(const StripsState& s, Predicate p) {
  auto preds = s.predicates();
  return std::find(preds.begin(), preds.end(), p) != preds.end();
}

TEST(Strips, InitialStateHasPutOnTableAndRotatePerObject) {
  StripsDomain dom({0.1, 0.1, 0.1});
  auto ops = dom.applicable_operators(dom.initial_state());
  std::vector<Operator> expected = {rotate(0), put_on(0, kTable), rotate(1),
                                    put_on(1, kTable), rotate(2), put_on(2, kTable)};
  EXPECT_EQ(ops, expected);
}

TEST(Strips, OneObjectOnTable) {
  StripsDomain dom({0.1, 0.1, 0.1});
  StripsState s = dom.apply(dom.initial_state(), put_on(0, kTable));
  auto ops = dom.applicable_operators(s);
  for (const Operator& op : {put_on(1, 0), put_on(1, kTable), rotate(1), rotate(2),
                             put_on(2, 0), put_on(2, kTable)}) {
    EXPECT_TRUE(contains(ops, op)) << to_string(op);
  }
  EXPECT_EQ(ops.size(), 6u);
  for (const Operator& op : ops) EXPECT_NE(op.actor, 0);
}

TEST(Strips, TerminalStateHasNoOperators) {
  StripsDomain dom({0.1, 0.2});
  StripsState s = dom.replay({put_on(0, kTable), put_on(1, 0)});
  EXPECT_TRUE(dom.is_terminal(s));
  EXPECT_TRUE(dom.applicable_operators(s).empty());
}

TEST(Strips, IsTerminal) {
  StripsDomain dom({0.1, 0.2});
  EXPECT_FALSE(dom.is_terminal(dom.initial_state()));
  EXPECT_TRUE(dom.is_terminal(dom.replay({put_on(1, kTable), put_on(0, kTable)})));
  StripsDomain empty({});
  EXPECT_TRUE(empty.is_terminal(empty.initial_state()));
  EXPECT_TRUE(empty.applicable_operators(empty.initial_state()).empty());
}

TEST(Strips, PutOnTableEffects) {
  StripsDomain dom({0.1, 0.1});
  StripsState s = dom.apply(dom.initial_state(), put_on(0, kTable));
  EXPECT_TRUE(holds(s, {PredicateKind::kOnTable, 0}));
  EXPECT_TRUE(holds(s, {PredicateKind::kClear, 0}));
  EXPECT_TRUE(s.moved(0));
  EXPECT_FALSE(s.moved(1));
  EXPECT_EQ(s.num_unmoved(), 1u);
  EXPECT_DOUBLE_EQ(s.object(0).top, 0.1);
}

TEST(Strips, PutOnStackEffects) {
  StripsDomain dom({0.1, 0.05});
  StripsState s = dom.replay({put_on(0, kTable), put_on(1, 0)});
  EXPECT_TRUE(holds(s, {PredicateKind::kOn, 1, 0}));
  EXPECT_TRUE(holds(s, {PredicateKind::kClear, 1}));
  EXPECT_FALSE(holds(s, {PredicateKind::kClear, 0}));
  EXPECT_DOUBLE_EQ(s.object(1).top, 0.15);
}

TEST(Strips, DoubleRotateRejected) {
  StripsDomain dom({0.1});
  StripsState s = dom.apply(dom.initial_state(), rotate(0));
  EXPECT_TRUE(holds(s, {PredicateKind::kRot, 0}));
  EXPECT_FALSE(dom.is_applicable(s, rotate(0)));
  EXPECT_THROW(dom.apply(s, rotate(0)), std::invalid_argument);
  // Rotation is not a placement.
  EXPECT_EQ(s.num_unmoved(), 1u);
}

TEST(Strips, CoveredSupportRejected) {
  StripsDomain dom({0.1, 0.1, 0.1});
  StripsState s = dom.replay({put_on(0, kTable), put_on(1, 0)});
  EXPECT_FALSE(dom.is_applicable(s, put_on(2, 0)));
  EXPECT_TRUE(dom.is_applicable(s, put_on(2, 1)));
}

TEST(Strips, UnplacedSupportRejected) {
  StripsDomain dom({0.1, 0.1});
  EXPECT_FALSE(dom.is_applicable(dom.initial_state(), put_on(1, 0)));
}

TEST(Strips, BridgeNeedsTwoClearSupportsOfEqualHeight) {
  StripsDomain dom({0.05, 0.05, 0.03, 0.02});
  StripsState s = dom.replay({put_on(0, kTable), put_on(1, kTable)});
  EXPECT_TRUE(dom.is_applicable(s, put_on_along_x(3, 0, 1)));
  EXPECT_TRUE(dom.is_applicable(s, put_on_along_y(3, 1, 0)));
  EXPECT_FALSE(dom.is_applicable(s, put_on_along_x(3, 0, 0)));
  EXPECT_FALSE(dom.is_applicable(s, put_on_along_x(3, 0, kTable)));
  StripsState t = dom.replay({put_on(0, kTable), put_on(2, kTable)});
  EXPECT_FALSE(dom.is_applicable(t, put_on_along_x(3, 0, 2)));  // 0.05 vs 0.03

  StripsState b = dom.apply(s, put_on_along_x(3, 0, 1));
  EXPECT_TRUE(holds(b, {PredicateKind::kOnAlongX, 3, 0, 1}));
  EXPECT_FALSE(holds(b, {PredicateKind::kClear, 0}));
  EXPECT_FALSE(holds(b, {PredicateKind::kClear, 1}));
  EXPECT_DOUBLE_EQ(b.object(3).top, 0.07);
}

TEST(Strips, EqualHeightChainsMayBridge) {
  // 0.03 + 0.02 on one side, 0.05 on the other.
  StripsDomain dom({0.03, 0.02, 0.05, 0.01});
  StripsState s = dom.replay({put_on(0, kTable), put_on(1, 0), put_on(2, kTable)});
  EXPECT_TRUE(dom.is_applicable(s, put_on_along_y(3, 1, 2)));
}

TEST(Strips, CanonicalOrderPerActor) {
  StripsDomain dom({0.1, 0.1, 0.1});
  StripsState s = dom.replay({put_on(0, kTable), put_on(1, kTable)});
  std::vector<Operator> expected = {
      rotate(2),
      put_on(2, kTable),
      put_on(2, 0),
      put_on(2, 1),
      put_on_along_x(2, 0, 1),
      put_on_along_x(2, 1, 0),
      put_on_along_y(2, 0, 1),
      put_on_along_y(2, 1, 0),
  };
  EXPECT_EQ(dom.applicable_operators(s), expected);
}

TEST(Strips, ReplayThrowsOnInapplicableStep) {
  StripsDomain dom({0.1, 0.1});
  EXPECT_THROW(dom.replay({put_on(0, kTable), put_on(0, kTable)}), std::invalid_argument);
}

TEST(Strips, RandomWalksKeepInvariants) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> h(0.01, 0.05);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> heights(1 + trial % 6);
    // Round heights so equal chains actually occur.
    for (double& x : heights) x = std::round(h(rng) * 100) / 100;
    StripsDomain dom(heights);
    StripsState s = dom.initial_state();
    const std::size_t n = heights.size();
    std::size_t steps = 0;
    while (!dom.is_terminal(s)) {
      auto ops = dom.applicable_operators(s);
      ASSERT_FALSE(ops.empty());
      std::set<Operator> unique(ops.begin(), ops.end());
      ASSERT_EQ(unique.size(), ops.size());
      std::uniform_int_distribution<std::size_t> pick(0, ops.size() - 1);
      s = dom.apply(s, ops[pick(rng)]);
      auto err = dom.check_invariants(s);
      ASSERT_FALSE(err.has_value()) << *err;
      ASSERT_LE(++steps, 2 * n);
    }
  }
}

}  // namespace
}  // namespace asmplan
