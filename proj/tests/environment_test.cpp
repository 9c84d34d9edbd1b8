#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lbrs/environment.hpp"
#include "test_corpus.hpp"

namespace lbrs {
namespace {

using testing::make_corpus;

UserState user_with(std::vector<double> interest, double budget = 200.0) {
  UserState u;
  u.interest = std::move(interest);
  u.budget = budget;
  return u;
}

TEST(Utility, QualityOnlyWhenGammaIsOne) {
  SimConfig c;
  c.gamma = 1.0;
  const Document doc{0, 1, 2.5};
  EXPECT_DOUBLE_EQ(utility(user_with({0.0, -0.9}), doc, c), 2.5);
  EXPECT_DOUBLE_EQ(utility(user_with({0.0, 0.9}), doc, c), 2.5);
}

TEST(Utility, InterestOnlyWhenGammaIsZero) {
  SimConfig c;
  c.gamma = 0.0;
  EXPECT_DOUBLE_EQ(utility(user_with({0.4}), Document{0, 0, -2.0}, c), 0.4);
}

TEST(Utility, Mixed) {
  SimConfig c;
  c.gamma = 0.5;
  EXPECT_DOUBLE_EQ(utility(user_with({0.5}), Document{0, 0, 2.0}, c), 1.25);
}

TEST(Bonus, Examples) {
  const SimConfig c;
  EXPECT_EQ(bonus(0.0, c), 0.0);
  EXPECT_NEAR(bonus(3.0, c), 3.176470588235294, 1e-12);
  EXPECT_NEAR(bonus(-3.0, c), -3.176470588235294, 1e-12);
}

TEST(InterestDelta, Examples) {
  EXPECT_DOUBLE_EQ(interest_delta(1.0, 0.3), 0.0);
  EXPECT_NEAR(interest_delta(0.5, 0.3), -0.075, 1e-15);
  EXPECT_NEAR(interest_delta(-0.5, 0.3), 0.075, 1e-15);
}

TEST(UpdateInterest, FullInterestIsAFixedPoint) {
  const SimConfig c;
  Rng rng(3);
  UserState u = user_with({1.0, -1.0});
  for (int i = 0; i < 100; ++i) {
    update_interest(u, 0, c, rng);
    update_interest(u, 1, c, rng);
  }
  EXPECT_EQ(u.interest[0], 1.0);
  EXPECT_EQ(u.interest[1], -1.0);
}

TEST(UpdateInterest, PositiveChangeProbabilityIsInterestShifted) {
  // I = 0.5: with probability 0.75 I + delta = 0.425, otherwise I - delta = 0.575.
  const SimConfig c;
  Rng rng(11);
  int positive = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    UserState u = user_with({0.5});
    update_interest(u, 0, c, rng);
    if (std::abs(u.interest[0] - 0.425) < 1e-12) {
      ++positive;
    } else {
      ASSERT_NEAR(u.interest[0], 0.575, 1e-12);
    }
  }
  EXPECT_NEAR(static_cast<double>(positive) / n, 0.75, 0.01);
}

TEST(UpdateInterest, RejectsUnknownTopic) {
  const SimConfig c;
  Rng rng(1);
  UserState u = user_with({0.0});
  EXPECT_THROW(update_interest(u, 3, c, rng), ContractViolation);
}

TEST(UpdateInterest, PropertyStaysInRange) {
  SimConfig c;
  Rng rng(5);
  for (double y : {0.0, 0.3, 0.7, 1.0}) {
    c.y = y;
    UserState u = spawn_user(c, 1, rng);
    for (int i = 0; i < 20000; ++i) {
      update_interest(u, static_cast<std::uint32_t>(i % c.T), c, rng);
      for (double v : u.interest) ASSERT_TRUE(v >= -1.0 && v <= 1.0);
    }
  }
}

TEST(Choose, AlwaysNullWhenNullProbabilityIsOne) {
  SimConfig c;
  c.p_null = 1.0;
  const Corpus corpus = make_corpus({{0, 1.0}, {1, -1.0}});
  Rng rng(2);
  const UserState u = user_with({0.3, 0.3});
  const std::vector<ItemId> slate{0, 1};
  for (int i = 0; i < 1000; ++i) EXPECT_FALSE(choose(u, slate, corpus, c, rng).has_value());
}

TEST(Choose, EmptySlateIsAContractViolation) {
  const SimConfig c;
  const Corpus corpus = make_corpus({{0, 1.0}});
  Rng rng(2);
  EXPECT_THROW(choose(user_with({0.0}), std::vector<ItemId>{}, corpus, c, rng), ContractViolation);
}

TEST(Choose, ZeroWeightItemIsNeverChosen) {
  SimConfig c;
  c.p_null = 0.0;
  const Corpus corpus = make_corpus({{0, 1.0}, {1, 1.0}});
  const UserState u = user_with({1.0, -1.0});  // weights 2 and 0
  Rng rng(8);
  const std::vector<ItemId> slate{1, 0};
  for (int i = 0; i < 10000; ++i) EXPECT_EQ(choose(u, slate, corpus, c, rng), ItemId{0});
}

TEST(Choose, SameTopicSlateIsUniform) {
  SimConfig c;
  c.p_null = 0.0;
  const Corpus corpus = make_corpus({{2, 1.0}, {2, -1.0}, {2, 0.5}, {2, 2.0}, {2, -2.0}});
  const UserState u = user_with({0, 0, 0.37});
  Rng rng(4);
  std::vector<int> counts(5, 0);
  const int n = 100000;
  const std::vector<ItemId> slate{0, 1, 2, 3, 4};
  for (int i = 0; i < n; ++i) ++counts[*choose(u, slate, corpus, c, rng)];
  double chi2 = 0.0;
  const double expected = n / 5.0;
  for (int k : counts) chi2 += (k - expected) * (k - expected) / expected;
  EXPECT_LT(chi2, 18.47);  // chi-square, 4 dof, p = 0.001
}

TEST(Choose, AllZeroWeightsFallBackToUniform) {
  SimConfig c;
  c.p_null = 0.0;
  const Corpus corpus = make_corpus({{0, 1.0}, {0, -1.0}});
  const UserState u = user_with({-1.0});
  Rng rng(6);
  int first = 0;
  const std::vector<ItemId> slate{0, 1};
  for (int i = 0; i < 20000; ++i) first += *choose(u, slate, corpus, c, rng) == 0;
  EXPECT_NEAR(first / 20000.0, 0.5, 0.02);
}

TEST(Choose, EmpiricalNullRateMatches) {
  const SimConfig c;  // p_null = 0.5
  const Corpus corpus = make_corpus({{0, 1.0}, {1, -1.0}, {2, 0.0}});
  const UserState u = user_with({0.2, -0.4, 0.9});
  Rng rng(10);
  int nulls = 0;
  const int n = 200000;
  const std::vector<ItemId> slate{0, 1, 2};
  for (int i = 0; i < n; ++i) nulls += !choose(u, slate, corpus, c, rng).has_value();
  EXPECT_NEAR(static_cast<double>(nulls) / n, 0.5, 0.01);
}

TEST(Step, NullChoiceCostsOneUnit) {
  SimConfig c;
  c.p_null = 1.0;
  const Corpus corpus = make_corpus({{0, 1.0}});
  UserState u = user_with({0.0});
  Rng rng(1);
  Slate s;
  s.items = {0};
  const ChoiceOutcome out = step(u, s, corpus, c, rng);
  EXPECT_FALSE(out.chosen.has_value());
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_DOUBLE_EQ(out.budget_after, 199.0);
  EXPECT_FALSE(out.session_over);
}

TEST(Step, ClickAddsBonusAndPaysDocumentCost) {
  SimConfig c;
  c.p_null = 0.0;
  const Corpus corpus = make_corpus({{0, 3.0}});
  UserState u = user_with({0.0});
  Rng rng(1);
  Slate s;
  s.items = {0};
  const ChoiceOutcome out = step(u, s, corpus, c, rng);
  ASSERT_TRUE(out.chosen.has_value());
  EXPECT_EQ(out.reward, 4.0);
  EXPECT_NEAR(out.budget_after, 199.17647058823528, 1e-9);
  EXPECT_EQ(u.budget, out.budget_after);
}

TEST(Step, FinalStepMayLeaveBudgetNegative) {
  SimConfig c;
  c.p_null = 0.0;
  const Corpus corpus = make_corpus({{0, -3.0}});
  UserState u = user_with({0.0}, 4.5);
  Rng rng(1);
  Slate s;
  s.items = {0};
  const ChoiceOutcome out = step(u, s, corpus, c, rng);
  EXPECT_NEAR(out.budget_after, -2.676470588235294, 1e-9);
  EXPECT_TRUE(out.session_over);
}

TEST(Step, RejectsExhaustedBudget) {
  const SimConfig c;
  const Corpus corpus = make_corpus({{0, 1.0}});
  UserState u = user_with({0.0}, 3.99);
  Rng rng(1);
  Slate s;
  s.items = {0};
  EXPECT_THROW(step(u, s, corpus, c, rng), ContractViolation);
}

TEST(Step, ClickUpdatesInterestOfChosenTopicOnly) {
  SimConfig c;
  c.p_null = 0.0;
  const Corpus corpus = make_corpus({{1, 1.0}});
  UserState u = user_with({0.5, 0.5, 0.5});
  Rng rng(12);
  Slate s;
  s.items = {0};
  step(u, s, corpus, c, rng);
  EXPECT_EQ(u.interest[0], 0.5);
  EXPECT_EQ(u.interest[2], 0.5);
  EXPECT_TRUE(std::abs(u.interest[1] - 0.425) < 1e-12 || std::abs(u.interest[1] - 0.575) < 1e-12);
}

TEST(Step, RewardIsExactlyRorZero) {
  const SimConfig c;
  const Corpus corpus = build_corpus([] {
    SimConfig s;
    s.M = 50;
    return s;
  }());
  Rng rng(21);
  UserState u = spawn_user(c, 0, rng);
  Slate s;
  s.items = {0, 10, 20, 30, 40};
  while (u.budget >= c.len_doc) {
    const ChoiceOutcome out = step(u, s, corpus, c, rng);
    ASSERT_EQ(out.reward, out.chosen ? 4.0 : 0.0);
    ASSERT_EQ(out.session_over, out.budget_after < c.len_doc);
  }
}

TEST(Step, AllNullSessionLength) {
  SimConfig c;
  c.p_null = 1.0;
  const Corpus corpus = make_corpus({{0, 1.0}});
  UserState u = user_with({0.0}, c.B0);
  Rng rng(1);
  Slate s;
  s.items = {0};
  int steps = 0;
  while (u.budget >= c.len_doc) {
    step(u, s, corpus, c, rng);
    ++steps;
  }
  EXPECT_EQ(steps, static_cast<int>(std::floor((c.B0 - c.len_doc) / c.len_null)) + 1);
  EXPECT_EQ(steps, 197);
}

TEST(Step, BonusDependsOnlyOnQualityWhenGammaIsOne) {
  SimConfig c;
  c.p_null = 0.0;
  const Corpus corpus = make_corpus({{0, 1.7}});
  UserState a = user_with({-0.9}, 50.0);
  UserState b = user_with({0.8}, 50.0);
  Rng rng(1);
  Slate s;
  s.items = {0};
  EXPECT_DOUBLE_EQ(step(a, s, corpus, c, rng).budget_after, step(b, s, corpus, c, rng).budget_after);
}

}  // namespace
}  // namespace lbrs
