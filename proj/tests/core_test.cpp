#include <gtest/gtest.h>

#include <cmath>

#include "lbrs/core.hpp"

namespace lbrs {
namespace {

TEST(Corpus, TwentyTopicsGiveSixHighQualityTopics) {
  SimConfig config;
  config.M = 2000;
  const Corpus corpus = build_corpus(config);
  EXPECT_EQ(corpus.high_topic_count, 6u);
  ASSERT_EQ(corpus.size(), 2000u);
  for (const Document& d : corpus.documents) {
    if (d.topic < 6) {
      EXPECT_GE(d.quality, 0.0);
    } else {
      EXPECT_LE(d.quality, 0.0);
    }
  }
}

TEST(Corpus, ThreeTopicSignConstraint) {
  SimConfig config;
  config.T = 3;
  config.M = 3;
  config.seed = 42;
  const Corpus corpus = build_corpus(config);
  for (const Document& d : corpus.documents) {
    if (d.topic == 0) EXPECT_GE(d.quality, 0.0);
    else EXPECT_LE(d.quality, 0.0);
  }
}

TEST(Corpus, SameSeedSameCorpus) {
  SimConfig config;
  config.M = 500;
  config.seed = 7;
  const Corpus a = build_corpus(config);
  const Corpus b = build_corpus(config);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.documents[i].topic, b.documents[i].topic);
    EXPECT_EQ(a.documents[i].quality, b.documents[i].quality);
  }
}

TEST(Corpus, RejectsEmptyShapes) {
  SimConfig config;
  config.M = 0;
  EXPECT_THROW(build_corpus(config), ConfigError);
  config.M = 10;
  config.T = 0;
  EXPECT_THROW(build_corpus(config), ConfigError);
}

TEST(Corpus, PropertyQualityPartitionAndDenseIds) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SimConfig config;
    config.seed = seed;
    config.M = 200 + seed;
    config.T = 1 + static_cast<std::uint32_t>(seed % 25);
    const Corpus corpus = build_corpus(config);
    ASSERT_EQ(corpus.high_topic_count, config.T / 3);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const Document& d = corpus.documents[i];
      ASSERT_EQ(d.id, i);
      ASSERT_LT(d.topic, config.T);
      ASSERT_LE(std::abs(d.quality), config.Q_max);
      if (d.topic < corpus.high_topic_count) ASSERT_GE(d.quality, 0.0);
      else ASSERT_LE(d.quality, 0.0);
    }
  }
}

TEST(User, SpawnHasFullBudgetAndBoundedInterest) {
  SimConfig config;
  for (std::uint64_t u = 0; u < 100; ++u) {
    const UserState user = spawn_user(config, u);
    EXPECT_EQ(user.budget, 200.0);
    EXPECT_EQ(user.user_id, u);
    ASSERT_EQ(user.interest.size(), 20u);
    for (double v : user.interest) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(User, SameSeedAndIdSameUser) {
  SimConfig config;
  config.seed = 99;
  const UserState a = spawn_user(config, 17);
  const UserState b = spawn_user(config, 17);
  const UserState c = spawn_user(config, 18);
  EXPECT_EQ(a.interest, b.interest);
  EXPECT_NE(a.interest, c.interest);
}

TEST(Config, DefaultsMatchReferenceTable) {
  const SimConfig c;
  EXPECT_EQ(c.N, 5000u);
  EXPECT_EQ(c.M, 10000u);
  EXPECT_EQ(c.k, 5u);
  EXPECT_EQ(c.Q_max, 3.0);
  EXPECT_EQ(c.Q_min(), -3.0);
  EXPECT_EQ(c.T, 20u);
  EXPECT_EQ(c.y, 0.3);
  EXPECT_EQ(c.alpha, 1.0);
  EXPECT_EQ(c.beta, 1.0);
  EXPECT_EQ(c.gamma, 1.0);
  EXPECT_EQ(c.B0, 200.0);
  EXPECT_EQ(c.len_doc, 4.0);
  EXPECT_EQ(c.len_null, 1.0);
  EXPECT_EQ(c.len_bonus, 4.0);
  EXPECT_EQ(c.p_null, 0.5);
  EXPECT_EQ(c.reward_click, 4.0);
  EXPECT_DOUBLE_EQ(c.resolved_p(), 0.05);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, DefaultPFollowsK) {
  SimConfig c;
  c.k = 15;
  EXPECT_DOUBLE_EQ(c.resolved_p(), 0.15);
  c.p = 0.02;
  EXPECT_DOUBLE_EQ(c.resolved_p(), 0.02);
}

TEST(Config, ValidationNamesTheField) {
  auto message_for = [](SimConfig c) {
    try {
      validate(c);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  SimConfig c;
  c.p = 0.0;
  EXPECT_NE(message_for(c).find(" p "), std::string::npos);
  c = SimConfig{};
  c.p = 1.5;
  EXPECT_NE(message_for(c).find(" p "), std::string::npos);
  c = SimConfig{};
  c.k = 0;
  EXPECT_NE(message_for(c).find(" k "), std::string::npos);
  c = SimConfig{};
  c.p_null = 1.1;
  EXPECT_NE(message_for(c).find("p_null"), std::string::npos);
  c = SimConfig{};
  c.lambda = -1.0;
  EXPECT_NE(message_for(c).find("lambda"), std::string::npos);
  c = SimConfig{};
  c.gamma = 2.0;
  EXPECT_NE(message_for(c).find("gamma"), std::string::npos);
}

TEST(AgentKindNames, ParseAndPrint) {
  for (AgentKind k : {AgentKind::BasicLbrs, AgentKind::PriorityLbrs, AgentKind::HeteroLbrs, AgentKind::Random,
                      AgentKind::EpsGreedy}) {
    EXPECT_EQ(parse_agent_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_agent_kind("h"), AgentKind::HeteroLbrs);
  EXPECT_EQ(parse_agent_kind("eps"), AgentKind::EpsGreedy);
  EXPECT_THROW(parse_agent_kind("dqn"), ConfigError);
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, stream::kStep, 0, 0), derive_seed(1, stream::kStep, 0, 1));
  EXPECT_NE(derive_seed(1, stream::kStep, 0, 1), derive_seed(1, stream::kStep, 1, 0));
  EXPECT_NE(derive_seed(1, stream::kStep, 0, 0), derive_seed(2, stream::kStep, 0, 0));
  EXPECT_EQ(derive_seed(5, 1, 2, 3), derive_seed(5, 1, 2, 3));
}

}  // namespace
}  // namespace lbrs
