#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lbrs {

using ItemId = std::uint32_t;
using Rng = std::mt19937_64;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class AgentKind { BasicLbrs, PriorityLbrs, HeteroLbrs, Random, EpsGreedy };

inline std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::BasicLbrs: return "B-LBRS";
    case AgentKind::PriorityLbrs: return "P-LBRS";
    case AgentKind::HeteroLbrs: return "H-LBRS";
    case AgentKind::Random: return "Random";
    case AgentKind::EpsGreedy: return "EpsGreedy";
  }
  return "?";
}

// Accepts the display names plus short lowercase aliases (b, p, h, random, eps).
inline AgentKind parse_agent_kind(std::string_view name) {
  std::string lower;
  for (char c : name) {
    if (c != '-' && c != '_') lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "blbrs" || lower == "b" || lower == "basic") return AgentKind::BasicLbrs;
  if (lower == "plbrs" || lower == "p" || lower == "priority") return AgentKind::PriorityLbrs;
  if (lower == "hlbrs" || lower == "h" || lower == "hetero") return AgentKind::HeteroLbrs;
  if (lower == "random") return AgentKind::Random;
  if (lower == "epsgreedy" || lower == "eps" || lower == "egreedy" || lower == "epsilongreedy")
    return AgentKind::EpsGreedy;
  throw ConfigError("unknown agent kind '" + std::string(name) + "'");
}

struct Document {
  ItemId id = 0;
  std::uint32_t topic = 0;
  double quality = 0.0;
};

struct Corpus {
  std::vector<Document> documents;
  std::uint32_t topic_count = 0;
  std::uint32_t high_topic_count = 0;

  std::size_t size() const { return documents.size(); }
  const Document& operator[](ItemId id) const { return documents[id]; }
};

struct UserState {
  std::uint64_t user_id = 0;
  std::vector<double> interest;
  double budget = 0.0;
};

struct Slate {
  std::vector<ItemId> items;
  std::uint64_t step = 0;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

/// Simulation parameters. Defaults reproduce the reference setup
/// (5000 users, 10000 documents, 20 topics, slates of 5).
struct SimConfig {
  std::uint64_t N = 5000;
  std::uint64_t M = 10000;
  std::uint32_t T = 20;
  std::uint32_t k = 5;
  // Unset means k/100.
  std::optional<double> p;
  double Q_max = 3.0;
  double y = 0.3;
  double gamma = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double B0 = 200.0;
  double len_doc = 4.0;
  double len_null = 1.0;
  double len_bonus = 4.0;
  double p_null = 0.5;
  double reward_click = 4.0;
  double lambda = 0.0;
  double q_threshold = 0.0;
  std::uint64_t seed = 1;
  AgentKind agent_kind = AgentKind::BasicLbrs;
  double epsilon = 0.1;

  // Off switches the LBRS agents to raw threshold election with a noisy slate size.
  bool deterministic_k = true;
  // On keeps one LBRS step counter and exclusion set across all users (forces sequential runs).
  bool global_step = false;
  std::uint64_t max_session_steps = 1'000'000;

  double resolved_p() const { return p.value_or(static_cast<double>(k) / 100.0); }
  double Q_min() const { return -Q_max; }
};

inline void validate(const SimConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("invalid config: " + field + " " + why);
  };
  if (c.N == 0) fail("N", "must be >= 1");
  if (c.M == 0) fail("M", "must be >= 1");
  if (c.T == 0) fail("T", "must be >= 1");
  if (c.k == 0) fail("k", "must be >= 1");
  const double p = c.resolved_p();
  if (!(p > 0.0 && p <= 1.0)) fail("p", "must lie in (0, 1]");
  if (!(c.Q_max > 0.0)) fail("Q_max", "must be > 0");
  if (!(c.y >= 0.0 && c.y <= 1.0)) fail("y", "must lie in [0, 1]");
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) fail("gamma", "must lie in [0, 1]");
  if (!(c.alpha >= 0.0)) fail("alpha", "must be >= 0");
  if (!(c.beta >= 0.0)) fail("beta", "must be >= 0");
  if (!(c.B0 >= 0.0)) fail("B0", "must be >= 0");
  if (!(c.len_doc > 0.0)) fail("len_doc", "must be > 0");
  if (!(c.len_null > 0.0)) fail("len_null", "must be > 0");
  if (!(c.len_bonus >= 0.0)) fail("len_bonus", "must be >= 0");
  if (!(c.p_null >= 0.0 && c.p_null <= 1.0)) fail("p_null", "must lie in [0, 1]");
  if (!std::isfinite(c.reward_click)) fail("reward_click", "must be finite");
  if (!(c.lambda >= 0.0)) fail("lambda", "must be >= 0");
  if (!std::isfinite(c.q_threshold)) fail("q_threshold", "must be finite");
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) fail("epsilon", "must lie in [0, 1]");
  if (c.max_session_steps == 0) fail("max_session_steps", "must be >= 1");
}

// ---------------------------------------------------------------------------
// Seed derivation. Every stream is a pure function of (master seed, tags), so
// the order in which sessions run cannot change their results.
// ---------------------------------------------------------------------------

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (c + 0x85157af5ULL));
  return h;
}

namespace stream {
inline constexpr std::uint64_t kCorpus = 0xC0;
inline constexpr std::uint64_t kUser = 0x05E;
inline constexpr std::uint64_t kStep = 0x57E;
inline constexpr std::uint64_t kSweep = 0x5EE;
}  // namespace stream

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline Corpus build_corpus(const SimConfig& config, Rng& rng) {
  if (config.M == 0) throw ConfigError("invalid config: M must be >= 1");
  if (config.T == 0) throw ConfigError("invalid config: T must be >= 1");
  if (!(config.Q_max > 0.0)) throw ConfigError("invalid config: Q_max must be > 0");

  Corpus corpus;
  corpus.topic_count = config.T;
  corpus.high_topic_count = config.T / 3;
  corpus.documents.reserve(config.M);
  std::uniform_int_distribution<std::uint32_t> topic_dist(0, config.T - 1);
  std::uniform_real_distribution<double> high_q(0.0, config.Q_max);
  std::uniform_real_distribution<double> low_q(-config.Q_max, 0.0);
  for (std::uint64_t i = 0; i < config.M; ++i) {
    Document d;
    d.id = static_cast<ItemId>(i);
    d.topic = topic_dist(rng);
    d.quality = d.topic < corpus.high_topic_count ? high_q(rng) : low_q(rng);
    corpus.documents.push_back(d);
  }
  return corpus;
}

inline Corpus build_corpus(const SimConfig& config) {
  Rng rng(derive_seed(config.seed, stream::kCorpus));
  return build_corpus(config, rng);
}

inline UserState spawn_user(const SimConfig& config, std::uint64_t user_id, Rng& rng) {
  UserState user;
  user.user_id = user_id;
  user.budget = config.B0;
  user.interest.resize(config.T);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : user.interest) v = dist(rng);
  return user;
}

inline UserState spawn_user(const SimConfig& config, std::uint64_t user_id) {
  Rng rng(derive_seed(config.seed, stream::kUser, user_id));
  return spawn_user(config, user_id, rng);
}

inline Rng step_rng(const SimConfig& config, std::uint64_t user_id, std::uint64_t step) {
  return Rng(derive_seed(config.seed, stream::kStep, user_id, step));
}

}  // namespace lbrs
