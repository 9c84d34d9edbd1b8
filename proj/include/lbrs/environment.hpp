#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "lbrs/core.hpp"

namespace lbrs {

struct ChoiceOutcome {
  std::optional<ItemId> chosen;  // nullopt is the null item
  double reward = 0.0;
  double budget_after = 0.0;
  bool session_over = false;
};

/// Unnormalized choice weight of a document: the user's interest in its topic
/// shifted onto [0, 2].
inline double choice_weight(const UserState& user, const Document& doc) {
  return user.interest[doc.topic] + 1.0;
}

/// Null item with probability p_null, otherwise one slate entry drawn with
/// probability proportional to choice_weight (uniform when every weight is 0).
inline std::optional<ItemId> choose(const UserState& user, std::span<const ItemId> slate, const Corpus& corpus,
                                    const SimConfig& config, Rng& rng) {
  if (slate.empty()) throw ContractViolation("choose: slate must not be empty");
  if (uniform01(rng) < config.p_null) return std::nullopt;

  double total = 0.0;
  for (ItemId id : slate) total += choice_weight(user, corpus[id]);
  if (!(total > 0.0)) {
    std::uniform_int_distribution<std::size_t> pick(0, slate.size() - 1);
    return slate[pick(rng)];
  }
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  for (ItemId id : slate) {
    const double w = choice_weight(user, corpus[id]);
    acc += w;
    if (target < acc && w > 0.0) return id;
  }
  // Rounding left target at the very top; take the last positive-weight entry.
  for (auto it = slate.rbegin(); it != slate.rend(); ++it) {
    if (choice_weight(user, corpus[*it]) > 0.0) return *it;
  }
  return slate.back();
}

inline std::optional<ItemId> choose(const UserState& user, const Slate& slate, const Corpus& corpus,
                                    const SimConfig& config, Rng& rng) {
  return choose(user, std::span<const ItemId>(slate.items), corpus, config, rng);
}

inline double utility(const UserState& user, const Document& doc, const SimConfig& config) {
  return (1.0 - config.gamma) * user.interest[doc.topic] + config.gamma * doc.quality;
}

inline double bonus(double utility_value, const SimConfig& config) {
  return (0.9 / 3.4) * config.len_bonus * utility_value;
}

/// Signed interest change for a topic currently at `interest`.
inline double interest_delta(double interest, double y) { return (-y * std::abs(interest) + y) * -interest; }

inline void update_interest(UserState& user, std::uint32_t topic, const SimConfig& config, Rng& rng) {
  if (topic >= user.interest.size()) throw ContractViolation("update_interest: topic out of range");
  double& interest = user.interest[topic];
  const double delta = interest_delta(interest, config.y);
  const double p_positive = (interest + 1.0) / 2.0;
  const double next = uniform01(rng) < p_positive ? interest + delta : interest - delta;
  interest = std::clamp(next, -1.0, 1.0);
}

/// One user turn: choice, budget accounting, reward and interest drift.
inline ChoiceOutcome step(UserState& user, const Slate& slate, const Corpus& corpus, const SimConfig& config,
                          Rng& rng) {
  if (user.budget < config.len_doc) {
    throw ContractViolation("step: budget " + std::to_string(user.budget) + " below document cost");
  }
  ChoiceOutcome out;
  out.chosen = choose(user, slate, corpus, config, rng);
  if (!out.chosen) {
    user.budget -= config.len_null;
  } else {
    const Document& doc = corpus[*out.chosen];
    user.budget += bonus(utility(user, doc, config), config) - config.len_doc;
    out.reward = config.reward_click;
    update_interest(user, doc.topic, config, rng);
  }
  out.budget_after = user.budget;
  out.session_over = user.budget < config.len_doc;
  return out;
}

}  // namespace lbrs
