#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lbrs/core.hpp"

namespace lbrs {

// Quality class used by the similarity metric: Q >= 0 is "high". This is the
// sign split, independent of the H-LBRS q_threshold partition.
inline bool high_class(const Document& d) { return d.quality >= 0.0; }

/// Cosine similarity of (topic one-hot ++ quality-class one-hot) feature
/// vectors, which reduces to (topic_match + class_match) / 2.
inline double item_similarity(const Document& a, const Document& b) {
  const double topic_match = a.topic == b.topic ? 1.0 : 0.0;
  const double class_match = high_class(a) == high_class(b) ? 1.0 : 0.0;
  return (topic_match + class_match) / 2.0;
}

/// Intra-list similarity: mean similarity over ordered pairs of distinct
/// positions. Absent for slates shorter than 2.
inline std::optional<double> ils(std::span<const ItemId> slate, const Corpus& corpus) {
  if (slate.size() < 2) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i < slate.size(); ++i) {
    for (std::size_t j = i + 1; j < slate.size(); ++j) sum += item_similarity(corpus[slate[i]], corpus[slate[j]]);
  }
  const double n = static_cast<double>(slate.size());
  return (2.0 * sum) / (n * (n - 1.0));
}

/// Between-list similarity of consecutive slates. A repeated item contributes
/// k to both numerator and denominator, so repeats pull the score towards 1.
inline double bls(std::span<const ItemId> prev, std::span<const ItemId> next, const Corpus& corpus, std::size_t k) {
  if (prev.empty() || next.empty()) throw ContractViolation("bls: slates must not be empty");
  const double repeat_weight = static_cast<double>(k);
  double num = 0.0;
  double den = 0.0;
  for (ItemId i : prev) {
    for (ItemId j : next) {
      if (i == j) {
        num += repeat_weight;
        den += repeat_weight;
      } else {
        num += item_similarity(corpus[i], corpus[j]);
        den += 1.0;
      }
    }
  }
  return num / den;
}

/// Combined score (alpha * ILS + beta * BLS) / 2; lower means more diverse.
/// With only one component available (first slate, or single-item slates)
/// that component is returned as is.
inline std::optional<double> diversity_score(std::optional<double> ils_value, std::optional<double> bls_value,
                                             const SimConfig& config) {
  if (ils_value && bls_value) return (config.alpha * *ils_value + config.beta * *bls_value) / 2.0;
  if (ils_value) return ils_value;
  if (bls_value) return bls_value;
  return std::nullopt;
}

struct StepRecord {
  std::uint64_t user_id = 0;
  std::uint64_t step = 0;
  std::vector<ItemId> slate;
  std::optional<ItemId> chosen;
  double reward = 0.0;
  double budget_after = 0.0;
  std::optional<double> ils;
  std::optional<double> bls;
  std::optional<double> d_score;
};

/// Per-session sums; everything the run summary needs without keeping traces.
struct SessionStats {
  std::uint64_t user_id = 0;
  std::uint64_t steps = 0;
  std::uint64_t clicks = 0;
  double reward = 0.0;
  double diversity_sum = 0.0;
  std::uint64_t diversity_count = 0;
  double ils_sum = 0.0;
  std::uint64_t ils_count = 0;
  double bls_sum = 0.0;
  std::uint64_t bls_count = 0;

  void add(const StepRecord& r) {
    ++steps;
    reward += r.reward;
    clicks += r.chosen.has_value();
    if (r.d_score) {
      diversity_sum += *r.d_score;
      ++diversity_count;
    }
    if (r.ils) {
      ils_sum += *r.ils;
      ++ils_count;
    }
    if (r.bls) {
      bls_sum += *r.bls;
      ++bls_count;
    }
  }
};

struct RunSummary {
  std::uint64_t users = 0;
  std::uint64_t total_steps = 0;
  double avg_reward_per_step = 0.0;
  double avg_reward_per_session = 0.0;
  double avg_diversity = 0.0;
  double avg_ils = 0.0;
  double avg_bls = 0.0;
  double mean_session_length = 0.0;
  // 95% half-widths, normal approximation over per-user values.
  double ci_reward_per_step = 0.0;
  double ci_reward_per_session = 0.0;
  double ci_diversity = 0.0;
  double ci_session_length = 0.0;
};

inline double ci95_half_width(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(n));
}

inline RunSummary summarize(std::span<const SessionStats> sessions) {
  if (sessions.empty()) throw std::invalid_argument("summarize: no sessions");
  RunSummary s;
  s.users = sessions.size();
  double reward = 0.0, div = 0.0, ils_sum = 0.0, bls_sum = 0.0;
  std::uint64_t div_n = 0, ils_n = 0, bls_n = 0;
  std::vector<double> per_step, per_session, per_div, per_len;
  per_step.reserve(sessions.size());
  per_session.reserve(sessions.size());
  per_div.reserve(sessions.size());
  per_len.reserve(sessions.size());
  for (const SessionStats& u : sessions) {
    s.total_steps += u.steps;
    reward += u.reward;
    div += u.diversity_sum;
    div_n += u.diversity_count;
    ils_sum += u.ils_sum;
    ils_n += u.ils_count;
    bls_sum += u.bls_sum;
    bls_n += u.bls_count;
    per_session.push_back(u.reward);
    per_len.push_back(static_cast<double>(u.steps));
    if (u.steps) per_step.push_back(u.reward / static_cast<double>(u.steps));
    if (u.diversity_count) per_div.push_back(u.diversity_sum / static_cast<double>(u.diversity_count));
  }
  const double users = static_cast<double>(s.users);
  s.avg_reward_per_step = s.total_steps ? reward / static_cast<double>(s.total_steps) : 0.0;
  s.avg_reward_per_session = reward / users;
  s.avg_diversity = div_n ? div / static_cast<double>(div_n) : 0.0;
  s.avg_ils = ils_n ? ils_sum / static_cast<double>(ils_n) : 0.0;
  s.avg_bls = bls_n ? bls_sum / static_cast<double>(bls_n) : 0.0;
  s.mean_session_length = static_cast<double>(s.total_steps) / users;
  s.ci_reward_per_step = ci95_half_width(per_step);
  s.ci_reward_per_session = ci95_half_width(per_session);
  s.ci_diversity = ci95_half_width(per_div);
  s.ci_session_length = ci95_half_width(per_len);
  return s;
}

/// Summary straight from step records; sessions are keyed by user id.
inline RunSummary summarize(std::span<const StepRecord> records) {
  if (records.empty()) throw std::invalid_argument("summarize: empty trace");
  std::map<std::uint64_t, SessionStats> by_user;
  for (const StepRecord& r : records) {
    SessionStats& u = by_user[r.user_id];
    u.user_id = r.user_id;
    u.add(r);
  }
  std::vector<SessionStats> sessions;
  sessions.reserve(by_user.size());
  for (auto& [id, stats] : by_user) sessions.push_back(stats);
  return summarize(std::span<const SessionStats>(sessions));
}

}  // namespace lbrs
