#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lbrs/core.hpp"
#include "lbrs/environment.hpp"

namespace lbrs {

// ---------------------------------------------------------------------------
// Election thresholds
// ---------------------------------------------------------------------------

/// Number of steps in one eligibility window, ceil(1/p). The small slack keeps
/// p = 1/n from rounding up to n + 1.
inline std::uint64_t window_length(double p) {
  if (!(p > 0.0)) throw ContractViolation("window_length: p must be > 0");
  const double inv = 1.0 / p;
  const auto w = static_cast<std::uint64_t>(std::ceil(inv - 1e-9 * inv));
  return std::max<std::uint64_t>(w, 1);
}

/// p / (1 - p * (t mod ceil(1/p))), capped at 1.
///
/// When 1/p is not an integer the last step of a window pushes the raw ratio
/// past 1; the cap changes nothing about the election (a draw below a value >= 1
/// always succeeds) but keeps the result a probability.
inline double election_threshold(double p, std::uint64_t t) {
  if (p >= 1.0) return 1.0;
  const auto phase = static_cast<double>(t % window_length(p));
  const double denom = 1.0 - p * phase;
  if (!(denom > p)) return 1.0;
  return p / denom;
}

inline double threshold_basic(bool excluded, double p, std::uint64_t t) {
  return excluded ? 0.0 : election_threshold(p, t);
}

inline double normalize_quality(double q, const SimConfig& config) {
  const double lo = config.Q_min();
  const double hi = config.Q_max;
  if (!(q >= lo && q <= hi)) {
    throw ContractViolation("normalize_quality: quality " + std::to_string(q) + " outside [Q_min, Q_max]");
  }
  return (q - lo) / (hi - lo);
}

inline double threshold_priority(bool excluded, double quality, double p, std::uint64_t t, const SimConfig& config) {
  return threshold_basic(excluded, p, t) * normalize_quality(quality, config);
}

struct HeteroProbs {
  double high = 0.0;
  double low = 0.0;
};

/// Per-pool election probabilities; high / low = 1 + lambda and the expected
/// number elected per step stays p * M.
inline HeteroProbs hetero_probs(double p, double lambda, double high_fraction) {
  if (!(lambda >= 0.0)) throw ContractViolation("hetero_probs: lambda must be >= 0");
  if (!(high_fraction >= 0.0 && high_fraction <= 1.0)) {
    throw ContractViolation("hetero_probs: high fraction must lie in [0, 1]");
  }
  HeteroProbs out;
  out.low = p / (1.0 + lambda * high_fraction);
  out.high = out.low * (1.0 + lambda);
  return out;
}

inline double threshold_hetero(bool high_pool, bool excluded, const HeteroProbs& probs, std::uint64_t t) {
  return threshold_basic(excluded, high_pool ? probs.high : probs.low, t);
}

// ---------------------------------------------------------------------------
// Agent interface
// ---------------------------------------------------------------------------

class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string_view name() const = 0;
  virtual void begin_session() {}
  virtual Slate recommend(Rng& rng) = 0;
  virtual void observe(const Slate& /*slate*/, const ChoiceOutcome& /*outcome*/) {}

  // True when one instance must serve every session of a run, in order.
  virtual bool shares_state_across_sessions() const { return false; }
  // Number of times an exclusion set had to be cleared before its window ended.
  virtual std::uint64_t early_resets() const { return 0; }
};

// ---------------------------------------------------------------------------
// LBRS: B-LBRS (one pool, flat weights), P-LBRS (one pool, normalized quality
// weights) and H-LBRS (high/low pools split at q_threshold).
// ---------------------------------------------------------------------------

class LbrsAgent final : public Agent {
 public:
  struct Pool {
    double p = 0.0;
    std::uint64_t window = 1;
    std::vector<ItemId> excluded;  // members currently in the exclusion set
    std::size_t size = 0;
  };

  LbrsAgent(const Corpus& corpus, const SimConfig& config)
      : config_(config),
        kind_(config.agent_kind),
        pool_of_(corpus.size(), 0),
        weight_(corpus.size(), 1.0),
        excluded_(corpus.size(), 0),
        in_slate_(corpus.size(), 0),
        order_(corpus.size()) {
    if (kind_ != AgentKind::BasicLbrs && kind_ != AgentKind::PriorityLbrs && kind_ != AgentKind::HeteroLbrs) {
      throw ConfigError("LbrsAgent: agent kind must be an LBRS variant");
    }
    if (config.deterministic_k && config.k > corpus.size()) {
      throw ConfigError("invalid config: k (" + std::to_string(config.k) + ") exceeds corpus size (" +
                        std::to_string(corpus.size()) + ")");
    }
    const double p = config.resolved_p();
    if (kind_ == AgentKind::HeteroLbrs) {
      std::size_t high = 0;
      for (const Document& d : corpus.documents) {
        pool_of_[d.id] = d.quality >= config.q_threshold ? kHigh : kLow;
        high += pool_of_[d.id] == kHigh;
      }
      high_fraction_ = corpus.size() ? static_cast<double>(high) / static_cast<double>(corpus.size()) : 0.0;
      const HeteroProbs probs = hetero_probs(p, config.lambda, high_fraction_);
      pools_.resize(2);
      pools_[kHigh].p = probs.high;
      pools_[kLow].p = probs.low;
      pools_[kHigh].size = high;
      pools_[kLow].size = corpus.size() - high;
    } else {
      pools_.resize(1);
      pools_[0].p = p;
      pools_[0].size = corpus.size();
      if (kind_ == AgentKind::PriorityLbrs) {
        for (const Document& d : corpus.documents) weight_[d.id] = normalize_quality(d.quality, config);
      }
    }
    for (Pool& pool : pools_) pool.window = window_length(std::min(pool.p, 1.0));
    reset_order();
  }

  std::string_view name() const override { return to_string(kind_); }

  void begin_session() override {
    if (config_.global_step && started_) return;
    started_ = true;
    step_ = 0;
    for (std::size_t i = 0; i < pools_.size(); ++i) clear_pool(i);
    reset_order();
  }

  bool shares_state_across_sessions() const override { return config_.global_step; }
  std::uint64_t early_resets() const override { return early_resets_; }
  std::uint64_t fallback_fills() const { return fallback_fills_; }

  /// Steps issued so far in the session; the next slate is elected at this t.
  std::uint64_t step() const { return step_; }
  bool is_excluded(ItemId id) const { return excluded_[id] != 0; }
  bool is_high(ItemId id) const { return pools_.size() == 2 && pool_of_[id] == kHigh; }
  double high_fraction() const { return high_fraction_; }
  const std::vector<Pool>& pools() const { return pools_; }

  /// Election threshold of `id` at the current step.
  double threshold(ItemId id) const {
    const Pool& pool = pools_[pool_of_[id]];
    return excluded_[id] ? 0.0 : election_threshold(pool.p, step_) * weight_[id];
  }

  // Algorithm: draw items in a fresh random order and elect each eligible one
  // whose uniform draw falls below its threshold, until k are elected.
  Slate recommend(Rng& rng) override {
    Slate slate;
    slate.step = step_;
    if (config_.deterministic_k) {
      fill_exactly_k(slate, rng);
    } else {
      single_pass(slate, rng);
    }
    for (ItemId id : slate.items) in_slate_[id] = 0;
    advance();
    return slate;
  }

 private:
  static constexpr std::uint8_t kHigh = 0;
  static constexpr std::uint8_t kLow = 1;

  void reset_order() { std::iota(order_.begin(), order_.end(), ItemId{0}); }

  // Lazy Fisher-Yates: position i of the pass is drawn from the not-yet-visited
  // suffix, so a pass that stops early only pays for the items it touched.
  ItemId draw_next(std::size_t i, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(i, order_.size() - 1);
    std::swap(order_[i], order_[pick(rng)]);
    return order_[i];
  }

  void elect(ItemId id, Slate& slate) {
    slate.items.push_back(id);
    in_slate_[id] = 1;
    excluded_[id] = 1;
    pools_[pool_of_[id]].excluded.push_back(id);
  }

  void clear_pool(std::size_t pool) {
    for (ItemId id : pools_[pool].excluded) excluded_[id] = 0;
    pools_[pool].excluded.clear();
  }

  void fill_exactly_k(Slate& slate, Rng& rng) {
    const std::size_t k = config_.k;
    std::vector<double> base(pools_.size());
    for (std::size_t i = 0; i < pools_.size(); ++i) base[i] = election_threshold(pools_[i].p, step_);

    std::vector<std::size_t> remaining(pools_.size());
    while (slate.size() < k) {
      std::fill(remaining.begin(), remaining.end(), 0);
      for (std::size_t i = 0; i < order_.size() && slate.size() < k; ++i) {
        const ItemId id = draw_next(i, rng);
        if (excluded_[id] || in_slate_[id]) continue;
        const double thr = base[pool_of_[id]] * weight_[id];
        if (!(thr > 0.0)) continue;
        if (uniform01(rng) < thr) {
          elect(id, slate);
        } else {
          ++remaining[pool_of_[id]];
        }
      }
      if (slate.size() >= k) break;

      // A full pass came up short. Pools with no electable item left get their
      // exclusion set cleared early; if none can be refilled the slate is
      // topped up uniformly from the items not already in it.
      bool cleared = false;
      bool any_remaining = false;
      for (std::size_t p = 0; p < pools_.size(); ++p) {
        if (remaining[p] > 0) {
          any_remaining = true;
        } else if (has_clearable(p)) {
          clear_pool(p);
          ++early_resets_;
          cleared = true;
        }
      }
      if (!cleared && !any_remaining) {
        ++fallback_fills_;
        for (std::size_t i = 0; i < order_.size() && slate.size() < k; ++i) {
          const ItemId id = draw_next(i, rng);
          if (!in_slate_[id]) elect(id, slate);
        }
      }
    }
  }

  // An early clear helps only if it re-admits an item that could be elected.
  bool has_clearable(std::size_t pool) const {
    for (ItemId id : pools_[pool].excluded) {
      if (!in_slate_[id] && weight_[id] > 0.0) return true;
    }
    return false;
  }

  void single_pass(Slate& slate, Rng& rng) {
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const ItemId id = draw_next(i, rng);
      if (excluded_[id]) continue;
      const double thr = threshold(id);
      if (thr > 0.0 && uniform01(rng) < thr) elect(id, slate);
    }
  }

  void advance() {
    ++step_;
    for (std::size_t i = 0; i < pools_.size(); ++i) {
      if (step_ % pools_[i].window == 0) clear_pool(i);
    }
  }

  SimConfig config_;
  AgentKind kind_;
  std::vector<std::uint8_t> pool_of_;
  std::vector<double> weight_;
  std::vector<std::uint8_t> excluded_;
  std::vector<std::uint8_t> in_slate_;
  std::vector<ItemId> order_;
  std::vector<Pool> pools_;
  double high_fraction_ = 1.0;
  std::uint64_t step_ = 0;
  std::uint64_t early_resets_ = 0;
  std::uint64_t fallback_fills_ = 0;
  bool started_ = false;
};

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// k distinct ids drawn uniformly without replacement.
inline Slate random_slate(std::size_t corpus_size, std::size_t k, Rng& rng) {
  if (k > corpus_size) {
    throw ConfigError("invalid config: k (" + std::to_string(k) + ") exceeds corpus size (" +
                      std::to_string(corpus_size) + ")");
  }
  Slate slate;
  slate.items.reserve(k);
  if (2 * k > corpus_size) {
    std::vector<ItemId> all(corpus_size);
    std::iota(all.begin(), all.end(), ItemId{0});
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, corpus_size - 1);
      std::swap(all[i], all[pick(rng)]);
      slate.items.push_back(all[i]);
    }
    return slate;
  }
  std::uniform_int_distribution<std::size_t> pick(0, corpus_size - 1);
  while (slate.items.size() < k) {
    const auto id = static_cast<ItemId>(pick(rng));
    if (std::find(slate.items.begin(), slate.items.end(), id) == slate.items.end()) slate.items.push_back(id);
  }
  return slate;
}

class RandomAgent final : public Agent {
 public:
  RandomAgent(const Corpus& corpus, const SimConfig& config) : size_(corpus.size()), k_(config.k) {
    if (k_ > size_) {
      throw ConfigError("invalid config: k (" + std::to_string(k_) + ") exceeds corpus size (" +
                        std::to_string(size_) + ")");
    }
  }
  std::string_view name() const override { return to_string(AgentKind::Random); }
  Slate recommend(Rng& rng) override {
    Slate s = random_slate(size_, k_, rng);
    s.step = step_++;
    return s;
  }
  void begin_session() override { step_ = 0; }

 private:
  std::size_t size_;
  std::size_t k_;
  std::uint64_t step_ = 0;
};

/// Epsilon-greedy over per-item running-mean reward estimates. Estimates are
/// shared by every session of a run.
class EpsGreedyAgent final : public Agent {
 public:
  EpsGreedyAgent(const Corpus& corpus, const SimConfig& config)
      : k_(config.k),
        epsilon_(config.epsilon),
        reward_(config.reward_click),
        values_(corpus.size(), 0.0),
        counts_(corpus.size(), 0) {
    if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0)) throw ConfigError("invalid config: epsilon must lie in [0, 1]");
    if (k_ > corpus.size()) {
      throw ConfigError("invalid config: k (" + std::to_string(k_) + ") exceeds corpus size (" +
                        std::to_string(corpus.size()) + ")");
    }
    for (ItemId id = 0; id < corpus.size(); ++id) ranking_.emplace(-0.0, id);
  }

  std::string_view name() const override { return to_string(AgentKind::EpsGreedy); }
  bool shares_state_across_sessions() const override { return true; }
  void begin_session() override { step_ = 0; }

  double estimate(ItemId id) const { return values_[id]; }
  std::uint64_t count(ItemId id) const { return counts_[id]; }

  void set_estimate(ItemId id, double value, std::uint64_t count) {
    ranking_.erase({-values_[id], id});
    values_[id] = value;
    counts_[id] = count;
    ranking_.emplace(-value, id);
  }

  Slate recommend(Rng& rng) override {
    Slate slate;
    slate.step = step_++;
    slate.items.reserve(k_);
    std::uniform_int_distribution<std::size_t> pick(0, values_.size() - 1);
    auto used = [&](ItemId id) { return std::find(slate.items.begin(), slate.items.end(), id) != slate.items.end(); };
    for (std::size_t slot = 0; slot < k_; ++slot) {
      if (uniform01(rng) < epsilon_) {
        ItemId id;
        do {
          id = static_cast<ItemId>(pick(rng));
        } while (used(id));
        slate.items.push_back(id);
      } else {
        // ranking_ orders by (-value, id): the first unused entry is the
        // highest estimate with ties going to the lowest id.
        for (const auto& [neg_value, id] : ranking_) {
          if (!used(id)) {
            slate.items.push_back(id);
            break;
          }
        }
      }
    }
    return slate;
  }

  void observe(const Slate& slate, const ChoiceOutcome& outcome) override {
    for (ItemId id : slate.items) {
      const double r = (outcome.chosen && *outcome.chosen == id) ? reward_ : 0.0;
      const std::uint64_t n = counts_[id] + 1;
      set_estimate(id, values_[id] + (r - values_[id]) / static_cast<double>(n), n);
    }
  }

 private:
  std::size_t k_;
  double epsilon_;
  double reward_;
  std::vector<double> values_;
  std::vector<std::uint64_t> counts_;
  std::set<std::pair<double, ItemId>> ranking_;
  std::uint64_t step_ = 0;
};

inline std::unique_ptr<Agent> make_agent(const Corpus& corpus, const SimConfig& config) {
  switch (config.agent_kind) {
    case AgentKind::BasicLbrs:
    case AgentKind::PriorityLbrs:
    case AgentKind::HeteroLbrs:
      return std::make_unique<LbrsAgent>(corpus, config);
    case AgentKind::Random:
      return std::make_unique<RandomAgent>(corpus, config);
    case AgentKind::EpsGreedy:
      return std::make_unique<EpsGreedyAgent>(corpus, config);
  }
  throw ConfigError("unknown agent kind");
}

}  // namespace lbrs
