#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lbrs/agents.hpp"
#include "lbrs/core.hpp"
#include "lbrs/environment.hpp"
#include "lbrs/metrics.hpp"

namespace lbrs {

// ---------------------------------------------------------------------------
// Config text: one `key = value` per line, `#` starts a comment. Keys are the
// SimConfig field names.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid config: " + std::string(key) + " expects a number, got '" + std::string(text) + "'");
  }
  return v;
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid config: " + std::string(key) + " expects a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid config: " + std::string(key) + " expects true/false, got '" + std::string(text) + "'");
}

inline std::uint32_t narrow_u32(std::string_view key, std::uint64_t v) {
  if (v > 0xffffffffULL) throw ConfigError("invalid config: " + std::string(key) + " out of range");
  return static_cast<std::uint32_t>(v);
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

inline void set_config_field(SimConfig& c, std::string_view key, std::string_view raw) {
  using namespace detail;
  const std::string_view v = trim(raw);
  if (key == "N") c.N = parse_uint(key, v);
  else if (key == "M") c.M = parse_uint(key, v);
  else if (key == "T") c.T = narrow_u32(key, parse_uint(key, v));
  else if (key == "k") c.k = narrow_u32(key, parse_uint(key, v));
  else if (key == "p") c.p = parse_double(key, v);
  else if (key == "Q_max") c.Q_max = parse_double(key, v);
  else if (key == "Q_min") {
    const double q = parse_double(key, v);
    if (q != -c.Q_max) throw ConfigError("invalid config: Q_min must equal -Q_max");
  }
  else if (key == "y") c.y = parse_double(key, v);
  else if (key == "gamma") c.gamma = parse_double(key, v);
  else if (key == "alpha") c.alpha = parse_double(key, v);
  else if (key == "beta") c.beta = parse_double(key, v);
  else if (key == "B0") c.B0 = parse_double(key, v);
  else if (key == "len_doc") c.len_doc = parse_double(key, v);
  else if (key == "len_null") c.len_null = parse_double(key, v);
  else if (key == "len_bonus") c.len_bonus = parse_double(key, v);
  else if (key == "p_null") c.p_null = parse_double(key, v);
  else if (key == "reward_click") c.reward_click = parse_double(key, v);
  else if (key == "lambda") c.lambda = parse_double(key, v);
  else if (key == "q_threshold") c.q_threshold = parse_double(key, v);
  else if (key == "seed") c.seed = parse_uint(key, v);
  else if (key == "agent_kind") c.agent_kind = parse_agent_kind(v);
  else if (key == "epsilon") c.epsilon = parse_double(key, v);
  else if (key == "deterministic_k") c.deterministic_k = parse_bool(key, v);
  else if (key == "global_step") c.global_step = parse_bool(key, v);
  else if (key == "max_session_steps") c.max_session_steps = parse_uint(key, v);
  else throw ConfigError("invalid config: unknown key '" + std::string(key) + "'");
}

inline SimConfig parse_config(std::string_view text, SimConfig config = {}) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("invalid config: line " + std::to_string(line_no) + " is not `key = value`");
    }
    set_config_field(config, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return config;
}

inline SimConfig load_config(const std::string& path, SimConfig config = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), config);
}

/// Fully resolved config in the same text format `parse_config` reads.
inline std::string format_config(const SimConfig& c) {
  using detail::format_double;
  std::ostringstream out;
  out << "N = " << c.N << '\n'
      << "M = " << c.M << '\n'
      << "T = " << c.T << '\n'
      << "k = " << c.k << '\n'
      << "p = " << format_double(c.resolved_p()) << '\n'
      << "Q_max = " << format_double(c.Q_max) << '\n'
      << "y = " << format_double(c.y) << '\n'
      << "gamma = " << format_double(c.gamma) << '\n'
      << "alpha = " << format_double(c.alpha) << '\n'
      << "beta = " << format_double(c.beta) << '\n'
      << "B0 = " << format_double(c.B0) << '\n'
      << "len_doc = " << format_double(c.len_doc) << '\n'
      << "len_null = " << format_double(c.len_null) << '\n'
      << "len_bonus = " << format_double(c.len_bonus) << '\n'
      << "p_null = " << format_double(c.p_null) << '\n'
      << "reward_click = " << format_double(c.reward_click) << '\n'
      << "lambda = " << format_double(c.lambda) << '\n'
      << "q_threshold = " << format_double(c.q_threshold) << '\n'
      << "seed = " << c.seed << '\n'
      << "agent_kind = " << to_string(c.agent_kind) << '\n'
      << "epsilon = " << format_double(c.epsilon) << '\n'
      << "deterministic_k = " << (c.deterministic_k ? "true" : "false") << '\n'
      << "global_step = " << (c.global_step ? "true" : "false") << '\n'
      << "max_session_steps = " << c.max_session_steps << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Running sessions
// ---------------------------------------------------------------------------

struct RunOptions {
  bool trace = false;
  bool sequential = false;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct RunResult {
  SimConfig config;
  RunSummary summary;
  std::vector<StepRecord> trace;
  std::uint64_t early_resets = 0;
};

/// One user session: slates are issued while the budget covers a document.
inline SessionStats run_session(Agent& agent, std::uint64_t user_id, const Corpus& corpus, const SimConfig& config,
                                std::vector<StepRecord>* trace) {
  agent.begin_session();
  UserState user = spawn_user(config, user_id);
  SessionStats stats;
  stats.user_id = user_id;
  std::vector<ItemId> prev;
  for (std::uint64_t t = 0; user.budget >= config.len_doc && t < config.max_session_steps; ++t) {
    Rng rng = step_rng(config, user_id, t);
    Slate slate = agent.recommend(rng);

    ChoiceOutcome outcome;
    if (slate.empty()) {
      // Only reachable with deterministic_k off: an empty slate reads as a null choice.
      user.budget -= config.len_null;
      outcome.budget_after = user.budget;
      outcome.session_over = user.budget < config.len_doc;
    } else {
      outcome = step(user, slate, corpus, config, rng);
    }
    agent.observe(slate, outcome);

    StepRecord rec;
    rec.user_id = user_id;
    rec.step = t;
    rec.chosen = outcome.chosen;
    rec.reward = outcome.reward;
    rec.budget_after = outcome.budget_after;
    rec.ils = ils(slate.items, corpus);
    if (!prev.empty() && !slate.empty()) rec.bls = bls(prev, slate.items, corpus, config.k);
    rec.d_score = diversity_score(rec.ils, rec.bls, config);
    stats.add(rec);
    prev = slate.items;
    if (trace) {
      rec.slate = std::move(slate.items);
      trace->push_back(std::move(rec));
    }
  }
  return stats;
}

inline RunResult run_experiment(const SimConfig& config, const RunOptions& options = {}) {
  validate(config);
  const Corpus corpus = build_corpus(config);

  RunResult result;
  result.config = config;
  std::vector<SessionStats> sessions(config.N);
  std::vector<std::vector<StepRecord>> traces(options.trace ? config.N : 0);

  auto probe = make_agent(corpus, config);
  const bool shared = probe->shares_state_across_sessions();
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  if (shared || options.sequential) threads = 1;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, config.N));

  if (threads <= 1) {
    for (std::uint64_t u = 0; u < config.N; ++u) {
      sessions[u] = run_session(*probe, u, corpus, config, options.trace ? &traces[u] : nullptr);
    }
    result.early_resets = probe->early_resets();
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::uint64_t> resets(threads, 0);
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            auto agent = w == 0 ? std::move(probe) : make_agent(corpus, config);
            for (std::uint64_t u = next++; u < config.N; u = next++) {
              sessions[u] = run_session(*agent, u, corpus, config, options.trace ? &traces[u] : nullptr);
            }
            resets[w] = agent->early_resets();
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (auto r : resets) result.early_resets += r;
  }

  result.summary = summarize(std::span<const SessionStats>(sessions));
  if (options.trace) {
    for (auto& t : traces) {
      result.trace.insert(result.trace.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names{"p", "k", "lambda", "q_threshold", "M", "agent_kind"};
  return names;
}

struct SweepSpec {
  std::string parameter;
  std::vector<std::string> values;
  unsigned replicates = 1;
  SimConfig base;
};

struct SweepRow {
  std::string parameter;
  std::string value;
  unsigned replicate = 0;
  SimConfig config;
  RunSummary summary;
  std::uint64_t early_resets = 0;
};

/// Configs in sweep order (value-major, replicate-minor), each with its own
/// seed derived from (base seed, value index, replicate index).
inline std::vector<SweepRow> plan_sweep(const SweepSpec& spec) {
  const auto& names = sweepable_parameters();
  if (std::find(names.begin(), names.end(), spec.parameter) == names.end()) {
    throw ConfigError("invalid sweep: parameter '" + spec.parameter + "' cannot be swept");
  }
  if (spec.values.empty()) throw ConfigError("invalid sweep: no values");
  if (spec.replicates == 0) throw ConfigError("invalid sweep: replicates must be >= 1");
  std::vector<SweepRow> rows;
  for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
    for (unsigned r = 0; r < spec.replicates; ++r) {
      SweepRow row;
      row.parameter = spec.parameter;
      row.value = std::string(detail::trim(spec.values[vi]));
      row.replicate = r;
      row.config = spec.base;
      set_config_field(row.config, spec.parameter, row.value);
      row.config.seed = derive_seed(spec.base.seed, stream::kSweep, vi, r);
      validate(row.config);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const RunOptions& options = {},
                                       const std::function<void(const SweepRow&)>& on_row = {}) {
  std::vector<SweepRow> rows = plan_sweep(spec);
  RunOptions run_opts = options;
  run_opts.trace = false;
  for (SweepRow& row : rows) {
    RunResult res = run_experiment(row.config, run_opts);
    row.summary = res.summary;
    row.early_resets = res.early_resets;
    if (on_row) on_row(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output: header row, 6-decimal floats, rows in the order given.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSummaryHeader =
    "parameter,value,replicate,agent,seed,avg_reward_step,avg_reward_session,avg_diversity,avg_ils,avg_bls,"
    "mean_session_len,ci_reward_step,ci_reward_session,ci_diversity,ci_session_len,users,early_resets";

inline void write_summary_row(std::ostream& out, const SweepRow& row) {
  using detail::fixed6;
  const RunSummary& s = row.summary;
  out << row.parameter << ',' << row.value << ',' << row.replicate << ',' << to_string(row.config.agent_kind) << ','
      << row.config.seed << ',' << fixed6(s.avg_reward_per_step) << ',' << fixed6(s.avg_reward_per_session) << ','
      << fixed6(s.avg_diversity) << ',' << fixed6(s.avg_ils) << ',' << fixed6(s.avg_bls) << ','
      << fixed6(s.mean_session_length) << ',' << fixed6(s.ci_reward_per_step) << ','
      << fixed6(s.ci_reward_per_session) << ',' << fixed6(s.ci_diversity) << ',' << fixed6(s.ci_session_length)
      << ',' << s.users << ',' << row.early_resets << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const SweepRow& row : rows) write_summary_row(out, row);
}

inline constexpr std::string_view kTraceHeader = "user_id,step,slate,chosen,reward,budget_after,ils,bls,d_score";

// Slate ids are ';'-separated; a null choice and undefined metrics are empty fields.
inline void write_trace_csv(std::ostream& out, const std::vector<StepRecord>& records) {
  using detail::fixed6;
  out << kTraceHeader << '\n';
  for (const StepRecord& r : records) {
    out << r.user_id << ',' << r.step << ',';
    for (std::size_t i = 0; i < r.slate.size(); ++i) out << (i ? ";" : "") << r.slate[i];
    out << ',';
    if (r.chosen) out << *r.chosen;
    out << ',' << fixed6(r.reward) << ',' << fixed6(r.budget_after) << ',';
    if (r.ils) out << fixed6(*r.ils);
    out << ',';
    if (r.bls) out << fixed6(*r.bls);
    out << ',';
    if (r.d_score) out << fixed6(*r.d_score);
    out << '\n';
  }
}

}  // namespace lbrs
