// Command-line driver: single runs and one-parameter sweeps.
//
//   lbrs run   [--config FILE] [overrides...] [--trace] --out DIR
//   lbrs sweep --param lambda --values 0,20,50 [--replicates N] [overrides...] --out DIR
//
// Each invocation writes DIR/manifest.txt (resolved config), DIR/summary.csv
// and, for `run --trace`, DIR/trace.csv.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lbrs/lbrs.hpp"

namespace {

struct Overrides {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> agent;
  std::optional<std::uint64_t> users;
  std::optional<std::uint64_t> items;
  std::optional<std::uint32_t> k;
  std::optional<double> p;
  std::optional<double> lambda;
  std::optional<double> q_threshold;
  std::optional<double> epsilon;
  std::string out = "out";
  bool sequential = false;
  unsigned threads = 0;
};

void add_common_options(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master RNG seed");
  app.add_option("--agent", o.agent, "B-LBRS, P-LBRS, H-LBRS, Random or EpsGreedy");
  app.add_option("--users", o.users, "number of user sessions (N)");
  app.add_option("--items", o.items, "corpus size (M)");
  app.add_option("--k", o.k, "slate size");
  app.add_option("--p", o.p, "recommendation probability (default k/100)");
  app.add_option("--lambda", o.lambda, "heterogeneity coefficient");
  app.add_option("--q-threshold", o.q_threshold, "H-LBRS quality threshold");
  app.add_option("--epsilon", o.epsilon, "EpsGreedy exploration rate");
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_flag("--sequential", o.sequential, "run sessions on one thread");
  app.add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

lbrs::SimConfig resolve(const Overrides& o) {
  lbrs::SimConfig c;
  if (!o.config_file.empty()) c = lbrs::load_config(o.config_file, c);
  if (o.seed) c.seed = *o.seed;
  if (o.agent) c.agent_kind = lbrs::parse_agent_kind(*o.agent);
  if (o.users) c.N = *o.users;
  if (o.items) c.M = *o.items;
  if (o.k) c.k = *o.k;
  if (o.p) c.p = *o.p;
  if (o.lambda) c.lambda = *o.lambda;
  if (o.q_threshold) c.q_threshold = *o.q_threshold;
  if (o.epsilon) c.epsilon = *o.epsilon;
  lbrs::validate(c);
  return c;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void print_row(const lbrs::SweepRow& row) {
  const auto& s = row.summary;
  std::printf("%-12s %-10s rep %u  %-9s  R/step %.4f  R/session %.3f (+-%.3f)  D %.4f (lower is better)  len %.2f\n",
              row.parameter.c_str(), row.value.c_str(), row.replicate,
              std::string(lbrs::to_string(row.config.agent_kind)).c_str(), s.avg_reward_per_step,
              s.avg_reward_per_session, s.ci_reward_per_session, s.avg_diversity, s.mean_session_length);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load-balanced recommender simulation workbench"};
  app.require_subcommand(1);

  Overrides run_opts;
  bool trace = false;
  auto* run = app.add_subcommand("run", "simulate one configuration");
  add_common_options(*run, run_opts);
  run->add_flag("--trace", trace, "also write the per-step trace.csv");

  Overrides sweep_opts;
  std::string param;
  std::vector<std::string> values;
  unsigned replicates = 1;
  auto* sweep = app.add_subcommand("sweep", "run one configuration per parameter value");
  add_common_options(*sweep, sweep_opts);
  sweep->add_option("--param", param, "p, k, lambda, q_threshold, M or agent_kind")->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
  sweep->add_option("--replicates", replicates, "runs per value")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const lbrs::SimConfig config = resolve(run_opts);
      lbrs::RunOptions options;
      options.trace = trace;
      options.sequential = run_opts.sequential;
      options.threads = run_opts.threads;
      const lbrs::RunResult result = lbrs::run_experiment(config, options);

      const std::filesystem::path dir(run_opts.out);
      std::filesystem::create_directories(dir);
      open_out(dir / "manifest.txt") << lbrs::format_config(config);
      lbrs::SweepRow row;
      row.parameter = "none";
      row.value = "-";
      row.config = config;
      row.summary = result.summary;
      row.early_resets = result.early_resets;
      {
        auto out = open_out(dir / "summary.csv");
        lbrs::write_summary_csv(out, {row});
      }
      if (trace) {
        auto out = open_out(dir / "trace.csv");
        lbrs::write_trace_csv(out, result.trace);
      }
      print_row(row);
    } else {
      lbrs::SweepSpec spec;
      spec.base = resolve(sweep_opts);
      spec.parameter = param;
      spec.values = values;
      spec.replicates = replicates;
      lbrs::RunOptions options;
      options.sequential = sweep_opts.sequential;
      options.threads = sweep_opts.threads;

      const std::filesystem::path dir(sweep_opts.out);
      std::filesystem::create_directories(dir);
      std::string manifest = lbrs::format_config(spec.base);
      manifest += "# sweep\n# parameter = " + param + "\n# values =";
      for (const auto& v : values) manifest += " " + v;
      manifest += "\n# replicates = " + std::to_string(replicates) + "\n";
      open_out(dir / "manifest.txt") << manifest;

      lbrs::plan_sweep(spec);  // validate every config before any run starts
      auto out = open_out(dir / "summary.csv");
      out << lbrs::kSummaryHeader << '\n';
      lbrs::run_sweep(spec, options, [&](const lbrs::SweepRow& row) {
        lbrs::write_summary_row(out, row);
        out.flush();
        print_row(row);
      });
    }
  } catch (const lbrs::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
