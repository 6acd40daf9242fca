#pragma once

#include "paidreg/oracle.hpp"
#include "paidreg/parallel.hpp"
#include "paidreg/policies.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace paidreg {

struct RoundRecord {
  long t = 0;
  int arm = 0;
  double cost = 0.0;
  Vector nu;
  double squared_error = 0.0; // (xhat^T nu - y)^2
  double loss_realized = 0.0; // squared_error + lambda c
  double loss_expected = 0.0; // l(c, nu)
  double regret_cum = 0.0;
};

struct RunSummary {
  long rounds = 0;
  double total_expected_loss = 0.0;
  double total_realized_loss = 0.0;
  double regret = 0.0;
  double best_loss = 0.0;    // grid l* used for scoring
  double oracle_slack = 0.0; // lambda / M
  /// Most frequent cost over rounds t > 3T/4 (ties to the cheaper arm).
  double late_modal_cost = 0.0;
  int late_modal_arm = 0;
};

struct RunLog {
  std::string instance_name;
  PolicyConfig config;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds; // empty unless recorded
  RunSummary summary;
  std::optional<std::string> error; // set when the episode aborted early
};

struct EpisodeOptions {
  bool record_rounds = true;
};

/// Plays `horizon` rounds of decide -> sample at c_t -> predict -> reveal y
/// -> update, scoring each round with the exact expected loss. Errors abort
/// the episode and are reported in RunLog::error alongside the partial log.
RunLog run_episode(const Instance& instance, const PolicyConfig& config, long horizon,
                   std::uint64_t seed, const LossLandscape& landscape,
                   const EpisodeOptions& options = {});

RunLog run_episode(const Instance& instance, const PolicyConfig& config, long horizon,
                   std::uint64_t seed);

/// Same loop with a caller-supplied policy; `config` is only recorded.
RunLog run_episode(const Instance& instance, Policy& policy, const PolicyConfig& config,
                   long horizon, std::uint64_t seed, const LossLandscape& landscape,
                   const EpisodeOptions& options = {});

/// sum_t l(c_t, nu_t) - T l*, with l* from the landscape.
double expected_regret(const RunLog& log, const LossLandscape& landscape);

/// Columns: t, k, cost, loss_expected, loss_realized, regret_cum, nu_0..nu_{d-1}.
void write_runlog_csv(std::ostream& out, const RunLog& log);

// ---------------------------------------------------------------------------
// Sweeps and rate fitting
// ---------------------------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  int points_used = 0;
  std::vector<std::string> warnings;
};

/// OLS of ln(regret) on ln(T). Nonpositive regrets are dropped with a warning;
/// fewer than three usable points is an error.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct EpisodeOutcome {
  int instance_index = 0;
  long horizon = 0;
  std::uint64_t seed = 0;
  double regret = 0.0;
  double late_modal_cost = 0.0;
  std::optional<std::string> error;
};

struct HorizonStats {
  long horizon = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  int episodes = 0;
};

struct SweepResult {
  PolicyVariant variant = PolicyVariant::KnownCov;
  std::vector<std::string> instance_names;
  std::vector<long> horizons;
  std::vector<std::uint64_t> seeds;
  std::vector<EpisodeOutcome> episodes; // sorted by (instance, T, seed)
  std::vector<HorizonStats> stats;
  std::optional<RateFit> fit;
  int failures = 0;
};

struct SweepOptions {
  PolicyOverrides overrides;
  int oracle_grid = kDefaultOracleGrid;
  unsigned threads = 0; // 0: hardware concurrency
};

/// Runs every (instance, horizon, seed) combination and aggregates the final
/// regret per horizon. A rate fit is attached when at least three horizons
/// have positive mean regret.
SweepResult sweep(const std::vector<Instance>& instances, PolicyVariant variant,
                  const std::vector<long>& horizons, const std::vector<std::uint64_t>& seeds,
                  const SweepOptions& options = {});

/// Columns: T, mean, stderr, n_seeds.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

} // namespace paidreg
