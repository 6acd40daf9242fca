#include "paidreg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace paidreg {

RunLog run_episode(const Instance& instance, const PolicyConfig& config, long horizon,
                   std::uint64_t seed, const LossLandscape& landscape,
                   const EpisodeOptions& options) {
  std::unique_ptr<Policy> policy;
  try {
    policy = make_policy(config, instance);
  } catch (const std::exception& e) {
    RunLog log;
    log.instance_name = instance.name();
    log.config = config;
    log.seed = seed;
    log.summary.best_loss = landscape.best_loss;
    log.summary.oracle_slack = landscape.slack();
    log.error = std::string("policy: ") + e.what();
    return log;
  }
  return run_episode(instance, *policy, config, horizon, seed, landscape, options);
}

RunLog run_episode(const Instance& instance, Policy& policy, const PolicyConfig& config,
                   long horizon, std::uint64_t seed, const LossLandscape& landscape,
                   const EpisodeOptions& options) {
  if (horizon < 0) throw std::invalid_argument("run_episode: T must be >= 0");
  if (landscape.instance_name != instance.name()) {
    throw std::invalid_argument("run_episode: landscape belongs to '" + landscape.instance_name +
                                "', not '" + instance.name() + "'");
  }
  RunLog log;
  log.instance_name = instance.name();
  log.config = config;
  log.seed = seed;
  log.summary.best_loss = landscape.best_loss;
  log.summary.oracle_slack = landscape.slack();
  if (options.record_rounds) log.rounds.reserve(static_cast<std::size_t>(horizon));

  Rng rng(seed);
  long double total_expected = 0.0L;
  long double total_realized = 0.0L;
  const long late_start = (3 * horizon) / 4;
  std::map<int, std::pair<long, double>> late_counts;

  try {
    for (long t = 1; t <= horizon; ++t) {
      PolicyDecision decision = policy.decide(t);
      const RoundSample sample = sample_round(instance, decision.cost, rng);
      const double prediction = sample.x_hat.dot(decision.nu);
      const double err = prediction - sample.y;
      const double realized = err * err + instance.lambda() * decision.cost;
      const double expected = expected_loss(instance, decision.cost, decision.nu);
      total_expected += expected;
      total_realized += realized;
      log.summary.rounds = t;
      if (t > late_start) {
        auto& slot = late_counts[decision.arm];
        ++slot.first;
        slot.second = decision.cost;
      }
      if (options.record_rounds) {
        RoundRecord r;
        r.t = t;
        r.arm = decision.arm;
        r.cost = decision.cost;
        r.nu = decision.nu;
        r.squared_error = err * err;
        r.loss_realized = realized;
        r.loss_expected = expected;
        r.regret_cum = static_cast<double>(total_expected - static_cast<long double>(t) *
                                                               landscape.best_loss);
        log.rounds.push_back(std::move(r));
      }
      policy.observe(decision, sample);
    }
  } catch (const std::exception& e) {
    log.error = "round " + std::to_string(log.summary.rounds + 1) + ": " + e.what();
  }

  log.summary.total_expected_loss = static_cast<double>(total_expected);
  log.summary.total_realized_loss = static_cast<double>(total_realized);
  log.summary.regret = static_cast<double>(
      total_expected - static_cast<long double>(log.summary.rounds) * landscape.best_loss);
  long best_count = -1;
  for (const auto& [arm, slot] : late_counts) {
    if (slot.first > best_count) {
      best_count = slot.first;
      log.summary.late_modal_arm = arm;
      log.summary.late_modal_cost = slot.second;
    }
  }
  return log;
}

RunLog run_episode(const Instance& instance, const PolicyConfig& config, long horizon,
                   std::uint64_t seed) {
  return run_episode(instance, config, horizon, seed, loss_landscape(instance));
}

double expected_regret(const RunLog& log, const LossLandscape& landscape) {
  if (log.instance_name != landscape.instance_name) {
    throw std::invalid_argument("expected_regret: run log is for '" + log.instance_name +
                                "' but landscape is for '" + landscape.instance_name + "'");
  }
  return log.summary.total_expected_loss -
         static_cast<double>(log.summary.rounds) * landscape.best_loss;
}

void write_runlog_csv(std::ostream& out, const RunLog& log) {
  const int d = log.config.d;
  out << "t,k,cost,loss_expected,loss_realized,regret_cum";
  for (int j = 0; j < d; ++j) out << ",nu_" << j;
  out << '\n';
  out.precision(17);
  for (const RoundRecord& r : log.rounds) {
    out << r.t << ',' << r.arm << ',' << r.cost << ',' << r.loss_expected << ','
        << r.loss_realized << ',' << r.regret_cum;
    for (int j = 0; j < d; ++j) out << ',' << r.nu(j);
    out << '\n';
  }
}

// --- rate fitting ------------------------------------------------------------------

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  RateFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [horizon, regret] : points) {
    if (!(horizon > 0.0)) throw std::invalid_argument("fit_rate: horizons must be positive");
    if (!(regret > 0.0) || !std::isfinite(regret)) {
      fit.warnings.push_back("dropped T=" + std::to_string(static_cast<long>(horizon)) +
                             " with nonpositive regret " + std::to_string(regret));
      continue;
    }
    xs.push_back(std::log(horizon));
    ys.push_back(std::log(regret));
  }
  const std::size_t n = xs.size();
  if (n < 3) throw std::invalid_argument("rate fit requires ≥ 3 horizons");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate: horizons must be distinct");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    sse += r * r;
  }
  fit.stderr_slope = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  fit.points_used = static_cast<int>(n);
  return fit;
}

// --- sweeps ---------------------------------------------------------------------------

SweepResult sweep(const std::vector<Instance>& instances, PolicyVariant variant,
                  const std::vector<long>& horizons, const std::vector<std::uint64_t>& seeds,
                  const SweepOptions& options) {
  if (instances.empty()) throw std::invalid_argument("sweep: no instances");
  if (horizons.empty()) throw std::invalid_argument("sweep: no horizons");
  if (seeds.empty()) throw std::invalid_argument("sweep: seed list is empty");
  for (long h : horizons) {
    if (h < 1) throw std::invalid_argument("sweep: horizons must be >= 1");
  }

  SweepResult result;
  result.variant = variant;
  result.horizons = horizons;
  std::sort(result.horizons.begin(), result.horizons.end());
  result.horizons.erase(std::unique(result.horizons.begin(), result.horizons.end()),
                        result.horizons.end());
  result.seeds = seeds;
  for (const Instance& inst : instances) result.instance_names.push_back(inst.name());

  std::vector<LossLandscape> landscapes;
  landscapes.reserve(instances.size());
  for (const Instance& inst : instances) landscapes.push_back(loss_landscape(inst, options.oracle_grid));

  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (long h : result.horizons) {
      for (std::uint64_t s : seeds) {
        EpisodeOutcome o;
        o.instance_index = static_cast<int>(i);
        o.horizon = h;
        o.seed = s;
        result.episodes.push_back(o);
      }
    }
  }

  parallel_for(result.episodes.size(), options.threads, [&](std::size_t j) {
    EpisodeOutcome& o = result.episodes[j];
    const Instance& inst = instances[static_cast<std::size_t>(o.instance_index)];
    try {
      const PolicyConfig config = resolve_policy_config(variant, inst, o.horizon, options.overrides);
      const RunLog log = run_episode(inst, config, o.horizon, o.seed,
                                     landscapes[static_cast<std::size_t>(o.instance_index)],
                                     EpisodeOptions{false});
      o.regret = log.summary.regret;
      o.late_modal_cost = log.summary.late_modal_cost;
      o.error = log.error;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });

  std::vector<std::pair<double, double>> points;
  for (long h : result.horizons) {
    HorizonStats st;
    st.horizon = h;
    std::vector<double> values;
    for (const EpisodeOutcome& o : result.episodes) {
      if (o.horizon != h) continue;
      if (o.error) continue;
      values.push_back(o.regret);
    }
    st.episodes = static_cast<int>(values.size());
    if (!values.empty()) {
      double sum = 0.0;
      for (double v : values) sum += v;
      st.mean = sum / static_cast<double>(values.size());
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - st.mean) * (v - st.mean);
        st.stderr_mean = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                                   static_cast<double>(values.size()));
      }
      points.emplace_back(static_cast<double>(h), st.mean);
    }
    result.stats.push_back(st);
  }
  for (const EpisodeOutcome& o : result.episodes) {
    if (o.error) ++result.failures;
  }
  try {
    result.fit = fit_rate(points);
  } catch (const std::invalid_argument&) {
    result.fit.reset();
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "T,mean,stderr,n_seeds\n";
  out.precision(17);
  for (const HorizonStats& st : result.stats) {
    out << st.horizon << ',' << st.mean << ',' << st.stderr_mean << ',' << st.episodes << '\n';
  }
}

} // namespace paidreg
