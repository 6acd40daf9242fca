#include "paidreg/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace paidreg {

namespace {

double ball_min(const SpectralBallQuadratic& q, double shift, double radius, int arm) {
  if (radius <= 0.0) return 0.0;
  try {
    return q.min_value(shift, radius);
  } catch (const LinalgError& e) {
    throw PolicyError(arm, "arm " + std::to_string(arm) + ": " + e.what());
  }
}

Vector ball_argmin(const SpectralBallQuadratic& q, double shift, double radius, int arm) {
  if (radius <= 0.0) return Vector::Zero(q.dim());
  try {
    return q.solve(shift, radius).nu;
  } catch (const LinalgError& e) {
    throw PolicyError(arm, "arm " + std::to_string(arm) + ": " + e.what());
  }
}

int ceil_guarded(double x) {
  // Absorb representation error such as 0.1 * 30 = 3.0000000000000004.
  return static_cast<int>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
}

} // namespace

std::string to_string(PolicyVariant v) {
  return v == PolicyVariant::KnownCov ? "known" : "unknown";
}

PolicyVariant policy_variant_from_string(const std::string& name) {
  if (name == "known" || name == "KnownCov") return PolicyVariant::KnownCov;
  if (name == "unknown" || name == "UnknownCov") return PolicyVariant::UnknownCov;
  throw std::invalid_argument("unknown policy '" + name + "' (expected known|unknown)");
}

ScheduleParams alg1_params(long horizon, double lambda) {
  if (horizon < 1) throw std::invalid_argument("alg1_params: T must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("alg1_params: lambda must be positive");
  const double delta = std::min(1.0 / static_cast<double>(horizon), kMaxDelta);
  const int grid = std::max(1, ceil_guarded(lambda * static_cast<double>(horizon)));
  return {delta, grid};
}

ScheduleParams alg2_params(long horizon, double lambda, double S, double R, int d) {
  if (horizon < 1) throw std::invalid_argument("alg2_params: T must be >= 1");
  if (!(lambda > 0.0) || !(S > 0.0) || !(R >= 0.0) || d < 1) {
    throw std::invalid_argument("alg2_params: constants must be positive");
  }
  const double scale = std::pow(S * S * (R * R * d + S * S), 2.0 / 3.0);
  const double raw = std::cbrt(static_cast<double>(horizon)) * std::pow(lambda, 2.0 / 3.0) / scale;
  const int grid = std::max(1, ceil_guarded(raw));
  const double delta =
      std::min(1.0 / (static_cast<double>(grid) * static_cast<double>(horizon)), kMaxDelta);
  return {delta, grid};
}

ConfidenceParams PolicyConfig::confidence() const {
  return ConfidenceParams(d, R, S, delta, overrides.width_scale);
}

PolicyConfig resolve_policy_config(PolicyVariant variant, const Instance& instance,
                                   long horizon, const PolicyOverrides& overrides) {
  PolicyConfig c;
  c.variant = variant;
  c.horizon = horizon;
  c.lambda = instance.lambda();
  c.S = instance.S();
  c.R = instance.R();
  c.d = instance.dim();
  c.overrides = overrides;
  const ScheduleParams sched =
      variant == PolicyVariant::KnownCov
          ? alg1_params(std::max(horizon, 1L), c.lambda)
          : alg2_params(std::max(horizon, 1L), c.lambda, c.S, c.R, c.d);
  c.grid = overrides.grid.value_or(sched.grid);
  c.delta = overrides.delta.value_or(sched.delta);
  if (c.grid < 1) throw std::invalid_argument("policy config: K must be >= 1");
  if (!(c.delta > 0.0 && c.delta < 1.0)) {
    throw std::invalid_argument("policy config: delta must lie in (0, 1)");
  }
  return c;
}

// --- known covariances ----------------------------------------------------------

PolicyDecision alg1_step(const KnownCovState& state, const ConfidenceParams& conf,
                         const CovarianceProfile& profile, double lambda, int grid,
                         bool include_zero_arm, bool record_diagnostics) {
  const int first = include_zero_arm ? 0 : 1;
  PolicyDecision best;
  double best_value = std::numeric_limits<double>::infinity();
  std::optional<SpectralBallQuadratic> best_q;
  for (int k = first; k <= grid; ++k) {
    const double c = static_cast<double>(k) / grid;
    const QuadraticForm q = kc_quadratic(state, c, lambda, profile, conf, true);
    SpectralBallQuadratic solver(q.a, q.b);
    const double value = ball_min(solver, 0.0, conf.S, k) + q.constant;
    if (record_diagnostics) best.diagnostics.push_back(value);
    if (value < best_value) {
      best_value = value;
      best.arm = k;
      best.cost = c;
      best_q.emplace(std::move(solver));
    }
  }
  best.nu = ball_argmin(*best_q, 0.0, conf.S, best.arm);
  return best;
}

KnownCovPolicy::KnownCovPolicy(const PolicyConfig& config, CovarianceProfile profile,
                               bool force_generic)
    : config_(config),
      conf_(config.confidence()),
      profile_(std::move(profile)),
      state_(config.d),
      fast_(profile_.isotropic() && !force_generic) {
  if (profile_.dim() != config.d) throw std::invalid_argument("policy: profile dimension mismatch");
  const int first = config.overrides.include_zero_arm ? 0 : 1;
  for (int k = first; k <= config.grid; ++k) {
    const double c = static_cast<double>(k) / config.grid;
    arm_costs_.push_back(c);
    if (fast_) arm_variance_.push_back(profile_.isotropic_variance(c));
  }
}

PolicyDecision KnownCovPolicy::decide_isotropic() const {
  // Every arm's quadratic is A_acc + (t s(c) + gamma_t) I, so one
  // eigendecomposition serves the whole grid.
  const long t = state_.t;
  const double td = static_cast<double>(t);
  const double gamma = t >= 1 ? conf_.gamma(t) : 0.0;
  const double q = static_cast<double>(state_.q_acc);
  const SpectralBallQuadratic solver(SymMatrix(state_.a_acc.cast<double>()),
                                     state_.b_acc.cast<double>());
  const int first = config_.overrides.include_zero_arm ? 0 : 1;
  PolicyDecision best;
  double best_value = std::numeric_limits<double>::infinity();
  double best_shift = 0.0;
  if (config_.overrides.record_diagnostics) best.diagnostics.reserve(arm_costs_.size());
  for (std::size_t i = 0; i < arm_costs_.size(); ++i) {
    const int k = first + static_cast<int>(i);
    const double shift = td * arm_variance_[i] + gamma;
    double fit = 0.0;
    if (conf_.S > 0.0 && !solver.interior_min_value(shift, conf_.S, fit)) {
      fit = ball_min(solver, shift, conf_.S, k);
    }
    const double value = fit + q + td * config_.lambda * arm_costs_[i];
    if (config_.overrides.record_diagnostics) best.diagnostics.push_back(value);
    if (value < best_value) {
      best_value = value;
      best.arm = k;
      best.cost = arm_costs_[i];
      best_shift = shift;
    }
  }
  best.nu = ball_argmin(solver, best_shift, conf_.S, best.arm);
  return best;
}

PolicyDecision KnownCovPolicy::decide(long) {
  if (fast_) return decide_isotropic();
  return alg1_step(state_, conf_, profile_, config_.lambda, config_.grid,
                   config_.overrides.include_zero_arm, config_.overrides.record_diagnostics);
}

void KnownCovPolicy::observe(const PolicyDecision& decision, const RoundSample& sample) {
  kc_update(state_, decision.cost, sample, profile_);
}

// --- unknown covariances --------------------------------------------------------

PolicyDecision alg2_step(const UnknownCovState& state, const ConfidenceParams& conf,
                         double lambda, long t, bool record_diagnostics) {
  PolicyDecision out;
  if (t <= state.arm_count()) {
    out.arm = state.first_arm() + static_cast<int>(t - 1);
    out.cost = state.cost(out.arm);
    out.nu = Vector::Zero(state.dim());
    return out;
  }
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = state.first_arm(); k <= state.last_arm(); ++k) {
    const double index = ucb_index(state, k, lambda, conf, t);
    if (record_diagnostics) out.diagnostics.push_back(index);
    if (index < best_value) {
      best_value = index;
      out.arm = k;
    }
  }
  out.cost = state.cost(out.arm);
  const QuadraticForm q = uc_quadratic(state, out.arm, lambda);
  out.nu = ball_argmin(SpectralBallQuadratic(q.a, q.b), 0.0, conf.S, out.arm);
  return out;
}

UnknownCovPolicy::UnknownCovPolicy(const PolicyConfig& config)
    : config_(config),
      conf_(config.confidence()),
      state_(config.d, config.grid, config.overrides.include_zero_arm),
      min_loss_(static_cast<std::size_t>(state_.arm_count()), 0.0),
      best_nu_(static_cast<std::size_t>(state_.arm_count()), Vector::Zero(config.d)) {}

PolicyDecision UnknownCovPolicy::decide(long t) {
  PolicyDecision out;
  if (t <= state_.arm_count()) {
    out.arm = state_.first_arm() + static_cast<int>(t - 1);
    out.cost = state_.cost(out.arm);
    out.nu = Vector::Zero(state_.dim());
    return out;
  }
  double best_value = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < min_loss_.size(); ++i) {
    const int k = state_.first_arm() + static_cast<int>(i);
    const double index = ucb_index_from_min(min_loss_[i], state_.arm(k).visits, conf_, t);
    if (config_.overrides.record_diagnostics) out.diagnostics.push_back(index);
    if (index < best_value) {
      best_value = index;
      best_i = i;
    }
  }
  out.arm = state_.first_arm() + static_cast<int>(best_i);
  out.cost = state_.cost(out.arm);
  out.nu = best_nu_[best_i];
  return out;
}

void UnknownCovPolicy::observe(const PolicyDecision& decision, const RoundSample& sample) {
  uc_update(state_, decision.arm, sample);
  const std::size_t i = static_cast<std::size_t>(decision.arm - state_.first_arm());
  const QuadraticForm q = uc_quadratic(state_, decision.arm, config_.lambda);
  const SpectralBallQuadratic solver(q.a, q.b);
  if (conf_.S > 0.0) {
    BallSolution s;
    try {
      s = solver.solve(0.0, conf_.S);
    } catch (const LinalgError& e) {
      throw PolicyError(decision.arm, e.what());
    }
    min_loss_[i] = s.objective + q.constant;
    best_nu_[i] = std::move(s.nu);
  } else {
    min_loss_[i] = q.constant;
  }
}

std::unique_ptr<Policy> make_policy(const PolicyConfig& config, const Instance& instance) {
  if (config.variant == PolicyVariant::KnownCov) {
    return std::make_unique<KnownCovPolicy>(config, instance.profile());
  }
  return std::make_unique<UnknownCovPolicy>(config);
}

} // namespace paidreg
