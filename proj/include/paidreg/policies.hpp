#pragma once

#include "paidreg/estimators.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace paidreg {

enum class PolicyVariant { KnownCov, UnknownCov };

std::string to_string(PolicyVariant v);
PolicyVariant policy_variant_from_string(const std::string& name);

struct ScheduleParams {
  double delta;
  int grid; // K
};

/// Largest confidence level the log terms accept; schedules are clamped to it.
inline constexpr double kMaxDelta = 0.999;

/// delta = 1/T, K = ceil(lambda T).
ScheduleParams alg1_params(long horizon, double lambda);

/// K = ceil(T^{1/3} lambda^{2/3} / (S^2 (R^2 d + S^2))^{2/3}), delta = 1/(K T).
ScheduleParams alg2_params(long horizon, double lambda, double S, double R, int d);

struct PolicyOverrides {
  std::optional<int> grid;
  std::optional<double> delta;
  bool include_zero_arm = false;
  double width_scale = 1.0;
  bool record_diagnostics = false;
};

struct PolicyConfig {
  PolicyVariant variant = PolicyVariant::KnownCov;
  long horizon = 1;
  int grid = 1;
  double delta = 0.5;
  double lambda = 1.0;
  double S = 1.0;
  double R = 1.0;
  int d = 1;
  PolicyOverrides overrides;

  ConfidenceParams confidence() const;
};

/// Fills K and delta from the matching schedule unless overridden.
PolicyConfig resolve_policy_config(PolicyVariant variant, const Instance& instance,
                                   long horizon, const PolicyOverrides& overrides = {});

struct PolicyDecision {
  double cost = 0.0;
  int arm = 1;
  Vector nu;
  std::vector<double> diagnostics; // per-arm objective or index, when recorded
};

class PolicyError : public std::runtime_error {
public:
  PolicyError(int arm, const std::string& what)
      : std::runtime_error(what), arm_(arm) {}
  int arm() const { return arm_; }

private:
  int arm_;
};

/// One greedy round over the grid with known covariances. `state` holds the
/// history before round t. Ties go to the smallest arm index.
PolicyDecision alg1_step(const KnownCovState& state, const ConfidenceParams& conf,
                         const CovarianceProfile& profile, double lambda, int grid,
                         bool include_zero_arm = false, bool record_diagnostics = false);

/// One optimistic round with unknown covariances; rounds 1..arm_count are the
/// forced initialization with predictor 0.
PolicyDecision alg2_step(const UnknownCovState& state, const ConfidenceParams& conf,
                         double lambda, long t, bool record_diagnostics = false);

class Policy {
public:
  virtual ~Policy() = default;
  /// Decision for round t (1-based) given everything observed so far.
  virtual PolicyDecision decide(long t) = 0;
  virtual void observe(const PolicyDecision& decision, const RoundSample& sample) = 0;
};

class KnownCovPolicy final : public Policy {
public:
  /// `force_generic` disables the shared-eigenbasis fast path for isotropic
  /// profiles; both paths solve the same problems.
  KnownCovPolicy(const PolicyConfig& config, CovarianceProfile profile,
                 bool force_generic = false);

  PolicyDecision decide(long t) override;
  void observe(const PolicyDecision& decision, const RoundSample& sample) override;

  const KnownCovState& state() const { return state_; }

private:
  PolicyDecision decide_isotropic() const;

  PolicyConfig config_;
  ConfidenceParams conf_;
  CovarianceProfile profile_;
  KnownCovState state_;
  bool fast_;
  std::vector<double> arm_costs_;
  std::vector<double> arm_variance_;
};

class UnknownCovPolicy final : public Policy {
public:
  explicit UnknownCovPolicy(const PolicyConfig& config);

  PolicyDecision decide(long t) override;
  void observe(const PolicyDecision& decision, const RoundSample& sample) override;

  const UnknownCovState& state() const { return state_; }

private:
  PolicyConfig config_;
  ConfidenceParams conf_;
  UnknownCovState state_;
  std::vector<double> min_loss_;
  std::vector<Vector> best_nu_;
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& config, const Instance& instance);

} // namespace paidreg
