#pragma once

#include "paidreg/environment.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace paidreg {

/// Geometric checkpoints 2^4, 2^5, ... up to t_max, with t_max appended when
/// it is not a power of two. Empty when t_max < 16.
std::vector<long> geometric_checkpoints(long t_max);

struct ViolationReport {
  std::string kind;
  int trials = 0;
  double delta = 0.0;
  double nominal = 0.0; // delta for the matrix bound, 3 delta for the loss widths
  std::vector<long> checkpoints;
  std::vector<int> violations;  // per checkpoint
  std::vector<double> max_ratio; // per checkpoint, max over trials of deviation / bound
  int any_violations = 0;       // trials violating at some checkpoint

  double frequency() const;
  /// sqrt(nominal (1 - nominal) / trials)
  double binomial_stderr() const;
  /// frequency <= nominal + 3 binomial standard errors
  bool within_contract() const;
};

/// Draws X_s ~ N(0, R^2 I_d) and checks ||sum_s X_s X_s^T - t R^2 I||_op
/// against sqrt(8 t beta_t^2 ln(3dt(t+1)/delta)) at every checkpoint; beta_t
/// is evaluated with S = 0. Requires trials >= 100.
ViolationReport mc_matrix_concentration(int d, double R, long t_max, double delta, int trials,
                                        std::uint64_t seed, unsigned threads = 0);

struct LossUniformReport {
  ViolationReport combined; // a trial counts if either estimator violates
  ViolationReport kc;
  ViolationReport uc;
  int grid = 0;
  int probes = 0;
  /// deviation[trial][checkpoint] = max over probes of |Lkc(c, nu)/t - l(c, nu)|.
  std::vector<std::vector<double>> deviation;

  /// Median over trials of deviation at each checkpoint.
  std::vector<double> median_deviation() const;
  /// Fraction of trials whose deviation at t_late is below that at t_early.
  double decay_fraction(long t_early, long t_late) const;
};

inline constexpr int kDefaultLossGrid = 8;

/// Plays uniformly random grid costs k/K and, at each checkpoint, compares the
/// known-covariance estimator at random (c, nu) probes and every arm's
/// unknown-covariance estimator at the same nu probes with the exact loss.
/// Probes are c ~ U[0, 1], nu ~ U(S-ball), drawn once per trial. Requires
/// probes >= 10.
LossUniformReport mc_loss_uniform(const Instance& instance, long t_max, double delta, int trials,
                                  int probes, std::uint64_t seed, int grid = kDefaultLossGrid,
                                  unsigned threads = 0);

} // namespace paidreg
