#pragma once

#include "paidreg/environment.hpp"

#include <vector>

namespace paidreg {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// ---------------------------------------------------------------------------
// Confidence constants
// ---------------------------------------------------------------------------

/// beta_t = R^2 (d + 2 sqrt(d L) + 2 L) + S^2 (1 + 2 sqrt(L / d)),
/// L = ln(3 t (t+1) / delta). Requires t >= 1 and delta in (0, 1].
double beta(long t, int d, double R, double S, double delta);

struct ConfidenceParams {
  int d = 1;
  double R = 1.0;
  double S = 1.0;
  double delta = 0.05;
  /// Multiplies the regularization gamma_t and the optimism bonus. 1 keeps
  /// the printed constants; other values exist for experimentation only.
  double width_scale = 1.0;

  ConfidenceParams() = default;
  ConfidenceParams(int d, double R, double S, double delta, double width_scale = 1.0);

  double beta(long t) const { return paidreg::beta(t, d, R, S, delta); }
  /// ln(3 d t (t+1) / delta)
  double union_log(long t) const;
  /// sqrt(8 t beta_t^2 ln(3 d t (t+1) / delta)): the matrix deviation bound.
  double matrix_bound(long t) const;
  /// gamma_t = 2 sqrt(8 t beta_t^2 ln(3dt(t+1)/delta)), times width_scale.
  double gamma(long t) const;
  /// 9 S^2 sqrt(8 t beta_t^2 ln(3dt(t+1)/delta)).
  double kc_width(long t) const;
  /// 9 S^2 sqrt(8 N beta_t^2 ln(3dt(t+1)/delta)) for an arm visited n times.
  double uc_width(long t, long n) const;
  /// 9 S^2 sqrt(8 beta_t^2 ln(3dt(t+1)/delta) / n), times width_scale.
  double uc_bonus(long t, long n) const;
};

double kc_loss_width(long t, const ConfidenceParams& conf);

/// nu^T A nu - 2 b^T nu + constant
struct QuadraticForm {
  SymMatrix a;
  Vector b;
  double constant = 0.0;

  double evaluate(const Vector& nu) const;
};

// ---------------------------------------------------------------------------
// Known-covariance estimator
// ---------------------------------------------------------------------------

/// Sufficient statistics of the covariance-shifted empirical loss.
struct KnownCovState {
  explicit KnownCovState(int dim);

  long t = 0;
  LMatrix a_acc; // sum of (xhat xhat^T - Sigma_n(c_s))
  LVector b_acc; // sum of xhat y
  long double q_acc = 0.0L; // sum of y^2

  int dim() const { return static_cast<int>(b_acc.size()); }
};

void kc_update(KnownCovState& state, double c_s, const RoundSample& sample,
               const CovarianceProfile& profile);

/// A = A_acc + t Sigma_n(c) (+ gamma_t I when regularized), b = b_acc,
/// constant = q_acc + t lambda c.
QuadraticForm kc_quadratic(const KnownCovState& state, double c, double lambda,
                           const CovarianceProfile& profile, const ConfidenceParams& conf,
                           bool regularized);

// ---------------------------------------------------------------------------
// Unknown-covariance estimator
// ---------------------------------------------------------------------------

struct ArmStats {
  LMatrix a;     // sum of xhat xhat^T over visits
  LVector b;     // sum of xhat y
  long double q = 0.0L; // sum of y^2
  long visits = 0;
};

/// Per-arm statistics on the grid {k/K}. Arm indices run over 1..K, plus
/// arm 0 (cost 0) when constructed with `with_zero_arm`.
class UnknownCovState {
public:
  UnknownCovState(int dim, int grid, bool with_zero_arm = false);

  int dim() const { return dim_; }
  int grid() const { return grid_; }
  int first_arm() const { return first_; }
  int last_arm() const { return grid_; }
  int arm_count() const { return grid_ - first_ + 1; }
  double cost(int k) const { return static_cast<double>(k) / grid_; }
  long t() const { return t_; }

  const ArmStats& arm(int k) const;
  ArmStats& arm_mut(int k);
  void advance() { ++t_; }

private:
  int dim_;
  int grid_;
  int first_;
  long t_ = 0;
  std::vector<ArmStats> arms_;
};

void uc_update(UnknownCovState& state, int k, const RoundSample& sample);

/// Per-arm empirical loss as a quadratic: constant includes N_k lambda k/K.
QuadraticForm uc_quadratic(const UnknownCovState& state, int k, double lambda);

/// Empirical mean loss at the arm's ball-constrained minimizer minus the
/// optimism bonus. Requires at least one visit.
double ucb_index(const UnknownCovState& state, int k, double lambda,
                 const ConfidenceParams& conf, long t);

/// Index from a precomputed empirical minimum: min_loss / n - bonus(t, n).
double ucb_index_from_min(double min_loss, long n, const ConfidenceParams& conf, long t);

} // namespace paidreg
