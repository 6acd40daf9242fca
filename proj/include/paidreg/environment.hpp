#pragma once

#include "paidreg/linalg.hpp"
#include "paidreg/rng.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace paidreg {

// ---------------------------------------------------------------------------
// Noise covariance profiles c -> Sigma_n(c)
// ---------------------------------------------------------------------------

enum class ProfileKind { Constant, Step, FRatio, PerturbedFRatio, PiecewiseLinear };

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

struct ProfileKnot {
  double cost;
  SymMatrix sigma;
};

/// f(c) = (1 - c) / (1 + c).
double f_ratio(double c);

/// Left knot c_k = 1/2 + (k - 1) / (4K) of the k-th modified interval, k in 1..K+1.
double perturbation_knot(int k, int grid);

/// The f-ratio variance with a hidden dip on [c_k, c_{k+1}): linear from
/// f(c_k) to f(c_{k+1}) over the first half of the interval, then flat at
/// f(c_{k+1}).
double perturbed_f_ratio(double c, int k, int grid);

/// Immutable map from payment to noise covariance.
class CovarianceProfile {
public:
  static CovarianceProfile constant(SymMatrix sigma);
  /// `high` for c < threshold, `low` from the threshold on.
  static CovarianceProfile step(SymMatrix high, SymMatrix low, double threshold);
  static CovarianceProfile f_ratio(SymMatrix scale);
  static CovarianceProfile perturbed_f_ratio(int k, int grid, SymMatrix scale);
  /// Linear interpolation between knots, constant beyond the end knots.
  static CovarianceProfile piecewise_linear(std::vector<ProfileKnot> knots);

  ProfileKind kind() const { return kind_; }
  int dim() const { return first_.dim(); }

  /// Sigma_n(c). No range check; see sigma_n() for the checked entry point.
  SymMatrix at(double c) const;

  /// True when every Sigma_n(c) is a multiple of the identity.
  bool isotropic() const { return isotropic_; }
  /// s(c) with Sigma_n(c) = s(c) I. Only meaningful when isotropic().
  double isotropic_variance(double c) const;

  // Parameters, by kind.
  const SymMatrix& constant_sigma() const { return first_; }
  const SymMatrix& step_high() const { return first_; }
  const SymMatrix& step_low() const { return second_; }
  double step_threshold() const { return threshold_; }
  const SymMatrix& scale() const { return first_; }
  int perturbed_index() const { return k_; }
  int perturbed_grid() const { return grid_; }
  const std::vector<ProfileKnot>& knots() const { return knots_; }

private:
  CovarianceProfile(ProfileKind kind, SymMatrix first);

  double scalar_weight(double c) const;

  ProfileKind kind_;
  SymMatrix first_;
  SymMatrix second_;
  double threshold_ = 0.0;
  int k_ = 0;
  int grid_ = 0;
  std::vector<ProfileKnot> knots_;
  bool isotropic_ = false;
  double iso_first_ = 0.0;
  double iso_second_ = 0.0;
  std::vector<double> iso_knots_;
};

/// Checked Sigma_n(c); throws std::domain_error for c outside [0, 1].
SymMatrix sigma_n(const CovarianceProfile& profile, double c);

struct ProfileViolation {
  enum class Kind { NotPsd, NotMonotone };
  Kind kind;
  double c1;
  double c2; // equals c1 for NotPsd
  double min_eigenvalue;
};

struct ProfileReport {
  int grid_size = 0;
  std::vector<ProfileViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks PSD at every grid cost and Sigma_n(c2) <= Sigma_n(c1) for every grid
/// pair c1 <= c2, both at tolerance 1e-9. The grid is {i / (grid_size - 1)}.
ProfileReport validate_profile(const CovarianceProfile& profile, int grid_size);

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

class InstanceError : public std::invalid_argument {
public:
  InstanceError(std::string check, const std::string& what)
      : std::invalid_argument(what), check_(std::move(check)) {}
  const std::string& check() const { return check_; }

private:
  std::string check_;
};

/// Plain description of an environment, prior to validation.
struct InstanceParams {
  std::string name = "instance";
  Vector theta_star;
  Vector x_mean;
  SymMatrix x_cov_centered;
  CovarianceProfile profile = CovarianceProfile::constant(SymMatrix::zero(1));
  double lambda = 1.0;
  double S = 1.0;
  std::optional<double> R; // derived from the covariances when absent
  double output_noise_var = 0.0;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Every structural check an instance must pass; never throws for content.
std::vector<CheckResult> check_instance(const InstanceParams& params);

/// sqrt(max(lambda_max(C_x), lambda_max(Sigma_n(0)))).
double declared_subgaussian_constant(const SymMatrix& x_cov_centered,
                                     const CovarianceProfile& profile);

/// A validated, immutable environment.
class Instance {
public:
  /// Throws InstanceError naming the first failed check.
  explicit Instance(InstanceParams params);

  const std::string& name() const { return p_.name; }
  int dim() const { return static_cast<int>(p_.theta_star.size()); }
  const Vector& theta_star() const { return p_.theta_star; }
  const Vector& x_mean() const { return p_.x_mean; }
  const SymMatrix& x_cov_centered() const { return p_.x_cov_centered; }
  const CovarianceProfile& profile() const { return p_.profile; }
  double lambda() const { return p_.lambda; }
  double S() const { return p_.S; }
  double R() const { return *p_.R; }
  double output_noise_var() const { return p_.output_noise_var; }
  const InstanceParams& params() const { return p_; }

  /// Autocorrelation E[x x^T] = C_x + xbar xbar^T.
  const SymMatrix& sigma_x() const { return sigma_x_; }
  SymMatrix sigma_n(double c) const { return paidreg::sigma_n(p_.profile, c); }
  SymMatrix sigma_xhat(double c) const { return sigma_x_ + sigma_n(c); }
  /// Sigma_x theta*.
  const Vector& cross_moment() const { return cross_; }
  /// theta*^T Sigma_x theta* = E[y^2] without output noise.
  double signal_energy() const { return energy_; }
  /// Symmetric square root of C_x.
  const Matrix& x_cov_root() const { return x_root_; }

private:
  InstanceParams p_;
  SymMatrix sigma_x_;
  Vector cross_;
  double energy_ = 0.0;
  Matrix x_root_;
};

struct RoundSample {
  Vector x;
  Vector n;
  Vector x_hat; // x + n
  double y = 0.0;
};

/// Draws x ~ N(xbar, C_x), n ~ N(0, Sigma_n(c)) and y = x^T theta* + eta with
/// eta ~ N(0, sigma_eta^2), in that order, from `rng`.
RoundSample sample_round(const Instance& instance, double c, Rng& rng);

// ---------------------------------------------------------------------------
// Lower-bound constructions
// ---------------------------------------------------------------------------

struct KnownLowerBoundPair {
  Instance minus; // x ~ N(0, 1 - eps)
  Instance plus;  // x ~ N(0, 1 + eps)
};

/// Two 1-D instances with theta* = 1, lambda = 1 and noise variance
/// 1{c < 1/2}. eps must lie in (0, 1/2].
KnownLowerBoundPair make_lower_bound_known(double eps);

struct UnknownLowerBoundFamily {
  Instance baseline;              // sigma_n^2 = f(c), flat optimal loss 1/2
  std::vector<Instance> perturbed; // p_1 .. p_K
};

UnknownLowerBoundFamily make_lower_bound_unknown(int grid);

/// KL(N(0, v1) || N(0, v2)) = (v1/v2 - ln(v1/v2) - 1) / 2.
double kl_gaussian(double v1, double v2);

struct KlIntervalReport {
  int k = 0;
  int grid = 0;
  int points = 0;
  double bound = 0.0;       // 1/K^2
  double max_inside = 0.0;  // max KL over grid costs in [c_k, c_{k+1})
  double max_outside = 0.0; // max KL elsewhere; exactly 0 when the dip is local
  bool ok() const { return max_inside <= bound && max_outside == 0.0; }
};

/// KL between the baseline and k-th perturbed noise variances on the grid
/// {i / points : i < points}.
KlIntervalReport perturbation_kl_report(int k, int grid, int points);

} // namespace paidreg
