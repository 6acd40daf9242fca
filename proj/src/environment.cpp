#include "paidreg/environment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace paidreg {

namespace {

bool is_scaled_identity(const SymMatrix& m, double* scale) {
  const int d = m.dim();
  const double s = m(0, 0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (m(i, j) != (i == j ? s : 0.0)) return false;
    }
  }
  *scale = s;
  return true;
}

Matrix psd_root(const SymMatrix& m, const char* what) {
  const EigenDecomp e = sym_eigen(m);
  const double floor = -kPsdTolerance * std::max(1.0, std::abs(e.max_eigenvalue()));
  if (e.min_eigenvalue() < floor) {
    std::ostringstream msg;
    msg << what << " is not PSD (min eigenvalue " << e.min_eigenvalue() << ")";
    throw LinalgError(msg.str());
  }
  const Vector roots = e.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return e.eigenvectors * roots.asDiagonal() * e.eigenvectors.transpose();
}

} // namespace

std::string to_string(ProfileKind kind) {
  switch (kind) {
  case ProfileKind::Constant: return "Constant";
  case ProfileKind::Step: return "Step";
  case ProfileKind::FRatio: return "FRatio";
  case ProfileKind::PerturbedFRatio: return "PerturbedFRatio";
  case ProfileKind::PiecewiseLinear: return "PiecewiseLinear";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(const std::string& name) {
  for (ProfileKind k : {ProfileKind::Constant, ProfileKind::Step, ProfileKind::FRatio,
                        ProfileKind::PerturbedFRatio, ProfileKind::PiecewiseLinear}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown profile kind '" + name + "'");
}

double f_ratio(double c) { return (1.0 - c) / (1.0 + c); }

double perturbation_knot(int k, int grid) {
  return 0.5 + static_cast<double>(k - 1) / (4.0 * grid);
}

double perturbed_f_ratio(double c, int k, int grid) {
  const double lo = perturbation_knot(k, grid);
  const double hi = perturbation_knot(k + 1, grid);
  const double mid = 0.5 * (lo + hi);
  if (c >= lo && c < mid) {
    return f_ratio(lo) + 2.0 * (c - lo) / (hi - lo) * (f_ratio(hi) - f_ratio(lo));
  }
  if (c >= mid && c < hi) return f_ratio(hi);
  return f_ratio(c);
}

// --- CovarianceProfile -------------------------------------------------------

CovarianceProfile::CovarianceProfile(ProfileKind kind, SymMatrix first)
    : kind_(kind), first_(std::move(first)) {
  if (!first_.all_finite()) throw std::invalid_argument("profile: non-finite matrix");
}

CovarianceProfile CovarianceProfile::constant(SymMatrix sigma) {
  CovarianceProfile p(ProfileKind::Constant, std::move(sigma));
  p.isotropic_ = is_scaled_identity(p.first_, &p.iso_first_);
  return p;
}

CovarianceProfile CovarianceProfile::step(SymMatrix high, SymMatrix low, double threshold) {
  if (high.dim() != low.dim()) throw std::invalid_argument("step profile: dimension mismatch");
  if (!std::isfinite(threshold)) throw std::invalid_argument("step profile: bad threshold");
  CovarianceProfile p(ProfileKind::Step, std::move(high));
  p.second_ = std::move(low);
  p.threshold_ = threshold;
  p.isotropic_ = is_scaled_identity(p.first_, &p.iso_first_) &&
                 is_scaled_identity(p.second_, &p.iso_second_);
  return p;
}

CovarianceProfile CovarianceProfile::f_ratio(SymMatrix scale) {
  CovarianceProfile p(ProfileKind::FRatio, std::move(scale));
  p.isotropic_ = is_scaled_identity(p.first_, &p.iso_first_);
  return p;
}

CovarianceProfile CovarianceProfile::perturbed_f_ratio(int k, int grid, SymMatrix scale) {
  if (grid < 1 || k < 1 || k > grid) {
    throw std::invalid_argument("perturbed profile: need 1 <= k <= K");
  }
  CovarianceProfile p(ProfileKind::PerturbedFRatio, std::move(scale));
  p.k_ = k;
  p.grid_ = grid;
  p.isotropic_ = is_scaled_identity(p.first_, &p.iso_first_);
  return p;
}

CovarianceProfile CovarianceProfile::piecewise_linear(std::vector<ProfileKnot> knots) {
  if (knots.empty()) throw std::invalid_argument("piecewise profile: no knots");
  std::sort(knots.begin(), knots.end(),
            [](const ProfileKnot& a, const ProfileKnot& b) { return a.cost < b.cost; });
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i].sigma.dim() != knots[0].sigma.dim()) {
      throw std::invalid_argument("piecewise profile: dimension mismatch");
    }
    if (knots[i].cost == knots[i - 1].cost) {
      throw std::invalid_argument("piecewise profile: duplicate knot cost");
    }
  }
  CovarianceProfile p(ProfileKind::PiecewiseLinear, knots.front().sigma);
  p.isotropic_ = true;
  for (const auto& knot : knots) {
    double s = 0.0;
    if (!is_scaled_identity(knot.sigma, &s)) {
      p.isotropic_ = false;
      p.iso_knots_.clear();
      break;
    }
    p.iso_knots_.push_back(s);
  }
  p.knots_ = std::move(knots);
  return p;
}

double CovarianceProfile::scalar_weight(double c) const {
  return kind_ == ProfileKind::FRatio ? paidreg::f_ratio(c)
                                      : paidreg::perturbed_f_ratio(c, k_, grid_);
}

SymMatrix CovarianceProfile::at(double c) const {
  switch (kind_) {
  case ProfileKind::Constant: return first_;
  case ProfileKind::Step: return c < threshold_ ? first_ : second_;
  case ProfileKind::FRatio:
  case ProfileKind::PerturbedFRatio: return first_ * scalar_weight(c);
  case ProfileKind::PiecewiseLinear: {
    if (c <= knots_.front().cost) return knots_.front().sigma;
    if (c >= knots_.back().cost) return knots_.back().sigma;
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), c,
                               [](double v, const ProfileKnot& k) { return v < k.cost; });
    auto lo = hi - 1;
    const double w = (c - lo->cost) / (hi->cost - lo->cost);
    return lo->sigma * (1.0 - w) + hi->sigma * w;
  }
  }
  return first_;
}

double CovarianceProfile::isotropic_variance(double c) const {
  switch (kind_) {
  case ProfileKind::Constant: return iso_first_;
  case ProfileKind::Step: return c < threshold_ ? iso_first_ : iso_second_;
  case ProfileKind::FRatio:
  case ProfileKind::PerturbedFRatio: return iso_first_ * scalar_weight(c);
  case ProfileKind::PiecewiseLinear: {
    if (c <= knots_.front().cost) return iso_knots_.front();
    if (c >= knots_.back().cost) return iso_knots_.back();
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), c,
                               [](double v, const ProfileKnot& k) { return v < k.cost; });
    const auto i = static_cast<std::size_t>(hi - knots_.begin());
    const double w = (c - knots_[i - 1].cost) / (knots_[i].cost - knots_[i - 1].cost);
    return iso_knots_[i - 1] * (1.0 - w) + iso_knots_[i] * w;
  }
  }
  return iso_first_;
}

SymMatrix sigma_n(const CovarianceProfile& profile, double c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw std::domain_error("sigma_n: cost " + std::to_string(c) + " outside [0, 1]");
  }
  return profile.at(c);
}

ProfileReport validate_profile(const CovarianceProfile& profile, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("validate_profile: grid_size must be >= 2");
  constexpr double tol = 1e-9;
  ProfileReport report;
  report.grid_size = grid_size;
  std::vector<double> costs(grid_size);
  for (int i = 0; i < grid_size; ++i) costs[i] = static_cast<double>(i) / (grid_size - 1);

  if (profile.isotropic()) {
    std::vector<double> s(grid_size);
    for (int i = 0; i < grid_size; ++i) s[i] = profile.isotropic_variance(costs[i]);
    for (int i = 0; i < grid_size; ++i) {
      if (s[i] < -tol) {
        report.violations.push_back({ProfileViolation::Kind::NotPsd, costs[i], costs[i], s[i]});
      }
    }
    for (int i = 0; i < grid_size; ++i) {
      for (int j = i + 1; j < grid_size; ++j) {
        if (s[i] - s[j] < -tol) {
          report.violations.push_back(
              {ProfileViolation::Kind::NotMonotone, costs[i], costs[j], s[i] - s[j]});
        }
      }
    }
    return report;
  }

  std::vector<SymMatrix> sig;
  sig.reserve(grid_size);
  for (double c : costs) sig.push_back(profile.at(c));
  for (int i = 0; i < grid_size; ++i) {
    const double m = sym_eigen(sig[i]).min_eigenvalue();
    if (m < -tol) report.violations.push_back({ProfileViolation::Kind::NotPsd, costs[i], costs[i], m});
  }
  for (int i = 0; i < grid_size; ++i) {
    for (int j = i + 1; j < grid_size; ++j) {
      const double m = sym_eigen(sig[i] - sig[j]).min_eigenvalue();
      if (m < -tol) {
        report.violations.push_back({ProfileViolation::Kind::NotMonotone, costs[i], costs[j], m});
      }
    }
  }
  return report;
}

// --- Instance ----------------------------------------------------------------

double declared_subgaussian_constant(const SymMatrix& x_cov_centered,
                                     const CovarianceProfile& profile) {
  const double a = sym_eigen(x_cov_centered).max_eigenvalue();
  const double b = sym_eigen(profile.at(0.0)).max_eigenvalue();
  return std::sqrt(std::max({a, b, 0.0}));
}

std::vector<CheckResult> check_instance(const InstanceParams& p) {
  std::vector<CheckResult> out;
  auto add = [&out](std::string name, bool ok, std::string detail = {}) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  const long d = p.theta_star.size();
  const bool dims_ok = d >= 1 && p.x_mean.size() == d && p.x_cov_centered.dim() == d &&
                       p.profile.dim() == d;
  add("dimensions", dims_ok,
      dims_ok ? "" : "theta_star, x_mean, x_cov_centered and profile must share one dimension");
  if (!dims_ok) return out;

  const bool finite = p.theta_star.allFinite() && p.x_mean.allFinite() &&
                      p.x_cov_centered.all_finite() && std::isfinite(p.lambda) &&
                      std::isfinite(p.S) && std::isfinite(p.output_noise_var) &&
                      (!p.R || std::isfinite(*p.R));
  add("finite", finite);
  if (!finite) return out;

  add("lambda_positive", p.lambda > 0.0, "lambda = " + std::to_string(p.lambda));
  add("S_positive", p.S > 0.0, "S = " + std::to_string(p.S));
  add("output_noise_nonnegative", p.output_noise_var >= 0.0);

  const double cmin = sym_eigen(p.x_cov_centered).min_eigenvalue();
  add("x_cov_psd", cmin >= -kPsdTolerance, "min eigenvalue " + std::to_string(cmin));

  const double tn = p.theta_star.norm();
  add("theta_norm", tn <= p.S, "||theta*|| = " + std::to_string(tn) + ", S = " + std::to_string(p.S));
  const double mn = p.x_mean.norm();
  add("x_mean_norm", mn <= p.S, "||x_mean|| = " + std::to_string(mn) + ", S = " + std::to_string(p.S));

  const SymMatrix sx = p.x_cov_centered + SymMatrix::outer(p.x_mean);
  const EigenDecomp e1 = sym_eigen(sx + p.profile.at(1.0));
  const double floor = 1e-12 * std::max(1.0, e1.max_eigenvalue());
  add("sigma_xhat_1_pd", e1.min_eigenvalue() > floor,
      "min eigenvalue " + std::to_string(e1.min_eigenvalue()));

  const double r = p.R ? *p.R : declared_subgaussian_constant(p.x_cov_centered, p.profile);
  add("R_positive", r > 0.0, "R = " + std::to_string(r));
  return out;
}

Instance::Instance(InstanceParams params) : p_(std::move(params)) {
  for (const CheckResult& c : check_instance(p_)) {
    if (!c.passed) {
      throw InstanceError(c.name, "instance '" + p_.name + "' failed check " + c.name +
                                      (c.detail.empty() ? "" : ": " + c.detail));
    }
  }
  if (!p_.R) p_.R = declared_subgaussian_constant(p_.x_cov_centered, p_.profile);
  sigma_x_ = p_.x_cov_centered + SymMatrix::outer(p_.x_mean);
  cross_ = sigma_x_.matrix() * p_.theta_star;
  energy_ = p_.theta_star.dot(cross_);
  x_root_ = psd_root(p_.x_cov_centered, "x_cov_centered");
}

RoundSample sample_round(const Instance& instance, double c, Rng& rng) {
  const int d = instance.dim();
  const CovarianceProfile& profile = instance.profile();
  if (!(c >= 0.0 && c <= 1.0)) {
    throw std::domain_error("sample_round: cost " + std::to_string(c) + " outside [0, 1]");
  }
  RoundSample s;
  Vector z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  s.x = instance.x_mean() + instance.x_cov_root() * z;

  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  if (profile.isotropic()) {
    const double v = profile.isotropic_variance(c);
    if (v < -kPsdTolerance) {
      throw LinalgError("sample_round: noise covariance is not PSD at c = " + std::to_string(c));
    }
    s.n = std::sqrt(std::max(v, 0.0)) * z;
  } else {
    s.n = psd_root(profile.at(c), "noise covariance") * z;
  }
  s.x_hat = s.x + s.n;

  const double eta = rng.normal();
  s.y = s.x.dot(instance.theta_star()) + std::sqrt(instance.output_noise_var()) * eta;
  return s;
}

// --- lower-bound constructions ------------------------------------------------

KnownLowerBoundPair make_lower_bound_known(double eps) {
  if (!(eps > 0.0 && eps <= 0.5)) {
    throw std::invalid_argument("ε must lie in (0, 1/2]");
  }
  auto make = [eps](double sign, const char* tag) {
    InstanceParams p;
    std::ostringstream name;
    name << "lower_bound_known_" << tag << "_eps" << eps;
    p.name = name.str();
    p.theta_star = Vector::Ones(1);
    p.x_mean = Vector::Zero(1);
    p.x_cov_centered = SymMatrix::scaled_identity(1, 1.0 + sign * eps);
    p.profile = CovarianceProfile::step(SymMatrix::identity(1), SymMatrix::zero(1), 0.5);
    p.lambda = 1.0;
    p.S = 1.0;
    return Instance(std::move(p));
  };
  return KnownLowerBoundPair{make(-1.0, "minus"), make(1.0, "plus")};
}

UnknownLowerBoundFamily make_lower_bound_unknown(int grid) {
  if (grid < 1) throw std::invalid_argument("K must be at least 1");
  auto make = [](CovarianceProfile profile, std::string name) {
    InstanceParams p;
    p.name = std::move(name);
    p.theta_star = Vector::Ones(1);
    p.x_mean = Vector::Zero(1);
    p.x_cov_centered = SymMatrix::identity(1);
    p.profile = std::move(profile);
    p.lambda = 0.5;
    p.S = 1.0;
    return Instance(std::move(p));
  };
  UnknownLowerBoundFamily family{
      make(CovarianceProfile::f_ratio(SymMatrix::identity(1)), "lower_bound_unknown_baseline"),
      {}};
  for (int k = 1; k <= grid; ++k) {
    family.perturbed.push_back(
        make(CovarianceProfile::perturbed_f_ratio(k, grid, SymMatrix::identity(1)),
             "lower_bound_unknown_k" + std::to_string(k) + "_of_" + std::to_string(grid)));
  }
  return family;
}

double kl_gaussian(double v1, double v2) {
  if (!(v1 > 0.0) || !(v2 > 0.0)) {
    throw std::invalid_argument("kl_gaussian: variances must be positive");
  }
  const double r = v1 / v2;
  return 0.5 * (r - std::log(r) - 1.0);
}

KlIntervalReport perturbation_kl_report(int k, int grid, int points) {
  if (grid < 1 || k < 1 || k > grid) throw std::invalid_argument("k must lie in 1..K");
  if (points < 1) throw std::invalid_argument("points must be >= 1");
  KlIntervalReport r;
  r.k = k;
  r.grid = grid;
  r.points = points;
  r.bound = 1.0 / (static_cast<double>(grid) * grid);
  const double lo = perturbation_knot(k, grid);
  const double hi = perturbation_knot(k + 1, grid);
  for (int i = 0; i < points; ++i) {
    const double c = static_cast<double>(i) / points;
    const double v1 = f_ratio(c);
    const double v2 = perturbed_f_ratio(c, k, grid);
    const double kl = v1 == v2 ? 0.0 : kl_gaussian(v1, v2);
    if (c >= lo && c < hi) {
      r.max_inside = std::max(r.max_inside, kl);
    } else {
      r.max_outside = std::max(r.max_outside, kl);
    }
  }
  return r;
}

} // namespace paidreg
