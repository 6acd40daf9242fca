#include "paidreg/oracle.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace paidreg {

namespace {

// Eigenvalues of Sigma_xhat(c) are floored at this fraction of the largest one.
constexpr double kInverseFloor = 1e-12;

EigenDecomp floored(EigenDecomp e, double c) {
  const double top = e.max_eigenvalue();
  if (!(top > 0.0) || e.min_eigenvalue() < -kPsdTolerance * std::max(1.0, top)) {
    throw LinalgError("Sigma_xhat(" + std::to_string(c) + ") is singular or indefinite");
  }
  e.eigenvalues = e.eigenvalues.cwiseMax(kInverseFloor * top);
  return e;
}

// Minimizer of nu^T Sigma_xhat nu - 2 nu^T Sigma_x theta* over the S-ball, with
// the eigendecomposition of Sigma_x reused across costs for isotropic profiles.
class PredictorSolver {
public:
  explicit PredictorSolver(const Instance& instance) : inst_(instance) {
    if (instance.profile().isotropic()) base_ = sym_eigen(instance.sigma_x());
  }

  BallSolution solve(double c) const {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw std::domain_error("oracle: cost " + std::to_string(c) + " outside [0, 1]");
    }
    EigenDecomp e;
    if (base_) {
      e = *base_;
      e.eigenvalues.array() += inst_.profile().isotropic_variance(c);
    } else {
      e = sym_eigen(inst_.sigma_xhat(c));
    }
    return SpectralBallQuadratic(floored(std::move(e), c), inst_.cross_moment())
        .solve(0.0, inst_.S());
  }

  double loss(double c, const BallSolution& s) const {
    return inst_.signal_energy() + s.objective + inst_.lambda() * c + inst_.output_noise_var();
  }

private:
  const Instance& inst_;
  std::optional<EigenDecomp> base_;
};

} // namespace

double expected_loss(const Instance& instance, double c, const Vector& nu) {
  const SymMatrix sxh = instance.sigma_xhat(c);
  return quad_form(sxh, nu) - 2.0 * nu.dot(instance.cross_moment()) +
         instance.signal_energy() + instance.lambda() * c + instance.output_noise_var();
}

Vector optimal_predictor(const Instance& instance, double c) {
  return PredictorSolver(instance).solve(c).nu;
}

double optimal_loss_at(const Instance& instance, double c) {
  PredictorSolver solver(instance);
  return solver.loss(c, solver.solve(c));
}

LossLandscape loss_landscape(const Instance& instance, int grid) {
  if (grid < 2) throw std::invalid_argument("loss_landscape: grid must be >= 2");
  PredictorSolver solver(instance);
  LossLandscape out;
  out.instance_name = instance.name();
  out.lambda = instance.lambda();
  out.grid = grid;
  out.costs.reserve(grid + 1);
  out.losses.reserve(grid + 1);
  out.predictors.reserve(grid + 1);
  out.best_loss = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double c = static_cast<double>(i) / grid;
    BallSolution s = solver.solve(c);
    const double loss = solver.loss(c, s);
    out.costs.push_back(c);
    out.losses.push_back(loss);
    out.predictors.push_back(std::move(s.nu));
    if (loss < out.best_loss) {
      out.best_loss = loss;
      out.best_cost = c;
    }
  }
  return out;
}

void write_landscape_csv(std::ostream& out, const LossLandscape& landscape) {
  const long d = landscape.predictors.empty() ? 0 : landscape.predictors.front().size();
  out << "c,loss_opt";
  for (long j = 0; j < d; ++j) out << ",nu_opt_" << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < landscape.costs.size(); ++i) {
    out << landscape.costs[i] << ',' << landscape.losses[i];
    for (long j = 0; j < d; ++j) out << ',' << landscape.predictors[i][j];
    out << '\n';
  }
}

double max_loss_bound(const Instance& instance) {
  const double s2 = instance.S() * instance.S();
  const double r2 = instance.R() * instance.R();
  return 6.0 * s2 * (r2 * instance.dim() + s2) + instance.lambda() + instance.output_noise_var();
}

Vector uniform_in_ball(int dim, double radius, Rng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  const double n = v.norm();
  if (n == 0.0) return Vector::Zero(dim);
  const double r = radius * std::pow(rng.uniform(), 1.0 / dim);
  return v * (r / n);
}

bool check_max_loss_bound(const Instance& instance, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const double bound = max_loss_bound(instance);
  for (int i = 0; i < samples; ++i) {
    const double c = rng.uniform();
    const Vector nu = uniform_in_ball(instance.dim(), instance.S(), rng);
    if (expected_loss(instance, c, nu) > bound) return false;
  }
  return true;
}

} // namespace paidreg
