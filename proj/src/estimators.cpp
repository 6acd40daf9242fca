#include "paidreg/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace paidreg {

namespace {

SymMatrix to_sym(const LMatrix& m) { return SymMatrix(m.cast<double>()); }

void symmetrize(LMatrix& m) { m = ((m + m.transpose()) * 0.5L).eval(); }

} // namespace

double beta(long t, int d, double R, double S, double delta) {
  if (t < 1) throw std::invalid_argument("beta: t must be >= 1");
  if (d < 1) throw std::invalid_argument("beta: d must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("beta: delta must lie in (0, 1]");
  }
  const double td = static_cast<double>(t);
  const double log_term = std::log(3.0 * td * (td + 1.0) / delta);
  const double dd = d;
  return R * R * (dd + 2.0 * std::sqrt(dd * log_term) + 2.0 * log_term) +
         S * S * (1.0 + 2.0 * std::sqrt(log_term / dd));
}

ConfidenceParams::ConfidenceParams(int d_, double R_, double S_, double delta_,
                                   double width_scale_)
    : d(d_), R(R_), S(S_), delta(delta_), width_scale(width_scale_) {
  if (d < 1) throw std::invalid_argument("confidence: d must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("confidence: delta must lie in (0, 1]");
  }
  if (R < 0.0 || S < 0.0) throw std::invalid_argument("confidence: R and S must be >= 0");
  if (!(width_scale >= 0.0)) throw std::invalid_argument("confidence: width_scale must be >= 0");
}

double ConfidenceParams::union_log(long t) const {
  const double td = static_cast<double>(t);
  return std::log(3.0 * d * td * (td + 1.0) / delta);
}

double ConfidenceParams::matrix_bound(long t) const {
  const double b = beta(t);
  return std::sqrt(8.0 * static_cast<double>(t) * b * b * union_log(t));
}

double ConfidenceParams::gamma(long t) const { return width_scale * 2.0 * matrix_bound(t); }

double ConfidenceParams::kc_width(long t) const { return 9.0 * S * S * matrix_bound(t); }

double ConfidenceParams::uc_width(long t, long n) const {
  const double b = beta(t);
  return 9.0 * S * S * std::sqrt(8.0 * static_cast<double>(n) * b * b * union_log(t));
}

double ConfidenceParams::uc_bonus(long t, long n) const {
  if (n < 1) throw std::invalid_argument("uc_bonus: arm has no visits");
  const double b = beta(t);
  return width_scale * 9.0 * S * S *
         std::sqrt(8.0 * b * b * union_log(t) / static_cast<double>(n));
}

double kc_loss_width(long t, const ConfidenceParams& conf) { return conf.kc_width(t); }

double QuadraticForm::evaluate(const Vector& nu) const {
  return quad_form(a, nu) - 2.0 * b.dot(nu) + constant;
}

// --- known covariances --------------------------------------------------------

KnownCovState::KnownCovState(int dim)
    : a_acc(LMatrix::Zero(dim, dim)), b_acc(LVector::Zero(dim)) {
  if (dim < 1) throw std::invalid_argument("KnownCovState: dim must be >= 1");
}

void kc_update(KnownCovState& state, double c_s, const RoundSample& sample,
               const CovarianceProfile& profile) {
  const LVector xh = sample.x_hat.cast<long double>();
  const long double y = sample.y;
  state.a_acc += xh * xh.transpose();
  state.a_acc -= profile.at(c_s).matrix().cast<long double>();
  symmetrize(state.a_acc);
  state.b_acc += xh * y;
  state.q_acc += y * y;
  ++state.t;
}

QuadraticForm kc_quadratic(const KnownCovState& state, double c, double lambda,
                           const CovarianceProfile& profile, const ConfidenceParams& conf,
                           bool regularized) {
  const long double t = static_cast<long double>(state.t);
  LMatrix a = state.a_acc + t * profile.at(c).matrix().cast<long double>();
  if (regularized && state.t >= 1) {
    a += static_cast<long double>(conf.gamma(state.t)) *
         LMatrix::Identity(state.dim(), state.dim());
  }
  QuadraticForm out{to_sym(a), state.b_acc.cast<double>(),
                    static_cast<double>(state.q_acc + t * lambda * c)};
  return out;
}

// --- unknown covariances ------------------------------------------------------

UnknownCovState::UnknownCovState(int dim, int grid, bool with_zero_arm)
    : dim_(dim), grid_(grid), first_(with_zero_arm ? 0 : 1) {
  if (dim < 1) throw std::invalid_argument("UnknownCovState: dim must be >= 1");
  if (grid < 1) throw std::invalid_argument("UnknownCovState: K must be >= 1");
  arms_.resize(arm_count());
  for (ArmStats& a : arms_) {
    a.a = LMatrix::Zero(dim, dim);
    a.b = LVector::Zero(dim);
  }
}

const ArmStats& UnknownCovState::arm(int k) const {
  if (k < first_ || k > grid_) {
    throw std::out_of_range("arm index " + std::to_string(k) + " out of range");
  }
  return arms_[static_cast<std::size_t>(k - first_)];
}

ArmStats& UnknownCovState::arm_mut(int k) {
  return const_cast<ArmStats&>(static_cast<const UnknownCovState&>(*this).arm(k));
}

void uc_update(UnknownCovState& state, int k, const RoundSample& sample) {
  ArmStats& arm = state.arm_mut(k);
  const LVector xh = sample.x_hat.cast<long double>();
  const long double y = sample.y;
  arm.a += xh * xh.transpose();
  symmetrize(arm.a);
  arm.b += xh * y;
  arm.q += y * y;
  ++arm.visits;
  state.advance();
}

QuadraticForm uc_quadratic(const UnknownCovState& state, int k, double lambda) {
  const ArmStats& arm = state.arm(k);
  const long double n = static_cast<long double>(arm.visits);
  return QuadraticForm{to_sym(arm.a), arm.b.cast<double>(),
                       static_cast<double>(arm.q + n * lambda * state.cost(k))};
}

double ucb_index_from_min(double min_loss, long n, const ConfidenceParams& conf, long t) {
  if (n < 1) throw std::invalid_argument("ucb_index: arm has no visits");
  return min_loss / static_cast<double>(n) - conf.uc_bonus(t, n);
}

double ucb_index(const UnknownCovState& state, int k, double lambda,
                 const ConfidenceParams& conf, long t) {
  const ArmStats& arm = state.arm(k);
  if (arm.visits < 1) {
    throw std::invalid_argument("ucb_index: arm " + std::to_string(k) +
                                " has not been initialized");
  }
  const QuadraticForm q = uc_quadratic(state, k, lambda);
  const double fit = conf.S > 0.0 ? SpectralBallQuadratic(q.a, q.b).min_value(0.0, conf.S) : 0.0;
  const double min_loss = fit + q.constant;
  return ucb_index_from_min(min_loss, arm.visits, conf, t);
}

} // namespace paidreg
