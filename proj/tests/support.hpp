#pragma once

#include "paidreg/environment.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace testsupport {

using paidreg::Instance;
using paidreg::InstanceParams;
using paidreg::Matrix;
using paidreg::Rng;
using paidreg::SymMatrix;
using paidreg::Vector;

inline std::string source_path(const std::string& rel) {
  return std::string(PAIDREG_SOURCE_DIR) + "/" + rel;
}

inline InstanceParams benign_2d_params() {
  InstanceParams p;
  p.name = "benign_2d";
  p.theta_star = Vector(2);
  p.theta_star << 1.0, -0.5;
  p.x_mean = Vector(2);
  p.x_mean << 0.5, 0.5;
  Matrix c(2, 2);
  c << 1.0, 0.3, 0.3, 0.8;
  p.x_cov_centered = SymMatrix(c);
  p.profile = paidreg::CovarianceProfile::f_ratio(SymMatrix::identity(2));
  p.lambda = 0.5;
  p.S = 2.0;
  return p;
}

inline Instance benign_2d() { return Instance(benign_2d_params()); }

/// 1-D instance with x ~ N(0, var_x), theta* = theta and the given profile.
inline Instance scalar_instance(const std::string& name, double var_x, double theta,
                                paidreg::CovarianceProfile profile, double lambda, double S = 1.0,
                                double noise = 0.0) {
  InstanceParams p;
  p.name = name;
  p.theta_star = Vector::Constant(1, theta);
  p.x_mean = Vector::Zero(1);
  p.x_cov_centered = SymMatrix::scaled_identity(1, var_x);
  p.profile = std::move(profile);
  p.lambda = lambda;
  p.S = S;
  p.output_noise_var = noise;
  return Instance(std::move(p));
}

/// A random 3-D instance with a non-isotropic constant-plus-step profile.
inline Instance random_3d(std::uint64_t seed) {
  Rng rng(seed);
  InstanceParams p;
  p.name = "random_3d";
  p.theta_star = Vector(3);
  p.x_mean = Vector(3);
  for (int i = 0; i < 3; ++i) {
    p.theta_star(i) = 0.5 * rng.normal();
    p.x_mean(i) = 0.3 * rng.normal();
  }
  Matrix g(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = 0.5 * rng.normal();
  p.x_cov_centered = SymMatrix(g * g.transpose() + 0.2 * Matrix::Identity(3, 3));
  Matrix h(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) h(i, j) = 0.4 * rng.normal();
  const SymMatrix low(h * h.transpose() * 0.25);
  const SymMatrix high(h * h.transpose() + 0.3 * Matrix::Identity(3, 3));
  p.profile = paidreg::CovarianceProfile::step(high, low, 0.4);
  p.lambda = 0.3;
  p.S = 3.0;
  p.output_noise_var = 0.2;
  return Instance(std::move(p));
}

inline Matrix random_orthogonal(int d, Rng& rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline SymMatrix random_symmetric(int d, Rng& rng, double scale = 1.0) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = scale * rng.normal();
  return SymMatrix(0.5 * (g + g.transpose()));
}

inline SymMatrix with_spectrum(const Matrix& q, const std::vector<double>& mu) {
  const int d = static_cast<int>(mu.size());
  Matrix m = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = mu[static_cast<std::size_t>(i)];
  return SymMatrix(q * m * q.transpose());
}

inline double naive_quad(const SymMatrix& a, const Vector& x) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) s += a(i, j) * x(i) * x(j);
  return s;
}

inline double ball_objective(const SymMatrix& a, const Vector& b, const Vector& x) {
  return naive_quad(a, x) - 2.0 * b.dot(x);
}

/// Exact minimum of x^T A x - 2 b^T x over the grid points {-S + h i}^d that
/// lie in the S-ball, found by branch and bound over index boxes. Boxes are
/// pruned with f(x) >= f(m) - |grad f(m)| r - ||A||_F r^2, r = box half-diagonal.
class BallGridOracle {
public:
  BallGridOracle(const SymMatrix& a, const Vector& b, double radius, double h)
      : a_(a), b_(b), radius_(radius), h_(h), d_(a.dim()) {
    n_ = static_cast<long>(std::floor(2.0 * radius / h + 1e-9)) + 1;
    fro_ = a.matrix().norm();
  }

  double minimum() {
    best_ = std::numeric_limits<double>::infinity();
    std::vector<long> lo(static_cast<std::size_t>(d_), 0);
    std::vector<long> hi(static_cast<std::size_t>(d_), n_ - 1);
    search(lo, hi);
    return best_;
  }

private:
  Vector point(const std::vector<double>& idx) const {
    Vector x(d_);
    for (int i = 0; i < d_; ++i) x(i) = -radius_ + h_ * idx[static_cast<std::size_t>(i)];
    return x;
  }

  void search(std::vector<long>& lo, std::vector<long>& hi) {
    std::vector<double> mid(static_cast<std::size_t>(d_));
    long widest = 0;
    int axis = 0;
    double dist_lb2 = 0.0;
    for (int i = 0; i < d_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      mid[k] = 0.5 * static_cast<double>(lo[k] + hi[k]);
      if (hi[k] - lo[k] > widest) {
        widest = hi[k] - lo[k];
        axis = i;
      }
      const double xl = -radius_ + h_ * static_cast<double>(lo[k]);
      const double xh = -radius_ + h_ * static_cast<double>(hi[k]);
      const double nearest = xl > 0.0 ? xl : (xh < 0.0 ? xh : 0.0);
      dist_lb2 += nearest * nearest;
    }
    if (dist_lb2 > radius_ * radius_ * (1.0 + 1e-12)) return; // box misses the ball
    if (widest == 0) {
      const Vector x = point(mid);
      if (x.squaredNorm() <= radius_ * radius_ * (1.0 + 1e-12)) {
        best_ = std::min(best_, ball_objective(a_, b_, x));
      }
      return;
    }
    const Vector m = point(mid);
    double half2 = 0.0;
    for (int i = 0; i < d_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double hw = 0.5 * h_ * static_cast<double>(hi[k] - lo[k]);
      half2 += hw * hw;
    }
    const double r = std::sqrt(half2);
    Vector grad = 2.0 * (a_.matrix() * m) - 2.0 * b_;
    const double lb = ball_objective(a_, b_, m) - grad.norm() * r - fro_ * half2;
    if (lb >= best_) return;
    const auto k = static_cast<std::size_t>(axis);
    const long split = (lo[k] + hi[k]) / 2;
    const long old_lo = lo[k];
    const long old_hi = hi[k];
    hi[k] = split;
    search(lo, hi);
    hi[k] = old_hi;
    lo[k] = split + 1;
    search(lo, hi);
    lo[k] = old_lo;
  }

  SymMatrix a_;
  Vector b_;
  double radius_;
  double h_;
  int d_;
  long n_ = 0;
  double fro_ = 0.0;
  double best_ = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

inline MeanStd mean_stderr(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  if (v.size() > 1) {
    out.stderr_mean = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return out;
}

} // namespace testsupport
