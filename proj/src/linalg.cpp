#include "paidreg/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace paidreg {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw LinalgError("SymMatrix: matrix is not square");
  }
  if (m.rows() < 1) {
    throw LinalgError("SymMatrix: dimension must be at least 1");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(int dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::identity(int dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::scaled_identity(int dim, double scale) {
  return SymMatrix(scale * Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  return SymMatrix(Matrix(diag.asDiagonal()));
}

SymMatrix SymMatrix::outer(const Vector& v) { return SymMatrix(v * v.transpose()); }

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (dim() != o.dim()) throw LinalgError("SymMatrix +: dimension mismatch");
  return SymMatrix(m_ + o.m_);
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  if (dim() != o.dim()) throw LinalgError("SymMatrix -: dimension mismatch");
  return SymMatrix(m_ - o.m_);
}

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(m_ * s); }

double quad_form(const SymMatrix& a, const Vector& x) {
  if (x.size() != a.dim()) {
    throw LinalgError("quad_form: dimension mismatch (matrix " +
                      std::to_string(a.dim()) + ", vector " +
                      std::to_string(x.size()) + ")");
  }
  return x.dot(a.matrix() * x);
}

EigenDecomp sym_eigen(const SymMatrix& a) {
  if (!a.all_finite()) throw LinalgError("sym_eigen: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw LinalgError("sym_eigen: decomposition failed");
  }
  return EigenDecomp{solver.eigenvalues(), solver.eigenvectors()};
}

double op_norm(const SymMatrix& a) {
  const EigenDecomp e = sym_eigen(a);
  return std::max(std::abs(e.min_eigenvalue()), std::abs(e.max_eigenvalue()));
}

bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
  if (a.dim() != b.dim()) throw LinalgError("loewner_leq: dimension mismatch");
  return sym_eigen(b - a).min_eigenvalue() >= -tol;
}

// --- trust-region subproblem ------------------------------------------------

SpectralBallQuadratic::SpectralBallQuadratic(const SymMatrix& a, const Vector& b)
    : SpectralBallQuadratic(sym_eigen(a), b) {}

SpectralBallQuadratic::SpectralBallQuadratic(EigenDecomp eig, const Vector& b)
    : eig_(std::move(eig)) {
  if (b.size() != eig_.eigenvalues.size()) {
    throw LinalgError("ball quadratic: linear term has wrong dimension");
  }
  if (!b.allFinite()) throw LinalgError("ball quadratic: non-finite linear term");
  g_ = eig_.eigenvectors.transpose() * b;
}

namespace {

double objective_rotated(const double* mu, const double* g, const double* z, int d) {
  double obj = 0.0;
  for (int i = 0; i < d; ++i) obj += mu[i] * z[i] * z[i] - 2.0 * g[i] * z[i];
  return obj;
}

} // namespace

double SpectralBallQuadratic::solve_rotated(double shift, double radius, double* z) const {
  const int d = dim();
  if (!(radius > 0.0) || !std::isfinite(radius) || !std::isfinite(shift)) {
    throw LinalgError("ball quadratic: radius must be positive and finite");
  }
  std::array<double, 64> mu_small;
  std::vector<double> mu_large;
  double* mu = mu_small.data();
  if (d > static_cast<int>(mu_small.size())) {
    mu_large.resize(d);
    mu = mu_large.data();
  }
  const double* g = g_.data();
  double scale = 1.0;
  double gnorm2 = 0.0;
  for (int i = 0; i < d; ++i) {
    mu[i] = eig_.eigenvalues[i] + shift;
    scale = std::max(scale, std::abs(mu[i]));
    gnorm2 += g[i] * g[i];
  }
  const double mu_min = mu[0];
  const double r2 = radius * radius;

  // Interior stationary point of a strictly convex objective.
  if (mu_min > 0.0) {
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      z[i] = g[i] / mu[i];
      n2 += z[i] * z[i];
    }
    if (n2 <= r2) {
      double obj = 0.0;
      for (int i = 0; i < d; ++i) obj -= g[i] * z[i];
      return obj;
    }
  }

  if (gnorm2 == 0.0) {
    std::fill(z, z + d, 0.0);
    if (mu_min >= 0.0) return 0.0;
    z[0] = radius;
    return mu_min * r2;
  }

  // Hard case: linear term (numerically) orthogonal to the bottom eigenspace,
  // and the remaining components fit inside the ball at the pole.
  if (mu_min <= 0.0) {
    const double degenerate = 1e-12 * scale;
    const double g_tiny = 1e-14 * std::sqrt(gnorm2);
    double bottom_g2 = 0.0;
    double rest_n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      if (mu[i] - mu_min <= degenerate) {
        bottom_g2 += g[i] * g[i];
      } else {
        const double zi = g[i] / (mu[i] - mu_min);
        rest_n2 += zi * zi;
      }
    }
    if (std::sqrt(bottom_g2) <= g_tiny && rest_n2 <= r2) {
      for (int i = 0; i < d; ++i) {
        z[i] = (mu[i] - mu_min <= degenerate) ? 0.0 : g[i] / (mu[i] - mu_min);
      }
      z[0] = std::sqrt(std::max(0.0, r2 - rest_n2));
      return objective_rotated(mu, g, z, d);
    }
  }

  // Boundary solution: find rho > max(0, -mu_min) with ||z(rho)|| = radius,
  // z_i(rho) = g_i / (mu_i + rho). Newton on 1/||z|| - 1/radius, kept inside
  // a bisection bracket.
  const double lo = std::max(0.0, -mu_min);
  double a = lo;
  double b = lo + std::sqrt(gnorm2) / radius;
  double rho = b;
  const double tol = kNormTolerance * std::max(1.0, radius);
  bool converged = false;
  for (int it = 0; it < kMaxIterations; ++it) {
    double n2 = 0.0;
    double d3 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double den = mu[i] + rho;
      const double zi = g[i] / den;
      n2 += zi * zi;
      d3 += zi * zi / den;
    }
    const double norm = std::sqrt(n2);
    if (std::abs(norm - radius) <= tol) {
      converged = true;
      break;
    }
    if (norm > radius) {
      a = rho;
    } else {
      b = rho;
    }
    double next = rho - (1.0 / norm - 1.0 / radius) * n2 * norm / d3;
    if (!(next > a && next < b) || !std::isfinite(next)) next = 0.5 * (a + b);
    if (next == rho || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, b)) {
      rho = b;
      break;
    }
    rho = next;
  }

  double n2 = 0.0;
  for (int i = 0; i < d; ++i) {
    z[i] = g[i] / (mu[i] + rho);
    n2 += z[i] * z[i];
  }
  if (n2 > r2) {
    const double shrink = radius / std::sqrt(n2);
    for (int i = 0; i < d; ++i) z[i] *= shrink;
    n2 = r2;
  }
  if (!converged) {
    // Near-hard case: the bracket collapsed onto the pole with ||z|| < radius.
    // Move along the bottom eigenvector to reach the boundary.
    if (n2 < r2 && mu_min <= 0.0) {
      const double z0 = std::sqrt(r2 - n2 + z[0] * z[0]);
      z[0] = (g[0] >= 0.0 ? z0 : -z0);
      n2 = 0.0;
      for (int i = 0; i < d; ++i) n2 += z[i] * z[i];
    }
  }
  const double obj = objective_rotated(mu, g, z, d);
  if (!std::isfinite(obj) || std::sqrt(n2) > radius + 1e-8 * std::max(1.0, radius)) {
    Vector best(d);
    for (int i = 0; i < d; ++i) best[i] = z[i];
    throw TrsNotConverged("ball quadratic: secular equation did not converge",
                          eig_.eigenvectors * best);
  }
  return obj;
}

double SpectralBallQuadratic::min_value(double shift, double radius) const {
  const int d = dim();
  std::array<double, 64> small;
  if (d <= static_cast<int>(small.size())) return solve_rotated(shift, radius, small.data());
  std::vector<double> z(d);
  return solve_rotated(shift, radius, z.data());
}

BallSolution SpectralBallQuadratic::solve(double shift, double radius) const {
  const int d = dim();
  Vector z(d);
  BallSolution out;
  out.objective = solve_rotated(shift, radius, z.data());
  out.nu = eig_.eigenvectors * z;
  out.on_boundary = z.norm() >= radius * (1.0 - 1e-9);
  return out;
}

Vector min_quadratic_on_ball(const SymMatrix& a, const Vector& b, double radius,
                             double tol) {
  if (!(tol > 0.0)) throw LinalgError("min_quadratic_on_ball: tol must be positive");
  if (!a.all_finite() || !b.allFinite() || !std::isfinite(radius)) {
    throw LinalgError("min_quadratic_on_ball: non-finite input");
  }
  if (!(radius > 0.0)) throw LinalgError("min_quadratic_on_ball: radius must be positive");
  return SpectralBallQuadratic(a, b).solve(0.0, radius).nu;
}

} // namespace paidreg
