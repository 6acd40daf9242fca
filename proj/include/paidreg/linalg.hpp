#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace paidreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Eigenvalues below this are treated as numerical dust when checking PSD.
inline constexpr double kPsdTolerance = 1e-9;

class LinalgError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dense symmetric matrix. Every constructor symmetrizes its input as (A+A^T)/2,
/// so entries(i,j) == entries(j,i) holds bitwise.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zero(int dim);
  static SymMatrix identity(int dim);
  static SymMatrix scaled_identity(int dim, double scale);
  static SymMatrix diagonal(const Vector& diag);
  static SymMatrix outer(const Vector& v);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

  bool all_finite() const { return m_.allFinite(); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;
  friend SymMatrix operator*(double s, const SymMatrix& a) { return a * s; }

private:
  Matrix m_;
};

struct EigenDecomp {
  Vector eigenvalues;  // ascending
  Matrix eigenvectors; // columns, orthonormal

  double min_eigenvalue() const { return eigenvalues(0); }
  double max_eigenvalue() const { return eigenvalues(eigenvalues.size() - 1); }
};

double quad_form(const SymMatrix& a, const Vector& x);

EigenDecomp sym_eigen(const SymMatrix& a);

/// Operator (spectral) norm of a symmetric matrix.
double op_norm(const SymMatrix& a);

/// True iff B - A is PSD up to `tol`: lambda_min(B - A) >= -tol.
bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol);

// ---------------------------------------------------------------------------
// Ball-constrained quadratic minimization (trust-region subproblem).
//
//   minimize  nu^T (A + shift*I) nu - 2 b^T nu   subject to  ||nu|| <= radius
//
// A may be indefinite. The solver works in the eigenbasis of A, so a single
// decomposition serves any number of diagonal shifts.
// ---------------------------------------------------------------------------

struct BallSolution {
  Vector nu;
  double objective = 0.0;
  bool on_boundary = false;
};

class TrsNotConverged : public LinalgError {
public:
  TrsNotConverged(const std::string& what, Vector best)
      : LinalgError(what), best_(std::move(best)) {}
  const Vector& best_iterate() const { return best_; }

private:
  Vector best_;
};

class SpectralBallQuadratic {
public:
  static constexpr int kMaxIterations = 200;
  static constexpr double kNormTolerance = 1e-10;

  SpectralBallQuadratic(const SymMatrix& a, const Vector& b);
  SpectralBallQuadratic(EigenDecomp eig, const Vector& b);

  int dim() const { return static_cast<int>(eig_.eigenvalues.size()); }

  /// Minimum objective value only. Allocation-free; used in per-arm scans.
  double min_value(double shift, double radius) const;

  BallSolution solve(double shift, double radius) const;

  /// Closed form when A + shift I is positive definite and its stationary
  /// point lies in the ball. Returns false, leaving `value` untouched, otherwise.
  bool interior_min_value(double shift, double radius, double& value) const {
    const int d = dim();
    const double* mu = eig_.eigenvalues.data();
    const double* g = g_.data();
    if (!(mu[0] + shift > 0.0)) return false;
    double n2 = 0.0;
    double obj = 0.0;
    for (int i = 0; i < d; ++i) {
      const double zi = g[i] / (mu[i] + shift);
      n2 += zi * zi;
      obj -= g[i] * zi;
    }
    if (n2 > radius * radius) return false;
    value = obj;
    return true;
  }

private:
  // Returns the optimal coordinates in the eigenbasis (written into z) and
  // the objective.
  double solve_rotated(double shift, double radius, double* z) const;

  EigenDecomp eig_;
  Vector g_; // Q^T b
};

/// Minimizer of nu^T A nu - 2 b^T nu over ||nu|| <= radius. The result is
/// optimal to within `tol` in objective.
Vector min_quadratic_on_ball(const SymMatrix& a, const Vector& b, double radius,
                             double tol);

} // namespace paidreg
