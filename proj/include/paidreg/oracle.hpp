#pragma once

#include "paidreg/environment.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace paidreg {

/// l(c, nu) = nu^T Sigma_xhat(c) nu - 2 nu^T Sigma_x theta* + theta*^T Sigma_x theta*
///            + lambda c + sigma_eta^2
double expected_loss(const Instance& instance, double c, const Vector& nu);

/// Best linear predictor over the S-ball at cost c.
Vector optimal_predictor(const Instance& instance, double c);

/// l*(c) = l(c, nu*(c)).
double optimal_loss_at(const Instance& instance, double c);

struct LossLandscape {
  std::string instance_name;
  double lambda = 0.0;
  int grid = 0; // M; costs are {0, 1/M, ..., 1}
  std::vector<double> costs;
  std::vector<double> losses;
  std::vector<Vector> predictors;
  double best_loss = 0.0;
  double best_cost = 0.0;

  /// The true infimum lies in [best_loss - slack(), best_loss].
  double slack() const { return lambda / grid; }
};

inline constexpr int kDefaultOracleGrid = 10000;

LossLandscape loss_landscape(const Instance& instance, int grid = kDefaultOracleGrid);

/// Columns: c, loss_opt, nu_opt_0 .. nu_opt_{d-1}.
void write_landscape_csv(std::ostream& out, const LossLandscape& landscape);

/// 6 S^2 (R^2 d + S^2) + lambda + sigma_eta^2.
double max_loss_bound(const Instance& instance);

/// Samples (c, nu) with c uniform on [0, 1] and nu uniform on the S-ball and
/// reports whether expected_loss ever exceeds max_loss_bound.
bool check_max_loss_bound(const Instance& instance, int samples, std::uint64_t seed = 1);

/// Uniform draw from the Euclidean ball of the given radius.
Vector uniform_in_ball(int dim, double radius, Rng& rng);

} // namespace paidreg
