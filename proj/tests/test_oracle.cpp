#include "paidreg/io.hpp"
#include "paidreg/oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>

using namespace paidreg;
using namespace testsupport;

namespace {

std::vector<Instance> shipped_instances() {
  std::vector<Instance> out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(source_path("instances"))) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(load_instance(f.string()));
  out.push_back(benign_2d());
  out.push_back(random_3d(11));
  return out;
}

} // namespace

TEST_CASE("expected_loss examples") {
  const Instance one = scalar_instance("u", 1.0, 1.0, CovarianceProfile::constant(SymMatrix::identity(1)), 1.0);
  CHECK(expected_loss(one, 0.3, Vector::Constant(1, 0.5)) == doctest::Approx(0.8).epsilon(1e-15));

  const Instance quiet = scalar_instance("q", 2.0, 0.7, CovarianceProfile::constant(SymMatrix::zero(1)), 0.4);
  for (double c : {0.0, 0.1, 0.5, 1.0}) {
    CHECK(expected_loss(quiet, c, quiet.theta_star()) == 0.4 * c);
  }

  InstanceParams noisy = benign_2d_params();
  noisy.output_noise_var = 0.25;
  const Instance with_eta(noisy);
  const Instance without = benign_2d();
  const Vector nu = Vector::Constant(2, 0.3);
  CHECK(expected_loss(with_eta, 0.4, nu) - expected_loss(without, 0.4, nu) == doctest::Approx(0.25));
}

TEST_CASE("expected_loss agrees with Monte-Carlo on a 3-D instance") {
  InstanceParams p = random_3d(21).params();
  p.output_noise_var = 0.0;
  const Instance inst(p);
  Rng rng(2024);
  const double c = 0.3;
  Vector nu(3);
  nu << 0.4, -0.2, 0.9;
  std::vector<double> v;
  v.reserve(1000000);
  for (int i = 0; i < 1000000; ++i) {
    const RoundSample s = sample_round(inst, c, rng);
    const double e = s.x_hat.dot(nu) - s.x.dot(inst.theta_star());
    v.push_back(e * e + inst.lambda() * c);
  }
  const MeanStd m = mean_stderr(v);
  CHECK(std::abs(m.mean - expected_loss(inst, c, nu)) <= 5.0 * m.stderr_mean);
}

TEST_CASE("optimal_predictor examples") {
  const Instance one = scalar_instance("u", 1.0, 1.0, CovarianceProfile::constant(SymMatrix::identity(1)), 1.0);
  CHECK(optimal_predictor(one, 0.2)(0) == doctest::Approx(0.5).epsilon(1e-15));

  const Instance quiet = random_3d(4);
  InstanceParams qp = quiet.params();
  qp.profile = CovarianceProfile::constant(SymMatrix::zero(3));
  const Instance noiseless(qp);
  const Vector nu = optimal_predictor(noiseless, 0.6);
  CHECK((nu - noiseless.theta_star()).norm() <= 1e-10);

  for (double theta : {-1.0, -0.3, 0.5, 1.0}) {
    const Instance s = scalar_instance("s", 1.7, theta, CovarianceProfile::f_ratio(SymMatrix::identity(1)), 0.5);
    for (int i = 0; i <= 100; ++i) CHECK(std::abs(optimal_predictor(s, i / 100.0)(0)) <= 1.0);
  }
}

TEST_CASE("optimal_predictor projects onto the ball when needed") {
  Rng rng(31);
  int exercised = 0;
  for (int trial = 0; trial < 2000 && exercised < 5; ++trial) {
    InstanceParams p;
    p.name = "proj";
    p.theta_star = uniform_in_ball(2, 1.0, rng);
    p.x_mean = Vector::Zero(2);
    Matrix g(2, 2);
    Matrix h(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        g(i, j) = rng.normal();
        h(i, j) = 0.5 * rng.normal();
      }
    p.x_cov_centered = SymMatrix(g * g.transpose() + 0.01 * Matrix::Identity(2, 2));
    p.profile = CovarianceProfile::constant(SymMatrix(h * h.transpose()));
    p.lambda = 0.1;
    p.S = 1.0;
    const Instance inst(p);
    const SymMatrix sx = inst.sigma_xhat(0.5);
    const Vector rhs = inst.sigma_x().matrix() * inst.theta_star();
    const Vector bar = sx.matrix().ldlt().solve(rhs);
    if (bar.norm() <= 1.0 + 1e-6) continue;
    ++exercised;
    const Vector nu = optimal_predictor(inst, 0.5);
    CHECK(nu.norm() == doctest::Approx(1.0).epsilon(1e-9));
    const double best = BallGridOracle(sx, rhs, 1.0, 0.01).minimum();
    CHECK(ball_objective(sx, rhs, nu) <= best + 1e-9);
    CHECK(optimal_loss_at(inst, 0.5) == doctest::Approx(expected_loss(inst, 0.5, nu)).epsilon(1e-14));
  }
  CHECK(exercised == 5);
}

TEST_CASE("optimal_loss_at examples") {
  for (double var : {0.5, 1.0, 2.0}) {
    const Instance s = scalar_instance("s", var, 1.0, CovarianceProfile::f_ratio(SymMatrix::identity(1)), 0.3);
    for (int i = 0; i <= 20; ++i) {
      const double c = i / 20.0;
      const double n = f_ratio(c);
      CHECK(optimal_loss_at(s, c) == doctest::Approx(var * n / (var + n) + 0.3 * c).epsilon(1e-13));
    }
  }
  const UnknownLowerBoundFamily fam = make_lower_bound_unknown(4);
  for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    CHECK(std::abs(optimal_loss_at(fam.baseline, c) - 0.5) <= 1e-12);
  }
  const KnownLowerBoundPair pair = make_lower_bound_known(0.5);
  CHECK(optimal_loss_at(pair.plus, 0.0) == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("optimal_loss_at equals expected_loss at the optimal predictor") {
  const Instance inst = random_3d(8);
  for (int i = 0; i <= 10; ++i) {
    const double c = i / 10.0;
    CHECK(optimal_loss_at(inst, c) == doctest::Approx(expected_loss(inst, c, optimal_predictor(inst, c))).epsilon(1e-14));
  }
}

TEST_CASE("loss_landscape examples") {
  const KnownLowerBoundPair pair = make_lower_bound_known(0.5);
  const LossLandscape minus = loss_landscape(pair.minus, 1000);
  CHECK(minus.best_cost == 0.0);
  CHECK(std::abs(minus.best_loss - 1.0 / 3.0) <= minus.slack());
  CHECK(minus.costs.size() == 1001);
  CHECK(minus.slack() == doctest::Approx(1.0 / 1000.0));

  const Instance zero = scalar_instance("z", 1.0, 0.8, CovarianceProfile::constant(SymMatrix::zero(1)), 0.6);
  const LossLandscape z = loss_landscape(zero, 100);
  CHECK(z.best_cost == 0.0);
  CHECK(std::abs(z.best_loss) <= 1e-14);
  CHECK((z.predictors.front() - zero.theta_star()).norm() <= 1e-12);

  const UnknownLowerBoundFamily fam = make_lower_bound_unknown(4);
  for (int k = 1; k <= 4; ++k) {
    const LossLandscape l = loss_landscape(fam.perturbed[static_cast<std::size_t>(k - 1)]);
    CHECK(l.best_cost >= perturbation_knot(k, 4));
    CHECK(l.best_cost < perturbation_knot(k + 1, 4));
    CHECK(l.best_loss <= 0.5 - 1.0 / 64.0 + l.slack());
  }
  CHECK_THROWS(loss_landscape(zero, 1));
}

TEST_CASE("landscape minimum is within slack of a finer grid") {
  const Instance inst = benign_2d();
  const LossLandscape coarse = loss_landscape(inst, 200);
  const LossLandscape fine = loss_landscape(inst, 20000);
  CHECK(coarse.best_loss >= fine.best_loss - 1e-12);
  CHECK(coarse.best_loss - coarse.slack() <= fine.best_loss + 1e-12);
}

TEST_CASE("max_loss_bound") {
  const Instance one = scalar_instance("u", 1.0, 1.0, CovarianceProfile::constant(SymMatrix::identity(1)), 1.0);
  CHECK(one.R() == 1.0);
  CHECK(max_loss_bound(one) == doctest::Approx(13.0).epsilon(1e-15));
  for (const Instance& inst : shipped_instances()) {
    CHECK_MESSAGE(check_max_loss_bound(inst, 1000), inst.name());
  }
}

TEST_CASE("one-sided Lipschitz and monotone benefit on shipped instances") {
  for (const Instance& inst : shipped_instances()) {
    const LossLandscape l = loss_landscape(inst, 512);
    const double lam = inst.lambda();
    double worst = -1.0;
    for (std::size_t i = 0; i < l.costs.size(); ++i) {
      for (std::size_t j = i; j < l.costs.size(); ++j) {
        worst = std::max(worst, l.losses[j] - l.losses[i] - lam * (l.costs[j] - l.costs[i]));
      }
    }
    CHECK_MESSAGE(worst <= 1e-9, inst.name());
    for (std::size_t i = 1; i < l.costs.size(); ++i) {
      CHECK(l.losses[i] - lam * l.costs[i] <= l.losses[i - 1] - lam * l.costs[i - 1] + 1e-9);
    }
  }
}

TEST_CASE("first-order condition for interior optimal predictors") {
  for (const Instance& inst : shipped_instances()) {
    const Vector rhs = inst.sigma_x().matrix() * inst.theta_star();
    for (int i = 0; i <= 50; ++i) {
      const double c = i / 50.0;
      const Vector nu = optimal_predictor(inst, c);
      if (nu.norm() >= inst.S() - 1e-9) continue;
      CHECK((inst.sigma_xhat(c).matrix() * nu - rhs).norm() <= 1e-8);
    }
  }
}

TEST_CASE("expected_loss dominates the per-cost optimum") {
  Rng rng(5);
  for (const Instance& inst : shipped_instances()) {
    for (double c : {0.0, 0.3, 0.55, 1.0}) {
      const double best = optimal_loss_at(inst, c);
      for (int i = 0; i < 1000; ++i) {
        const Vector nu = uniform_in_ball(inst.dim(), inst.S(), rng);
        CHECK(expected_loss(inst, c, nu) >= best - 1e-9);
      }
    }
  }
}

TEST_CASE("uniform_in_ball stays in the ball") {
  Rng rng(3);
  double max_norm = 0.0;
  for (int i = 0; i < 5000; ++i) max_norm = std::max(max_norm, uniform_in_ball(3, 2.0, rng).norm());
  CHECK(max_norm <= 2.0);
  CHECK(max_norm > 1.9);
}

TEST_CASE("landscape csv layout") {
  const LossLandscape l = loss_landscape(benign_2d(), 4);
  std::ostringstream os;
  write_landscape_csv(os, l);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "c,loss_opt,nu_opt_0,nu_opt_1");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);
}
