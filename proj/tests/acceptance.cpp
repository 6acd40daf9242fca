#include "paidreg/concentration.hpp"
#include "paidreg/harness.hpp"
#include "paidreg/io.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace paidreg;
using namespace testsupport;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<long> pow2_horizons(int lo, int hi) {
  std::vector<long> out;
  for (int e = lo; e <= hi; ++e) out.push_back(1L << e);
  return out;
}

std::vector<std::uint64_t> seeds(int n, std::uint64_t base) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

std::string means(const SweepResult& r) {
  std::ostringstream os;
  os.precision(4);
  for (const HorizonStats& s : r.stats) os << " T=" << s.horizon << ":" << s.mean;
  return os.str();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

Outcome rate_known() {
  const SweepResult r = sweep({benign_2d()}, PolicyVariant::KnownCov, pow2_horizons(10, 16), seeds(20, 1));
  if (!r.fit) return {false, "no fit; failures " + std::to_string(r.failures)};
  const double s = r.fit->slope;
  return {s >= 0.35 && s <= 0.65 && r.failures == 0,
          "slope " + fmt(s) + " +/- " + fmt(r.fit->stderr_slope) + ", want [0.35, 0.65];" + means(r)};
}

Outcome rate_unknown() {
  const Instance pk = make_lower_bound_unknown(4).perturbed[1];
  const SweepResult alg2 = sweep({pk}, PolicyVariant::UnknownCov, pow2_horizons(10, 16), seeds(20, 1));
  const SweepResult alg1 = sweep({pk}, PolicyVariant::KnownCov, pow2_horizons(10, 16), seeds(20, 1));
  if (!alg2.fit || !alg1.fit) return {false, "no fit"};
  const double s2 = alg2.fit->slope;
  const double s1 = alg1.fit->slope;
  return {s2 >= 0.5 && s2 <= 0.85 && s2 > s1 && alg1.failures + alg2.failures == 0,
          "alg2 slope " + fmt(s2) + " +/- " + fmt(alg2.fit->stderr_slope) + " want [0.50, 0.85]; alg1 slope " +
              fmt(s1) + " +/- " + fmt(alg1.fit->stderr_slope) + " want < alg2; alg2" + means(alg2) + "; alg1" +
              means(alg1)};
}

Outcome flat_landscape() {
  const Instance base = make_lower_bound_unknown(4).baseline;
  const LossLandscape l = loss_landscape(base, 1000);
  double worst = 0.0;
  for (double v : l.losses) worst = std::max(worst, std::abs(v - 0.5));
  return {l.losses.size() == 1001 && worst <= 1e-12, "max |l*(c) - 0.5| = " + fmt(worst, 3) + " over 1001 costs"};
}

Outcome lower_bound_plays() {
  const KnownLowerBoundPair pair = make_lower_bound_known(0.3);
  const long T = 1L << 14;
  const std::vector<std::uint64_t> s = seeds(20, 1);
  std::string detail;
  bool pass = true;
  for (const auto& [inst, target] : {std::pair<Instance, double>{pair.minus, 0.0}, {pair.plus, 0.5}}) {
    const PolicyConfig cfg = resolve_policy_config(PolicyVariant::KnownCov, inst, T);
    const LossLandscape land = loss_landscape(inst);
    const int target_arm = std::max(1, static_cast<int>(std::lround(target * cfg.grid)));
    std::vector<int> modal(s.size());
    parallel_for(s.size(), 0, [&](std::size_t i) {
      modal[i] = run_episode(inst, cfg, T, s[i], land, EpisodeOptions{false}).summary.late_modal_arm;
    });
    int hits = 0;
    std::map<int, int> counts;
    for (int m : modal) {
      hits += m == target_arm;
      ++counts[m];
    }
    std::ostringstream os;
    os << inst.name() << " " << hits << "/20 at arm " << target_arm << "/" << cfg.grid << " (modal arms:";
    for (const auto& [arm, n] : counts) os << " " << arm << "x" << n;
    os << "); ";
    detail += os.str();
    pass = pass && hits >= 16;
  }
  return {pass, detail};
}

Outcome uniform_convergence() {
  const LossUniformReport r = mc_loss_uniform(benign_2d(), 2048, 0.05, 200, 100, 1);
  const double decay = r.decay_fraction(128, 2048);
  const double allowed = r.combined.nominal + 3.0 * r.combined.binomial_stderr();
  return {r.combined.within_contract() && decay >= 0.9,
          "violations " + std::to_string(r.combined.any_violations) + "/200 (allowed freq " + fmt(allowed) +
              "), deviation at 2048 below 128 in " + fmt(100 * decay) + "% of trials"};
}

Outcome matrix_concentration() {
  std::string detail;
  bool pass = true;
  for (int d : {1, 3}) {
    const ViolationReport r = mc_matrix_concentration(d, 1.0, 10000, 0.05, 1000, 1);
    double ratio = 0.0;
    for (double m : r.max_ratio) ratio = std::max(ratio, m);
    detail += "d=" + std::to_string(d) + ": " + std::to_string(r.any_violations) + "/1000 (max ratio " +
              fmt(ratio, 3) + "); ";
    pass = pass && r.within_contract();
  }
  return {pass, detail};
}

Outcome trs_equivalence() {
  Rng rng(2024);
  int bad = 0;
  int hard = 0;
  int indefinite = 0;
  double worst = -1e300;
  for (int i = 0; i < 500; ++i) {
    const int d = 2 + i % 2;
    const double S = 0.5 + 1.5 * rng.uniform();
    const Matrix q = random_orthogonal(d, rng);
    std::vector<double> mu(static_cast<std::size_t>(d));
    for (double& m : mu) m = 4.0 * rng.uniform() - 2.0;
    std::sort(mu.begin(), mu.end());
    const int mode = i % 5;
    if (mode == 1 || mode == 2) mu[0] = -std::abs(mu[0]) - 0.1; // forced indefinite
    Vector g(d);
    for (int k = 0; k < d; ++k) g(k) = rng.normal();
    if (mode == 2) { // hard case: no component along the bottom eigenvector
      g(0) = 0.0;
      if (d == 3 && mu[1] == mu[0]) mu[1] += 0.5;
      g *= 0.05;
      ++hard;
    }
    if (mu[0] < 0) ++indefinite;
    const SymMatrix a = with_spectrum(q, mu);
    const Vector b = q * g;
    const Vector nu = min_quadratic_on_ball(a, b, S, 1e-10);
    const double solver = ball_objective(a, b, nu);
    const double grid = BallGridOracle(a, b, S, 0.01).minimum();
    const bool ok = solver <= grid + 1e-3 && nu.norm() <= S + 1e-8;
    bad += !ok;
    worst = std::max(worst, solver - grid);
  }
  return {bad == 0, "500 cases (" + std::to_string(indefinite) + " indefinite, " + std::to_string(hard) +
                        " hard), failures " + std::to_string(bad) + ", max solver - grid " + fmt(worst, 3)};
}

Outcome estimator_identity() {
  Rng rng(8);
  double worst = 0.0;
  for (int h = 0; h < 100; ++h) {
    const Instance inst = h % 2 ? benign_2d() : random_3d(static_cast<std::uint64_t>(h));
    const int d = inst.dim();
    const int K = 1 + static_cast<int>(rng.uniform() * 10);
    const int k = 1 + static_cast<int>(rng.uniform() * K) % K;
    const double c = static_cast<double>(k) / K;
    KnownCovState kc(d);
    UnknownCovState uc(d, K);
    for (int t = 0; t < 200; ++t) {
      const RoundSample s = sample_round(inst, c, rng);
      kc_update(kc, c, s, inst.profile());
      uc_update(uc, k, s);
    }
    const ConfidenceParams conf(d, inst.R(), inst.S(), 0.05);
    const QuadraticForm a = kc_quadratic(kc, c, inst.lambda(), inst.profile(), conf, false);
    const QuadraticForm b = uc_quadratic(uc, k, inst.lambda());
    worst = std::max(worst, (a.a.matrix() - b.a.matrix()).norm() / a.a.matrix().norm());
    worst = std::max(worst, (a.b - b.b).norm() / a.b.norm());
    worst = std::max(worst, std::abs(a.constant - b.constant) / std::abs(a.constant));
  }
  return {worst <= 1e-9, "max relative difference " + fmt(worst, 3) + " over 100 histories"};
}

Outcome lipschitz() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(source_path("instances"))) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  double worst = -1e300;
  std::string worst_name;
  for (const auto& f : files) {
    const Instance inst = load_instance(f.string());
    const LossLandscape l = loss_landscape(inst, 512);
    for (std::size_t i = 0; i < l.costs.size(); ++i) {
      for (std::size_t j = i; j < l.costs.size(); ++j) {
        const double gap = l.losses[j] - l.losses[i] - inst.lambda() * (l.costs[j] - l.costs[i]);
        if (gap > worst) {
          worst = gap;
          worst_name = inst.name();
        }
      }
    }
  }
  return {!files.empty() && worst <= 1e-9, std::to_string(files.size()) + " instances, max excess " + fmt(worst, 3) +
                                               " (" + worst_name + ")"};
}

Outcome claim_numerics() {
  bool pass = true;
  std::string detail;
  for (int K : {2, 4, 8}) {
    const UnknownLowerBoundFamily fam = make_lower_bound_unknown(K);
    double kl_in = 0.0;
    double kl_out = 0.0;
    double worst_gap = -1e300;
    for (int k = 1; k <= K; ++k) {
      const KlIntervalReport kl = perturbation_kl_report(k, K, 10000);
      kl_in = std::max(kl_in, kl.max_inside);
      kl_out = std::max(kl_out, kl.max_outside);
      pass = pass && kl.ok();
      const Instance& inst = fam.perturbed[static_cast<std::size_t>(k - 1)];
      const LossLandscape l = loss_landscape(inst, 10000);
      const double bound = 0.5 - 1.0 / (16.0 * K) + inst.lambda() / 10000.0;
      worst_gap = std::max(worst_gap, l.best_loss - bound);
      pass = pass && l.best_loss <= bound;
    }
    detail += "K=" + std::to_string(K) + ": KL in " + fmt(kl_in, 3) + " <= " + fmt(1.0 / (K * K), 3) + ", out " +
              fmt(kl_out, 3) + ", min - bound " + fmt(worst_gap, 3) + "; ";
  }
  return {pass, detail};
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"sqrt(T) rate, known covariance", rate_known},
      {"T^(2/3) rate, unknown covariance", rate_unknown},
      {"flat landscape", flat_landscape},
      {"lower-bound plays", lower_bound_plays},
      {"uniform loss convergence", uniform_convergence},
      {"matrix concentration", matrix_concentration},
      {"ball quadratic vs grid", trs_equivalence},
      {"kc/uc estimator identity", estimator_identity},
      {"one-sided Lipschitz", lipschitz},
      {"perturbed family numerics", claim_numerics},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %-34s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
