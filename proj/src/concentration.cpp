#include "paidreg/concentration.hpp"

#include "paidreg/estimators.hpp"
#include "paidreg/oracle.hpp"
#include "paidreg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace paidreg {

std::vector<long> geometric_checkpoints(long t_max) {
  std::vector<long> out;
  for (long t = 16; t <= t_max; t *= 2) out.push_back(t);
  if (!out.empty() && out.back() != t_max) out.push_back(t_max);
  return out;
}

double ViolationReport::frequency() const {
  return trials > 0 ? static_cast<double>(any_violations) / trials : 0.0;
}

double ViolationReport::binomial_stderr() const {
  return trials > 0 ? std::sqrt(nominal * (1.0 - nominal) / trials) : 0.0;
}

bool ViolationReport::within_contract() const {
  return frequency() <= nominal + 3.0 * binomial_stderr();
}

namespace {

ViolationReport empty_report(const std::string& kind, int trials, double delta, double nominal,
                             const std::vector<long>& checkpoints) {
  ViolationReport r;
  r.kind = kind;
  r.trials = trials;
  r.delta = delta;
  r.nominal = nominal;
  r.checkpoints = checkpoints;
  r.violations.assign(checkpoints.size(), 0);
  r.max_ratio.assign(checkpoints.size(), 0.0);
  return r;
}

struct TrialFlags {
  std::vector<char> hit;
  std::vector<double> ratio;
};

void accumulate(ViolationReport& report, const std::vector<TrialFlags>& per_trial) {
  for (const TrialFlags& f : per_trial) {
    bool any = false;
    for (std::size_t j = 0; j < f.hit.size(); ++j) {
      if (f.hit[j]) {
        ++report.violations[j];
        any = true;
      }
      report.max_ratio[j] = std::max(report.max_ratio[j], f.ratio[j]);
    }
    if (any) ++report.any_violations;
  }
}

TrialFlags blank_flags(std::size_t n) { return {std::vector<char>(n, 0), std::vector<double>(n, 0.0)}; }

} // namespace

ViolationReport mc_matrix_concentration(int d, double R, long t_max, double delta, int trials,
                                        std::uint64_t seed, unsigned threads) {
  if (trials < 100) throw std::invalid_argument("below minimum trials (need >= 100)");
  if (d < 1) throw std::invalid_argument("matrix concentration: d must be >= 1");
  if (!(R >= 0.0)) throw std::invalid_argument("matrix concentration: R must be >= 0");
  if (t_max < 16) throw std::invalid_argument("matrix concentration: t_max must be >= 16");
  const ConfidenceParams conf(d, R, 0.0, delta);
  const std::vector<long> checkpoints = geometric_checkpoints(t_max);
  std::vector<double> bounds;
  for (long t : checkpoints) bounds.push_back(conf.matrix_bound(t));

  std::vector<TrialFlags> flags(static_cast<std::size_t>(trials), blank_flags(checkpoints.size()));
  parallel_for(flags.size(), threads, [&](std::size_t trial) {
    Rng rng(child_seed(seed, trial));
    LMatrix acc = LMatrix::Zero(d, d);
    LVector x(d);
    const long double var = static_cast<long double>(R) * R;
    std::size_t next = 0;
    for (long t = 1; t <= t_max && next < checkpoints.size(); ++t) {
      for (int j = 0; j < d; ++j) x(j) = static_cast<long double>(R * rng.normal());
      acc.noalias() += x * x.transpose();
      if (t != checkpoints[next]) continue;
      LMatrix centered = acc - static_cast<long double>(t) * var * LMatrix::Identity(d, d);
      const double norm = op_norm(SymMatrix(centered.cast<double>()));
      TrialFlags& f = flags[trial];
      f.hit[next] = norm > bounds[next] ? 1 : 0;
      f.ratio[next] = bounds[next] > 0.0 ? norm / bounds[next] : 0.0;
      ++next;
    }
  });

  ViolationReport report = empty_report("matrix", trials, delta, delta, checkpoints);
  accumulate(report, flags);
  return report;
}

std::vector<double> LossUniformReport::median_deviation() const {
  const std::size_t n_ckpt = combined.checkpoints.size();
  std::vector<double> out(n_ckpt, 0.0);
  for (std::size_t j = 0; j < n_ckpt; ++j) {
    std::vector<double> col;
    for (const auto& row : deviation) col.push_back(row[j]);
    if (col.empty()) continue;
    std::sort(col.begin(), col.end());
    const std::size_t m = col.size() / 2;
    out[j] = col.size() % 2 ? col[m] : 0.5 * (col[m - 1] + col[m]);
  }
  return out;
}

double LossUniformReport::decay_fraction(long t_early, long t_late) const {
  const auto& cp = combined.checkpoints;
  const auto ia = std::find(cp.begin(), cp.end(), t_early);
  const auto ib = std::find(cp.begin(), cp.end(), t_late);
  if (ia == cp.end() || ib == cp.end()) {
    throw std::invalid_argument("decay_fraction: checkpoint not recorded");
  }
  const auto a = static_cast<std::size_t>(ia - cp.begin());
  const auto b = static_cast<std::size_t>(ib - cp.begin());
  if (deviation.empty()) return 0.0;
  int count = 0;
  for (const auto& row : deviation) {
    if (row[b] < row[a]) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(deviation.size());
}

LossUniformReport mc_loss_uniform(const Instance& instance, long t_max, double delta, int trials,
                                  int probes, std::uint64_t seed, int grid, unsigned threads) {
  if (probes < 10) throw std::invalid_argument("loss uniform: probes must be >= 10");
  if (trials < 1) throw std::invalid_argument("loss uniform: trials must be >= 1");
  if (grid < 1) throw std::invalid_argument("loss uniform: K must be >= 1");
  if (t_max < 16) throw std::invalid_argument("loss uniform: t_max must be >= 16");
  const int d = instance.dim();
  const double S = instance.S();
  const double lambda = instance.lambda();
  const ConfidenceParams conf(d, instance.R(), S, delta);
  const std::vector<long> checkpoints = geometric_checkpoints(t_max);
  const std::size_t n_ckpt = checkpoints.size();

  // Exact loss is a quadratic in nu per cost; cache the arm quadratics.
  std::vector<SymMatrix> arm_cov;
  for (int k = 1; k <= grid; ++k) arm_cov.push_back(instance.sigma_xhat(static_cast<double>(k) / grid));
  const Vector& cross = instance.cross_moment();
  const double base = instance.signal_energy() + instance.output_noise_var();
  auto exact = [&](const SymMatrix& cov, double c, const Vector& nu) {
    return quad_form(cov, nu) - 2.0 * nu.dot(cross) + base + lambda * c;
  };

  std::vector<TrialFlags> kc_flags(static_cast<std::size_t>(trials), blank_flags(n_ckpt));
  std::vector<TrialFlags> uc_flags(static_cast<std::size_t>(trials), blank_flags(n_ckpt));
  std::vector<std::vector<double>> deviation(static_cast<std::size_t>(trials),
                                             std::vector<double>(n_ckpt, 0.0));

  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t trial) {
    Rng rng(child_seed(seed, trial));
    std::vector<double> probe_c(static_cast<std::size_t>(probes));
    std::vector<Vector> probe_nu(static_cast<std::size_t>(probes));
    std::vector<SymMatrix> probe_cov;
    std::vector<SymMatrix> probe_noise;
    for (int p = 0; p < probes; ++p) {
      probe_c[p] = rng.uniform();
      probe_nu[p] = uniform_in_ball(d, S, rng);
      probe_cov.push_back(instance.sigma_xhat(probe_c[p]));
      probe_noise.push_back(instance.sigma_n(probe_c[p]));
    }
    KnownCovState kc(d);
    UnknownCovState uc(d, grid);
    std::size_t next = 0;
    for (long t = 1; t <= t_max && next < n_ckpt; ++t) {
      const int k = 1 + static_cast<int>(std::min<double>(grid - 1, std::floor(rng.uniform() * grid)));
      const double c = static_cast<double>(k) / grid;
      const RoundSample sample = sample_round(instance, c, rng);
      kc_update(kc, c, sample, instance.profile());
      uc_update(uc, k, sample);
      if (t != checkpoints[next]) continue;

      const double td = static_cast<double>(t);
      const double kc_bound = conf.kc_width(t);
      const SymMatrix a_acc(kc.a_acc.cast<double>());
      const Vector b_acc = kc.b_acc.cast<double>();
      const double q_acc = static_cast<double>(kc.q_acc);
      double worst_kc = 0.0;
      for (int p = 0; p < probes; ++p) {
        const Vector& nu = probe_nu[p];
        const double est = quad_form(a_acc, nu) + td * quad_form(probe_noise[p], nu) -
                           2.0 * b_acc.dot(nu) + q_acc + td * lambda * probe_c[p];
        worst_kc = std::max(worst_kc, std::abs(est - td * exact(probe_cov[p], probe_c[p], nu)));
      }
      deviation[trial][next] = worst_kc / td;
      kc_flags[trial].hit[next] = worst_kc > kc_bound ? 1 : 0;
      kc_flags[trial].ratio[next] = worst_kc / kc_bound;

      double worst_uc_ratio = 0.0;
      bool uc_hit = false;
      for (int arm = 1; arm <= grid; ++arm) {
        const ArmStats& st = uc.arm(arm);
        if (st.visits < 1) continue;
        const QuadraticForm q = uc_quadratic(uc, arm, lambda);
        const double n = static_cast<double>(st.visits);
        const double bound = conf.uc_width(t, st.visits);
        const double ca = uc.cost(arm);
        for (int p = 0; p < probes; ++p) {
          const double dev = std::abs(q.evaluate(probe_nu[p]) -
                                      n * exact(arm_cov[static_cast<std::size_t>(arm - 1)], ca,
                                                probe_nu[p]));
          if (dev > bound) uc_hit = true;
          worst_uc_ratio = std::max(worst_uc_ratio, dev / bound);
        }
      }
      uc_flags[trial].hit[next] = uc_hit ? 1 : 0;
      uc_flags[trial].ratio[next] = worst_uc_ratio;
      ++next;
    }
  });

  LossUniformReport out;
  out.grid = grid;
  out.probes = probes;
  out.kc = empty_report("loss_kc", trials, delta, 3.0 * delta, checkpoints);
  out.uc = empty_report("loss_uc", trials, delta, 3.0 * delta, checkpoints);
  out.combined = empty_report("loss", trials, delta, 3.0 * delta, checkpoints);
  accumulate(out.kc, kc_flags);
  accumulate(out.uc, uc_flags);
  std::vector<TrialFlags> both(static_cast<std::size_t>(trials), blank_flags(n_ckpt));
  for (std::size_t i = 0; i < both.size(); ++i) {
    for (std::size_t j = 0; j < n_ckpt; ++j) {
      both[i].hit[j] = kc_flags[i].hit[j] || uc_flags[i].hit[j];
      both[i].ratio[j] = std::max(kc_flags[i].ratio[j], uc_flags[i].ratio[j]);
    }
  }
  accumulate(out.combined, both);
  out.deviation = std::move(deviation);
  return out;
}

} // namespace paidreg
