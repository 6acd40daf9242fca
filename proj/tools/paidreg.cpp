#include "paidreg/concentration.hpp"
#include "paidreg/harness.hpp"
#include "paidreg/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using namespace paidreg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  const char* env = std::getenv("PAIDREG_OUT_DIR");
  return env && *env ? env : ".";
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << std::setw(2) << j << '\n';
}

std::string slug(const std::string& s) {
  std::string out;
  for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_';
  return out;
}

// --- config file ------------------------------------------------------------------

/// Flags given on the command line win over the config file, which wins over
/// built-in defaults.
class ConfigFile {
public:
  void load(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    try {
      j_ = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("cannot parse config file '" + path + "': " + e.what());
    }
    if (!j_.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
    if (!j_.contains("schema_version") || j_.at("schema_version") != kSchemaVersion) {
      throw UsageError("config file '" + path + "': schema_version must be " +
                       std::to_string(kSchemaVersion));
    }
  }

  template <class T>
  void fill(const CLI::App& app, const std::string& flag, const char* key, T& target) const {
    if (!j_.is_object() || !j_.contains(key)) return;
    if (app.get_option(flag)->count() > 0) return;
    try {
      target = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("config field '") + key + "': " + e.what());
    }
  }

  /// The raw value under `key` unless the flag was given on the command line.
  const json* raw(const CLI::App& app, const std::string& flag, const char* key) const {
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    if (app.get_option(flag)->count() > 0) return nullptr;
    return &j_.at(key);
  }

private:
  json j_;
};

// --- shared policy flags ------------------------------------------------------------

struct PolicyFlags {
  std::string policy = "known";
  int grid = 0;
  double delta = 0.0;
  double width_scale = 1.0;
  bool zero_arm = false;

  void add(CLI::App& app) {
    app.add_option("--policy", policy, "known | unknown")->check(CLI::IsMember({"known", "unknown"}));
    app.add_option("--K", grid, "Override the grid size");
    app.add_option("--delta", delta, "Override the confidence level");
    app.add_option("--width-scale", width_scale,
                   "Multiply regularization and optimism widths (1 = printed constants)");
    app.add_flag("--zero-arm", zero_arm, "Include the zero-cost arm");
  }

  void fill(const CLI::App& app, const ConfigFile& cfg) {
    cfg.fill(app, "--policy", "policy", policy);
    cfg.fill(app, "--K", "K", grid);
    cfg.fill(app, "--delta", "delta", delta);
    cfg.fill(app, "--width-scale", "width_scale", width_scale);
    cfg.fill(app, "--zero-arm", "zero_arm", zero_arm);
  }

  PolicyOverrides overrides() const {
    PolicyOverrides o;
    if (grid != 0) {
      if (grid < 1) throw UsageError("--K must be >= 1");
      o.grid = grid;
    }
    if (delta != 0.0) {
      if (!(delta > 0.0 && delta < 1.0)) throw UsageError("--delta must lie in (0, 1)");
      o.delta = delta;
    }
    if (!(width_scale >= 0.0)) throw UsageError("--width-scale must be >= 0");
    o.width_scale = width_scale;
    o.include_zero_arm = zero_arm;
    return o;
  }

  PolicyVariant variant() const {
    try {
      return policy_variant_from_string(policy);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
};

Instance read_instance(const std::string& path) {
  if (path.empty()) throw UsageError("--instance is required");
  if (!fs::exists(path)) throw UsageError("instance file not found: " + path);
  try {
    return load_instance(path);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  } catch (const InstanceError& e) {
    throw UsageError("instance file '" + path + "' failed check " + e.check() + ": " + e.what());
  }
}

Instance inline_instance(const json& j) {
  try {
    return Instance(instance_params_from_json(j));
  } catch (const ConfigError& e) {
    throw UsageError(std::string("inline instance: ") + e.what());
  } catch (const InstanceError& e) {
    throw UsageError("inline instance failed check " + e.check() + ": " + e.what());
  }
}

std::vector<std::uint64_t> seed_list(int count, std::uint64_t base,
                                     const std::vector<std::uint64_t>& explicit_seeds) {
  std::vector<std::uint64_t> seeds = explicit_seeds;
  if (seeds.empty()) {
    if (count < 1) throw UsageError("--seeds must be >= 1");
    for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
  std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) throw UsageError("seeds must be distinct");
  return seeds;
}

// --- run ------------------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string instance;
  PolicyFlags policy;
  long horizon = 1024;
  std::uint64_t seed = 1;
  int oracle_grid = kDefaultOracleGrid;
  std::string out = default_out_dir();
};

int cmd_run(const CLI::App& app, RunArgs a) {
  ConfigFile cfg;
  cfg.load(a.config);
  const json* inline_obj = cfg.raw(app, "--instance", "instance");
  if (!(inline_obj && inline_obj->is_object())) cfg.fill(app, "--instance", "instance", a.instance);
  a.policy.fill(app, cfg);
  cfg.fill(app, "--T", "T", a.horizon);
  cfg.fill(app, "--seed", "seed", a.seed);
  cfg.fill(app, "--oracle-grid", "oracle_grid", a.oracle_grid);
  cfg.fill(app, "--out", "out", a.out);
  if (a.horizon < 0) throw UsageError("--T must be >= 0");
  if (a.oracle_grid < 1) throw UsageError("--oracle-grid must be >= 1");

  const Instance inst = inline_obj && inline_obj->is_object() ? inline_instance(*inline_obj)
                                                                : read_instance(a.instance);
  PolicyConfig config;
  try {
    config = resolve_policy_config(a.policy.variant(), inst, a.horizon, a.policy.overrides());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const fs::path dir = prepare_out_dir(a.out);
  const LossLandscape landscape = loss_landscape(inst, a.oracle_grid);
  const RunLog log = run_episode(inst, config, a.horizon, a.seed, landscape);

  const std::string stem = "run_" + slug(inst.name()) + "_" + a.policy.policy + "_T" +
                           std::to_string(a.horizon) + "_seed" + std::to_string(a.seed);
  {
    std::ofstream csv(dir / (stem + ".csv"));
    if (!csv) throw std::runtime_error("cannot write " + (dir / (stem + ".csv")).string());
    write_runlog_csv(csv, log);
  }
  json summary = runlog_summary_json(log);
  summary["landscape"] = to_json(landscape);
  write_json(dir / (stem + ".json"), summary);

  std::cout << "instance " << inst.name() << "  policy " << a.policy.policy << "  K "
            << config.grid << "  delta " << config.delta << "\n";
  std::cout << std::setprecision(10) << "regret " << log.summary.regret << "  per-round "
            << (log.summary.rounds > 0 ? log.summary.regret / log.summary.rounds : 0.0)
            << "  (oracle slack " << landscape.slack() << " per round)\n";
  std::cout << "wrote " << (dir / (stem + ".csv")).string() << "\n";
  if (log.error) {
    std::cerr << "error: episode aborted at " << *log.error << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// --- sweep ---------------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::vector<std::string> instances;
  PolicyFlags policy;
  std::vector<long> horizons;
  std::vector<int> pow2_range;
  int seeds = 20;
  std::uint64_t seed_base = 1;
  std::vector<std::uint64_t> seed_values;
  bool fit = false;
  unsigned threads = 0;
  int oracle_grid = kDefaultOracleGrid;
  std::string out = default_out_dir();
};

int cmd_sweep(const CLI::App& app, SweepArgs a) {
  ConfigFile cfg;
  cfg.load(a.config);
  std::vector<Instance> instances;
  if (const json* listed = cfg.raw(app, "--instance", "instances")) {
    if (!listed->is_array()) throw UsageError("config field 'instances' must be an array");
    for (const json& e : *listed) {
      if (e.is_object()) {
        instances.push_back(inline_instance(e));
      } else if (e.is_string()) {
        a.instances.push_back(e.get<std::string>());
      } else {
        throw UsageError("config field 'instances' holds paths or instance objects");
      }
    }
  }
  a.policy.fill(app, cfg);
  cfg.fill(app, "--horizons", "horizons", a.horizons);
  cfg.fill(app, "--seeds", "seeds", a.seeds);
  cfg.fill(app, "--seed-base", "seed_base", a.seed_base);
  cfg.fill(app, "--seed-list", "seed_list", a.seed_values);
  cfg.fill(app, "--fit", "fit", a.fit);
  cfg.fill(app, "--threads", "threads", a.threads);
  cfg.fill(app, "--oracle-grid", "oracle_grid", a.oracle_grid);
  cfg.fill(app, "--out", "out", a.out);

  if (!a.pow2_range.empty()) {
    if (a.pow2_range.size() != 2 || a.pow2_range[0] < 0 || a.pow2_range[1] < a.pow2_range[0] ||
        a.pow2_range[1] > 40) {
      throw UsageError("--pow2 expects LO,HI with 0 <= LO <= HI <= 40");
    }
    for (int e = a.pow2_range[0]; e <= a.pow2_range[1]; ++e) a.horizons.push_back(1L << e);
  }
  if (a.horizons.empty()) throw UsageError("no horizons given (--horizons or --pow2)");
  for (long h : a.horizons) {
    if (h < 1) throw UsageError("horizons must be positive");
  }
  std::sort(a.horizons.begin(), a.horizons.end());
  a.horizons.erase(std::unique(a.horizons.begin(), a.horizons.end()), a.horizons.end());
  if (a.fit && a.horizons.size() < 3) throw UsageError("rate fit requires ≥ 3 horizons");
  if (a.instances.empty() && instances.empty()) throw UsageError("--instance is required");
  const std::vector<std::uint64_t> seeds = seed_list(a.seeds, a.seed_base, a.seed_values);

  for (const std::string& path : a.instances) instances.push_back(read_instance(path));
  const PolicyOverrides overrides = a.policy.overrides();
  const PolicyVariant variant = a.policy.variant();
  for (const Instance& inst : instances) {
    try {
      (void)resolve_policy_config(variant, inst, a.horizons.front(), overrides);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const fs::path dir = prepare_out_dir(a.out);

  SweepOptions opts;
  opts.overrides = overrides;
  opts.threads = a.threads;
  opts.oracle_grid = a.oracle_grid;
  const SweepResult result = sweep(instances, variant, a.horizons, seeds, opts);

  std::string stem = "sweep_" + a.policy.policy;
  if (instances.size() == 1) stem += "_" + slug(instances.front().name());
  {
    std::ofstream csv(dir / (stem + ".csv"));
    if (!csv) throw std::runtime_error("cannot write " + (dir / (stem + ".csv")).string());
    write_sweep_csv(csv, result);
  }
  write_json(dir / (stem + ".json"), to_json(result));

  std::cout << std::setw(10) << "T" << std::setw(16) << "mean" << std::setw(14) << "stderr"
            << std::setw(8) << "n" << "\n";
  for (const HorizonStats& st : result.stats) {
    std::cout << std::setw(10) << st.horizon << std::setw(16) << std::setprecision(8)
              << st.mean << std::setw(14) << st.stderr_mean << std::setw(8) << st.episodes
              << "\n";
  }
  if (result.fit) {
    std::cout << "slope " << result.fit->slope << " +/- " << result.fit->stderr_slope << "\n";
    for (const std::string& w : result.fit->warnings) std::cerr << "warning: " << w << "\n";
  } else if (a.fit) {
    std::cerr << "error: rate fit failed (fewer than 3 horizons with positive mean regret)\n";
    return kExitRuntime;
  }
  std::cout << "wrote " << (dir / (stem + ".csv")).string() << "\n";
  if (result.failures > 0) {
    std::cerr << "warning: " << result.failures << " episode(s) failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// --- validate ------------------------------------------------------------------------

struct ValidateArgs {
  std::string instance;
  int profile_grid = 201;
  int kl_points = 10000;
};

int cmd_validate(ValidateArgs a) {
  if (!fs::exists(a.instance)) throw UsageError("instance file not found: " + a.instance);
  InstanceParams params;
  try {
    params = load_instance_params(a.instance);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) std::cout << "  " << detail;
    std::cout << "\n";
    all_ok = all_ok && ok;
  };
  const std::vector<CheckResult> checks = check_instance(params);
  for (const CheckResult& c : checks) report(c.name, c.passed, c.detail);
  const bool structural = std::all_of(checks.begin(), checks.end(),
                                      [](const CheckResult& c) { return c.passed; });
  if (structural) {
    const ProfileReport pr = validate_profile(params.profile, a.profile_grid);
    std::string detail = "grid " + std::to_string(pr.grid_size);
    if (!pr.ok()) {
      const ProfileViolation& v = pr.violations.front();
      std::ostringstream os;
      os << pr.violations.size() << " violation(s), first "
         << (v.kind == ProfileViolation::Kind::NotPsd ? "not PSD" : "not monotone") << " at c1="
         << v.c1 << " c2=" << v.c2 << " min eigenvalue " << v.min_eigenvalue;
      detail = os.str();
    }
    report("profile_psd_monotone", pr.ok(), detail);
    if (params.profile.kind() == ProfileKind::PerturbedFRatio) {
      const KlIntervalReport kl = perturbation_kl_report(params.profile.perturbed_index(),
                                                         params.profile.perturbed_grid(),
                                                         a.kl_points);
      std::ostringstream os;
      os << "max inside " << kl.max_inside << " <= 1/K^2 = " << kl.bound << ", max outside "
         << kl.max_outside;
      report("kl_interval", kl.ok(), os.str());
    }
  }
  return all_ok ? kExitOk : kExitUsage;
}

// --- concentration -------------------------------------------------------------------

struct ConcentrationArgs {
  std::string which = "both";
  int d = 1;
  double R = 1.0;
  long t_max = 10000;
  long t_max_loss = 2048;
  double delta = 0.05;
  int trials = 1000;
  int loss_trials = 200;
  int probes = 100;
  int grid = kDefaultLossGrid;
  std::uint64_t seed = 1;
  std::string instance;
  unsigned threads = 0;
  std::string out = default_out_dir();
};

Instance builtin_benign_instance() {
  InstanceParams p;
  p.name = "benign_2d";
  p.theta_star = Vector(2);
  p.theta_star << 1.0, -0.5;
  p.x_mean = Vector(2);
  p.x_mean << 0.5, 0.5;
  Matrix cov(2, 2);
  cov << 1.0, 0.3, 0.3, 0.8;
  p.x_cov_centered = SymMatrix(cov);
  p.profile = CovarianceProfile::f_ratio(SymMatrix::identity(2));
  p.lambda = 0.5;
  p.S = 2.0;
  return Instance(std::move(p));
}

void print_report(const ViolationReport& r) {
  std::cout << r.kind << ": " << r.any_violations << "/" << r.trials
            << " trials violated (frequency " << r.frequency() << ", nominal " << r.nominal
            << ", allowed " << r.nominal + 3.0 * r.binomial_stderr() << ") "
            << (r.within_contract() ? "PASS" : "FAIL") << "\n";
}

int cmd_concentration(const CLI::App& app, ConcentrationArgs a) {
  const bool matrix = a.which == "matrix" || a.which == "both";
  const bool loss = a.which == "loss" || a.which == "both";
  const bool loss_trials_given = app.get_option("--trials")->count() > 0;
  if (loss_trials_given) a.loss_trials = a.trials;
  if ((matrix && a.trials < 100) || (loss && a.loss_trials < 100)) {
    std::cerr << "warning: below minimum trials (need >= 100)\n";
    return kExitUsage;
  }
  const fs::path dir = prepare_out_dir(a.out);
  json out;
  out["schema_version"] = kSchemaVersion;
  bool ok = true;
  if (matrix) {
    if (a.d < 1) throw UsageError("--d must be >= 1");
    if (!(a.delta > 0.0 && a.delta < 1.0)) throw UsageError("--delta must lie in (0, 1)");
    const ViolationReport r =
        mc_matrix_concentration(a.d, a.R, a.t_max, a.delta, a.trials, a.seed, a.threads);
    print_report(r);
    ok = ok && r.within_contract();
    out["matrix"] = to_json(r);
    out["matrix"]["d"] = a.d;
    out["matrix"]["R"] = a.R;
  }
  if (loss) {
    const Instance inst = a.instance.empty() ? builtin_benign_instance() : read_instance(a.instance);
    if (a.probes < 10) throw UsageError("--probes must be >= 10");
    const LossUniformReport r = mc_loss_uniform(inst, a.t_max_loss, a.delta, a.loss_trials,
                                                a.probes, a.seed, a.grid, a.threads);
    print_report(r.kc);
    print_report(r.uc);
    print_report(r.combined);
    ok = ok && r.combined.within_contract();
    out["loss"] = to_json(r);
    out["loss"]["instance"] = inst.name();
  }
  write_json(dir / "concentration.json", out);
  std::cout << "wrote " << (dir / "concentration.json").string() << "\n";
  return ok ? kExitOk : kExitRuntime;
}

// --- lower bounds --------------------------------------------------------------------

struct LowerBoundArgs {
  std::string suite;
  double eps = 0.3;
  int family_grid = 4;
  long horizon = 0;
  int seeds = 20;
  std::uint64_t seed_base = 1;
  PolicyFlags policy;
  unsigned threads = 0;
  std::string out = default_out_dir();
};

int cmd_lower_bound(LowerBoundArgs a) {
  if (a.suite != "known" && a.suite != "unknown") {
    throw UsageError("lower-bound suite must be known or unknown");
  }
  if (a.suite == "known" && !(a.eps > 0.0 && a.eps <= 0.5)) {
    throw UsageError("ε must lie in (0, 1/2]");
  }
  if (a.suite == "unknown" && a.family_grid < 1) throw UsageError("--K must be >= 1");
  if (a.horizon == 0) a.horizon = a.suite == "known" ? 16384 : 65536;
  if (a.horizon < 1) throw UsageError("--T must be >= 1");
  const std::vector<std::uint64_t> seeds = seed_list(a.seeds, a.seed_base, {});

  struct Target {
    Instance instance;
    double lo;
    double hi;
    std::string label;
  };
  std::vector<Target> targets;
  PolicyVariant variant;
  if (a.suite == "known") {
    variant = PolicyVariant::KnownCov;
    KnownLowerBoundPair pair = make_lower_bound_known(a.eps);
    targets.push_back({pair.minus, 0.0, 0.0, "nearest 0"});
    targets.push_back({pair.plus, 0.5, 0.5, "nearest 1/2"});
  } else {
    variant = PolicyVariant::UnknownCov;
    UnknownLowerBoundFamily fam = make_lower_bound_unknown(a.family_grid);
    targets.push_back({fam.baseline, 0.0, 1.0, "any (flat)"});
    for (int k = 1; k <= a.family_grid; ++k) {
      targets.push_back({fam.perturbed[static_cast<std::size_t>(k - 1)],
                         perturbation_knot(k, a.family_grid), perturbation_knot(k + 1, a.family_grid),
                         "in [c_k, c_{k+1})"});
    }
  }
  PolicyOverrides overrides = a.policy.overrides();
  const fs::path dir = prepare_out_dir(a.out);

  json out;
  out["schema_version"] = kSchemaVersion;
  out["suite"] = a.suite;
  out["T"] = a.horizon;
  out["seeds"] = seeds;
  json rows = json::array();
  std::cout << std::left << std::setw(40) << "instance" << std::setw(14) << "regret"
            << std::setw(10) << "best_c" << std::setw(20) << "target" << "matches\n";
  for (const Target& tg : targets) {
    const PolicyConfig config = resolve_policy_config(variant, tg.instance, a.horizon, overrides);
    const LossLandscape landscape = loss_landscape(tg.instance);
    std::vector<RunLog> logs(seeds.size());
    parallel_for(seeds.size(), a.threads, [&](std::size_t i) {
      logs[i] = run_episode(tg.instance, config, a.horizon, seeds[i], landscape,
                            EpisodeOptions{false});
    });
    int matches = 0;
    double mean_regret = 0.0;
    json per_seed = json::array();
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const RunLog& log = logs[i];
      if (log.error) throw std::runtime_error(tg.instance.name() + ": " + *log.error);
      bool hit;
      if (a.suite == "known") {
        const int target_arm =
            std::max(1, static_cast<int>(std::lround(tg.lo * static_cast<double>(config.grid))));
        hit = log.summary.late_modal_arm == target_arm;
      } else {
        hit = log.summary.late_modal_cost >= tg.lo &&
              (log.summary.late_modal_cost < tg.hi || tg.hi >= 1.0);
      }
      matches += hit ? 1 : 0;
      mean_regret += log.summary.regret / static_cast<double>(logs.size());
      per_seed.push_back({{"seed", seeds[i]},
                          {"regret", log.summary.regret},
                          {"late_modal_cost", log.summary.late_modal_cost},
                          {"matches", hit}});
    }
    std::ostringstream target;
    target << tg.label;
    std::cout << std::left << std::setw(40) << tg.instance.name() << std::setw(14)
              << std::setprecision(6) << mean_regret << std::setw(10) << landscape.best_cost
              << std::setw(20) << target.str() << matches << "/" << logs.size() << "\n";
    rows.push_back({{"instance", tg.instance.name()},
                    {"K", config.grid},
                    {"delta", config.delta},
                    {"best_cost", landscape.best_cost},
                    {"best_loss", landscape.best_loss},
                    {"target_lo", tg.lo},
                    {"target_hi", tg.hi},
                    {"mean_regret", mean_regret},
                    {"matches", matches},
                    {"runs", per_seed}});
  }
  out["instances"] = rows;
  write_json(dir / ("lower_bound_" + a.suite + ".json"), out);
  std::cout << "wrote " << (dir / ("lower_bound_" + a.suite + ".json")).string() << "\n";
  return kExitOk;
}

// --- landscape -----------------------------------------------------------------------

struct LandscapeArgs {
  std::string instance;
  int grid = kDefaultOracleGrid;
  std::string out = default_out_dir();
};

int cmd_landscape(LandscapeArgs a) {
  const Instance inst = read_instance(a.instance);
  if (a.grid < 1) throw UsageError("--M must be >= 1");
  const LossLandscape l = loss_landscape(inst, a.grid);
  const fs::path dir = prepare_out_dir(a.out);
  const fs::path path = dir / ("landscape_" + slug(inst.name()) + ".csv");
  std::ofstream csv(path);
  if (!csv) throw std::runtime_error("cannot write " + path.string());
  write_landscape_csv(csv, l);
  std::cout << std::setprecision(12) << "best loss " << l.best_loss << " at c = " << l.best_cost
            << " (slack " << l.slack() << ")\n";
  std::cout << "wrote " << path.string() << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online regression with paid, noisy features"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run one episode and write its log");
  run->add_option("--config", run_args.config, "JSON config (flags override it)");
  run->add_option("--instance", run_args.instance, "Instance JSON file");
  run_args.policy.add(*run);
  run->add_option("--T", run_args.horizon, "Horizon");
  run->add_option("--seed", run_args.seed, "Seed");
  run->add_option("--oracle-grid", run_args.oracle_grid, "Oracle grid size M");
  run->add_option("--out", run_args.out, "Output directory (default $PAIDREG_OUT_DIR or .)");

  SweepArgs sweep_args;
  CLI::App* sw = app.add_subcommand("sweep", "Run horizons x seeds and fit the regret rate");
  sw->add_option("--config", sweep_args.config, "JSON config (flags override it)");
  sw->add_option("--instance", sweep_args.instances, "Instance JSON file (repeatable)");
  sweep_args.policy.add(*sw);
  sw->add_option("--horizons", sweep_args.horizons, "Horizons")->delimiter(',');
  sw->add_option("--pow2", sweep_args.pow2_range, "Horizons 2^LO..2^HI as LO,HI")->delimiter(',');
  sw->add_option("--seeds", sweep_args.seeds, "Number of seeds");
  sw->add_option("--seed-base", sweep_args.seed_base, "First seed");
  sw->add_option("--seed-list", sweep_args.seed_values, "Explicit seeds")->delimiter(',');
  sw->add_flag("--fit", sweep_args.fit, "Fit the log-log regret slope");
  sw->add_option("--threads", sweep_args.threads, "Worker threads (0 = all cores)");
  sw->add_option("--oracle-grid", sweep_args.oracle_grid, "Oracle grid size M");
  sw->add_option("--out", sweep_args.out, "Output directory");

  ValidateArgs validate_args;
  CLI::App* val = app.add_subcommand("validate", "Check an instance file");
  val->add_option("instance", validate_args.instance, "Instance JSON file")->required();
  val->add_option("--profile-grid", validate_args.profile_grid, "Profile check grid size");

  ConcentrationArgs conc_args;
  CLI::App* conc = app.add_subcommand("concentration", "Monte-Carlo checks of the confidence bounds");
  conc->add_option("--which", conc_args.which, "matrix | loss | both")
      ->check(CLI::IsMember({"matrix", "loss", "both"}));
  conc->add_option("--d", conc_args.d, "Dimension (matrix)");
  conc->add_option("--R", conc_args.R, "Feature scale (matrix)");
  conc->add_option("--t-max", conc_args.t_max, "Last checkpoint (matrix)");
  conc->add_option("--t-max-loss", conc_args.t_max_loss, "Last checkpoint (loss)");
  conc->add_option("--delta", conc_args.delta, "Confidence level");
  conc->add_option("--trials", conc_args.trials, "Trials (both experiments)");
  conc->add_option("--probes", conc_args.probes, "Random (c, nu) probes (loss)");
  conc->add_option("--K", conc_args.grid, "Cost grid size (loss)");
  conc->add_option("--instance", conc_args.instance, "Instance JSON file (loss; default: built-in 2-D instance)");
  conc->add_option("--seed", conc_args.seed, "Seed");
  conc->add_option("--threads", conc_args.threads, "Worker threads");
  conc->add_option("--out", conc_args.out, "Output directory");

  LowerBoundArgs lb_args;
  CLI::App* lb = app.add_subcommand("lower-bound", "Run the lower-bound instance suites");
  lb->add_option("suite", lb_args.suite, "known | unknown")->required();
  lb->add_option("--eps", lb_args.eps, "Gap parameter (known)");
  lb->add_option("--K", lb_args.family_grid, "Number of perturbed instances (unknown)");
  lb->add_option("--T", lb_args.horizon, "Horizon");
  lb->add_option("--seeds", lb_args.seeds, "Number of seeds");
  lb->add_option("--seed-base", lb_args.seed_base, "First seed");
  lb->add_option("--width-scale", lb_args.policy.width_scale, "Confidence width multiplier");
  lb->add_option("--threads", lb_args.threads, "Worker threads");
  lb->add_option("--out", lb_args.out, "Output directory");

  LandscapeArgs land_args;
  CLI::App* land = app.add_subcommand("landscape", "Write the oracle loss landscape");
  land->add_option("--instance", land_args.instance, "Instance JSON file")->required();
  land->add_option("--M", land_args.grid, "Grid size");
  land->add_option("--out", land_args.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(*run, run_args);
    if (*sw) return cmd_sweep(*sw, sweep_args);
    if (*val) return cmd_validate(validate_args);
    if (*conc) return cmd_concentration(*conc, conc_args);
    if (*lb) return cmd_lower_bound(lb_args);
    if (*land) return cmd_landscape(land_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
