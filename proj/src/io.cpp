#include "paidreg/io.hpp"

#include <fstream>
#include <sstream>

namespace paidreg {

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field + ": expected an integer");
  return j.get<int>();
}

json long_vector(const LVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(static_cast<double>(v(i)));
  return out;
}

json long_matrix(const LMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(static_cast<double>(m(i, j)));
    out.push_back(row);
  }
  return out;
}

LVector long_vector_from(const json& j, int dim, const std::string& field) {
  const Vector v = vector_from_json(j, field);
  if (v.size() != dim) throw ConfigError(field + ": expected " + std::to_string(dim) + " entries");
  return v.cast<long double>();
}

LMatrix long_matrix_from(const json& j, int dim, const std::string& field) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(field + ": expected " + std::to_string(dim) + " rows");
  }
  LMatrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const LVector row = long_vector_from(j[static_cast<std::size_t>(r)], dim,
                                         field + "[" + std::to_string(r) + "]");
    m.row(r) = row.transpose();
  }
  return m;
}

} // namespace

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field + ": expected a nonempty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

json matrix_to_json(const SymMatrix& m) {
  json out = json::array();
  for (int i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

SymMatrix matrix_from_json(const json& j, int dim, const std::string& field) {
  if (j.is_number()) return SymMatrix::scaled_identity(dim, j.get<double>());
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(field + ": expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                      " nested array or a scalar");
  }
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw ConfigError(field + ": row " + std::to_string(r) + " must have " +
                        std::to_string(dim) + " entries");
    }
    for (int c = 0; c < dim; ++c) {
      m(r, c) = number(row[static_cast<std::size_t>(c)], field);
    }
  }
  if (!(m - m.transpose()).isZero(1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))) {
    throw ConfigError(field + ": matrix must be symmetric");
  }
  return SymMatrix(m);
}

json profile_to_json(const CovarianceProfile& p) {
  json out;
  out["kind"] = to_string(p.kind());
  switch (p.kind()) {
  case ProfileKind::Constant:
    out["sigma"] = matrix_to_json(p.constant_sigma());
    break;
  case ProfileKind::Step:
    out["high"] = matrix_to_json(p.step_high());
    out["low"] = matrix_to_json(p.step_low());
    out["threshold"] = p.step_threshold();
    break;
  case ProfileKind::FRatio:
    out["scale"] = matrix_to_json(p.scale());
    break;
  case ProfileKind::PerturbedFRatio:
    out["k"] = p.perturbed_index();
    out["K"] = p.perturbed_grid();
    out["scale"] = matrix_to_json(p.scale());
    break;
  case ProfileKind::PiecewiseLinear: {
    json knots = json::array();
    for (const ProfileKnot& k : p.knots()) {
      knots.push_back({{"c", k.cost}, {"sigma", matrix_to_json(k.sigma)}});
    }
    out["knots"] = knots;
    break;
  }
  }
  return out;
}

CovarianceProfile profile_from_json(const json& j, int dim) {
  const std::string where = "profile";
  const json& kind_field = require(j, "kind", where);
  if (!kind_field.is_string()) throw ConfigError("profile.kind: expected a string");
  ProfileKind kind;
  try {
    kind = profile_kind_from_string(kind_field.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("profile.kind: ") + e.what());
  }
  auto mat = [&](const char* key) {
    return matrix_from_json(require(j, key, where), dim, where + "." + key);
  };
  auto scale_or_identity = [&]() {
    return j.contains("scale") ? mat("scale") : SymMatrix::identity(dim);
  };
  try {
    switch (kind) {
    case ProfileKind::Constant:
      return CovarianceProfile::constant(mat("sigma"));
    case ProfileKind::Step:
      return CovarianceProfile::step(mat("high"), mat("low"),
                                     number(require(j, "threshold", where), "profile.threshold"));
    case ProfileKind::FRatio:
      return CovarianceProfile::f_ratio(scale_or_identity());
    case ProfileKind::PerturbedFRatio:
      return CovarianceProfile::perturbed_f_ratio(integer(require(j, "k", where), "profile.k"),
                                                  integer(require(j, "K", where), "profile.K"),
                                                  scale_or_identity());
    case ProfileKind::PiecewiseLinear: {
      const json& arr = require(j, "knots", where);
      if (!arr.is_array()) throw ConfigError("profile.knots: expected an array");
      std::vector<ProfileKnot> knots;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string kw = "profile.knots[" + std::to_string(i) + "]";
        knots.push_back({number(require(arr[i], "c", kw), kw + ".c"),
                         matrix_from_json(require(arr[i], "sigma", kw), dim, kw + ".sigma")});
      }
      return CovarianceProfile::piecewise_linear(std::move(knots));
    }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
  throw ConfigError("profile: unsupported kind");
}

json instance_to_json(const InstanceParams& p) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["name"] = p.name;
  out["theta_star"] = vector_to_json(p.theta_star);
  out["x_mean"] = vector_to_json(p.x_mean);
  out["x_cov"] = matrix_to_json(p.x_cov_centered);
  out["profile"] = profile_to_json(p.profile);
  out["lambda"] = p.lambda;
  out["S"] = p.S;
  if (p.R) out["R"] = *p.R;
  out["output_noise_var"] = p.output_noise_var;
  return out;
}

InstanceParams instance_params_from_json(const json& j) {
  const std::string where = "instance";
  if (!j.is_object()) throw ConfigError("instance: expected a JSON object");
  if (j.contains("schema_version") && j.at("schema_version") != kSchemaVersion) {
    throw ConfigError("instance: unsupported schema_version " + j.at("schema_version").dump());
  }
  InstanceParams p;
  if (j.contains("name")) p.name = j.at("name").get<std::string>();
  p.theta_star = vector_from_json(require(j, "theta_star", where), "theta_star");
  const int d = static_cast<int>(p.theta_star.size());
  p.x_mean = j.contains("x_mean") ? vector_from_json(j.at("x_mean"), "x_mean") : Vector::Zero(d);
  p.x_cov_centered = matrix_from_json(require(j, "x_cov", where), d, "x_cov");
  p.profile = profile_from_json(require(j, "profile", where), d);
  p.lambda = number(require(j, "lambda", where), "lambda");
  p.S = number(require(j, "S", where), "S");
  if (j.contains("R")) p.R = number(j.at("R"), "R");
  if (j.contains("output_noise_var")) {
    p.output_noise_var = number(j.at("output_noise_var"), "output_noise_var");
  }
  return p;
}

InstanceParams load_instance_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse instance file '" + path + "': " + e.what());
  }
  try {
    return instance_params_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("instance file '" + path + "': " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError("instance file '" + path + "': " + e.what());
  }
}

Instance load_instance(const std::string& path) { return Instance(load_instance_params(path)); }

json to_json(const PolicyConfig& c) {
  json out;
  out["variant"] = to_string(c.variant);
  out["T"] = c.horizon;
  out["K"] = c.grid;
  out["delta"] = c.delta;
  out["lambda"] = c.lambda;
  out["S"] = c.S;
  out["R"] = c.R;
  out["d"] = c.d;
  out["include_zero_arm"] = c.overrides.include_zero_arm;
  out["width_scale"] = c.overrides.width_scale;
  return out;
}

json to_json(const RunSummary& s) {
  json out;
  out["rounds"] = s.rounds;
  out["regret"] = s.regret;
  out["regret_per_round"] = s.rounds > 0 ? s.regret / static_cast<double>(s.rounds) : 0.0;
  out["total_expected_loss"] = s.total_expected_loss;
  out["total_realized_loss"] = s.total_realized_loss;
  out["best_loss"] = s.best_loss;
  out["oracle_slack"] = s.oracle_slack;
  out["late_modal_arm"] = s.late_modal_arm;
  out["late_modal_cost"] = s.late_modal_cost;
  return out;
}

json runlog_summary_json(const RunLog& log) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["instance"] = log.instance_name;
  out["seed"] = log.seed;
  out["config"] = to_json(log.config);
  out["summary"] = to_json(log.summary);
  out["error"] = log.error ? json(*log.error) : json(nullptr);
  return out;
}

json to_json(const RateFit& f) {
  json out;
  out["slope"] = f.slope;
  out["stderr"] = f.stderr_slope;
  out["intercept"] = f.intercept;
  out["points_used"] = f.points_used;
  out["warnings"] = f.warnings;
  return out;
}

json to_json(const SweepResult& r) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["variant"] = to_string(r.variant);
  out["instances"] = r.instance_names;
  out["horizons"] = r.horizons;
  out["seeds"] = r.seeds;
  json stats = json::array();
  for (const HorizonStats& s : r.stats) {
    stats.push_back({{"T", s.horizon}, {"mean", s.mean}, {"stderr", s.stderr_mean},
                     {"n_seeds", s.episodes}});
  }
  out["stats"] = stats;
  json episodes = json::array();
  for (const EpisodeOutcome& e : r.episodes) {
    json row{{"instance", r.instance_names[static_cast<std::size_t>(e.instance_index)]},
             {"T", e.horizon},
             {"seed", e.seed},
             {"regret", e.regret},
             {"late_modal_cost", e.late_modal_cost}};
    row["error"] = e.error ? json(*e.error) : json(nullptr);
    episodes.push_back(row);
  }
  out["episodes"] = episodes;
  out["failures"] = r.failures;
  out["fit"] = r.fit ? to_json(*r.fit) : json(nullptr);
  return out;
}

json to_json(const ViolationReport& r) {
  json out;
  out["kind"] = r.kind;
  out["trials"] = r.trials;
  out["delta"] = r.delta;
  out["nominal"] = r.nominal;
  out["checkpoints"] = r.checkpoints;
  out["violations"] = r.violations;
  out["max_ratio"] = r.max_ratio;
  out["any_violations"] = r.any_violations;
  out["frequency"] = r.frequency();
  out["binomial_stderr"] = r.binomial_stderr();
  out["within_contract"] = r.within_contract();
  return out;
}

json to_json(const LossUniformReport& r) {
  json out;
  out["combined"] = to_json(r.combined);
  out["kc"] = to_json(r.kc);
  out["uc"] = to_json(r.uc);
  out["K"] = r.grid;
  out["probes"] = r.probes;
  out["median_deviation"] = r.median_deviation();
  return out;
}

json to_json(const LossLandscape& l) {
  json out;
  out["instance"] = l.instance_name;
  out["M"] = l.grid;
  out["best_loss"] = l.best_loss;
  out["best_cost"] = l.best_cost;
  out["slack"] = l.slack();
  return out;
}

json to_json(const KnownCovState& s) {
  json out;
  out["t"] = s.t;
  out["a_acc"] = long_matrix(s.a_acc);
  out["b_acc"] = long_vector(s.b_acc);
  out["q_acc"] = static_cast<double>(s.q_acc);
  return out;
}

json to_json(const UnknownCovState& s) {
  json out;
  out["t"] = s.t();
  out["K"] = s.grid();
  json arms = json::array();
  for (int k = s.first_arm(); k <= s.last_arm(); ++k) {
    const ArmStats& a = s.arm(k);
    arms.push_back({{"k", k},
                    {"visits", a.visits},
                    {"a", long_matrix(a.a)},
                    {"b", long_vector(a.b)},
                    {"q", static_cast<double>(a.q)}});
  }
  out["arms"] = arms;
  return out;
}

PolicyConfig policy_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("policy config: expected an object");
  try {
    PolicyConfig c;
    c.variant = policy_variant_from_string(j.at("variant").get<std::string>());
    c.horizon = j.at("T").get<long>();
    c.grid = j.at("K").get<int>();
    c.delta = j.at("delta").get<double>();
    c.lambda = j.at("lambda").get<double>();
    c.S = j.at("S").get<double>();
    c.R = j.at("R").get<double>();
    c.d = j.at("d").get<int>();
    c.overrides.grid = c.grid;
    c.overrides.delta = c.delta;
    c.overrides.include_zero_arm = j.value("include_zero_arm", false);
    c.overrides.width_scale = j.value("width_scale", 1.0);
    if (c.grid < 1) throw ConfigError("policy config: K must be >= 1");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("policy config: delta must lie in (0, 1)");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("policy config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("policy config: ") + e.what());
  }
}

KnownCovState known_state_from_json(const json& j, int dim) {
  try {
    KnownCovState s(dim);
    s.t = j.at("t").get<long>();
    s.a_acc = long_matrix_from(j.at("a_acc"), dim, "a_acc");
    s.b_acc = long_vector_from(j.at("b_acc"), dim, "b_acc");
    s.q_acc = j.at("q_acc").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("known-covariance state: ") + e.what());
  }
}

UnknownCovState unknown_state_from_json(const json& j, int dim) {
  try {
    const json& arms = j.at("arms");
    if (!arms.is_array() || arms.empty()) throw ConfigError("unknown-covariance state: no arms");
    const bool zero = arms.front().at("k").get<int>() == 0;
    UnknownCovState s(dim, j.at("K").get<int>(), zero);
    if (static_cast<int>(arms.size()) != s.arm_count()) {
      throw ConfigError("unknown-covariance state: arm count does not match K");
    }
    long total = 0;
    for (const json& a : arms) {
      ArmStats& st = s.arm_mut(a.at("k").get<int>());
      st.visits = a.at("visits").get<long>();
      st.a = long_matrix_from(a.at("a"), dim, "a");
      st.b = long_vector_from(a.at("b"), dim, "b");
      st.q = a.at("q").get<double>();
      total += st.visits;
    }
    if (total != j.at("t").get<long>()) {
      throw ConfigError("unknown-covariance state: visits do not sum to t");
    }
    for (long i = 0; i < total; ++i) s.advance();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("unknown-covariance state: ") + e.what());
  }
}

} // namespace paidreg
