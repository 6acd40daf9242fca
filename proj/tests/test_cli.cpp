#include "paidreg/io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using paidreg::json;
using testsupport::source_path;

namespace {

struct Result {
  int status = -1;
  std::string output;
};

Result cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(PAIDREG_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("paidreg_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string golden(const std::string& name) { return first_line(source_path("tests/golden/" + name)); }

std::string key_line(const json& j) {
  std::string out;
  for (auto it = j.begin(); it != j.end(); ++it) out += (out.empty() ? "" : ",") + it.key();
  return out;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

std::vector<double> csv_row(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  return v;
}

} // namespace

TEST_CASE("run writes a log with one row per round") {
  const fs::path out = scratch("run");
  const std::string flat = source_path("instances/flat.json");
  const Result r = cli("run --instance " + flat + " --policy known --T 1024 --seed 7 --out " + out.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const fs::path csv = out / "run_flat_known_T1024_seed7.csv";
  const fs::path js = out / "run_flat_known_T1024_seed7.json";
  REQUIRE(fs::exists(csv));
  CHECK(lines(csv).size() == 1025);
  CHECK(first_line(csv) == golden("run_csv_header.txt"));
  const json j = read_json(js);
  CHECK(key_line(j) == golden("run_json_keys.txt"));
  CHECK(j["summary"]["rounds"] == 1024);
  CHECK(r.output.find("regret") != std::string::npos);

  const std::string before = read_file(csv);
  REQUIRE(cli("run --instance " + flat + " --policy known --T 1024 --seed 7 --out " + out.string()).status == 0);
  CHECK(read_file(csv) == before);
}

TEST_CASE("run with the unknown-covariance policy starts with zero predictors") {
  const fs::path out = scratch("run_unknown");
  const Result r = cli("run --instance " + source_path("instances/benign_2d.json") +
                       " --policy unknown --T 200 --seed 3 --out " + out.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const json j = read_json(out / "run_benign_2d_unknown_T200_seed3.json");
  const int K = j["config"]["K"].get<int>();
  REQUIRE(K >= 1);
  const std::vector<std::string> rows = lines(out / "run_benign_2d_unknown_T200_seed3.csv");
  for (int t = 1; t <= K; ++t) {
    const std::vector<double> v = csv_row(rows[static_cast<std::size_t>(t)]);
    CHECK(v[1] == t);
    CHECK(v[6] == 0.0);
    CHECK(v[7] == 0.0);
  }
}

TEST_CASE("run reports missing instances with exit code 2") {
  const Result r = cli("run --instance /no/such/instance.json --T 10");
  CHECK(r.status == 2);
  CHECK(r.output.find("/no/such/instance.json") != std::string::npos);
  CHECK(cli("run --instance " + source_path("instances/flat.json") + " --policy psychic").status == 2);
  CHECK(cli("frobnicate").status == 2);
}

TEST_CASE("config file values yield to flags") {
  const fs::path out = scratch("config");
  const fs::path cfg = out / "cfg.json";
  json c;
  c["schema_version"] = 1;
  c["instance"] = source_path("instances/flat.json");
  c["policy"] = "unknown";
  c["T"] = 50;
  c["seed"] = 4;
  c["out"] = out.string();
  std::ofstream(cfg) << c.dump();
  Result r = cli("run --config " + cfg.string() + " --T 60");
  REQUIRE_MESSAGE(r.status == 0, r.output);
  CHECK(fs::exists(out / "run_flat_unknown_T60_seed4.csv"));

  c["instance"] = paidreg::instance_to_json(testsupport::benign_2d_params());
  std::ofstream(cfg) << c.dump();
  r = cli("run --config " + cfg.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  CHECK(fs::exists(out / "run_benign_2d_unknown_T50_seed4.csv"));

  c["schema_version"] = 7;
  std::ofstream(cfg) << c.dump();
  CHECK(cli("run --config " + cfg.string()).status == 2);
}

TEST_CASE("output directory defaults to the environment variable") {
  const fs::path out = scratch("env");
  const Result r = cli("run --instance " + source_path("instances/flat.json") + " --T 8 --seed 1",
                       "PAIDREG_OUT_DIR=" + out.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  CHECK(fs::exists(out / "run_flat_known_T8_seed1.csv"));
}

TEST_CASE("sweep with a rate fit") {
  const fs::path out = scratch("sweep");
  const std::string inst = source_path("instances/benign_2d.json");
  const Result one = cli("sweep --instance " + inst + " --horizons 64 --seeds 2 --fit --out " + out.string());
  CHECK(one.status == 2);
  CHECK(one.output.find("rate fit requires ≥ 3 horizons") != std::string::npos);

  const Result r = cli("sweep --instance " + inst + " --policy unknown --pow2 6,8 --seeds 3 --fit --oracle-grid 1000 --out " +
                       out.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  CHECK(first_line(out / "sweep_unknown_benign_2d.csv") == golden("sweep_csv_header.txt"));
  CHECK(lines(out / "sweep_unknown_benign_2d.csv").size() == 4);
  const json j = read_json(out / "sweep_unknown_benign_2d.json");
  CHECK(key_line(j) == golden("sweep_json_keys.txt"));
  CHECK(j["fit"]["slope"].is_number());
  CHECK(j["fit"]["stderr"].is_number());
  CHECK(j["episodes"].size() == 9);

  CHECK(cli("sweep --instance " + inst + " --horizons 64 --seed-list 1,1").status == 2);
}

TEST_CASE("validate") {
  Result r = cli("validate " + source_path("instances/flat.json"));
  CHECK(r.status == 0);
  CHECK(r.output.find("FAIL") == std::string::npos);
  CHECK(r.output.find("PASS profile_psd_monotone") != std::string::npos);

  r = cli("validate " + source_path("instances/dip_k2_of_4.json"));
  CHECK(r.status == 0);
  CHECK(r.output.find("PASS kl_interval") != std::string::npos);

  const fs::path out = scratch("validate");
  json j = paidreg::instance_to_json(testsupport::benign_2d_params());
  j["theta_star"] = json::array({2.5, 0.0});
  std::ofstream(out / "big.json") << j.dump();
  r = cli("validate " + (out / "big.json").string());
  CHECK(r.status == 2);
  CHECK(r.output.find("FAIL theta_norm") != std::string::npos);

  j = paidreg::instance_to_json(testsupport::benign_2d_params());
  j["profile"] = json{{"kind", "Step"}, {"high", 0.0}, {"low", 1.0}, {"threshold", 0.5}};
  std::ofstream(out / "reversed.json") << j.dump();
  r = cli("validate " + (out / "reversed.json").string());
  CHECK(r.status == 2);
  CHECK(r.output.find("FAIL profile_psd_monotone") != std::string::npos);
}

TEST_CASE("concentration") {
  const fs::path out = scratch("conc");
  Result r = cli("concentration --trials 10 --out " + out.string());
  CHECK(r.status == 2);
  CHECK(r.output.find("below minimum trials") != std::string::npos);

  r = cli("concentration --which matrix --d 3 --delta 0.07 --trials 100 --t-max 256 --out " + out.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const json j = read_json(out / "concentration.json");
  CHECK(j["matrix"]["nominal"] == 0.07);
  CHECK(j["matrix"]["d"] == 3);
  CHECK(key_line(j["matrix"]) == golden("concentration_matrix_json_keys.txt"));
  CHECK_FALSE(j.contains("loss"));

  r = cli("concentration --which loss --trials 100 --t-max-loss 128 --probes 10 --out " + out.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  CHECK(read_json(out / "concentration.json")["loss"]["combined"]["nominal"].get<double>() ==
        doctest::Approx(0.15));
}

TEST_CASE("lower-bound suites") {
  const Result bad = cli("lower-bound known --eps 0.9");
  CHECK(bad.status == 2);
  CHECK(bad.output.find("ε must lie in (0, 1/2]") != std::string::npos);

  const fs::path out = scratch("lb");
  const Result r = cli("lower-bound unknown --K 2 --T 400 --seeds 2 --out " + out.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const json j = read_json(out / "lower_bound_unknown.json");
  CHECK(key_line(j) == golden("lower_bound_json_keys.txt"));
  REQUIRE(j["instances"].size() == 3);
  CHECK(key_line(j["instances"][0]) == golden("lower_bound_row_keys.txt"));
  CHECK(j["instances"][1]["target_lo"] == 0.5);
  CHECK(j["instances"][1]["target_hi"] == 0.625);
}

TEST_CASE("landscape") {
  const fs::path out = scratch("land");
  const Result r = cli("landscape --instance " + source_path("instances/flat.json") + " --M 100 --out " + out.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const fs::path csv = out / "landscape_flat.csv";
  CHECK(first_line(csv) == golden("landscape_csv_header.txt"));
  CHECK(lines(csv).size() == 102);
}
