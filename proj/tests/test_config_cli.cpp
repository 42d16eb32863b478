#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "uwb/cli.hpp"

using namespace uwb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("uwbinv_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "uwbinv");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config JSON round trip and hash") {
  const ExperimentConfig c = fixture::desk_config(32);
  const nlohmann::json j = to_json(c);
  const ExperimentConfig d = parse_config(j);
  CHECK(config_hash(c) == config_hash(d));
  CHECK(config_hash(c).size() == 16);
  ExperimentConfig w = c;
  w.pipeline.workers = 4;
  CHECK(config_hash(w) == config_hash(c));
  w.pipeline.seed = 99;
  CHECK(config_hash(w) != config_hash(c));
}

TEST_CASE("config validation") {
  const nlohmann::json good = to_json(fixture::desk_config(32));
  nlohmann::json j = good;
  j["grid"]["nfreq"] = 12;
  CHECK_THROWS(parse_config(j));
  j = good;
  j["bounds"]["eps"] = {50.0, 2.0};
  CHECK_THROWS(parse_config(j));
  j = good;
  j["pulse"]["basis_size"] = 30;
  CHECK_THROWS(parse_config(j));
  j = good;
  j["schema_version"] = 2;
  CHECK_THROWS(parse_config(j));
  j = good;
  j["tempering"]["init"] = "linear";
  CHECK_THROWS(parse_config(j));
  j = good;
  j["measurement"]["snr_db"] = "inf";
  CHECK(std::isinf(parse_config(j).snr_db));
  j = good;
  j["profile"]["preset"] = "no_such_tissue";
  CHECK_THROWS(build_experiment(parse_config(j)));
}

TEST_CASE("shipped configurations load") {
  for (const char* name : {"lung_reference.json", "desk.json"}) {
    const ExperimentConfig c = load_config(fs::path(UWBINV_CONFIG_DIR) / name);
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("inflated and deflated presets differ only in the deepest layer") {
  ExperimentConfig c = fixture::desk_config(32);
  c.pipeline.stage2_length = 200;
  c.preset = "lung_deflated";
  const Eigen::VectorXd a = build_experiment(c).truth.theta();
  c.preset = "lung_inflated";
  const Eigen::VectorXd b = build_experiment(c).truth.theta();
  REQUIRE(a.size() == 15);
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (k == 4 || k == 9)
      CHECK(a[k] != b[k]);
    else
      CHECK(a[k] == b[k]);
  }
}

TEST_CASE("noise-free simulation equals the model signal") {
  const Experiment e = build_experiment(fixture::desk_config(32));
  const Measurement m = e.simulate(std::numeric_limits<double>::infinity(), 3);
  const PosteriorModel model = e.model(m);
  Eigen::VectorXcd x;
  model.forward().evaluate(e.truth.theta(), x);
  const Eigen::VectorXcd s = x.cwiseProduct(model.pulse_map() * e.gamma_true.cast<Complex>());
  CHECK((m.y - s).norm() <= 1e-14 * s.norm());
  CHECK(e.noise_variance(std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("simulate is reproducible and its measurement reads back") {
  const ExperimentConfig c = fixture::desk_config(32);
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  REQUIRE(cmd_simulate(c, a) == kExitOk);
  REQUIRE(cmd_simulate(c, b) == kExitOk);
  for (const char* f : {"measurement.csv", "truth.json", "basis.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  CHECK(slurp(a / "measurement.csv").rfind("# config_hash=" + config_hash(c), 0) == 0);

  const Experiment e = build_experiment(c);
  const Measurement m = read_measurement(a / "measurement.csv", e.grid);
  CHECK((m.y - e.simulate(c.snr_db, c.measurement_seed).y).norm() == 0.0);

  const Experiment wide = build_experiment(fixture::desk_config(48));
  CHECK_THROWS(read_measurement(a / "measurement.csv", wide.grid));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("command-line usage errors") {
  CHECK(cli({}) == kExitUsage);
  CHECK(cli({"frobnicate"}) == kExitUsage);
  CHECK(cli({"sample", "-c", "/nonexistent/config.json", "-m", "x.csv"}) == kExitUsage);
  CHECK(cli({"--help"}) == kExitOk);
}

TEST_CASE("crlb command writes a monotone sweep") {
  ExperimentConfig c = fixture::desk_config(32);
  c.crlb_snr_db = {10, 30, 50};
  const fs::path out = scratch("crlb");
  REQUIRE(cmd_crlb(c, out) == kExitOk);
  std::ifstream is(out / "crlb.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("# config_hash=", 0) == 0);
  std::getline(is, line);
  CHECK(line == "snr_db,parameter,true_value,variance,nrmse_bound,flagged");
  std::map<std::string, std::vector<double>> var;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string snr, name, truth, v;
    std::getline(ss, snr, ',');
    std::getline(ss, name, ',');
    std::getline(ss, truth, ',');
    std::getline(ss, v, ',');
    var[name].push_back(std::stod(v));
  }
  CHECK(var.size() == 6 + 8);
  for (const auto& [name, v] : var) {
    REQUIRE(v.size() == 3);
    CHECK(v[1] < v[0]);
    CHECK(v[2] < v[1]);
  }
  fs::remove_all(out);
}
