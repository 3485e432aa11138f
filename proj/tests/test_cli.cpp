#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include "waveqed/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using waveqed::file_digest_hex;

namespace {

const char* cli_path() { return WAVEQED_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Csv parse_csv(const fs::path& p) {
  Csv out;
  std::ifstream in(p);
  REQUIRE(in);
  std::string line;
  REQUIRE(std::getline(in, line));
  std::stringstream hs(line);
  std::string tok;
  while (std::getline(hs, tok, ',')) out.header.push_back(tok);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
    out.rows.push_back(std::move(row));
  }
  return out;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "waveqed_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("cli theory emits the documented table") {
  const fs::path dir = fresh_dir("theory");
  REQUIRE(run_cli("theory --n 1000 --tmax-tau 40 --points 2000 --out-dir " +
                  dir.string()) == 0);
  const Csv csv = parse_csv(dir / "theory.csv");
  REQUIRE(csv.header ==
          std::vector<std::string>{"s", "chi", "chi_squared", "p_analytic"});
  REQUIRE(csv.rows.size() == 2000);
  CHECK(csv.rows[0][0] == 0.0);
  CHECK(std::abs(csv.rows[0][1] - 1.0) < 1e-8); // chi at s = 0
  CHECK(std::abs(csv.rows[0][3] - 1.0) < 1e-8); // survival starts at 1

  const json man = json::parse(slurp(dir / "theory_manifest.json"));
  CHECK(man["outputs"].size() == 1);
  CHECK(man["outputs"][0]["rows"] == 2000);
  CHECK(man["outputs"][0]["digest"] == file_digest_hex(dir / "theory.csv"));
  CHECK(man.contains("conventions"));
}

TEST_CASE("cli theory reaches saturation at long times") {
  const fs::path dir = fresh_dir("theory_sat");
  // tau_dp = 10 tau at N = 100, so s = 600 is deep in the saturated regime
  REQUIRE(run_cli("theory --n 100 --tmax-tau 600 --points 500 --out-dir " +
                  dir.string()) == 0);
  const Csv csv = parse_csv(dir / "theory.csv");
  for (std::size_t r = csv.rows.size() - 5; r < csv.rows.size(); ++r)
    CHECK(std::abs(csv.rows[r][3] - 1.0 / 6.0) < 1e-3);
}

TEST_CASE("cli ensemble is reproducible byte for byte") {
  const fs::path d1 = fresh_dir("ens1");
  const fs::path d2 = fresh_dir("ens2");
  const std::string common =
      "ensemble --n 30 --size-k 80 --realizations 48 --tmax-tau 10 "
      "--points 80 --seed 99";
  REQUIRE(run_cli(common + " --threads 1 --out-dir " + d1.string()) == 0);
  REQUIRE(run_cli(common + " --threads 4 --out-dir " + d2.string()) == 0);
  CHECK(slurp(d1 / "ensemble_curve.csv") == slurp(d2 / "ensemble_curve.csv"));

  const Csv csv = parse_csv(d1 / "ensemble_curve.csv");
  REQUIRE(csv.header == std::vector<std::string>{"t", "t_over_tau", "p_mean",
                                                 "p_stderr"});
  REQUIRE(csv.rows.size() == 80);
  CHECK(csv.rows[0][2] == Catch::Approx(1.0).margin(1e-12));

  const json man = json::parse(slurp(d1 / "ensemble_manifest.json"));
  CHECK(man["config"]["master_seed"] == 99);
  CHECK(man["realizations_done"] == 48);
  CHECK(man["outputs"][0]["digest"] ==
        file_digest_hex(d1 / "ensemble_curve.csv"));
}

TEST_CASE("cli ensemble accepts a config file with flag overrides") {
  const fs::path dir = fresh_dir("ens_cfg");
  const fs::path cfg = dir / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "# tiny smoke configuration\n"
           "profile.kind = gaussian\n"
           "profile.size_k = 70\n"
           "mean_n = 25\n"
           "atom_number_mode = fixed\n"
           "realizations = 32\n"
           "time.tmax_tau = 8\n"
           "time.points = 50\n"
           "master_seed = 5\n"
           "which = Hs\n"
           "alphas = 1,3\n";
  }
  REQUIRE(run_cli("ensemble --config " + cfg.string() + " --realizations 40 " +
                  "--out-dir " + dir.string()) == 0);
  const json man = json::parse(slurp(dir / "ensemble_manifest.json"));
  CHECK(man["config"]["realizations"] == 40); // flag wins
  CHECK(man["config"]["mean_n"] == 25.0);
}

TEST_CASE("cli rejects unknown config keys without partial output") {
  const fs::path dir = fresh_dir("ens_bad");
  const fs::path cfg = dir / "bad.cfg";
  {
    std::ofstream out(cfg);
    out << "mean_n = 25\nrealisations = 10\n"; // misspelled key
  }
  CHECK(run_cli("ensemble --config " + cfg.string() + " --out-dir " +
                dir.string()) != 0);
  CHECK_FALSE(fs::exists(dir / "ensemble_curve.csv"));
  CHECK_FALSE(fs::exists(dir / "ensemble_manifest.json"));
}

TEST_CASE("cli rejects invalid values") {
  const fs::path dir = fresh_dir("ens_bad2");
  CHECK(run_cli("ensemble --n 0.2 --out-dir " + dir.string()) != 0);
  CHECK(run_cli("ensemble --which Hx --realizations 5 --out-dir " +
                dir.string()) != 0);
  CHECK(run_cli("nonsense") != 0);
  CHECK_FALSE(fs::exists(dir / "ensemble_curve.csv"));
}

TEST_CASE("cli reproduce presets fill defaults but accept overrides") {
  const fs::path dir = fresh_dir("fig2");
  REQUIRE(run_cli("ensemble --reproduce fig2 --n 25 --realizations 30 "
                  "--tmax-tau 12 --points 90 --seed 3 --out-dir " +
                  dir.string()) == 0);
  const json man = json::parse(slurp(dir / "ensemble_manifest.json"));
  CHECK(man["command"] == "ensemble --reproduce fig2");
  CHECK(man["config"]["mean_n"] == 25.0);
  CHECK(man["config"]["profile.size_k"] == 100.0); // preset default
  CHECK(man.contains("analytic_max_abs_dev"));
  CHECK(man.contains("revival_peaks"));
  CHECK(run_cli("ensemble --reproduce fig9 --out-dir " + dir.string()) != 0);
}

TEST_CASE("cli stats writes samples, histogram, and KS summary") {
  const fs::path dir = fresh_dir("stats");
  REQUIRE(run_cli("stats --n 50 --size-k 100 --realizations 300 --seed 8 "
                  "--alphas 1 --out-dir " +
                  dir.string()) == 0);
  const Csv samples = parse_csv(dir / "w_samples.csv");
  REQUIRE(samples.header ==
          std::vector<std::string>{"realization", "alpha", "w_abs2"});
  CHECK(samples.rows.size() == 300);
  const Csv hist = parse_csv(dir / "w_histogram.csv");
  CHECK(hist.rows.size() == 50);
  const json ks = json::parse(slurp(dir / "ks_summary.json"));
  REQUIRE(ks.is_array());
  CHECK(ks[0]["alpha"] == 1);
  CHECK(ks[0].contains("ks_distance"));
  CHECK(ks[0]["hypothesis_mean"] == Catch::Approx(0.02));
}

TEST_CASE("cli stats sweep table") {
  const fs::path dir = fresh_dir("sweep");
  REQUIRE(run_cli("stats --n 50 --realizations 100 --seed 4 "
                  "--sweep delta_gauss --sweep-sizes 25,50,100 --sweep-n 800 "
                  "--sweep-realizations 64 --out-dir " +
                  dir.string()) == 0);
  const Csv table = parse_csv(dir / "sweep_table.csv");
  REQUIRE(table.rows.size() == 3);
  const json man = json::parse(slurp(dir / "stats_manifest.json"));
  CHECK(man["sweep_fit"]["kind"] == "delta_gauss");
  CHECK(man["sweep_fit"].contains("c0"));
  // empty sweep list is a usage error
  CHECK(run_cli("stats --n 50 --realizations 100 --sweep delta_gauss "
                "--out-dir " + dir.string()) != 0);
}

TEST_CASE("cli rates") {
  const fs::path dir = fresh_dir("rates");
  REQUIRE(run_cli("rates --n 20 --size-k 100 --realizations 50 --seed 2 "
                  "--out-dir " + dir.string()) == 0);
  const Csv csv = parse_csv(dir / "rates.csv");
  REQUIRE(csv.header == std::vector<std::string>{"realization", "n_atoms",
                                                 "gamma_forward",
                                                 "gamma_backward"});
  REQUIRE(csv.rows.size() == 50);
  for (const auto& row : csv.rows)
    CHECK(row[2] == Catch::Approx(20.0).epsilon(1e-12)); // Gamma_F = N gamma

  const fs::path dir1 = fresh_dir("rates1");
  REQUIRE(run_cli("rates --n 1 --realizations 20 --out-dir " + dir1.string()) ==
          0);
  const Csv one = parse_csv(dir1 / "rates.csv");
  for (const auto& row : one.rows) {
    CHECK(row[2] == Catch::Approx(1.0).margin(1e-12));
    CHECK(row[3] == Catch::Approx(1.0).margin(1e-12));
  }
}
