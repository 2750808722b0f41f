#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>

#include "thinfilm/common.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string out_file = "cli_stdout.txt", err_file = "cli_stderr.txt";
  const std::string cmd = env + " " + std::string(THINFILM_CLI_PATH) + " " + args + " >" + out_file +
                          " 2>" + err_file;
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  std::remove(out_file.c_str());
  std::remove(err_file.c_str());
  return r;
}

std::string slurp_file(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli help exits zero everywhere") {
  CHECK(run_cli("--help").exit_code == 0);
  for (const char* sub : {"energy", "sweep", "check"}) {
    const RunResult r = run_cli(std::string(sub) + " --help");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("--") != std::string::npos);
  }
}

TEST_CASE("cli energy") {
  SUBCASE("constant field evaluates to zero") {
    const RunResult r = run_cli("energy --fn const:1 --d 2 --omega 0,1 --eps 0.1 --s 0.8 --n 20000");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("value").get<double>() == 0.0);
    CHECK(j.at("std_error").get<double>() == 0.0);
  }
  SUBCASE("mc and dense agree") {
    const RunResult mc =
        run_cli("energy --fn x1 --d 2 --omega 0,1 --eps 0.1 --s 0.8 --n 400000 --seed 5");
    const RunResult de =
        run_cli("energy --fn x1 --d 2 --omega 0,1 --eps 0.1 --s 0.8 --method dense --grid 48");
    REQUIRE(mc.exit_code == 0);
    REQUIRE(de.exit_code == 0);
    const auto jm = nlohmann::json::parse(mc.out);
    const auto jd = nlohmann::json::parse(de.out);
    const double diff = std::abs(jm.at("value").get<double>() - jd.at("value").get<double>());
    const double comb = std::hypot(jm.at("std_error").get<double>(), jd.at("std_error").get<double>());
    CHECK(diff <= 3.0 * comb + 3e-3 * jd.at("value").get<double>());
    CHECK(jd.at("seed").is_null());
  }
  SUBCASE("invalid s exits 2 with a message") {
    const RunResult r = run_cli("energy --fn x1 --d 2 --omega 0,1 --eps 0.1 --s 1.2");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("s must lie in (0,1)") != std::string::npos);
  }
}

TEST_CASE("cli sweep") {
  const std::string cfg_path = "cli_sweep_cfg.json";
  {
    std::ofstream out(cfg_path);
    out << R"({
      "schema_version": 1,
      "function": "x1",
      "domain": {"d": 2, "omega_lo": [0], "omega_hi": [1]},
      "path": {"kind": "power_law", "beta": 0.5, "eps_list": [0.2, 0.1, 0.05]},
      "scaling": "native",
      "sampler": {"r": 0.25, "n_near": 50000, "n_far": 50000},
      "seed": 11,
      "output": {"ndjson": "cli_out.ndjson", "csv": "cli_out.csv", "svg": "cli_out.svg"}
    })";
  }
  SUBCASE("writes all outputs and ratios settle near one") {
    const RunResult r = run_cli("sweep " + cfg_path);
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp_file("cli_out.csv");
    CHECK(csv.rfind("eps,s,scaled_value,std_error,predicted,ratio", 0) == 0);
    // last line ratio close to 1 (within the known finite-eps overshoot)
    std::size_t pos = csv.find_last_of('\n', csv.size() - 2);
    const std::string last = csv.substr(pos + 1);
    const double ratio = std::stod(last.substr(last.find_last_of(',') + 1));
    CHECK(ratio > 0.8);
    CHECK(ratio < 1.4);
    const std::string svg = slurp_file("cli_out.svg");
    CHECK(svg.find("<svg") == 0);
    std::remove("cli_out.ndjson");
    std::remove("cli_out.csv");
    std::remove("cli_out.svg");
  }
  SUBCASE("byte-identical outputs across thread caps") {
    REQUIRE(run_cli("sweep " + cfg_path, "THINFILM_THREADS=1").exit_code == 0);
    const std::string nd1 = slurp_file("cli_out.ndjson");
    REQUIRE(run_cli("sweep " + cfg_path, "THINFILM_THREADS=8").exit_code == 0);
    const std::string nd8 = slurp_file("cli_out.ndjson");
    CHECK(nd1 == nd8);
    CHECK(!nd1.empty());
    std::remove("cli_out.ndjson");
    std::remove("cli_out.csv");
    std::remove("cli_out.svg");
  }
  SUBCASE("missing config exits 2") {
    CHECK(run_cli("sweep does_not_exist.json").exit_code == 2);
  }
  SUBCASE("estimator failure yields partial results and exit 4") {
    const std::string bad_cfg = "cli_partial_cfg.json";
    {
      std::ofstream out(bad_cfg);
      out << R"json({
        "schema_version": 1,
        "function": "exp(exp(exp(9*x1)))",
        "domain": {"d": 2, "omega_lo": [0], "omega_hi": [1]},
        "path": {"kind": "fixed_s", "s": 0.8, "eps_list": [0.2, 0.1, 0.05]},
        "scaling": "native",
        "sampler": {"r": 0.25, "n_near": 5000, "n_far": 5000},
        "seed": 13,
        "output": {"ndjson": "cli_partial.ndjson"}
      })json";
    }
    const RunResult r = run_cli("sweep " + bad_cfg);
    CHECK(r.exit_code == 4);
    CHECK(r.err.find("partial results") != std::string::npos);
    std::remove("cli_partial.ndjson");
    std::remove(bad_cfg.c_str());
  }
  std::remove(cfg_path.c_str());
}

TEST_CASE("cli check") {
  SUBCASE("constant diagnostic suite") {
    const RunResult r = run_cli("check --suite constant");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("non-constant") != std::string::npos);
  }
  SUBCASE("bad sigma exits 2") {
    const RunResult r = run_cli("check --suite prop4 --sigma 0.6");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("sigma must lie in (0, 1/2)") != std::string::npos);
  }
  SUBCASE("lemma1 suite passes at one s") {
    const RunResult r = run_cli("check --suite lemma1 --s 0.8 --n 80000 --n-mu 6");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
  }
  SUBCASE("unknown suite exits 2") {
    CHECK(run_cli("check --suite nope").exit_code == 2);
  }
}

TEST_CASE("membrane config prediction value") {
  const std::string cfg_path = "cli_membrane_cfg.json";
  {
    std::ofstream out(cfg_path);
    out << R"({
      "schema_version": 1,
      "function": "x1",
      "domain": {"d": 2, "omega_lo": [0], "omega_hi": [1]},
      "path": {"kind": "log_critical", "kappa": 0.5, "eps_list": [0.1, 0.05]},
      "scaling": "membrane",
      "sampler": {"r": 0.25, "n_near": 30000, "n_far": 30000},
      "seed": 12,
      "output": {"csv": "cli_mem.csv"}
    })";
  }
  const RunResult r = run_cli("sweep " + cfg_path);
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp_file("cli_mem.csv");
  // predicted column = 0.25 * pi/2
  CHECK(csv.find("0.39269908169872414") != std::string::npos);
  std::remove("cli_mem.csv");
  std::remove(cfg_path.c_str());
}
