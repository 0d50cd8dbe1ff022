#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(OKL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  fs::create_directories(dir);
  const auto p = dir / "exp.cfg";
  std::ofstream out(p);
  out << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallRun = R"([model]
decay = power
b = 0.25
n = 8
kappa_sq = 0.9
r = 1.0
noise = 0.3

[schedule]
eta1 = 0.5
theta = auto

[run]
T = 128
seeds = 3

[capacity]
beta = 0.3
)";

}  // namespace

TEST_CASE("cli run writes outputs and is deterministic", "[cli]") {
  const auto dir = fs::temp_directory_path() / "okl_cli_run";
  fs::remove_all(dir);
  const auto cfg = write_config(dir, kSmallRun);
  const auto out1 = dir / "out1";
  const auto out2 = dir / "out2";

  REQUIRE(run_cli("run --config " + cfg.string() + " --out " + out1.string()) == 0);
  REQUIRE(fs::exists(out1 / "errors.csv"));
  REQUIRE(fs::exists(out1 / "fit.csv"));
  REQUIRE(fs::exists(out1 / "errors.svg"));

  REQUIRE(run_cli("run --config " + cfg.string() + " --out " + out2.string()) == 0);
  CHECK(slurp(out1 / "errors.csv") == slurp(out2 / "errors.csv"));
  CHECK(slurp(out1 / "fit.csv") == slurp(out2 / "fit.csv"));
}

TEST_CASE("cli usage and config errors exit with 2", "[cli]") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("run") == 2);
  CHECK(run_cli("run --config /nonexistent/path.cfg") == 2);
  CHECK(run_cli("frobnicate") == 2);

  const auto dir = fs::temp_directory_path() / "okl_cli_bad";
  fs::remove_all(dir);
  const auto bad = write_config(dir, "[model]\nunknown_key = 1\n");
  CHECK(run_cli("run --config " + bad.string()) == 2);
}

TEST_CASE("cli verify-bounds passes on a small model", "[cli]") {
  const auto dir = fs::temp_directory_path() / "okl_cli_verify";
  fs::remove_all(dir);
  const auto cfg = write_config(dir, kSmallRun);
  CHECK(run_cli("verify-bounds --config " + cfg.string()) == 0);
}

TEST_CASE("cli oracle-check passes with reduced settings", "[cli]") {
  CHECK(run_cli("oracle-check --steps 200 --rank 8 --trials 2 --probes 20") == 0);
}

TEST_CASE("cli sweep writes a summary", "[cli]") {
  const auto dir = fs::temp_directory_path() / "okl_cli_sweep";
  fs::remove_all(dir);
  const std::string body = std::string(kSmallRun) +
                           "\n[sweep]\nr = 0.6, 1.0\nbeta = 0.3\n";
  const auto cfg = write_config(dir, body);
  const auto out = dir / "sw";
  REQUIRE(run_cli("sweep --config " + cfg.string() + " --out " + out.string()) == 0);
  const auto summary = slurp(out / "sweep.csv");
  CHECK(summary.rfind("r,beta,theta,norm,slope,theory_exponent,final_mean,bound_pass\n", 0) ==
        0);
  CHECK(summary.find("0.6,0.3") != std::string::npos);
  CHECK((fs::exists(out / "r0.6_beta0.3_theta0.545455" / "errors.csv") || !fs::is_empty(out)));
}
