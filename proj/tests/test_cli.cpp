#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#ifndef MOCERT_CLI
#define MOCERT_CLI "mocert"
#endif

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(MOCERT_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli verify exit codes") {
  CHECK(run("--out /tmp/mocert_cli verify --thm 3 --alpha 1 --beta 0.5") == 0);
  CHECK(run("--out /tmp/mocert_cli verify --thm 3 --alpha 0.25 --beta 0.4") == 2);
  CHECK(slurp("/tmp/mocert_cli/verify_THM3.json").find("\"certified\": true") !=
        std::string::npos);
}

TEST_CASE("cli hyp1 regression") {
  CHECK(run("--out /tmp/mocert_cli verify --hyp1 --cd 0 --T 0.2") == 0);
}

TEST_CASE("cli simulate burgers and determinism of trace bytes") {
  CHECK(run("--out /tmp/mocert_cli_a --seed 7 simulate --eq burgers --nu 1 "
            "--ic sin --T 0.2 --N 64 --dt 1e-3") == 0);
  CHECK(run("--out /tmp/mocert_cli_b --seed 7 simulate --eq burgers --nu 1 "
            "--ic sin --T 0.2 --N 64 --dt 1e-3") == 0);
  CHECK(slurp("/tmp/mocert_cli_a/burgers_trace.csv") ==
        slurp("/tmp/mocert_cli_b/burgers_trace.csv"));
  CHECK(!slurp("/tmp/mocert_cli_a/burgers_manifest.json").empty());
}

TEST_CASE("cli fractal burgers flags blowup with an informative exit") {
  CHECK(run("--out /tmp/mocert_cli simulate --eq fractal-burgers --alpha 0.2 "
            "--nu 0 --N 128 --dt 2e-3 --T 3 --scan-every 0") == 3);
}

TEST_CASE("cli config file provides defaults, flags win") {
  std::ofstream("/tmp/mocert_cli_cfg.json")
      << R"({"verify": {"thm": "3", "alpha": 1.0, "beta": 0.5}})";
  CHECK(run("--config /tmp/mocert_cli_cfg.json --out /tmp/mocert_cli verify") == 0);
  // flag overrides the config beta into the infeasible region
  CHECK(run("--config /tmp/mocert_cli_cfg.json --out /tmp/mocert_cli verify "
            "--alpha 0.25 --beta 0.4") == 2);
}
