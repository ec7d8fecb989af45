#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>

#include "ddr/csv.hpp"
#include "test_support.hpp"

// Drives the installed binary end to end through popen; DDR_CLI_PATH is
// injected by the build.

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_command(const std::string& args) {
  const std::string cmd = std::string(DDR_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult result;
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe) != nullptr) result.output += buf.data();
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// Bundled toy pair: outcomes roughly linear in two covariates.
void write_toy_pair(const std::string& a_path, const std::string& b_path) {
  std::string a = "x1,x2,y\n";
  std::string b = "x1,x2,w\n";
  for (int i = 0; i < 40; ++i) {
    const double x1 = 0.1 * i;
    const double x2 = (i % 7) * 0.5;
    const double y = 1.0 + x1 + 0.5 * x2 + 0.01 * (i % 3);
    a += std::to_string(x1) + "," + std::to_string(x2) + "," + std::to_string(y) + "\n";
  }
  for (int i = 0; i < 60; ++i) {
    const double x1 = 0.07 * i;
    const double x2 = (i % 5) * 0.6;
    b += std::to_string(x1) + "," + std::to_string(x2) + ",25\n";
  }
  ddr::testing::write_text(a_path, a);
  ddr::testing::write_text(b_path, b);
}

}  // namespace

TEST_CASE("estimate subcommand prints six finite estimates for a toy pair") {
  ddr::testing::TempDir dir;
  write_toy_pair(dir.file("a.csv"), dir.file("b.csv"));
  const auto result = run_command("estimate --nonprob " + dir.file("a.csv") + " --prob " +
                                  dir.file("b.csv") +
                                  " --outcome y --weight w --arch 4 --seed 3");
  CHECK(result.exit_code == 0);
  for (const char* name : {"naive", "reg", "ipw", "dr", "dipw", "ddr"})
    CHECK(result.output.find(name) != std::string::npos);
  CHECK(result.output.find("nan") == std::string::npos);
  CHECK(result.output.find("inf") == std::string::npos);
}

TEST_CASE("estimate without --weight is a usage error") {
  ddr::testing::TempDir dir;
  write_toy_pair(dir.file("a.csv"), dir.file("b.csv"));
  const auto result = run_command("estimate --nonprob " + dir.file("a.csv") + " --prob " +
                                  dir.file("b.csv") + " --outcome y");
  CHECK(result.exit_code == 1);
}

TEST_CASE("estimate with a missing column is a data error") {
  ddr::testing::TempDir dir;
  write_toy_pair(dir.file("a.csv"), dir.file("b.csv"));
  const auto result = run_command("estimate --nonprob " + dir.file("a.csv") + " --prob " +
                                  dir.file("b.csv") + " --outcome nope --weight w");
  CHECK(result.exit_code == 2);
}

TEST_CASE("wide truncation keeps inverse weights within the implied band") {
  // eps = 0.4 bounds every score into [0.4, 0.6], so Hajek weights stay
  // within a factor 1.5 of each other even when the fitted scores saturate.
  ddr::testing::TempDir dir;
  write_toy_pair(dir.file("a.csv"), dir.file("b.csv"));
  const auto result = run_command("estimate --nonprob " + dir.file("a.csv") + " --prob " +
                                  dir.file("b.csv") +
                                  " --outcome y --weight w --eps 0.4 --arch 4 --seed 1");
  CHECK(result.exit_code == 0);
  // parse the dnn_pi_min / dnn_pi_max diagnostics out of the report
  auto grab = [&](const std::string& key) {
    const auto pos = result.output.find(key + " = ");
    REQUIRE(pos != std::string::npos);
    return std::stod(result.output.substr(pos + key.size() + 3));
  };
  CHECK(grab("dnn_pi_min") >= 0.4);
  CHECK(grab("dnn_pi_max") <= 0.6);
  CHECK(grab("param_pi_min") >= 0.4);
  CHECK(grab("param_pi_max") <= 0.6);
}

TEST_CASE("simulate smoke run completes and is reproducible") {
  ddr::testing::TempDir dir;
  const std::string flags = "simulate --B 2 --N 2000 --nA 80 --nB 150 --rho 0.5 --scenario TF "
                            "--seed 11 --arch 8 --max-epochs 40 --format csv --out ";
  const auto r1 = run_command(flags + dir.file("r1.csv"));
  CHECK(r1.exit_code == 0);
  const auto r2 = run_command(flags + dir.file("r2.csv"));
  CHECK(r2.exit_code == 0);
  CHECK(ddr::testing::read_text(dir.file("r1.csv")) ==
        ddr::testing::read_text(dir.file("r2.csv")));
  CHECK(!ddr::testing::read_text(dir.file("r1.csv")).empty());
}

TEST_CASE("simulate rejects an unknown scenario") {
  const auto result = run_command("simulate --scenario XX --B 1 --N 500 --nA 30 --nB 50");
  CHECK(result.exit_code == 1);
}
