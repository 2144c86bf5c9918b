// Drives the installed command-line binary and checks outputs and
// exit codes: 0 ok, 2 config error, 3 protocol abort.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "encrand/harness.hpp"

namespace {

namespace fs = std::filesystem;

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  fs::path out_path = fs::temp_directory_path() / "encrand_cli_out.txt";
  std::string command = std::string(ENCRAND_CLI_PATH) + " " + args + " > " +
                        out_path.string() + " 2>&1";
  int status = std::system(command.c_str());
  CommandResult result;
  result.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  fs::remove(out_path);
  return result;
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc);
  out << text;
  return path;
}

const char* kGoodConfig =
    "n = 4\n"
    "m = 4\n"
    "packets_per_party = 4\n"
    "packet_size = 16\n"
    "aggregate = sum\n"
    "master_seed = 12345\n";

TEST(Cli, RunReportsResultAndDigest) {
  fs::path config = write_config("encrand_good.cfg", kGoodConfig);
  CommandResult r = run_cli("run --config " + config.string());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("aggregate (sum)"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("transcript digest:"), std::string::npos);
  fs::remove(config);
}

TEST(Cli, RunIsDeterministicPerSeed) {
  fs::path config = write_config("encrand_good.cfg", kGoodConfig);
  CommandResult a = run_cli("run --config " + config.string() + " --seed 99");
  CommandResult b = run_cli("run --config " + config.string() + " --seed 99");
  CommandResult c = run_cli("run --config " + config.string() + " --seed 100");
  EXPECT_EQ(a.output, b.output);
  EXPECT_NE(a.output, c.output);
  fs::remove(config);
}

TEST(Cli, TooFewPartiesExitsWithConfigError) {
  fs::path config = write_config("encrand_twoparty.cfg",
                                 "n = 2\nm = 1\npackets_per_party = 2\n"
                                 "packet_size = 16\nmaster_seed = 1\n");
  CommandResult r = run_cli("run --config " + config.string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("assumption 7"), std::string::npos) << r.output;
  fs::remove(config);
}

TEST(Cli, UnknownConfigKeyExitsWithConfigError) {
  fs::path config = write_config("encrand_badkey.cfg",
                                 std::string(kGoodConfig) + "mystery_knob = 3\n");
  CommandResult r = run_cli("run --config " + config.string());
  EXPECT_EQ(r.exit_code, 2);
  fs::remove(config);
}

TEST(Cli, MissingSubcommandIsUsageError) {
  CommandResult r = run_cli("");
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, VerifySessionsAgainstOracle) {
  fs::path config = write_config("encrand_good.cfg", kGoodConfig);
  CommandResult r = run_cli("verify --config " + config.string() + " --sessions 25");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("25/25 sessions matched"), std::string::npos) << r.output;
  fs::remove(config);
}

TEST(Cli, MonteCarloPrintsBothEstimates) {
  CommandResult r = run_cli("mc --n 4 --m 4 --r 1 --x 4 --trials 20000 --seed 7");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("analytic:  0.015625"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("empirical:"), std::string::npos);
}

TEST(Cli, CurveWritesParseableCsv) {
  fs::path out = fs::temp_directory_path() / "encrand_cli_curve.csv";
  CommandResult r = run_cli("curve --n-min 3 --n-max 50 --m 4 --x 4 --r 1 --out " +
                            out.string());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  auto points = encrand::parse_curve(out);
  ASSERT_EQ(points.size(), 48u);
  EXPECT_FALSE(points[0].empirical.has_value());
  EXPECT_EQ(points.back().analytic, 1e-4);
  fs::remove(out);
}

TEST(Cli, CurveWithTrialsFillsEmpiricalColumns) {
  fs::path out = fs::temp_directory_path() / "encrand_cli_curve_mc.csv";
  CommandResult r = run_cli("curve --n-min 3 --n-max 6 --m 4 --x 4 --r 1 --out " +
                            out.string() + " --trials 20000 --seed 5");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  auto points = encrand::parse_curve(out);
  ASSERT_EQ(points.size(), 4u);
  for (const auto& p : points) {
    ASSERT_TRUE(p.empirical.has_value());
    ASSERT_TRUE(p.ci_low.has_value());
    ASSERT_TRUE(p.ci_high.has_value());
    EXPECT_LE(*p.ci_low, *p.empirical);
    EXPECT_GE(*p.ci_high, *p.empirical);
  }
  fs::remove(out);
}

TEST(Cli, CurveBelowThreePartiesExitsWithConfigError) {
  CommandResult r = run_cli("curve --n-min 2 --n-max 10 --m 4 --x 4 --r 1 --out /tmp/x.csv");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("assumption 7"), std::string::npos) << r.output;
}

TEST(Cli, TraceEmitsOneJsonRecordPerLine) {
  fs::path config = write_config("encrand_good.cfg", kGoodConfig);
  fs::path out = fs::temp_directory_path() / "encrand_cli_trace.jsonl";
  CommandResult r = run_cli("trace --config " + config.string() + " --out " + out.string());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  std::ifstream in(out);
  std::string line;
  size_t lines = 0, phases = 0;
  while (std::getline(in, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("step"));
    EXPECT_TRUE(j.contains("actor"));
    EXPECT_TRUE(j.contains("payload_digest"));
    if (j["kind"] == "phase") ++phases;
    ++lines;
  }
  EXPECT_EQ(phases, 10u);
  EXPECT_EQ(lines, 10u + 4u);  // ten phases plus one per round (rounds = n)
  fs::remove(out);
  fs::remove(config);
}

TEST(Cli, TraceToUnwritablePathExitsWithAbort) {
  fs::path config = write_config("encrand_good.cfg", kGoodConfig);
  CommandResult r = run_cli("trace --config " + config.string() +
                            " --out /nonexistent-dir/trace.jsonl");
  EXPECT_EQ(r.exit_code, 3);
  fs::remove(config);
}

}  // namespace
