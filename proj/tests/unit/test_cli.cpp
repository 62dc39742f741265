#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli_app.hpp"

using namespace nbstein;
using namespace nbstein::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nbstein");
  std::ostringstream out, err;
  const int code = main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data_file(const char* name) { return std::string(NBSTEIN_TEST_DATA_DIR) + "/" + name; }

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << contents;
  return p;
}

const char* kSinusoid =
    R"({"rate": {"kind": "sinusoid", "abar": 2.0, "amp": 0.5, "period": 1.0}, "b": 0.5, "T": 4.0})";

}  // namespace

TEST(ParseArgs, BoundsCommand) {
  const Command c = parse_args({"nbstein", "bounds", "--r", "1", "--p", "0.5"});
  EXPECT_EQ(c.name, "bounds");
  EXPECT_EQ(c.args.r, 1.0);
  EXPECT_EQ(c.args.p, 0.5);
}

TEST(ParseArgs, RangeViolationNamesTheRange) {
  const Result r = run_cli({"bounds", "--p", "1.5"});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_NE(r.err.find("0 < p < 1"), std::string::npos) << r.err;
  EXPECT_EQ(run_cli({"bounds", "--r", "-2", "--p", "0.5"}).code, kUsage);
  EXPECT_EQ(run_cli({"bounds", "--bogus"}).code, kUsage);
  EXPECT_EQ(run_cli({}).code, kUsage);
  EXPECT_THROW(parse_args({"nbstein", "r0", "--format", "xml"}), UsageError);
}

TEST(ParseArgs, ScenarioFileIsLoaded) {
  const auto path = temp_file("nbstein_cli_s.json", kSinusoid);
  const Command c = parse_args({"nbstein", "parasite-bound", "--scenario", path.string()});
  ASSERT_EQ(c.args.scenarios.size(), 1u);
  EXPECT_EQ(c.args.scenarios[0].T, 4.0);
  EXPECT_TRUE(std::holds_alternative<SinusoidRate>(c.args.scenarios[0].rate));
  std::filesystem::remove(path);
}

TEST(ParseArgs, EveryCommandHasHelpWithAnAnchor) {
  for (const auto& name : command_names()) {
    const Result r = run_cli({name, "--help"});
    EXPECT_EQ(r.code, kOk) << name;
    EXPECT_NE(r.out.find('['), std::string::npos) << name;
  }
  const Result r = run_cli({"stein-certify", "--help"});
  EXPECT_NE(r.out.find("Theorem 1.1"), std::string::npos);
}

TEST(Run, R0Json) {
  const Result r = run_cli({"r0"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("r0").get<double>(), 2.035339274768, 1e-11);
  EXPECT_LE(j.at("sqrt_r0").get<double>(), 1.427);
}

TEST(Run, BoundsCsvRow) {
  const Result r = run_cli({"bounds", "--r", "1", "--p", "0.5"});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "r,p,G1_bound,G2_c1,G2_c2,G2_c3,G2_bound");
  std::vector<double> v;
  std::stringstream ss(row);
  for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
  ASSERT_EQ(v.size(), 7u);
  EXPECT_EQ(v[2], 2.0);
  EXPECT_EQ(v[3], 4.0);
  EXPECT_EQ(v[4], 6.0);
  EXPECT_NEAR(v[5], 4.0 * std::sqrt(2.0353392747684893), 1e-12);
  EXPECT_EQ(v[6], 4.0);
  EXPECT_NE(r.err.find("grids-v1"), std::string::npos);
}

TEST(Run, BoundsJson) {
  const Result r = run_cli({"bounds", "--r", "2", "--p", "0.3", "--format", "json"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("command"), "bounds");
  EXPECT_EQ(j.at("rows").size(), 1u);
}

TEST(Run, SteinSolveHandValue) {
  const Result r = run_cli({"stein-solve", "--r", "1", "--p", "0.5", "--i", "1", "--N", "30"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "k,g,delta_g,residual");
}

TEST(Run, SteinCertifySinglePoint) {
  EXPECT_EQ(run_cli({"stein-certify", "--r", "2", "--p", "0.5"}).code, kOk);
}

TEST(Run, ParasiteValidateReportKeys) {
  const auto path = temp_file("nbstein_cli_v.json", kSinusoid);
  const Result r = run_cli({"parasite-validate", "--scenario", path.string(), "--samples", "10000",
                            "--seed", "3", "--format", "json"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  for (const char* k : {"empirical_dW", "bound", "mc_halfwidth", "pass", "seed", "n"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j.at("seed"), 3);
  EXPECT_EQ(j.at("n"), 10000);
  std::filesystem::remove(path);
}

TEST(Run, MonteCarloIsByteIdenticalAndWorkerInvariant) {
  const auto path = temp_file("nbstein_cli_d.json", kSinusoid);
  const std::vector<std::string> base = {"parasite-validate", "--scenario", path.string(),
                                         "--samples", "10000", "--seed", "9"};
  auto with_workers = [&](const char* w) {
    auto v = base;
    v.insert(v.end(), {"--workers", w});
    return run_cli(v).out;
  };
  const std::string a = with_workers("1");
  EXPECT_EQ(a, with_workers("1"));
  EXPECT_EQ(a, with_workers("3"));
  const std::vector<std::string> sim = {"simulate-ibd", "--a", "1", "--b", "0.5", "--t", "2",
                                        "--samples", "5000", "--seed", "4"};
  EXPECT_EQ(run_cli(sim).out, run_cli(sim).out);
  std::filesystem::remove(path);
}

TEST(Run, AppendixAndIdentities) {
  const Result a = run_cli({"appendix-check", "--theta", "0.5"});
  EXPECT_EQ(a.code, kOk) << a.err;
  const Result v = run_cli({"verify-identities", "--p", "0.5"});
  EXPECT_EQ(v.code, kOk) << v.err;
}

TEST(Run, AggregateBoundPrecondition) {
  const auto path = temp_file(
      "nbstein_cli_small.json",
      R"({"rate": {"kind": "constant", "abar": 0.1}, "b": 0.5, "T": 1.0})");
  EXPECT_EQ(run_cli({"aggregate-bound", "--scenario", path.string()}).code, kUsage);
  EXPECT_EQ(run_cli({"aggregate-bound", "--scenario", path.string(), "--hosts", "200"}).code, kOk);
  std::filesystem::remove(path);
}

TEST(ExitCodes, IoAndInputErrors) {
  EXPECT_EQ(run_cli({"r0", "--out", "/nonexistent-dir/r0.json"}).code, kAccuracy);
  EXPECT_EQ(run_cli({"parasite-bound", "--scenario", "/nonexistent/s.json"}).code, kAccuracy);
  const auto bad = temp_file("nbstein_cli_bad.json",
                             R"({"rate": {"kind": "constant", "abar": 2}, "b": 0.5, "T": 1, "x": 1})");
  EXPECT_EQ(run_cli({"parasite-bound", "--scenario", bad.string()}).code, kUsage);
  std::filesystem::remove(bad);
  const auto broken = temp_file("nbstein_cli_broken.json", "{not json");
  EXPECT_EQ(run_cli({"parasite-bound", "--scenario", broken.string()}).code, kUsage);
  std::filesystem::remove(broken);
  EXPECT_EQ(run_cli({"--help"}).code, kOk);
}

TEST(ExitCodes, BatteryScenarioBound) {
  const Result r = run_cli({"parasite-bound", "--scenario", data_file("battery_v1.json")});
  EXPECT_EQ(r.code, kUsage);  // a battery is not a single scenario
}
