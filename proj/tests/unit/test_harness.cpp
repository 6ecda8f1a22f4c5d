#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "smf/harness.hpp"

namespace smf {
namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Outcome {
  int code = -1;
  std::string out;
  std::string log;
};

Outcome run(const ExperimentSpec& spec) {
  std::ostringstream out;
  std::ostringstream log;
  Outcome o;
  o.code = run_experiment(spec, out, log);
  o.out = out.str();
  o.log = log.str();
  return o;
}

ExperimentSpec spec_for(const std::string& command) {
  ExperimentSpec s;
  s.command = command;
  s.threads = 1;
  return s;
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(-1.5e-300), "-1.5e-300");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(std::stod(format_double(kInvE)), kInvE);
  EXPECT_EQ(format_uint(18446744073709551615ull), "18446744073709551615");
}

TEST(Csv, RowJoining) {
  EXPECT_EQ(CsvRow().add("a").add(1.5).add(std::uint64_t{3}).add(true).add(std::string("x")).str(),
            "a,1.5,3,1,x\n");
  EXPECT_EQ(CsvRow().add("").add("").str(), ",\n");
}

TEST(Parallel, IndexOrderAndErrors) {
  for (std::size_t threads : {1u, 2u, 7u}) {
    const auto v = parallel_map(100, threads, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i * i);
  }
  EXPECT_TRUE(parallel_map(0, 4, [](std::size_t i) { return i; }).empty());
  EXPECT_THROW(parallel_map(50, 3,
                            [](std::size_t i) -> int {
                              if (i == 17) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
}

TEST(Spec, MergeAndValidate) {
  ExperimentSpec s;
  merge_spec(s, nlohmann::json{{"command", "light-count"}, {"n", 20}, {"seeds", {3, 4}}});
  EXPECT_EQ(s.command, "light-count");
  EXPECT_EQ(s.n, 20u);
  EXPECT_EQ(s.resolved_seeds(), (std::vector<std::uint64_t>{3, 4}));
  EXPECT_NO_THROW(s.validate());
  EXPECT_THROW(merge_spec(s, nlohmann::json{{"bogus", 1}}), std::invalid_argument);
  EXPECT_THROW(merge_spec(s, nlohmann::json{{"n", "many"}}), std::invalid_argument);
  EXPECT_THROW(merge_spec(s, nlohmann::json::array()), std::invalid_argument);
  s.seeds = {1, 1};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.seeds.clear();
  s.command = "nonsense";
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Spec, SplitSeedsAndJsonRoundTrip) {
  ExperimentSpec s = spec_for("oracle-sweep");
  s.seed_base = 9;
  s.seed_count = 4;
  const auto seeds = s.resolved_seeds();
  ASSERT_EQ(seeds.size(), 4u);
  EXPECT_EQ(seeds[2], split_seed(9, 2));
  const nlohmann::json j = s;
  ExperimentSpec back;
  merge_spec(back, j);
  EXPECT_EQ(nlohmann::json(back).dump(), j.dump());
  const auto banner = artifact_banner(s);
  EXPECT_EQ(banner.rfind("# build=", 0), 0u);
  EXPECT_NE(banner.find("\"command\":\"oracle-sweep\""), std::string::npos);
}

TEST(OracleSweep, DefaultGridRowsAndMonotonicity) {
  const auto o = run(spec_for("oracle-sweep"));
  EXPECT_EQ(o.code, kExitPass) << o.log;
  const auto ls = lines_of(o.out);
  ASSERT_EQ(ls.size(), 62u);
  EXPECT_EQ(ls[1], "lambda,seed,L,L_over_n,L_over_ln_n");
  // rows are grouped by lambda in grid order; check L per seed is monotone
  for (std::size_t i = 0; i < 20; ++i) {
    std::size_t prev = 0;
    for (std::size_t g = 0; g < 3; ++g) {
      const auto f = split_csv(ls[2 + g * 20 + i]);
      ASSERT_EQ(f.size(), 5u);
      const auto l = std::stoul(f[2]);
      EXPECT_GE(l, prev);
      prev = l;
    }
  }
}

TEST(OracleSweep, MedianGrowsWithLambda) {
  auto s = spec_for("oracle-sweep");
  s.n = 14;
  s.lambda_grid = {0.2, 0.6};
  const auto o = run(s);
  ASSERT_EQ(o.code, kExitPass);
  std::vector<double> low;
  std::vector<double> high;
  for (const auto& line : lines_of(o.out)) {
    const auto f = split_csv(line);
    if (f.size() != 5 || f[0] == "lambda") continue;
    (f[0] == "0.2" ? low : high).push_back(std::stod(f[2]));
  }
  ASSERT_EQ(low.size(), 20u);
  std::nth_element(low.begin(), low.begin() + 10, low.end());
  std::nth_element(high.begin(), high.begin() + 10, high.end());
  EXPECT_GT(high[10], low[10]);
}

TEST(OracleSweep, EmptyGridAndGuard) {
  auto s = spec_for("oracle-sweep");
  s.lambda_grid.clear();
  const auto o = run(s);
  EXPECT_EQ(o.code, kExitPass);
  EXPECT_EQ(lines_of(o.out).size(), 2u);
  s.n = 23;
  EXPECT_EQ(run(s).code, kExitResourceGuard);
}

TEST(LightCount, SummaryAgainstExpectation) {
  auto s = spec_for("light-count");
  s.n = 30;
  s.ell = 3;
  s.lambda = 1.0;
  s.c = 1.0;
  s.seed_count = 40;
  std::ostringstream out;
  std::ostringstream log;
  LightCountSummary sum;
  EXPECT_EQ(cmd_light_count(s, out, log, &sum), kExitPass);
  EXPECT_NEAR(sum.expected, expected_light_count(30, 3, 1.0, 1.0), 0.0);
  EXPECT_LT(sum.relative_error, 0.35);
  const auto ls = lines_of(out.str());
  ASSERT_EQ(ls.size(), 2u + 40u + 1u);
  EXPECT_EQ(ls.back().rfind("summary,", 0), 0u);
}

TEST(LightCount, TinyLambdaGivesZero) {
  auto s = spec_for("light-count");
  s.n = 20;
  s.lambda = 0.01;
  s.seed_count = 5;
  std::ostringstream out;
  std::ostringstream log;
  LightCountSummary sum;
  EXPECT_EQ(cmd_light_count(s, out, log, &sum), kExitPass);
  EXPECT_EQ(sum.mean, 0.0);
  EXPECT_EQ(sum.expected, 0.0);
  EXPECT_EQ(sum.relative_error, 0.0);
}

TEST(VerifyBounds, DefaultGridPasses) {
  const auto o = run(spec_for("verify-bounds"));
  EXPECT_EQ(o.code, kExitPass) << o.log;
  const auto ls = lines_of(o.out);
  EXPECT_EQ(ls[1], "check,p1,p2,observed,reference,slack,pass");
  for (std::size_t i = 2; i < ls.size(); ++i) EXPECT_EQ(split_csv(ls[i]).back(), "1") << ls[i];
}

TEST(VerifyBounds, CorruptedBoundFails) {
  auto s = spec_for("verify-bounds");
  s.bound_scale = 0.01;
  const auto o = run(s);
  EXPECT_EQ(o.code, kExitViolation);
  EXPECT_NE(o.log.find("violation: tail_"), std::string::npos);
}

TEST(VerifyBounds, ZeroTrialsIsInvalid) {
  auto s = spec_for("verify-bounds");
  s.trials = 0;
  EXPECT_EQ(run(s).code, kExitInvalidSpec);
  EXPECT_THROW(run_bound_suite(s), std::invalid_argument);
}

TEST(VerifyBounds, UpperTailRowsRespectValidityRange) {
  auto s = spec_for("verify-bounds");
  s.trials = 2000;
  for (const auto& r : run_bound_suite(s)) {
    if (r.check == "tail_upper") {
      EXPECT_LE(r.p2, upper_tail_limit(std::size_t(r.p1)));
    }
  }
}

TEST(BridgePipeline, PermissiveSmallInstanceWithOracle) {
  auto s = spec_for("bridge-pipeline");
  s.n = 18;
  s.ell = 8;
  s.eta = 0.9;
  s.delta = 0.5;
  s.seed_count = 10;
  const auto o = run(s);
  EXPECT_EQ(o.code, kExitPass) << o.log;
  const auto report = nlohmann::json::parse(o.out);
  ASSERT_EQ(report.at("runs").size(), 10u);
  std::size_t feasible = 0;
  for (const auto& r : report.at("runs")) {
    if (!r.at("result").at("feasible").get<bool>()) continue;
    ++feasible;
    EXPECT_TRUE(r.at("oracle").at("holds").get<bool>());
    EXPECT_GE(r.at("oracle").at("L").get<std::size_t>(), r.at("result").at("length").get<std::size_t>());
  }
  EXPECT_GE(feasible, 3u);
}

TEST(BridgePipeline, LargerInstanceStitchesSeveralPaths) {
  auto s = spec_for("bridge-pipeline");
  s.n = 400;
  s.ell = 8;
  s.eta = 0.3;
  s.delta = 0.2;
  s.nu = 2;
  s.seed_count = 2;
  const auto o = run(s);
  EXPECT_EQ(o.code, kExitPass) << o.log;
  const auto report = nlohmann::json::parse(o.out);
  for (const auto& r : report.at("runs")) {
    ASSERT_TRUE(r.at("result").at("feasible").get<bool>()) << o.log;
    EXPECT_EQ(r.at("result").at("iterations").size(), 9u);
    EXPECT_FALSE(r.contains("oracle"));
    EXPECT_TRUE(r.at("result").contains("audit"));
  }
}

TEST(BridgePipeline, NoGoodPathsIsReportedNotFatal) {
  auto s = spec_for("bridge-pipeline");
  s.n = 30;
  s.ell = 8;
  s.eta = 0.01;
  s.delta = 0.5;
  s.seed_count = 2;
  const auto o = run(s);
  EXPECT_EQ(o.code, kExitPass);
  EXPECT_NE(o.log.find("infeasible: family too small"), std::string::npos);
  const auto report = nlohmann::json::parse(o.out);
  EXPECT_EQ(report.at("runs")[0].at("result").at("feasibility"), "infeasible: family too small");
}

TEST(DowncrossStudy, CellsAndFlags) {
  auto s = spec_for("downcross-study");
  s.ell = 25;
  s.path_length = 2500;
  s.lambda = kInvE + 0.05;
  s.c_grid = {1.0, 6.0};
  s.eta_prime_grid = {0.16};
  s.trials = 1000;
  const auto o = run(s);
  EXPECT_EQ(o.code, kExitPass) << o.out;
  const auto ls = lines_of(o.out);
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[1], "kind,ell,L,lambda,param,trials,estimate,sigma,reference,flag,note,sampling");
  const auto c1 = split_csv(ls[2]);
  EXPECT_EQ(c1[0], "domination");
  EXPECT_EQ(c1[9], "1");
  const auto c6 = split_csv(ls[3]);
  EXPECT_EQ(c6[10].rfind("unobservable", 0), 0u);
  EXPECT_NE(o.log.find("warning: domination cell C=6"), std::string::npos);
  EXPECT_EQ(split_csv(ls[4])[0], "excursion");
  for (std::size_t i = 2; i < ls.size(); ++i) EXPECT_EQ(split_csv(ls[i]).back(), "bridge-conditioned");
}

TEST(DowncrossStudy, TrivialExcursionBound) {
  auto s = spec_for("downcross-study");
  s.ell = 5;
  s.path_length = 40;
  s.lambda = kInvE;
  s.c_grid.clear();
  s.eta_prime_grid = {0.1};
  s.trials = 500;
  const auto o = run(s);
  EXPECT_EQ(o.code, kExitPass);
  const auto row = split_csv(lines_of(o.out)[2]);
  EXPECT_EQ(row[9], "1");
  EXPECT_EQ(row[10], "trivial: bound >= 1");
}

TEST(DowncrossStudy, InvalidGrids) {
  auto s = spec_for("downcross-study");
  s.c_grid.clear();
  s.eta_prime_grid.clear();
  EXPECT_EQ(run(s).code, kExitInvalidSpec);
  s.eta_prime_grid = {0.3};
  EXPECT_EQ(run(s).code, kExitInvalidSpec);
  s.eta_prime_grid = {0.1};
  s.path_length = 10;
  s.ell = 6;
  EXPECT_EQ(run(s).code, kExitInvalidSpec);
}

TEST(Determinism, SerialAndParallelOutputsMatch) {
  for (const char* cmd : {"oracle-sweep", "light-count", "downcross-study", "bridge-pipeline"}) {
    auto s = spec_for(cmd);
    s.trials = 400;
    s.seed_count = 6;
    s.n = std::string(cmd) == "bridge-pipeline" ? 18 : 12;
    if (std::string(cmd) == "bridge-pipeline") {
      s.ell = 8;
      s.eta = 0.9;
    }
    const auto serial = run(s);
    s.threads = 4;
    const auto parallel = run(s);
    EXPECT_EQ(serial.code, parallel.code) << cmd;
    EXPECT_EQ(serial.out, parallel.out) << cmd;
  }
}

TEST(Determinism, BannerSpecReproducesOutput) {
  auto s = spec_for("light-count");
  s.n = 15;
  s.seed_count = 5;
  const auto first = run(s);
  const auto banner = lines_of(first.out).front();
  const auto spec_json = nlohmann::json::parse(banner.substr(banner.find("spec=") + 5));
  ExperimentSpec again;
  merge_spec(again, spec_json);
  again.threads = 1;
  EXPECT_EQ(run(again).out, first.out);
}

#ifdef SMF_CLI_PATH

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Cli, FlagsConfigAndExitCodes) {
  const std::string cli = SMF_CLI_PATH;
  const std::string dir = ::testing::TempDir();
  const std::string out = dir + "/smf_cli_out.csv";
  const std::string cfg = dir + "/smf_cli_cfg.json";
  std::ofstream(cfg) << R"({"n": 9, "lambda_grid": [0.5], "seed_count": 3})";

  EXPECT_EQ(shell(cli + " oracle-sweep --config " + cfg + " -n 10 -o " + out + " 2>/dev/null"), 0);
  const auto text = slurp(out);
  EXPECT_NE(text.find("\"n\":10"), std::string::npos);
  EXPECT_EQ(lines_of(text).size(), 2u + 3u);

  EXPECT_EQ(shell(cli + " oracle-sweep -n 23 -o " + out + " 2>/dev/null"), kExitResourceGuard);
  EXPECT_EQ(shell(cli + " verify-bounds --trials 0 -o " + out + " 2>/dev/null"), kExitInvalidSpec);
  EXPECT_EQ(shell(cli + " verify-bounds --trials 2000 --bound-scale 0.01 -o " + out + " 2>/dev/null"),
            kExitViolation);
  EXPECT_EQ(shell(cli + " oracle-sweep --no-such-flag >/dev/null 2>&1"), kExitInvalidSpec);
  EXPECT_EQ(shell(cli + " >/dev/null 2>&1"), kExitInvalidSpec);

  std::ofstream(cfg) << R"({"unknown_key": 1})";
  EXPECT_EQ(shell(cli + " oracle-sweep --config " + cfg + " >/dev/null 2>&1"), kExitInvalidSpec);
}

TEST(Cli, ThreadCountDoesNotChangeBytes) {
  const std::string cli = SMF_CLI_PATH;
  const std::string dir = ::testing::TempDir();
  const std::string a = dir + "/smf_serial.csv";
  const std::string b = dir + "/smf_parallel.csv";
  const std::string args = " downcross-study --ell 10 -L 400 --trials 300 --c-grid 0,1 ";
  ASSERT_EQ(shell("SMF_THREADS=1 " + cli + args + "-o " + a + " 2>/dev/null"), 0);
  ASSERT_EQ(shell("SMF_THREADS=3 " + cli + args + "-o " + b + " 2>/dev/null"), 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

#endif

}  // namespace
}  // namespace smf
