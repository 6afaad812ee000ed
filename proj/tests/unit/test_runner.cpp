#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kpplab/asymptotics.hpp"
#include "kpplab/errors.hpp"
#include "kpplab/runner.hpp"

using namespace kpplab;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    ::unsetenv("KPPLAB_OUT");
    dir_ = fs::temp_directory_path() /
           ("kpplab_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    RunConfig c = parse_config(in);
    c.output.dir = dir_;
    return c;
  }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++n;
  }
  return n - 1;  // column header
}

const char* kMinimal = "[scenario]\nname = minimal\na = 0\nT = 50\n[output]\ncadence = 1\n";

}  // namespace

TEST(ParseConfig, Defaults) {
  std::istringstream in("[scenario]\nT = 10\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.scenario.mode, DomainMode::ShiftingEnvironment);
  EXPECT_DOUBLE_EQ(c.scenario.horizon, 10.0);
  EXPECT_DOUBLE_EQ(c.scenario.solver.dx, 0.05);
  EXPECT_EQ(c.scenario.solver.scheme, TimeScheme::StrangCompact);
}

TEST(ParseConfig, UnknownKeyNamed) {
  std::istringstream in("[scenario]\nbetaa = 2.2\n");
  try {
    parse_config(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("betaa"), std::string::npos);
  }
}

TEST(ParseConfig, AllProblemsAtOnce) {
  std::istringstream in("[scenario]\nbetaa = 2\nT = -1\n[bogus]\nx = 1\n[solver]\ndx = abc\n");
  try {
    parse_config(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    for (const char* s : {"betaa", "bogus", "dx", "T"}) EXPECT_NE(msg.find(s), std::string::npos) << s;
  }
}

TEST(ParseConfig, EveryKeyDocumented) {
  for (const auto& [section, keys] : config_keys()) {
    EXPECT_FALSE(keys.empty()) << section;
  }
  EXPECT_TRUE(config_keys().count("scenario"));
  EXPECT_TRUE(config_keys().count("solver"));
  EXPECT_TRUE(config_keys().count("analysis"));
  EXPECT_TRUE(config_keys().count("output"));
}

TEST(ParseConfig, FormatRoundTrip) {
  std::istringstream in(
      "[scenario]\nname = rt\na = 0.5\nbeta = 2.2\neta = 1\nT = 30\n[solver]\ndx = 0.1\ndt = 0.05\n"
      "[analysis]\nfit_mode = free\n[output]\nsnapshot_times = 5, 10\n");
  const RunConfig c = parse_config(in);
  const std::string text = format_config(c);
  std::istringstream again(text);
  EXPECT_EQ(format_config(parse_config(again)), text);
}

TEST_F(TempDir, MinimalRun) {
  const RunSummary s = run_command(parse(kMinimal));
  EXPECT_TRUE(s.ok) << s.error;
  const fs::path d = dir_ / "minimal";
  EXPECT_TRUE(fs::exists(d / "manifest.txt"));
  EXPECT_TRUE(fs::exists(d / "report.txt"));
  EXPECT_TRUE(fs::is_directory(d / "snaps"));
  EXPECT_FALSE(fs::exists(d / "FAILED"));
  EXPECT_GE(data_rows(d / "trace.csv"), 50u);
  EXPECT_EQ(slurp(d / "trace.csv").rfind("# kpplab-csv v1\nt,xi_b,u_at_X,x_of_X\n", 0), 0u);
}

TEST_F(TempDir, ReportCarriesPrediction) {
  const RunSummary s = run_command(parse("[scenario]\nname = p\na = 0.5\nbeta = 2.2\neta = 0\nT = 400\n"));
  ASSERT_TRUE(s.ok) << s.error;
  const std::string report = slurp(dir_ / "p" / "report.txt");
  const auto pos = report.find("theta_star=");
  ASSERT_NE(pos, std::string::npos);
  const double theta = std::stod(report.substr(pos + 11));
  EXPECT_NEAR(theta, log_coefficient({0.5, 2.2, 0.0}).log_t, 1e-12);
  EXPECT_NEAR(theta, -3.8178, 1e-4);
  EXPECT_NE(report.find("status="), std::string::npos);
}

TEST_F(TempDir, Reproducible) {
  RunConfig c = parse("[scenario]\nname = r\na = 0.5\nbeta = 2.2\nT = 40\n[output]\nsnapshot_times = 20\n");
  run_command(c);
  const std::string trace = slurp(dir_ / "r" / "trace.csv");
  const std::string report = slurp(dir_ / "r" / "report.txt");
  const std::string snap = slurp(dir_ / "r" / "snaps" / snapshot_name(20.0));
  ASSERT_FALSE(snap.empty());
  run_command(c);
  EXPECT_EQ(slurp(dir_ / "r" / "trace.csv"), trace);
  EXPECT_EQ(slurp(dir_ / "r" / "report.txt"), report);
  EXPECT_EQ(slurp(dir_ / "r" / "snaps" / snapshot_name(20.0)), snap);
}

TEST_F(TempDir, ManifestReproducesRun) {
  RunConfig c = parse("[scenario]\nname = m\na = 0.5\nbeta = 3\neta = 2\nT = 30\n[solver]\ndx = 0.1\n");
  run_command(c);
  RunConfig again = load_config(dir_ / "m" / "manifest.txt");
  again.output.dir = dir_;
  again.name = "m2";
  run_command(again);
  EXPECT_EQ(slurp(dir_ / "m" / "trace.csv"), slurp(dir_ / "m2" / "trace.csv"));
}

TEST_F(TempDir, FailureKeepsPartialOutput) {
  // A one-sample fit window cannot be regressed: the run completes, the analysis fails.
  const RunSummary s = run_command(parse(
      "[scenario]\nname = f\na = 0\nT = 50\n[analysis]\nfit_mode = free\nfit_lo = 49.5\nfit_hi = 50\n"));
  EXPECT_FALSE(s.ok);
  EXPECT_FALSE(s.error.empty());
  EXPECT_TRUE(fs::exists(dir_ / "f" / "FAILED"));
  EXPECT_TRUE(fs::exists(dir_ / "f" / "manifest.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "f" / "trace.csv"));
  EXPECT_NE(slurp(dir_ / "f" / "report.txt").find("status=FAIL"), std::string::npos);
}

TEST_F(TempDir, OutEnvironmentOverride) {
  const fs::path other = dir_ / "elsewhere";
  ::setenv("KPPLAB_OUT", other.c_str(), 1);
  const RunSummary s = run_command(parse(kMinimal));
  ::unsetenv("KPPLAB_OUT");
  EXPECT_TRUE(s.ok);
  EXPECT_TRUE(fs::exists(other / "minimal" / "trace.csv"));
}

TEST_F(TempDir, OutputGroup) {
  RunConfig c = parse(std::string(kMinimal) + "group = g/h\n");
  const fs::path other = dir_ / "elsewhere";
  ::setenv("KPPLAB_OUT", other.c_str(), 1);
  const RunSummary s = run_command(c);
  ::unsetenv("KPPLAB_OUT");
  ASSERT_TRUE(s.ok) << s.error;
  const fs::path run_dir = other / "g" / "h" / "minimal";
  EXPECT_TRUE(fs::exists(run_dir / "trace.csv"));
  EXPECT_EQ(load_config(run_dir / "manifest.txt").output.group, fs::path("g/h"));
  for (const char* bad : {"/abs", "../up"}) {
    std::istringstream in(std::string(kMinimal) + "group = " + bad + "\n");
    EXPECT_THROW(parse_config(in), ValidationError) << bad;
  }
}

TEST_F(TempDir, SweepEta) {
  RunConfig c = parse("[scenario]\nname = sw\na = 0.5\nbeta = 2.2\nT = 80\n[sweep]\neta = 0, 0.5, 1\n");
  const auto out = sweep_command(c, 2);
  ASSERT_EQ(out.size(), 3u);
  std::ifstream in(dir_ / "sw" / "aggregate.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# kpplab-csv v1");
  std::getline(in, line);
  EXPECT_EQ(line, "a,beta,eta,c_star,theta_star,c_hat,theta_hat,rel_err");
  std::vector<double> theta;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string cell;
    for (int k = 0; k < 5; ++k) std::getline(row, cell, ',');
    theta.push_back(std::stod(cell));
  }
  ASSERT_EQ(theta.size(), 3u);
  EXPECT_LT(theta[0], theta[1]);
  EXPECT_LT(theta[1], theta[2]);
}

TEST_F(TempDir, SweepEmptyGrid) {
  RunConfig c = parse("[scenario]\nname = e\nT = 10\n");
  EXPECT_THROW(sweep_command(c, 1), ValidationError);
}

TEST_F(TempDir, SweepContinuesPastFailures) {
  RunConfig c = parse("[scenario]\nname = pf\na = 0.25\nbeta = 2\nT = 20\n[sweep]\neta = 0, 1\n");
  const auto out = sweep_command(c, 1);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].ok) << out[0].error;
  EXPECT_FALSE(out[1].ok);  // beta = 2 with eta >= 1/2 has no prediction
}

TEST_F(TempDir, SweepGridIndependence) {
  RunConfig c =
      parse("[scenario]\nname = dx\na = 0.5\nbeta = 2.2\nT = 400\n[sweep]\ndx = 0.1, 0.05\n");
  const auto out = sweep_command(c, 1);
  ASSERT_EQ(out.size(), 2u);
  ASSERT_TRUE(out[0].fit && out[1].fit);
  EXPECT_LT(std::abs(out[0].fit->theta_hat - out[1].fit->theta_hat), 0.05);
}

TEST(Trace, CsvRoundTrip) {
  FrontTrace t;
  t.push(1.0, 1.9876543210987654, 0.123, 2.2);
  t.push(2.0, 3.5, 1e-300, 4.4);
  std::ostringstream out;
  write_trace_csv(t, out);
  std::istringstream in(out.str());
  const FrontTrace back = read_trace_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.xi[0], t.xi[0]);
  EXPECT_EQ(back.u_at_shift[1], t.u_at_shift[1]);
  EXPECT_EQ(back.shift[1], t.shift[1]);
}

TEST(Trace, MalformedCsv) {
  std::istringstream in("# kpplab-csv v1\nt,xi_b,u_at_X,x_of_X\n1,2,x,4\n");
  EXPECT_ANY_THROW(read_trace_csv(in));
}

TEST(Analyze, TheoremMustMatchRegime) {
  FrontTrace t;
  for (int i = 1; i <= 100; ++i) t.push(i, 1.4142 * i - 2.12 * std::log(i), 0.0, 0.0);
  AnalyzeRequest req;
  req.theorem = parse_theorem("1.5");
  req.env = {0.5, 3.0, 0.0};
  EXPECT_THROW(analyze_trace(t, req), ValidationError);
  req.theorem = parse_theorem("1.7");
  const std::string report = analyze_trace(t, req);
  EXPECT_NE(report.find("theta_hat="), std::string::npos);
  EXPECT_THROW(parse_theorem("2.1"), ValidationError);
}

TEST(Analyze, RecoversSyntheticTheta) {
  FrontTrace t;
  const double c = spreading_speed({0.5, 2.2, 0.0});
  for (int i = 1; i <= 1000; ++i) t.push(i, c * i - 3.8178298 * std::log(i) + 2.0, 0.0, 0.0);
  AnalyzeRequest req;
  req.env = {0.5, 2.2, 0.0};
  const std::string report = analyze_trace(t, req);
  const auto pos = report.find("theta_hat=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(report.substr(pos + 10)), -3.8178298, 1e-8);
}

TEST(SnapshotName, Rounded) {
  EXPECT_EQ(snapshot_name(100.0), "snap_t100.csv");
  EXPECT_EQ(snapshot_name(12.5), "snap_t12.5.csv");
  EXPECT_EQ(snapshot_name(50.00000000000222), "snap_t50.csv");
}
