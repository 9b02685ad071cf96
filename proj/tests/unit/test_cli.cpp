#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rankwatch/report.hpp"
#include "rankwatch/stream_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rankwatch_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Outcome run(const std::string& args) const {
    const std::string cmd = std::string(RANKWATCH_CLI_PATH) + " " + args + " 2>&1";
    Outcome r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::string meta_value(const std::string& p, const std::string& key) {
    for (const auto& [k, v] : rankwatch::read_metadata(rankwatch::sidecar_path(p)))
      if (k == key) return v;
    return "<missing>";
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateWritesRowsAndSidecar) {
  const std::string s = path("s.csv");
  const Outcome r = run("simulate --p 100 --s 3 --rho 1 --sigma0sq 1 --kappa 500 --horizon 2000 --seed 7 --out " + s);
  ASSERT_EQ(r.code, 0) << r.out;
  const rankwatch::Stream stream = rankwatch::read_stream(s);
  EXPECT_EQ(stream.size(), 2000u);
  EXPECT_EQ(stream.front().dim(), 100);
  EXPECT_EQ(meta_value(s, "command"), "simulate");
  EXPECT_EQ(meta_value(s, "kappa"), "500");
  EXPECT_EQ(meta_value(s, "missing"), "0");
  EXPECT_EQ(meta_value(s, "version"), rankwatch::version_string());
}

TEST_F(Cli, SimulateMissingFraction) {
  const std::string s = path("m.csv");
  ASSERT_EQ(run("simulate --p 50 --horizon 400 --missing 0.3 --seed 1 --out " + s).code, 0);
  const std::string text = slurp(s);
  std::size_t nan = 0, pos = 0;
  while ((pos = text.find("nan", pos)) != std::string::npos) {
    ++nan;
    pos += 3;
  }
  const double frac = static_cast<double>(nan) / (50.0 * 400.0);
  EXPECT_NEAR(frac, 0.3, 0.02);
}

TEST_F(Cli, ZeroRankIsNoise) {
  const std::string a = path("a.csv"), b = path("b.csv");
  ASSERT_EQ(run("simulate --p 5 --s 0 --rho 9 --kappa 0 --horizon 50 --seed 3 --out " + a).code, 0);
  ASSERT_EQ(run("simulate --p 5 --horizon 50 --seed 3 --out " + b).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(Cli, DetectReportsAlarm) {
  const std::string s = path("s.csv"), d = path("d.csv");
  ASSERT_EQ(run("simulate --p 10 --s 2 --rho 10 --kappa 0 --horizon 300 --seed 4 --out " + s).code, 0);
  const Outcome r = run("detect --in " + s + " --window 50 --threshold 20 --out " + d);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("stopped=true"), std::string::npos);
  EXPECT_EQ(meta_value(d, "stopped"), "true");
  EXPECT_LE(std::stoi(meta_value(d, "k_hat")), 3);
  EXPECT_EQ(slurp(d).rfind("t,statistic,k_hat\n", 0), 0u);
}

TEST_F(Cli, DetectWithoutAlarmStillSucceeds) {
  const std::string s = path("s.csv"), d = path("d.csv");
  ASSERT_EQ(run("simulate --p 4 --horizon 100 --seed 5 --out " + s).code, 0);
  const Outcome r = run("detect --in " + s + " --window 20 --threshold 1000 --out " + d);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("stopped=false"), std::string::npos);
  EXPECT_EQ(meta_value(d, "stopping_time"), "none");
}

TEST_F(Cli, SketchThenDetect) {
  const std::string s = path("s.csv"), op = path("op.csv"), y = path("y.csv"), d1 = path("d1.csv"),
                    d2 = path("d2.csv");
  ASSERT_EQ(run("simulate --p 20 --s 1 --rho 5 --kappa 50 --horizon 200 --seed 6 --out " + s).code, 0);
  ASSERT_EQ(run("sketch --in " + s + " --sketch-dim 5 --sketch-seed 2 --out " + y + " --operator-out " + op).code, 0);
  EXPECT_EQ(rankwatch::read_stream(y).front().dim(), 5);
  ASSERT_EQ(run("detect --in " + y + " --window 30 --threshold 15 --out " + d1).code, 0);
  ASSERT_EQ(run("detect --in " + s + " --sketch-in " + op + " --window 30 --threshold 15 --out " + d2).code, 0);
  EXPECT_EQ(slurp(d1), slurp(d2));
}

TEST_F(Cli, TrackMaskedStream) {
  const std::string s = path("s.csv"), t = path("t.csv");
  ASSERT_EQ(run("simulate --p 30 --s 3 --rho 1 --sigma0sq 0.01 --kappa 100 --horizon 300 --missing 0.3 "
                "--seed 8 --out " + s).code, 0);
  const Outcome r = run("track --in " + s + " --rank 3 --threshold 0.5 --out " + t);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(slurp(t).rfind("t,stat_max,stat_norm,observed_count,skipped\n", 0), 0u);
  EXPECT_NE(meta_value(t, "alarm_time"), "<missing>");
}

TEST_F(Cli, DetectRejectsMaskedStream) {
  const std::string s = path("s.csv");
  ASSERT_EQ(run("simulate --p 5 --horizon 20 --missing 0.3 --seed 9 --out " + s).code, 0);
  EXPECT_EQ(run("detect --in " + s + " --window 5 --threshold 5 --out " + path("d.csv")).code, 3);
}

TEST_F(Cli, BoundsTable) {
  const std::string b = path("b.csv");
  ASSERT_EQ(run("bounds --b 10,20 --d 4 --eps 0.1,0.2 --p 2 --rho-sq 1 --out " + b).code, 0);
  const std::string text = slurp(b);
  EXPECT_EQ(text.rfind("b,d,eps,p,rho_sq,theta,exponent,denominator,covering,arl_literal,arl_magnitude,edd\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_EQ(meta_value(b, "eps"), "0.1,0.2");
}

TEST_F(Cli, BoundsNoRoot) {
  const Outcome r = run("bounds --d 1 --eps 0.3 --out " + path("b.csv"));
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("no root"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("bounds --bogus 1 --out " + path("x.csv")).code, 2);
  EXPECT_EQ(run("bounds").code, 2);
  EXPECT_EQ(run("simulate --p 3 --s 4 --horizon 5 --out " + path("x.csv")).code, 2);
  EXPECT_EQ(run("track --in " + path("missing.csv") + " --out " + path("x.csv")).code, 2);
}

TEST_F(Cli, DataErrors) {
  const std::string bad = path("bad.csv");
  std::ofstream(bad) << "1,2\n3\n";
  const Outcome r = run("detect --in " + bad + " --threshold 1 --out " + path("d.csv"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("line 2"), std::string::npos);
}

TEST_F(Cli, CalibrateAndSweepDeterministic) {
  const std::string c1 = path("c1.csv"), c2 = path("c2.csv");
  const std::string args = "calibrate --p 3 --window 20 --target-arl 150 --replicates 100 --seed 4 ";
  ASSERT_EQ(run(args + "--workers 1 --out " + c1).code, 0);
  ASSERT_EQ(run(args + "--workers 3 --out " + c2).code, 0);
  EXPECT_EQ(slurp(c1), slurp(c2));

  const std::string s1 = path("s1.csv"), s2 = path("s2.csv");
  const std::string sweep =
      "sweep --over m --p 8 --s 2 --rho 3 --ms 2,8 --window 20 --target-arl 100 "
      "--calibration-replicates 100 --edd-replicates 50 --seed 5 ";
  ASSERT_EQ(run(sweep + "--out " + s1).code, 0);
  ASSERT_EQ(run(sweep + "--out " + s2).code, 0);
  EXPECT_EQ(slurp(s1), slurp(s2));
  EXPECT_EQ(meta_value(s1, "ms"), "2,8");
}

TEST_F(Cli, SidecarReproducesRun) {
  const std::string s = path("s.csv");
  ASSERT_EQ(run("simulate --p 4 --s 1 --rho 2 --kappa 10 --horizon 30 --seed 12 --out " + s).code, 0);
  std::string args = "simulate";
  for (const auto& [k, v] : rankwatch::read_metadata(rankwatch::sidecar_path(s))) {
    if (k == "version" || k == "command" || v.empty()) continue;
    args += " --" + k + " " + (k == "out" ? path("again.csv") : v);
  }
  ASSERT_EQ(run(args).code, 0) << args;
  EXPECT_EQ(slurp(s), slurp(path("again.csv")));
}
