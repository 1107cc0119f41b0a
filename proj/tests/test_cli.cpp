#include <gtest/gtest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "support/tempdir.hpp"

using testutil::slurp;
using testutil::spit;
using testutil::TempDir;

namespace {

struct Result
{
  int status;
  std::string out;
  std::string err;
};

Result run(const TempDir& dir, const std::string& args)
{
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "cd '" + dir.path().string() + "' && '" SHELLDRAG_CLI "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

// Failures print exactly one JSON line on stderr.
nlohmann::json error_line(const Result& r)
{
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  return nlohmann::json::parse(r.err);
}

}  // namespace

TEST(Cli, Presets)
{
  TempDir dir;
  const auto r = run(dir, "presets");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("d3,0.03,"), std::string::npos);
  EXPECT_NE(r.out.find("free,free,free"), std::string::npos);
}

TEST(Cli, SimulateDeterministic)
{
  TempDir dir;
  ASSERT_EQ(run(dir, "simulate --preset d3 --out a --seed 7").status, 0);
  ASSERT_EQ(run(dir, "simulate --preset d3 --out b --seed 7").status, 0);
  for (const auto& f : {"trace.csv", "beams.csv", "summary.json", "drag.svg", "config.ini"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
}

TEST(Cli, FlagsOverrideConfig)
{
  TempDir dir;
  spit(dir / "run.ini", "[run]\nname = mine\n[channel]\nwidth = 0.05\n[sweep]\ndx = 0.004\n[output]\ndirectory = fromfile\n");
  ASSERT_EQ(run(dir, "simulate --config run.ini --dx 0.002 --format json").status, 0);
  const auto j = nlohmann::json::parse(slurp(dir / "fromfile" / "summary.json"));
  EXPECT_EQ(j.at("name"), "mine");
  EXPECT_EQ(j.at("dx_m").get<double>(), 0.002);
  EXPECT_EQ(j.at("width_m").get<double>(), 0.05);
  EXPECT_FALSE(std::filesystem::exists(dir / "fromfile" / "trace.csv"));
}

TEST(Cli, ConfigErrorNamesKey)
{
  TempDir dir;
  spit(dir / "bad.ini", "[channel]\ndeflection = 0.02\nwidth = 0.06\n");
  const auto r = run(dir, "simulate --config bad.ini");
  EXPECT_NE(r.status, 0);
  const auto j = error_line(r);
  EXPECT_EQ(j.at("error"), "config");
  EXPECT_EQ(j.at("key"), "channel.width");
}

TEST(Cli, UsageErrors)
{
  TempDir dir;
  EXPECT_EQ(error_line(run(dir, "")).at("error"), "usage");
  EXPECT_EQ(error_line(run(dir, "simulate --preset d9")).at("error"), "config");
  const auto r = run(dir, "simulate --dx notanumber");
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(error_line(r).at("error"), "usage");
}

TEST(Cli, BatchWritesPerRunDirectories)
{
  TempDir dir;
  const auto r = run(dir, "batch --preset d1 --preset d2 --preset d3 --out runs");
  ASSERT_EQ(r.status, 0) << r.err;
  for (const auto& name : {"d1", "d2", "d3"})
    EXPECT_TRUE(std::filesystem::exists(dir / "runs" / name / "summary.json")) << name;
  EXPECT_TRUE(std::filesystem::exists(dir / "runs" / "batch.csv"));
}

TEST(Cli, AnalyzeReportsFileAndLine)
{
  TempDir dir;
  spit(dir / "t.csv", "t_s,fx_n,fy_n,fz_n,leg_left_rad,leg_right_rad,power_w\n0,0,0,0,0,0,0\n-1,0,0,0,0,0,0\n");
  const auto r = run(dir, "analyze t.csv --out a");
  EXPECT_EQ(r.status, 1);
  const auto j = error_line(r);
  EXPECT_EQ(j.at("error"), "ordering");
  EXPECT_NE(j.at("message").get<std::string>().find("t.csv:3:"), std::string::npos);
}

TEST(Cli, CalibrateSynthetic)
{
  TempDir dir;
  auto r = run(dir, "calibrate --synth-samples 1000 --seed 4 --out c");
  ASSERT_EQ(r.status, 0) << r.err;
  auto rep = nlohmann::json::parse(slurp(dir / "c" / "report.json"));
  for (const auto& v : rep.at("test_rms_n"))
    EXPECT_LT(v.get<double>(), 1e-9);
  EXPECT_EQ(rep.at("n_train"), 800);

  // Refit from the written dataset file with another split.
  r = run(dir, "calibrate c/dataset.csv --split 0.5 --out d");
  ASSERT_EQ(r.status, 0) << r.err;
  rep = nlohmann::json::parse(slurp(dir / "d" / "report.json"));
  EXPECT_EQ(rep.at("n_train"), 500);

  r = run(dir, "calibrate --synth-samples 8 --out e");
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(error_line(r).at("error"), "degenerate_excitation");
}
