#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "oracles.hpp"

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ADEB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, UsageAndHelp) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("synth"), 2);  // missing --out
  EXPECT_EQ(run("pipeline --no-such-flag 1"), 2);
}

TEST(Cli, StageErrorExitCode) {
  oracle::TempDir tmp("cli-err");
  EXPECT_EQ(run("features --field " + q(tmp / "missing.adf")), 1);
  EXPECT_EQ(run("pipeline --eb-avg -1 --output " + q(tmp / "o")), 1);
}

TEST(Cli, StepByStepWorkflow) {
  oracle::TempDir tmp("cli-flow");
  const auto field = tmp / "f.adf";
  ASSERT_EQ(run("synth --role baryon_density --dims 64 --seed 4 -o " + q(field)), 0);
  ASSERT_TRUE(std::filesystem::exists(field));
  const std::string common = "--field " + q(field) + " --block 16";
  EXPECT_EQ(run("features " + common + " -o " + q(tmp / "feat.csv")), 0);
  EXPECT_EQ(run("calibrate " + common + " -o " + q(tmp / "m.json")), 0);
  ASSERT_EQ(run("plan " + common + " --rate-model " + q(tmp / "m.json") + " -o " + q(tmp / "p.csv")), 0);
  ASSERT_EQ(run("compress " + common + " --plan " + q(tmp / "p.csv") + " -o " + q(tmp / "a.adlc")), 0);
  ASSERT_EQ(run("decompress " + q(tmp / "a.adlc") + " -o " + q(tmp / "r.adf")), 0);
  EXPECT_EQ(run("verify " + q(field) + " " + q(tmp / "r.adf")), 0);
  EXPECT_EQ(run("verify " + q(field) + " " + q(tmp / "r.adf") + " --tol 0"), 3);
  EXPECT_EQ(run("report " + q(field) + " " + q(tmp / "r.adf") + " --block 16 --plan " + q(tmp / "p.csv") +
                " -o " + q(tmp / "rep")),
            0);
  EXPECT_TRUE(std::filesystem::exists(tmp / "rep"));
}

TEST(Cli, PipelineExitCodes) {
  oracle::TempDir tmp("cli-pipe");
  const std::string base = "pipeline --dims 32 --block 16 --role temperature --preset smooth --output ";
  EXPECT_EQ(run(base + q(tmp / "ok")), 0);
  EXPECT_TRUE(std::filesystem::exists(tmp / "ok" / "summary.txt"));
  EXPECT_EQ(run(base + q(tmp / "fail") + " --eb-avg 50 --tol 0"), 3);
}
