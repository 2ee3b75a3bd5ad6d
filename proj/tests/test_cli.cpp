#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_app.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ola::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("ola_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                                 "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

}  // namespace

TEST(Cli, RingsCsv) {
  const Outcome r = run({"rings", "--preset", "moderate", "--levels", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "level,r_b,r_d");
  EXPECT_NE(r.out.find("1,1.4484136487558028,1.7320508075688772"), std::string::npos);
}

TEST(Cli, RingsReportsDeath) {
  const Outcome r = run({"rings", "--epsilon", "0", "--levels", "10"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("died_at,2,"), std::string::npos);
}

TEST(Cli, MrttWarnsOnInfeasible) {
  const Outcome r = run({"mrtt", "--dr-grid", "1,2.5"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("1,1.6895863751582665"), std::string::npos);
  EXPECT_NE(r.err.find("2.5"), std::string::npos);
}

TEST(Cli, FesCsv) {
  const Outcome r = run({"fes", "--dr-grid", "0.5", "--levels", "50,100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("dr,levels,fes\n0.5,50,0.24"), std::string::npos);
}

TEST(Cli, UnitsTable) {
  const Outcome r = run({"units"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("5,-20.97,0.0025,-90,20,"), std::string::npos);
  const Outcome one = run({"units", "--tx-power-dbm", "-43.98", "--density", "0.25"});
  EXPECT_NE(one.out.find("custom,-43.98,0.25,-90,2,1.00013"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, ola::cli::kConfigError);
  EXPECT_EQ(run({"rings", "--levels", "abc"}).code, ola::cli::kConfigError);
  EXPECT_EQ(run({"rings", "--preset", "huge"}).code, ola::cli::kConfigError);
  EXPECT_EQ(run({"fes", "--dr-grid", "1", "--levels", "50"}).code, ola::cli::kOk);
  EXPECT_EQ(run({"--config", "/nonexistent/cfg.json", "rings"}).code, ola::cli::kIoError);
  EXPECT_EQ(run({"--out", "/nonexistent/dir/out.csv", "rings"}).code, ola::cli::kIoError);
}

TEST(Cli, InfeasibleModelExitCode) {
  TempDir dir;
  write(dir / "opt.json", R"({"constraint": {"kind": "type2", "levels": 2, "network_radius": 1e6},
  "optimizer": {"generations": 2, "population_size": 4}})");
  const Outcome r = run({"--config", (dir / "opt.json").string(), "optimize"});
  EXPECT_EQ(r.code, ola::cli::kInfeasible) << r.err;
}

TEST(Cli, UnknownKeyIsLineAnchored) {
  TempDir dir;
  write(dir / "bad.json", "{\n  \"levels\": 4,\n  \"params\": {\n    \"decode_treshold\": 1\n  }\n}\n");
  const Outcome r = run({"--config", (dir / "bad.json").string(), "rings"});
  EXPECT_EQ(r.code, ola::cli::kConfigError);
  EXPECT_NE(r.err.find("bad.json:4:"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("decode_treshold"), std::string::npos) << r.err;
}

TEST(Cli, MalformedJsonIsLineAnchored) {
  TempDir dir;
  write(dir / "broken.json", "{\n  \"levels\": 4,\n  \"params\": {,\n}\n");
  const Outcome r = run({"--config", (dir / "broken.json").string(), "rings"});
  EXPECT_EQ(r.code, ola::cli::kConfigError);
  EXPECT_NE(r.err.find("broken.json:3:"), std::string::npos) << r.err;
}

TEST(Cli, WrongTypeIsRejected) {
  TempDir dir;
  write(dir / "t.json", "{\n  \"levels\": \"many\"\n}\n");
  const Outcome r = run({"--config", (dir / "t.json").string(), "rings"});
  EXPECT_EQ(r.code, ola::cli::kConfigError);
  EXPECT_NE(r.err.find("t.json:2:"), std::string::npos) << r.err;
}

TEST(Cli, ManifestRerunReproducesOutput) {
  TempDir dir;
  const auto out = (dir / "psb.csv").string();
  const Outcome first = run({"--seed", "9", "--out", out, "psb", "--trials", "2"});
  ASSERT_EQ(first.code, 0) << first.err;
  const std::string manifest = slurp(out + ".manifest.json");
  EXPECT_NE(manifest.find("\"subcommand\": \"psb\""), std::string::npos);
  EXPECT_EQ(manifest.find("threads"), std::string::npos);

  const auto again = (dir / "again.csv").string();
  const Outcome second = run({"--config", out + ".manifest.json", "--out", again, "psb"});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(slurp(out), slurp(again));
}

TEST(Cli, ManifestForOtherSubcommandIsRejected) {
  TempDir dir;
  const auto out = (dir / "r.csv").string();
  ASSERT_EQ(run({"--out", out, "rings", "--levels", "2"}).code, 0);
  EXPECT_EQ(run({"--config", out + ".manifest.json", "mrtt"}).code, ola::cli::kConfigError);
}

TEST(Cli, OptimizeDeterministicAcrossThreads) {
  TempDir dir;
  write(dir / "opt.json", R"({"constraint": {"kind": "type2", "levels": 6, "network_radius": 6},
  "optimizer": {"generations": 10, "population_size": 12}})");
  const auto cfg = (dir / "opt.json").string();
  const Outcome a = run({"--seed", "4", "--threads", "1", "--config", cfg, "optimize"});
  const Outcome b = run({"--seed", "4", "--threads", "3", "--config", cfg, "optimize"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("\"fes_profile\""), std::string::npos);
}

#ifdef OLA_CLI_PATH
TEST(Cli, BinaryRuns) {
  const std::string cmd = std::string(OLA_CLI_PATH) + " mrtt --dr-grid 1 > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}
#endif
