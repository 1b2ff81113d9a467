/*
 * Copyright 2026 The adace Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "adace/adace.hpp"

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("adace_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout and stderr captured to log.txt.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" + std::string(ADACE_CLI_PATH) + "' " + args + " > '" +
                            (dir_ / "log.txt").string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::string log() const { return read(dir_ / "log.txt"); }
  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  fs::path dir_;
};

const std::string kToy = ADACE_TEST_DATA_DIR "/toy.csv";

TEST_F(Cli, EstimateIsDeterministic) {
  const std::string args = "estimate " + kToy + " --seed 1 --M 10 --B 8 --empty-stratum skip --out ";
  ASSERT_EQ(run(args + out("a")), 0) << log();
  ASSERT_EQ(run(args + out("b")), 0) << log();
  for (const char* f : {"estimates.csv", "inference.csv"})
    EXPECT_EQ(read(dir_ / "a" / f), read(dir_ / "b" / f)) << f;
  EXPECT_NE(read(dir_ / "a" / "estimates.csv").find("S++,E0+E1,d,"), std::string::npos);
}

TEST_F(Cli, EmptyStratumIsAnErrorByDefault) {
  EXPECT_EQ(run("estimate " + kToy + " --seed 1 --M 10 --B 8 --out " + out("a")), 1);
  EXPECT_NE(log().find("empty stratum S++"), std::string::npos) << log();
}

TEST_F(Cli, MissingInputNamesThePath) {
  EXPECT_NE(run("estimate " + out("absent.csv") + " --out " + out("a")), 0);
  EXPECT_NE(log().find("absent.csv"), std::string::npos) << log();
}

TEST_F(Cli, InvalidDatasetIsRejected) {
  std::ofstream(dir_ / "bad.csv") << "subject_id,arm,x1,z1,i1,y\nA,0,1.0,0.5,1,\n";
  EXPECT_NE(run("estimate " + out("bad.csv") + " --out " + out("a")), 0);
  EXPECT_NE(log().find("adace: error:"), std::string::npos) << log();
}

TEST_F(Cli, BaselineOnlyDiffersFromFull) {
  adace::save_csv(adace::generate_trial(adace::SettingConfig::setting2(), 3).dataset, out("trial.csv"));
  const std::string args = "estimate " + out("trial.csv") + " --stratum all --M 20 --variance none --out ";
  ASSERT_EQ(run(args + out("full")), 0) << log();
  ASSERT_EQ(run(args + out("base") + " --mode baseline-only"), 0) << log();
  const auto full = read(dir_ / "full" / "estimates.csv");
  const auto base = read(dir_ / "base" / "estimates.csv");
  EXPECT_NE(full, base);
  EXPECT_EQ(std::count(full.begin(), full.end(), '\n'), 10);
}

TEST_F(Cli, ImputedDatasetsWritten) {
  ASSERT_EQ(run("estimate " + kToy + " --seed 3 --M 2 --variance none --imputed-out " + out("imp.csv") +
                " --out " + out("a")),
            0)
      << log();
  const auto imp = read(dir_ / "imp.csv");
  EXPECT_FALSE(imp.empty());
}

TEST_F(Cli, SimulateIsReproducible) {
  const std::string args = "simulate --setting setting1 --R 2 --M 3 --B 2 --oracle-n 1e4 --seed 5 --out ";
  ASSERT_EQ(run(args + out("a")), 0) << log();
  ASSERT_EQ(run(args + out("b")), 0) << log();
  for (const char* f : {"report.csv", "oracle.csv"})
    EXPECT_EQ(read(dir_ / "a" / f), read(dir_ / "b" / f)) << f;
  const auto report = read(dir_ / "a" / "report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')),
            "parameter,true,estimate,bias,boot_se,boot_cp,rubin_se,rubin_cp");
}

TEST_F(Cli, NullSimulationReportsRejectionForDifferenceOnly) {
  ASSERT_EQ(run("simulate --setting setting2 --null --R 2 --M 3 --B 2 --oracle-n 1e4 --out " + out("a")), 0)
      << log();
  std::istringstream in(read(dir_ / "a" / "report.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "reject_rate");
  while (std::getline(in, line)) {
    const bool filled = line.back() != ',';
    EXPECT_EQ(filled, line.rfind("mu_d,++,", 0) == 0) << line;
  }
}

TEST_F(Cli, OracleCommand) {
  ASSERT_EQ(run("oracle --setting setting1 --n 1e5 --seed 2 --out " + out("a")), 0) << log();
  std::istringstream in(read(dir_ / "a" / "oracle.csv"));
  std::string line;
  std::getline(in, line);
  const std::vector<double> expected{-0.102, -1.588, -1.487, -0.192, -1.638, -1.446};
  for (double e : expected) {
    ASSERT_TRUE(std::getline(in, line));
    // parameter names contain one comma
    const auto first = line.find(',', line.find(',') + 1);
    EXPECT_NEAR(std::stod(line.substr(first + 1)), e, 0.05) << line;
  }
}

TEST_F(Cli, ConfigFileMatchesPreset) {
  std::ofstream(dir_ / "s2.cfg") << adace::SettingConfig::setting2().to_key_value();
  ASSERT_EQ(run("oracle --config " + out("s2.cfg") + " --n 20000 --out " + out("a")), 0) << log();
  ASSERT_EQ(run("oracle --setting setting2 --n 20000 --out " + out("b")), 0) << log();
  EXPECT_EQ(read(dir_ / "a" / "oracle.csv"), read(dir_ / "b" / "oracle.csv"));
}

TEST_F(Cli, BadConfigRejected) {
  std::ofstream(dir_ / "bad.cfg") << "gamma9 = 1\n";
  EXPECT_EQ(run("oracle --config " + out("bad.cfg") + " --n 1000 --out " + out("a")), 1);
  EXPECT_NE(log().find("gamma9"), std::string::npos) << log();
  EXPECT_NE(run("oracle --setting setting7 --out " + out("a")), 0);
  EXPECT_NE(run("oracle --setting setting1 --config " + out("bad.cfg") + " --out " + out("a")), 0);
}

TEST_F(Cli, ManifestReplayReproducesOutputs) {
  ASSERT_EQ(run("estimate " + kToy + " --seed 3 --M 6 --B 4 --stratum all --empty-stratum skip --out " +
                out("a")),
            0)
      << log();
  const auto manifest = read(dir_ / "a" / "manifest.json");
  for (const char* key : {"\"command\"", "\"seed\"", "\"args\"", "\"version\"", "\"wall_clock_seconds\""})
    EXPECT_NE(manifest.find(key), std::string::npos) << key;
  ASSERT_EQ(run("--from-manifest " + out("a") + "/manifest.json --out " + out("b")), 0) << log();
  for (const char* f : {"estimates.csv", "inference.csv"})
    EXPECT_EQ(read(dir_ / "a" / f), read(dir_ / "b" / f)) << f;

  ASSERT_EQ(run("simulate --setting setting2 --R 2 --M 3 --B 2 --oracle-n 1e4 --seed 9 --out " + out("s")), 0);
  ASSERT_EQ(run("--from-manifest " + out("s") + "/manifest.json --out " + out("t")), 0) << log();
  EXPECT_EQ(read(dir_ / "s" / "report.csv"), read(dir_ / "t" / "report.csv"));
}

TEST_F(Cli, ThreadCountDoesNotChangeOutputs) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"estimate " + kToy + " --seed 3 --M 8 --B 6 --stratum all --empty-stratum skip",
       {"estimates.csv", "inference.csv"}},
      {"simulate --setting setting1 --R 3 --M 3 --B 3 --oracle-n 2e5 --comparator --seed 4",
       {"report.csv", "oracle.csv"}},
      {"oracle --setting setting2-null --n 3e5 --seed 4", {"oracle.csv"}},
  };
  for (const auto& [cmd, files] : commands) {
    ASSERT_EQ(run(cmd + " --threads 1 --out " + out("t1")), 0) << log();
    ASSERT_EQ(run(cmd + " --threads 4 --out " + out("t4")), 0) << log();
    ASSERT_EQ(run(cmd + " --out " + out("env"), "ADACE_THREADS=3"), 0) << log();
    for (const auto& f : files) {
      EXPECT_EQ(read(dir_ / "t1" / f), read(dir_ / "t4" / f)) << cmd << " " << f;
      EXPECT_EQ(read(dir_ / "t1" / f), read(dir_ / "env" / f)) << cmd << " " << f;
    }
    EXPECT_NE(read(dir_ / "env" / "manifest.json").find("\"threads\": 3"), std::string::npos);
  }
}

TEST_F(Cli, UsageErrors) {
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("estimate"), 0);
  EXPECT_NE(run("estimate " + kToy + " --M 0 --out " + out("a")), 0);
  EXPECT_NE(run("estimate " + kToy + " --stratum s** --out " + out("a")), 0);
  EXPECT_EQ(run("--help"), 0);
}

}  // namespace
