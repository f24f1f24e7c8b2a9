#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(DATD_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("datd_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST(Cli, RunWritesInventory) {
  const fs::path out = fresh("run");
  ASSERT_EQ(run("run --seed 1 --scheme both --out " + out.string()), 0);
  for (const char* f : {"per_task.csv", "credibility.csv", "weights.csv", "per_task.dat",
                        "credibility.dat", "weights.dat", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_EQ(count_lines(out / "per_task.csv"), 101);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["config"]["seed"], "1");
  EXPECT_EQ(manifest["scheme"], "both");
}

TEST(Cli, RunTwiceByteIdentical) {
  const fs::path a = fresh("det_a");
  const fs::path b = fresh("det_b");
  ASSERT_EQ(run("run --seed 5 --out " + a.string()), 0);
  ASSERT_EQ(run("run --seed 5 --out " + b.string()), 0);
  for (const char* f : {"per_task.csv", "credibility.csv", "weights.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, ManifestReproducesRun) {
  const fs::path a = fresh("repro_a");
  const fs::path b = fresh("repro_b");
  ASSERT_EQ(run("run --seed 8 --gamma 0.3 --tasks 30 --out " + a.string()), 0);
  ASSERT_EQ(run("run --config " + (a / "manifest.json").string() + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "per_task.csv"), slurp(b / "per_task.csv"));
}

TEST(Cli, TauHighValueCount) {
  const fs::path out = fresh("tau");
  ASSERT_EQ(run("run --tau 0.3 --seed 2 --out " + out.string()), 0);
  std::ifstream in(out / "per_task.csv");
  std::string line;
  std::getline(in, line);
  int high = 0;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string cell;
    for (int i = 0; i < 3; ++i) std::getline(row, cell, ',');
    high += cell == "1";
  }
  // Binomial(100, 0.3): mean 30, sd 4.6.
  EXPECT_GE(high, 16);
  EXPECT_LE(high, 44);
}

TEST(Cli, SingleScheme) {
  const fs::path out = fresh("single");
  ASSERT_EQ(run("run --scheme datd --tasks 5 --out " + out.string()), 0);
  std::ifstream in(out / "per_task.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  // estimate_baseline is empty.
  std::stringstream cells(row);
  std::string cell;
  for (int i = 0; i < 6; ++i) std::getline(cells, cell, ',');
  EXPECT_EQ(cell, "");
}

TEST(Cli, OutFromEnvironment) {
  const fs::path out = fresh("env");
  const std::string cmd = "DATD_OUT_DIR=" + out.string() + " " + DATD_CLI +
                          " run --tasks 3 > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(out / "per_task.csv"));
}

TEST(Cli, SweepRows) {
  const fs::path out = fresh("sweep");
  ASSERT_EQ(run("sweep --param gamma --values 0.2,0.4,0.6,0.8 --seeds 2 --tasks 10 --out " +
                out.string()),
            0);
  EXPECT_EQ(count_lines(out / "sweep.csv"), 9);
  EXPECT_TRUE(fs::exists(out / "sweep.dat"));
}

TEST(Cli, UsageErrors) {
  const fs::path out = fresh("usage");
  EXPECT_EQ(run("sweep --param gamma --values \"\" --out " + out.string()), 2);
  EXPECT_EQ(run("sweep --param gamma --values , --out " + out.string()), 2);
  EXPECT_EQ(run("sweep --param delta --values 0.1 --out " + out.string()), 2);
  EXPECT_EQ(run("run --bogus"), 2);
  EXPECT_EQ(run("run --scheme neither"), 2);
  EXPECT_EQ(run("run --alpha 1.5 --out " + out.string()), 2);
  EXPECT_EQ(run("run --config /nonexistent/file.cfg"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST(Cli, IoFailure) {
  const fs::path blocker = fresh("blocker");
  std::ofstream(blocker) << "file, not a directory";
  EXPECT_EQ(run("run --tasks 2 --out " + (blocker / "sub").string()), 1);
}

TEST(Cli, Table2) { EXPECT_EQ(run("table2"), 0); }

TEST(Cli, Trace) {
  const fs::path out = fresh("trace");
  ASSERT_EQ(run("trace --node 2 --tasks 10 --out " + out.string()), 0);
  EXPECT_EQ(count_lines(out / "trace.csv"), 11);
  EXPECT_EQ(run("trace --node 99 --out " + out.string()), 2);
}
