#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <set>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "streamflow/cli.hpp"
#include "streamflow/config.hpp"
#include "streamflow/errors.hpp"
#include "streamflow/eval.hpp"
#include "streamflow/io.hpp"

namespace fs = std::filesystem;
using namespace streamflow;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("streamflow_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

void write(const fs::path& p, const std::string& text) { write_text_file(p.string(), text); }

int run(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

// Exit status of the installed binary, when its path is known.
int run_binary(const std::string& args) {
  const char* exe = std::getenv("STREAMFLOW_CLI");
  REQUIRE(exe != nullptr);
  const int status = std::system((std::string(exe) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const char* kTinyConfig = R"(
seeds = [0]
[train]
iterations = 50
hidden = [16]
batch_size = 32
[eval]
test_size = 100
w2_size = 100
)";

}  // namespace

TEST_CASE("seed and number lists") {
  CHECK(cli::parse_seed_list("0:3") == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(cli::parse_seed_list("4,1") == std::vector<std::uint64_t>{4, 1});
  CHECK_THROWS_AS(cli::parse_seed_list("3:1"), ConfigError);
  CHECK_THROWS_AS(cli::parse_seed_list("a"), ConfigError);
  CHECK(cli::parse_number_list("0.5,1") == std::vector<double>{0.5, 1.0});
}

TEST_CASE("invalid config key exits with code 2") {
  const auto dir = scratch("badkey");
  write(dir / "bad.toml", "[train]\nbogus = 1\n");
  CHECK(run_binary("train " + (dir / "bad.toml").string() + " --out " + (dir / "o").string()) == cli::kExitConfig);
  CHECK(run({"train", (dir / "bad.toml").string()}) == cli::kExitConfig);
  CHECK(run({"frobnicate"}) == cli::kExitConfig);
  CHECK(run({"train", (dir / "missing.toml").string()}) == cli::kExitConfig);
}

TEST_CASE("train is deterministic and writes its artifacts") {
  const auto dir = scratch("train");
  write(dir / "c.toml", kTinyConfig);
  REQUIRE(run({"train", (dir / "c.toml").string(), "--out", (dir / "a").string()}) == cli::kExitOk);
  REQUIRE(run({"train", (dir / "c.toml").string(), "--out", (dir / "b").string()}) == cli::kExitOk);
  for (const char* f : {"checkpoint.sfck", "loss.csv", "dataset_train.csv", "dataset_test.csv", "manifest.json"})
    CHECK(fs::exists(dir / "a" / "seed0" / f));
  CHECK(fs::exists(dir / "a" / "config.json"));
  CHECK(slurp(dir / "a" / "seed0" / "checkpoint.sfck") == slurp(dir / "b" / "seed0" / "checkpoint.sfck"));
  CHECK(slurp(dir / "a" / "seed0" / "loss.csv").rfind("iter,loss\n", 0) == 0);

  SUBCASE("generate writes one file per stop") {
    const std::string ck = (dir / "a" / "seed0" / "checkpoint.sfck").string();
    REQUIRE(run({"generate", ck, "--n", "37", "--stops", "0.5,1", "--out", (dir / "g").string()}) == cli::kExitOk);
    const std::string half = slurp(dir / "g" / "samples_t0.5.csv");
    const std::string one = slurp(dir / "g" / "samples_t1.csv");
    CHECK(line_count(half) == 1 + 37 * 2);
    CHECK(line_count(one) == 1 + 37 * 2);
    REQUIRE(run({"generate", ck, "--n", "5", "--format", "binary", "--out", (dir / "gb").string()}) == cli::kExitOk);
    CHECK(fs::exists(dir / "gb" / "samples_t1.sflw"));
    std::string w2line;
    REQUIRE(run({"eval", "--samples", (dir / "g" / "samples_t1.csv").string(), "--reference",
                 (dir / "g" / "samples_t1.csv").string()},
                &w2line) == cli::kExitOk);
    CHECK(w2line == "w2,0\n");
    CHECK(run({"generate", ck, "--stops", "1.5", "--out", (dir / "bad").string()}) == cli::kExitConfig);
  }
}

TEST_CASE("pathstats on the linear kernel has zero spread") {
  std::string csv;
  REQUIRE(run({"pathstats", "--kernel", "{ type = \"linear\", sigma_a = 1.0, sigma_b = 1.0 }", "--times", "0,1",
               "--values", "0;2", "--grid", "5"},
              &csv) == cli::kExitOk);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,dim,mean_s,sd_s,mean_sdot,sd_sdot");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    std::istringstream ls(line);
    std::vector<double> f;
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(std::stod(cell));
    REQUIRE(f.size() == 6);
    CHECK(f[2] == doctest::Approx(2.0 * f[0]));
    CHECK(f[3] == 0.0);
    CHECK(f[4] == doctest::Approx(2.0));
    CHECK(f[5] == 0.0);
  }
  CHECK(rows == 5);
}

TEST_CASE("bench grid over three seeds") {
  const auto dir = scratch("bench");
  std::string out;
  const int code = run({"bench", "table1", "--seeds", "0:3", "--quiet", "--out", (dir / "b").string(), "--set",
                        "train.iterations=20", "--set", "train.hidden=[8]", "--set", "eval.test_size=60", "--set",
                        "eval.w2_size=60", "--set", "integrator.n_steps=10"},
                       &out);
  REQUIRE(code == cli::kExitOk);
  std::ifstream mi(dir / "b" / "metrics.csv");
  const auto runs = read_metrics_csv(mi);
  CHECK(runs.size() == 12);
  CHECK(line_count(slurp(dir / "b" / "summary.csv")) == 1 + 4);
  // Paired seeding: every algorithm sees the same data for a given seed.
  const Json manifest = Json::parse(slurp(dir / "b" / "manifest.json"));
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::set<std::string> hashes;
    for (const auto& entry : fs::directory_iterator(dir / "b" / "runs")) {
      const std::string name = entry.path().filename().string();
      if (name.size() > 5 && name.substr(name.size() - 5) == "seed" + std::to_string(seed))
        hashes.insert(Json::parse(slurp(entry.path() / "run.json"))["data_hash"].get<std::string>());
    }
    CHECK(hashes.size() == 1);
  }
  CHECK(manifest.contains("config_hash"));

  const std::vector<std::string> tiny{"--quiet", "--set", "train.iterations=5", "--set", "eval.test_size=20",
                                      "--set", "eval.w2_size=20", "--set", "integrator.n_steps=5"};
  std::vector<std::string> sub{"bench", "table1", "--seeds", "0,1", "--variants", "gp_i_cfm", "--out",
                               (dir / "sub").string()};
  sub.insert(sub.end(), tiny.begin(), tiny.end());
  REQUIRE(run(sub) == cli::kExitOk);
  std::ifstream si(dir / "sub" / "metrics.csv");
  const auto sub_runs = read_metrics_csv(si);
  CHECK(sub_runs.size() == 2);
  CHECK(sub_runs[0].algorithm == "gp_i_cfm");
  sub[5] = "sgd_cfm";
  CHECK(run(sub) == cli::kExitConfig);
}

TEST_CASE("minimal 1D config completes within a minute") {
  const auto dir = scratch("oned");
  write(dir / "c.toml", R"(
[data]
source = { type = "std_gaussian", dim = 1 }
target = { type = "mixture", means = [[-2.0], [2.0]], sds = [0.5, 0.5], weights = [0.5, 0.5] }
[train]
iterations = 500
)");
  const auto start = std::chrono::steady_clock::now();
  REQUIRE(run_binary("train " + (dir / "c.toml").string() + " --out " + (dir / "o").string()) == cli::kExitOk);
  REQUIRE(run_binary("generate " + (dir / "o" / "seed0" / "checkpoint.sfck").string() + " --n 200 --out " +
                     (dir / "g").string()) == cli::kExitOk);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs <= 60.0);
  CHECK(line_count(slurp(dir / "g" / "samples_t1.csv")) == 1 + 200);
}
