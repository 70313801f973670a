#include "doctest.h"

#include <functional>
#include <string>

#include "streamflow/config.hpp"
#include "streamflow/errors.hpp"

using namespace streamflow;

namespace {

bool throws_with(const std::function<void()>& f, const std::string& fragment) {
  try {
    f();
  } catch (const ConfigError& e) {
    return std::string(e.what()).find(fragment) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("toml scalars, tables and arrays") {
  const Json j = parse_toml(R"(
# comment
title = "run"   # trailing
n = 42
x = -1.5e-3
flag = true
[a.b]
list = [1, 2,
        3]
nested = [[1.0, 2.0], [3.0, 4.0]]
inline = { type = "se", alpha = 1.0, l = 0.3 }
c.d = 'lit'
)");
  CHECK(j["title"] == "run");
  CHECK(j["n"] == 42);
  CHECK(j["n"].is_number_integer());
  CHECK(j["x"].get<double>() == -1.5e-3);
  CHECK(j["flag"] == true);
  CHECK(j["a"]["b"]["list"] == Json::array({1, 2, 3}));
  CHECK(j["a"]["b"]["nested"][1][0] == 3.0);
  CHECK(j["a"]["b"]["inline"]["type"] == "se");
  CHECK(j["a"]["b"]["c"]["d"] == "lit");
}

TEST_CASE("toml errors") {
  CHECK_THROWS_AS(parse_toml("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[t]\nx = 1\n[t]\ny = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("a = \"open\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("= 3\n"), ConfigError);
}

TEST_CASE("toml single values") {
  CHECK(parse_toml_value("3") == 3);
  CHECK(parse_toml_value("0.25").get<double>() == 0.25);
  CHECK(parse_toml_value("false") == false);
  CHECK(parse_toml_value("gp_ot_cfm") == "gp_ot_cfm");
  CHECK(parse_toml_value("[32, 32]") == Json::array({32, 32}));
}

TEST_CASE("defaults survive a round trip through json") {
  const ExperimentConfig d;
  const ExperimentConfig back = experiment_from_json(to_json(d));
  CHECK(to_json(back) == to_json(d));
  CHECK(config_hash(back) == config_hash(d));
  CHECK(config_hash(d).size() == 16);
}

TEST_CASE("file values and overrides") {
  const auto c = parse_experiment_config(R"(
seeds = [1, 2, 3]
[train]
algorithm = "gp_ot_cfm"
kernel = { type = "se", alpha = 2.0, l = 0.5 }
hidden = [32]
[integrator]
method = "dopri5"
)",
                                         {"train.iterations=7", "train.variance=increasing", "train.variance_param=0.5"});
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.train.algorithm == Algorithm::gp_ot_cfm);
  CHECK(c.train.gp_kernel == KernelSpec::squared_exponential(2.0, 0.5));
  CHECK(c.train.hidden == std::vector<int>{32});
  CHECK(c.train.iterations == 7);
  CHECK(c.train.variance.kind == VarianceKind::increasing);
  CHECK(c.train.variance.param == 0.5);
  CHECK(c.integrator.method == Method::dopri5);
  CHECK(config_hash(c) != config_hash(ExperimentConfig{}));
}

TEST_CASE("partial kernel tables update the current kernel") {
  const auto c = parse_experiment_config("[train]\nkernel = { l = 0.7 }\n");
  CHECK(c.train.gp_kernel == KernelSpec::squared_exponential(0.1, 0.7));
}

TEST_CASE("strict keys and types") {
  CHECK(throws_with([] { parse_experiment_config("[train]\nbogus = 1\n"); }, "unknown key 'train.bogus'"));
  CHECK(throws_with([] { parse_experiment_config("wat = 1\n"); }, "unknown key 'wat'"));
  CHECK(throws_with([] { parse_experiment_config("", {"data.nope=3"}); }, "data.nope"));
  CHECK(throws_with([] { parse_experiment_config("[train]\niterations = \"many\"\n"); }, "train.iterations"));
  CHECK(throws_with([] { parse_experiment_config("[train]\nalgorithm = \"sgd\"\n"); }, "sgd"));
  CHECK(throws_with([] { parse_experiment_config("", {"noequals"}); }, "key=value"));
  CHECK(throws_with([] { parse_experiment_config("[eval]\nw2_size = 5000\n"); }, "w2_size"));
  CHECK(throws_with([] { parse_experiment_config("seeds = []\n"); }, "seeds"));
}

TEST_CASE("kernel json round trip") {
  const std::vector<KernelSpec> ks{
      KernelSpec::squared_exponential(1.0, 0.3), KernelSpec::linear(1.0, 2.0), KernelSpec::dot_increasing(0.5),
      KernelSpec::dot_decreasing(0.5),
      KernelSpec::sum({KernelSpec::linear(1.0, 1.0), KernelSpec::nugget(0.1)})};
  for (const auto& k : ks) {
    CAPTURE(k.describe());
    CHECK(kernel_from_json(kernel_to_json(k)) == k);
  }
  CHECK_THROWS_AS(kernel_from_json(Json{{"type", "matern"}}), ConfigError);
  CHECK_THROWS_AS(kernel_from_json(Json{{"type", "se"}, {"alpha", -1.0}, {"l", 0.3}}), ConfigError);
}

TEST_CASE("distribution presets and tables") {
  CHECK(distribution_from_json(Json("two_gaussians"), "d").means == two_gaussians().means);
  CHECK(distribution_from_json(Json("three_gaussians"), "d").means.rows() == 3);
  const auto d = two_gaussians();
  const auto back = distribution_from_json(distribution_to_json(d), "d");
  CHECK(back.means == d.means);
  CHECK(back.weights == d.weights);
  CHECK_THROWS_AS(distribution_from_json(Json("banana"), "d"), ConfigError);
}

TEST_CASE("layout names") {
  for (auto l : {Layout::pair, Layout::paired_v, Layout::crossing}) CHECK(parse_layout(to_string(l)) == l);
  CHECK_THROWS_AS(parse_layout("spiral"), ConfigError);
}
