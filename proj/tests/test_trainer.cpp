#include "doctest.h"

#include <sstream>

#include "streamflow/datasets.hpp"
#include "streamflow/errors.hpp"
#include "streamflow/gp_stream.hpp"
#include "streamflow/ode.hpp"
#include "streamflow/trainer.hpp"

using namespace streamflow;

namespace {

TrainConfig small_config(Algorithm a, std::size_t iterations) {
  TrainConfig c;
  c.algorithm = a;
  c.iterations = iterations;
  c.batch_size = 64;
  c.hidden = {32, 32};
  return c;
}

double sd_at(const KernelSpec& k, double t) {
  ObservationSet obs;
  obs.times = {0.0, 1.0};
  obs.values = Matrix::Zero(2, 1);
  const std::vector<double> grid{t};
  return path_stats(build_gram(k, obs.times), MeanFunction::zero(), obs, grid).front().sd_s;
}

}  // namespace

TEST_CASE("scheme kernels") {
  // At l = 0.3 the endpoint pins absorb the dot-product term and the
  // increasing profile is not visible (0.16882 at 0.05 vs 0.16746 at 0.95).
  const SquaredExponential se{1.0, 0.5};
  CHECK(make_scheme_kernel(se, {}) == KernelSpec::squared_exponential(1.0, 0.5));
  const auto inc = make_scheme_kernel(se, {VarianceKind::increasing, 1.0});
  const auto dec = make_scheme_kernel(se, {VarianceKind::decreasing, 1.0});
  CHECK(sd_at(inc, 0.95) > sd_at(inc, 0.05));
  CHECK(sd_at(dec, 0.05) > sd_at(dec, 0.95));
  CHECK(sd_at(inc, 0.2) == doctest::Approx(sd_at(dec, 0.8)));
  const auto con = make_scheme_kernel(se, {VarianceKind::constant, 0.2});
  CHECK(con.has_nugget());
  CHECK(sd_at(con, 0.5) > sd_at(KernelSpec::squared_exponential(1.0, 0.5), 0.5));
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.algorithm = Algorithm::i_cfm;
  c.variance = {VarianceKind::increasing, 1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.algorithm = Algorithm::ot_cfm;
  c.batch_size = 5000;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.gp_kernel = KernelSpec::linear(1.0, 1.0);
  c.variance = {VarianceKind::constant, 0.1};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_algorithm("gp_ot_cfm") == Algorithm::gp_ot_cfm);
  CHECK_THROWS_AS(parse_algorithm("cfm"), ConfigError);
  CHECK_THROWS_AS(parse_variance("loud"), ConfigError);
}

TEST_CASE("point masses give the constant unit field") {
  TrainConfig c = small_config(Algorithm::i_cfm, 2000);
  c.adam.lr = 3e-3;
  const SourceSampler zero = [](Eigen::Index n, Rng&) { return Matrix(Matrix::Zero(n, 1)); };
  const Matrix target = Matrix::Ones(1, 1);
  Rng rng(1);
  const auto res = train(c, zero, target, rng);
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    Vector x(1);
    x << t;
    CHECK(std::abs(forward(res.model, t, x)(0) - 1.0) <= 0.05);
  }
  IntegratorSpec spec;
  const std::vector<double> stops{1.0};
  const auto out = generate(res.model, Matrix::Zero(5, 1), spec, stops);
  CHECK((out.front().array() - 1.0).abs().maxCoeff() <= 0.05);
}

TEST_CASE("zero iterations return the initial model") {
  TrainConfig c = small_config(Algorithm::gp_i_cfm, 0);
  const Matrix target = Rng(2).normal_matrix(10, 2);
  Rng a(3), b(3);
  const auto res = train(c, gaussian_source(2), target, a);
  Architecture arch;
  arch.hidden = c.hidden;
  CHECK(res.model.params == VectorFieldModel::initialize(arch, b).params);
  CHECK(res.loss_trace.empty());
}

TEST_CASE("training is deterministic per seed") {
  for (auto a : {Algorithm::i_cfm, Algorithm::gp_i_cfm, Algorithm::ot_cfm, Algorithm::gp_ot_cfm}) {
    CAPTURE(to_string(a));
    const TrainConfig c = small_config(a, 200);
    const Matrix target = Rng(4).normal_matrix(30, 2);
    Rng r1(5), r2(5);
    const auto x = train(c, gaussian_source(2), target, r1);
    const auto y = train(c, gaussian_source(2), target, r2);
    CHECK(x.model.params == y.model.params);
    REQUIRE(x.loss_trace.size() == 2);
    CHECK(x.loss_trace[1].iter == 200);
  }
}

TEST_CASE("i_cfm and gp_i_cfm with the linear kernel give the same losses") {
  TrainConfig lin = small_config(Algorithm::i_cfm, 300);
  lin.loss_every = 10;
  TrainConfig gp = lin;
  gp.algorithm = Algorithm::gp_i_cfm;
  gp.gp_kernel = KernelSpec::linear(1.0, 1.0);
  TrainConfig slow = lin;
  slow.linear_fast_path = false;
  Rng data_rng(6);
  const Matrix target = two_gaussians().sample(100, data_rng);
  Rng r1(7), r2(7), r3(7);
  const auto a = train(lin, gaussian_source(2), target, r1);
  const auto b = train(gp, gaussian_source(2), target, r2);
  const auto c = train(slow, gaussian_source(2), target, r3);
  REQUIRE(a.loss_trace.size() == b.loss_trace.size());
  for (std::size_t i = 0; i < a.loss_trace.size(); ++i) {
    CHECK(b.loss_trace[i].loss == doctest::Approx(a.loss_trace[i].loss).epsilon(1e-9));
    CHECK(c.loss_trace[i].loss == doctest::Approx(a.loss_trace[i].loss).epsilon(1e-9));
  }
}

TEST_CASE("two-marginal training reduces exactly to train") {
  for (auto a : {Algorithm::gp_i_cfm, Algorithm::gp_ot_cfm}) {
    const TrainConfig c = small_config(a, 150);
    const Matrix target = Rng(8).normal_matrix(40, 2);
    std::vector<int> ids(40);
    for (int i = 0; i < 40; ++i) ids[static_cast<std::size_t>(i)] = i;
    GroupedTupleSampler sampler({target}, ids, gaussian_source(2));
    Rng r1(9), r2(9);
    const auto x = train(c, gaussian_source(2), target, r1);
    const auto y = train_multimarginal(c, {0.0, 1.0}, sampler, r2);
    CHECK(x.model.params == y.model.params);
  }
}

TEST_CASE("multi-marginal input validation") {
  const TrainConfig c = small_config(Algorithm::gp_i_cfm, 10);
  GroupedTupleSampler sampler({Matrix::Zero(3, 2), Matrix::Zero(3, 2)}, {0, 1, 2});
  Rng rng(0);
  CHECK_THROWS_AS(train_multimarginal(c, {0.0, 0.5, 1.0}, sampler, rng), DimensionError);
  CHECK_THROWS_AS(train_multimarginal(c, {0.0, 1.2}, sampler, rng), DomainError);
  CHECK_THROWS_AS(train(c, gaussian_source(2), Matrix(0, 2), rng), DimensionError);
}

TEST_CASE("loss falls on a stationary problem") {
  TrainConfig c = small_config(Algorithm::gp_i_cfm, 2000);
  Rng data_rng(10);
  const Matrix target = two_gaussians().sample(100, data_rng);
  Rng rng(11);
  const auto res = train(c, gaussian_source(2), target, rng);
  REQUIRE(res.loss_trace.size() == 20);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 5; ++i) first += res.loss_trace[i].loss;
  for (std::size_t i = 15; i < 20; ++i) last += res.loss_trace[i].loss;
  CHECK(last <= first);
}

TEST_CASE("covariate mode and per-batch times") {
  TrainConfig c = small_config(Algorithm::gp_i_cfm, 50);
  c.covariate = CovariateMode::x0;
  c.t_per_batch = true;
  const Matrix target = Rng(12).normal_matrix(20, 2);
  Rng rng(13);
  const auto res = train(c, gaussian_source(2), target, rng);
  CHECK(res.model.arch.covariate_dim == 2);
  std::ostringstream os;
  write_loss_csv(os, res.loss_trace);
  CHECK(os.str().rfind("iter,loss\n", 0) == 0);
}

TEST_CASE("sigma adds a nugget to the linear path") {
  TrainConfig c = small_config(Algorithm::i_cfm, 0);
  c.sigma = 1e-3;
  CHECK(c.stream_kernel().has_nugget());
  c.sigma = 0.0;
  CHECK(c.stream_kernel() == KernelSpec::linear(1.0, 1.0));
}
