#include "doctest.h"

#include <cmath>
#include <sstream>

#include "oracles/dense.hpp"
#include "streamflow/errors.hpp"
#include "streamflow/gp_stream.hpp"

using namespace streamflow;

namespace {

ObservationSet obs1d(std::vector<double> times, std::vector<double> values) {
  ObservationSet obs;
  obs.times = std::move(times);
  obs.values.resize(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) obs.values(static_cast<Eigen::Index>(i), 0) = values[i];
  return obs;
}

}  // namespace

TEST_CASE("linear kernel reproduces the straight interpolant with zero covariance") {
  const auto obs = obs1d({0.0, 1.0}, {0.0, 2.0});
  const auto g = build_gram(KernelSpec::linear(1.0, 1.0), obs.times);
  const auto cg = condition(g, MeanFunction::zero(), obs, 0.25);
  CHECK(cg.mean(0, 0) == doctest::Approx(0.5));
  CHECK(cg.mean(1, 0) == doctest::Approx(2.0));
  CHECK(cg.cov.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conditioning at an observation time returns the observed value") {
  const auto obs = obs1d({0.0, 0.4, 1.0}, {0.3, -1.2, 2.0});
  for (const auto& k : {KernelSpec::squared_exponential(1.0, 0.3),
                        KernelSpec::sum({KernelSpec::squared_exponential(1.0, 0.5), KernelSpec::dot_increasing(1.0)}),
                        KernelSpec::sum({KernelSpec::squared_exponential(1.0, 0.5), KernelSpec::linear(1.0, 2.0)})}) {
    const auto g = build_gram(k, obs.times);
    for (std::size_t j = 0; j < obs.times.size(); ++j) {
      const auto cg = condition(g, MeanFunction::zero(), obs, obs.times[j]);
      CHECK(cg.mean(0, 0) == doctest::Approx(obs.values(static_cast<Eigen::Index>(j), 0)).epsilon(1e-6));
      CHECK(cg.cov(0, 0) <= 1e-4);
    }
  }
}

TEST_CASE("SE conditioning matches the frozen dense oracle") {
  const auto k = KernelSpec::squared_exponential(1.0, 0.3);
  {
    const auto obs = obs1d({0.0, 1.0}, {0.0, 0.0});
    const auto cg = condition(build_gram(k, obs.times), MeanFunction::zero(), obs, 0.5);
    CHECK(std::abs(cg.mean(0, 0)) <= 1e-12);
    CHECK(std::abs(cg.mean(1, 0)) <= 1e-12);
    CHECK(cg.cov(0, 0) == doctest::Approx(8.761258395673442e-01).epsilon(1e-10));
    CHECK(std::abs(cg.cov(0, 1)) <= 1e-10);
    CHECK(cg.cov(1, 1) == doctest::Approx(7.258158867032058e+00).epsilon(1e-10));
  }
  {
    const auto obs = obs1d({0.0, 1.0}, {1.0, -2.0});
    const auto cg = condition(build_gram(k, obs.times), MeanFunction::zero(), obs, 0.3);
    CHECK(cg.mean(0, 0) == doctest::Approx(0.4795162659551602).epsilon(1e-10));
    CHECK(cg.mean(1, 0) == doctest::Approx(-3.0618667417710705).epsilon(1e-10));
    CHECK(cg.cov(0, 0) == doctest::Approx(0.6281030016164412).epsilon(1e-10));
    CHECK(cg.cov(0, 1) == doctest::Approx(1.1933657552248602).epsilon(1e-10));
    CHECK(cg.cov(1, 1) == doctest::Approx(6.754157411095967).epsilon(1e-10));
  }
  {
    const auto obs = obs1d({0.0, 0.4, 1.0}, {0.5, 1.5, -1.0});
    const auto cg =
        condition(build_gram(KernelSpec::squared_exponential(2.0, 0.5), obs.times), MeanFunction::zero(), obs, 0.7);
    CHECK(cg.mean(0, 0) == doctest::Approx(0.5679261928129233).epsilon(1e-9));
    CHECK(cg.mean(1, 0) == doctest::Approx(-5.154109996576735).epsilon(1e-9));
    CHECK(cg.cov(0, 0) == doctest::Approx(0.06538810418649943).epsilon(1e-8));
    CHECK(cg.cov(0, 1) == doctest::Approx(0.05452044760899153).epsilon(1e-8));
    CHECK(cg.cov(1, 1) == doctest::Approx(0.11858461789388741).epsilon(1e-8));
  }
}

TEST_CASE("conditioning matches the dense joint-covariance oracle on random problems") {
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng.index(3));
    std::vector<double> times{0.0};
    for (int j = 1; j + 1 < m; ++j) times.push_back(times.back() + (1.0 - times.back()) * (0.2 + 0.6 * rng.uniform()));
    times.push_back(1.0);
    Vector values(m);
    for (int j = 0; j < m; ++j) values(j) = 2.0 * rng.normal();
    const double alpha = 0.5 + 1.5 * rng.uniform();
    const double l = 0.2 + 0.6 * rng.uniform();
    KernelSpec k = KernelSpec::squared_exponential(alpha, l);
    switch (trial % 3) {
      case 1: k = KernelSpec::sum({k, KernelSpec::dot_increasing(rng.uniform() + 0.1)}); break;
      case 2: k = KernelSpec::sum({k, KernelSpec::dot_decreasing(rng.uniform() + 0.1)}); break;
      default: break;
    }
    const double t = rng.uniform();
    ObservationSet obs;
    obs.times = times;
    obs.values = values;
    const auto cg = condition(build_gram(k, times), MeanFunction::zero(), obs, t);
    const auto dense = oracle::dense_condition(k, times, values, t);
    worst = std::max({worst, (cg.mean.col(0) - dense.mean).cwiseAbs().maxCoeff(),
                      (cg.cov - dense.cov).cwiseAbs().maxCoeff()});
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("streams are pinned at every observation time") {
  const std::vector<double> times{0.0, 0.35, 1.0};
  const auto obs = obs1d(times, {0.0, 1.0, -1.0});
  for (const auto& k : {KernelSpec::squared_exponential(1.0, 0.3),
                        KernelSpec::sum({KernelSpec::squared_exponential(1.0, 0.3), KernelSpec::dot_increasing(1.0)}),
                        KernelSpec::sum({KernelSpec::squared_exponential(1.0, 0.3), KernelSpec::dot_decreasing(2.0)})}) {
    CAPTURE(k.describe());
    const auto stats = path_stats(build_gram(k, times), MeanFunction::zero(), obs, times);
    for (const auto& row : stats) CHECK(row.sd_s <= 1e-6);
  }
}

TEST_CASE("linear kernel recovers the OT path for random triples") {
  Rng rng(11);
  const auto g = build_gram(KernelSpec::linear(1.0, 1.0), {0.0, 1.0});
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x0 = 3.0 * rng.normal(), x1 = 3.0 * rng.normal(), t = rng.uniform();
    const auto obs = obs1d({0.0, 1.0}, {x0, x1});
    const auto cg = condition(g, MeanFunction::zero(), obs, t);
    worst = std::max({worst, std::abs(cg.mean(0, 0) - ((1 - t) * x0 + t * x1)), std::abs(cg.mean(1, 0) - (x1 - x0)),
                      cg.cov.cwiseAbs().maxCoeff()});
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("times outside [0, 1] are rejected") {
  const auto obs = obs1d({0.0, 1.0}, {0.0, 1.0});
  const auto g = build_gram(KernelSpec::squared_exponential(1.0, 0.3), obs.times);
  CHECK_THROWS_AS(condition(g, MeanFunction::zero(), obs, 1.2), DomainError);
  CHECK_THROWS_AS(condition(g, MeanFunction::zero(), obs, -0.1), DomainError);
}

TEST_CASE("sample_point with zero covariance returns the mean") {
  ConditionalGaussian cg;
  cg.mean.resize(2, 2);
  cg.mean << 1.0, 2.0, 3.0, 4.0;
  cg.cov.setZero();
  cg.factor.setZero();
  Rng rng(3);
  const auto [s, sdot] = sample_point(cg, rng);
  CHECK(s(0) == 1.0);
  CHECK(s(1) == 2.0);
  CHECK(sdot(0) == 3.0);
  CHECK(sdot(1) == 4.0);
}

TEST_CASE("sample_point with identity covariance has unit moments") {
  ConditionalGaussian cg;
  cg.mean = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, 1);
  cg.cov.setIdentity();
  cg.factor.setIdentity();
  Rng rng(42);
  const int n = 100000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Matrix2d outer = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    const auto [s, sdot] = sample_point(cg, rng);
    const Eigen::Vector2d z(s(0), sdot(0));
    sum += z;
    outer += z * z.transpose();
  }
  const Eigen::Vector2d mean = sum / n;
  const Eigen::Matrix2d cov = outer / n - mean * mean.transpose();
  CHECK(mean.cwiseAbs().maxCoeff() <= 0.02);
  CHECK((cov - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("sampling is deterministic per seed") {
  const auto obs = obs1d({0.0, 1.0}, {0.0, 1.0});
  const auto cg = condition(build_gram(KernelSpec::squared_exponential(1.0, 0.3), obs.times), MeanFunction::zero(),
                            obs, 0.4);
  Rng a(42), b(42);
  const auto x = sample_point(cg, a);
  const auto y = sample_point(cg, b);
  CHECK(x.first == y.first);
  CHECK(x.second == y.second);
}

TEST_CASE("path_stats envelopes") {
  const auto obs = obs1d({0.0, 1.0}, {0.0, 2.0});
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);

  const auto lin = path_stats(build_gram(KernelSpec::linear(1.0, 1.0), obs.times), MeanFunction::zero(), obs, grid);
  for (const auto& r : lin) CHECK(r.sd_s == 0.0);

  const auto se =
      path_stats(build_gram(KernelSpec::squared_exponential(1.0, 0.3), obs.times), MeanFunction::zero(), obs, grid);
  CHECK(se.front().sd_s <= 1e-6);
  CHECK(se.back().sd_s <= 1e-6);
  for (std::size_t i = 1; i + 1 < se.size(); ++i) CHECK(se[i].sd_s > 0.0);
  // Rises to the midpoint, then falls.
  for (std::size_t i = 1; i <= 10; ++i) CHECK(se[i].sd_s >= se[i - 1].sd_s);
  for (std::size_t i = 11; i < se.size(); ++i) CHECK(se[i].sd_s <= se[i - 1].sd_s);

  const std::vector<double> one{0.37};
  const auto bundle = build_gram(KernelSpec::squared_exponential(1.0, 0.3), obs.times);
  const auto single = path_stats(bundle, MeanFunction::zero(), obs, one);
  const auto cg = condition(bundle, MeanFunction::zero(), obs, 0.37);
  REQUIRE(single.size() == 1);
  CHECK(single[0].mean_s == doctest::Approx(cg.mean(0, 0)));
  CHECK(single[0].sd_s == doctest::Approx(std::sqrt(cg.cov(0, 0))));
  CHECK(single[0].mean_sdot == doctest::Approx(cg.mean(1, 0)));
  CHECK(single[0].sd_sdot == doctest::Approx(std::sqrt(cg.cov(1, 1))));

  std::ostringstream os;
  write_path_stats_csv(os, single);
  CHECK(os.str().rfind("t,dim,mean_s,sd_s,mean_sdot,sd_sdot\n", 0) == 0);
}

TEST_CASE("linear fast path equals the GP path") {
  Rng data(5);
  const Matrix x0 = data.normal_matrix(300, 3), x1 = data.normal_matrix(300, 3);
  Vector t(300);
  for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = data.uniform();
  const std::vector<Matrix> slices{x0, x1};
  Rng a(9), b(9);
  const auto gp = sample_streams(build_gram(KernelSpec::linear(1.0, 1.0), {0.0, 1.0}), MeanFunction::zero(), slices, t, a);
  const auto fast = linear_interpolant_streams(x0, x1, t, b);
  CHECK((gp.s - fast.s).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((gp.sdot - fast.sdot).cwiseAbs().maxCoeff() <= 1e-12);
  // Same number of normals consumed.
  CHECK(a.normal() == b.normal());
}

TEST_CASE("sample_streams matches conditioning moments") {
  const auto k = KernelSpec::squared_exponential(1.0, 0.3);
  const auto bundle = build_gram(k, {0.0, 0.5, 1.0});
  const Eigen::Index n = 40000;
  std::vector<Matrix> slices{Matrix::Constant(n, 1, 1.0), Matrix::Constant(n, 1, -1.0), Matrix::Constant(n, 1, 2.0)};
  const Vector t = Vector::Constant(n, 0.25);
  Rng rng(1);
  const auto streams = sample_streams(bundle, MeanFunction::zero(), slices, t, rng);
  const auto cg = condition(bundle, MeanFunction::zero(), obs1d({0.0, 0.5, 1.0}, {1.0, -1.0, 2.0}), 0.25);
  const double ms = streams.s.mean(), md = streams.sdot.mean();
  CHECK(ms == doctest::Approx(cg.mean(0, 0)).epsilon(0.02));
  CHECK(md == doctest::Approx(cg.mean(1, 0)).epsilon(0.02));
  const double vs = (streams.s.array() - ms).square().mean();
  CHECK(vs == doctest::Approx(cg.cov(0, 0)).epsilon(0.05));
}
