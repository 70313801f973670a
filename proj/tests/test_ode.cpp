#include "doctest.h"

#include <cmath>
#include <numeric>

#include "streamflow/errors.hpp"
#include "streamflow/ode.hpp"
#include "streamflow/trainer.hpp"

using namespace streamflow;

namespace {

IntegratorSpec spec_of(Method m, int steps = 100, double tol = 1e-5) {
  IntegratorSpec s;
  s.method = m;
  s.n_steps = steps;
  s.rtol = s.atol = tol;
  return s;
}

const Field exp_field = [](double, const Vector& x) { return Vector(x); };
const Field rotation = [](double, const Vector& x) {
  Vector v(2);
  v << x(1), -x(0);
  return v;
};

double exp_error(Method m, int steps) {
  const auto tr = integrate(exp_field, Vector::Ones(1), 0.0, 1.0, spec_of(m, steps));
  return std::abs(tr.back().x(0) - std::exp(1.0));
}

double slope(Method m) {
  // Least-squares slope of log error against log h over h = 1/10 ... 1/160.
  std::vector<double> lh, le;
  for (int n : {10, 20, 40, 80, 160}) {
    lh.push_back(std::log(1.0 / n));
    le.push_back(std::log(exp_error(m, n)));
  }
  const double mx = std::accumulate(lh.begin(), lh.end(), 0.0) / 5, my = std::accumulate(le.begin(), le.end(), 0.0) / 5;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 5; ++i) {
    num += (lh[i] - mx) * (le[i] - my);
    den += (lh[i] - mx) * (lh[i] - mx);
  }
  return num / den;
}

}  // namespace

TEST_CASE("constant field is integrated exactly by every method") {
  const Field one = [](double, const Vector&) { return Vector(Vector::Ones(2)); };
  for (auto m : {Method::euler, Method::rk4, Method::dopri5}) {
    CAPTURE(to_string(m));
    const auto tr = integrate(one, Vector::Zero(2), 0.0, 1.0, spec_of(m));
    CHECK(tr.front().t == 0.0);
    CHECK(tr.back().t == 1.0);
    CHECK((tr.back().x.array() - 1.0).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("rk4 on x' = x reaches e") { CHECK(exp_error(Method::rk4, 100) <= 1e-8); }

TEST_CASE("dopri5 follows a rotation within tolerance") {
  Vector x0(2);
  x0 << 1.0, 0.0;
  const auto tr = integrate(rotation, x0, 0.0, 1.0, spec_of(Method::dopri5, 1, 1e-7));
  const double err = std::max(std::abs(tr.back().x(0) - std::cos(1.0)), std::abs(tr.back().x(1) + std::sin(1.0)));
  CHECK(err <= 1e-6);
  CHECK(err <= 10 * 1e-7);
  CHECK(tr.size() > 2);
}

TEST_CASE("convergence orders") {
  CHECK(std::abs(slope(Method::euler) - 1.0) <= 0.2);
  CHECK(std::abs(slope(Method::rk4) - 4.0) <= 0.2);
}

TEST_CASE("sub-interval spans") {
  const auto tr = integrate(exp_field, Vector::Ones(1), 0.25, 0.75, spec_of(Method::rk4, 50));
  CHECK(tr.front().t == 0.25);
  CHECK(tr.back().t == 0.75);
  CHECK(tr.back().x(0) == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
  CHECK_THROWS_AS(integrate(exp_field, Vector::Ones(1), 0.5, 0.5, spec_of(Method::rk4)), DomainError);
  CHECK_THROWS_AS(integrate(exp_field, Vector::Ones(1), 0.0, 1.5, spec_of(Method::rk4)), DomainError);
}

TEST_CASE("dense output of dopri5 is accurate between steps") {
  const BatchField f = [](double, const Matrix& x) { return Matrix(x); };
  const std::vector<double> stops{0.13, 0.5, 0.77, 1.0};
  const auto out = integrate_to_stops(f, Matrix::Ones(3, 1), 0.0, stops, spec_of(Method::dopri5, 1, 1e-10));
  for (std::size_t k = 0; k < stops.size(); ++k) CHECK(out[k](0, 0) == doctest::Approx(std::exp(stops[k])).epsilon(1e-8));
}

TEST_CASE("fixed-step methods land on every stop") {
  const BatchField f = [](double, const Matrix& x) { return Matrix(Matrix::Ones(x.rows(), x.cols())); };
  const std::vector<double> stops{0.5, 1.0};
  for (auto m : {Method::euler, Method::rk4, Method::dopri5}) {
    std::vector<std::pair<double, Matrix>> trace;
    const auto out = integrate_to_stops(f, Matrix::Zero(2, 2), 0.0, stops, spec_of(m, 7), &trace);
    CHECK((out[0].array() - 0.5).abs().maxCoeff() <= 1e-12);
    CHECK((out[1].array() - 1.0).abs().maxCoeff() <= 1e-12);
    if (m != Method::dopri5) {
      bool hit = false;
      for (const auto& [t, x] : trace) hit = hit || t == 0.5;
      CHECK(hit);
    }
  }
}

TEST_CASE("exceeding max_steps is a stiffness error with the last accepted time") {
  IntegratorSpec s = spec_of(Method::dopri5, 1, 1e-10);
  s.max_steps = 5;
  try {
    integrate(rotation, Vector::Ones(2), 0.0, 1.0, s);
    FAIL("expected StiffnessError");
  } catch (const StiffnessError& e) {
    CHECK(e.last_accepted_t() > 0.0);
    CHECK(e.last_accepted_t() < 1.0);
  }
}

TEST_CASE("integrator spec validation") {
  CHECK_THROWS_AS(spec_of(Method::rk4, 0).validate(), ConfigError);
  CHECK_THROWS_AS(spec_of(Method::dopri5, 1, 0.0).validate(), ConfigError);
  CHECK(parse_method("dopri5") == Method::dopri5);
  CHECK_THROWS_AS(parse_method("rk45"), ConfigError);
}

TEST_CASE("generate snapshots") {
  auto model = VectorFieldModel::zeros(Architecture{});
  // Output bias of one: the constant field (1, 1).
  const auto layout = layer_layout(model.arch);
  model.params.segment(static_cast<Eigen::Index>(layout.back().biases), 2).setOnes();
  const Matrix src = Matrix::Zero(10, 2);
  const std::vector<double> one{1.0}, two{0.5, 1.0};
  for (auto m : {Method::euler, Method::rk4, Method::dopri5}) {
    const auto a = generate(model, src, spec_of(m), one);
    REQUIRE(a.size() == 1);
    CHECK((a[0].array() - 1.0).abs().maxCoeff() <= 1e-12);
    const auto b = generate(model, src, spec_of(m), two);
    REQUIRE(b.size() == 2);
    CHECK((b[0].array() - 0.5).abs().maxCoeff() <= 1e-12);
    CHECK((b[1].array() - 1.0).abs().maxCoeff() <= 1e-12);
  }
  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(generate(model, src, spec_of(Method::rk4), bad), DomainError);
  const std::vector<double> outside{1.5};
  CHECK_THROWS_AS(generate(model, src, spec_of(Method::rk4), outside), DomainError);
}

TEST_CASE("generate with stop 1 equals integrate") {
  Rng rng(1);
  const auto model = VectorFieldModel::initialize(Architecture{}, rng);
  const Matrix src = rng.normal_matrix(4, 2);
  const std::vector<double> one{1.0};
  const auto g = generate(model, src, spec_of(Method::rk4), one);
  for (Eigen::Index r = 0; r < 4; ++r) {
    const Field f = [&](double t, const Vector& x) { return forward(model, t, x); };
    const auto tr = integrate(f, src.row(r).transpose(), 0.0, 1.0, spec_of(Method::rk4));
    CHECK((g[0].row(r).transpose() - tr.back().x).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("dopri5 and fine rk4 agree on a trained toy model") {
  TrainConfig c;
  c.algorithm = Algorithm::gp_i_cfm;
  c.iterations = 300;
  c.hidden = {32, 32};
  Rng rng(2);
  const Matrix target = rng.normal_matrix(50, 2).array() + 2.0;
  const auto res = train(c, gaussian_source(2), target, rng);
  const Matrix src = rng.normal_matrix(200, 2);
  const std::vector<double> one{1.0};
  const auto a = generate(res.model, src, spec_of(Method::dopri5, 1, 1e-8), one);
  const auto b = generate(res.model, src, spec_of(Method::rk4, 1000), one);
  const double rms = std::sqrt((a[0] - b[0]).squaredNorm() / static_cast<double>(a[0].size()));
  CHECK(rms <= 1e-4);
}

TEST_CASE("generation is deterministic") {
  Rng rng(3);
  const auto model = VectorFieldModel::initialize(Architecture{}, rng);
  const Matrix src = rng.normal_matrix(100, 2);
  const std::vector<double> stops{0.3, 1.0};
  for (auto m : {Method::rk4, Method::dopri5}) {
    const auto a = generate(model, src, spec_of(m), stops);
    const auto b = generate(model, src, spec_of(m), stops);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
  }
}
