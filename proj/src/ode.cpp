#include "streamflow/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "streamflow/errors.hpp"
#include "streamflow/parallel.hpp"

namespace streamflow {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[6][6] = {
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Fifth minus fourth order weights.
constexpr std::array<double, 7> kE{-71.0 / 57600, 0.0, 71.0 / 16695, -71.0 / 1920, 17253.0 / 339200, -22.0 / 525,
                                   1.0 / 40};
// Dense output: y(t + theta h) = y + h * sum_i K_i * (P_i . [theta, theta^2, theta^3, theta^4]).
constexpr double kP[7][4] = {
    {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799},
    {0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072},
    {0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632},
    {0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844},
    {0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423},
};

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kBeta = 0.04;  // PI memory exponent
constexpr double kStopTol = 1e-12;

using Trace = std::vector<std::pair<double, Matrix>>;

double rms(const Matrix& m) { return std::sqrt(m.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, m.size()))); }

void check_stops(double t_a, std::span<const double> stops) {
  if (stops.empty()) throw DomainError("need at least one stop");
  double prev = t_a;
  for (double s : stops) {
    if (!(s > prev)) throw DomainError("stops must be sorted and lie after the start time");
    prev = s;
  }
}

std::vector<Matrix> fixed_step(const BatchField& f, const Matrix& x0, double t_a, std::span<const double> stops,
                               const IntegratorSpec& spec, Trace* trace) {
  const double t_b = stops.back();
  // Uniform grid over [t_a, t_b] merged with the stops.
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(spec.n_steps) + stops.size() + 1);
  for (int k = 0; k <= spec.n_steps; ++k)
    grid.push_back(t_a + (t_b - t_a) * static_cast<double>(k) / static_cast<double>(spec.n_steps));
  for (double s : stops) {
    auto it = std::lower_bound(grid.begin(), grid.end(), s - kStopTol);
    if (it != grid.end() && std::abs(*it - s) <= kStopTol)
      *it = s;
    else
      grid.insert(it, s);
  }

  std::vector<Matrix> out;
  Matrix x = x0;
  if (trace) trace->emplace_back(t_a, x);
  std::size_t next_stop = 0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t = grid[k];
    const double h = grid[k + 1] - t;
    if (spec.method == Method::euler) {
      x += h * f(t, x);
    } else {
      const Matrix k1 = f(t, x);
      const Matrix k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
      const Matrix k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
      const Matrix k4 = f(t + h, x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (trace) trace->emplace_back(grid[k + 1], x);
    while (next_stop < stops.size() && grid[k + 1] == stops[next_stop]) {
      out.push_back(x);
      ++next_stop;
    }
  }
  return out;
}

double initial_step(const BatchField& f, const Matrix& x0, const Matrix& f0, double t0, double span,
                    const IntegratorSpec& spec) {
  const Matrix scale = (spec.atol + spec.rtol * x0.array().abs()).matrix();
  const double d0 = rms(x0.cwiseQuotient(scale));
  const double d1 = rms(f0.cwiseQuotient(scale));
  const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  const Matrix f1 = f(t0 + h0, x0 + h0 * f0);
  const double d2 = rms((f1 - f0).cwiseQuotient(scale)) / h0;
  const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::min({100.0 * h0, h1, span});
}

std::vector<Matrix> dopri5(const BatchField& f, const Matrix& x0, double t_a, std::span<const double> stops,
                           const IntegratorSpec& spec, Trace* trace) {
  const double t_b = stops.back();
  std::vector<Matrix> out;
  std::size_t next_stop = 0;
  std::array<Matrix, 7> k;

  double t = t_a;
  Matrix x = x0;
  k[0] = f(t, x);
  double h = spec.initial_step > 0.0 ? std::min(spec.initial_step, t_b - t_a)
                                     : initial_step(f, x, k[0], t, t_b - t_a, spec);
  double err_prev = 1e-4;
  if (trace) trace->emplace_back(t, x);

  for (int steps = 0; next_stop < stops.size(); ++steps) {
    if (steps >= spec.max_steps)
      throw StiffnessError(t, "dopri5 exceeded " + std::to_string(spec.max_steps) + " steps; last accepted t = " +
                                  std::to_string(t));
    const bool last = t + h >= t_b;
    if (last) h = t_b - t;
    if (h <= 1e-14 * std::max(1.0, std::abs(t)))
      throw StiffnessError(t, "dopri5 step size underflow at t = " + std::to_string(t));

    for (int s = 1; s < 7; ++s) {
      Matrix xs = x;
      for (int j = 0; j < s; ++j)
        if (kA[s - 1][j] != 0.0) xs += h * kA[s - 1][j] * k[j];
      if (s == 6) {
        k[6] = f(t + h, xs);
        // FSAL: stage 6 state is the fifth-order solution.
        Matrix err = Matrix::Zero(x.rows(), x.cols());
        for (int j = 0; j < 7; ++j)
          if (kE[j] != 0.0) err += h * kE[j] * k[j];
        const Matrix scale = (spec.atol + spec.rtol * x.array().abs().max(xs.array().abs())).matrix();
        const double err_norm = rms(err.cwiseQuotient(scale));
        if (!std::isfinite(err_norm)) throw NumericalError("dopri5 produced a non-finite state");

        if (err_norm <= 1.0) {
          double factor = err_norm == 0.0
                              ? kMaxFactor
                              : kSafety * std::pow(err_norm, -(0.2 - 0.75 * kBeta)) * std::pow(err_prev, kBeta);
          factor = std::clamp(factor, kMinFactor, kMaxFactor);
          err_prev = std::max(err_norm, 1e-4);
          const double t_new = last ? t_b : t + h;
          // Dense output for every stop inside (t, t_new].
          while (next_stop < stops.size() && stops[next_stop] <= t_new + kStopTol) {
            const double stop = stops[next_stop];
            if (stop >= t_new) {
              out.push_back(xs);
            } else {
              const double theta = (stop - t) / h;
              const double powers[4] = {theta, theta * theta, theta * theta * theta, theta * theta * theta * theta};
              Matrix y = x;
              for (int j = 0; j < 7; ++j) {
                const double w = kP[j][0] * powers[0] + kP[j][1] * powers[1] + kP[j][2] * powers[2] +
                                 kP[j][3] * powers[3];
                if (w != 0.0) y += h * w * k[j];
              }
              out.push_back(std::move(y));
            }
            ++next_stop;
          }
          t = t_new;
          x = std::move(xs);
          k[0] = k[6];
          if (trace) trace->emplace_back(t, x);
          h *= factor;
        } else {
          h *= std::clamp(kSafety * std::pow(err_norm, -0.2), kMinFactor, 1.0);
        }
      } else {
        k[s] = f(t + kC[s] * h, xs);
      }
    }
  }
  return out;
}

BatchField model_field(const VectorFieldModel& model, const Matrix& covariates) {
  return [&model, &covariates](double t, const Matrix& x) {
    return forward_batch(model, Vector::Constant(x.rows(), t), x, covariates);
  };
}

void check_generate(const VectorFieldModel& model, const Matrix& source, std::span<const double> stops,
                    const Matrix& covariates, double t_start) {
  if (source.cols() != model.arch.state_dim) throw DimensionError("source dimension does not match the model");
  if (model.arch.covariate_dim > 0 && (covariates.rows() != source.rows() || covariates.cols() != model.arch.covariate_dim))
    throw DimensionError("covariate-conditioned model needs one covariate row per source row");
  if (!(t_start >= 0.0 && t_start < 1.0)) throw DomainError("generation start time must lie in [0,1)");
  check_stops(t_start, stops);
  if (stops.back() > 1.0) throw DomainError("stops must lie within (t_start, 1]");
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::euler: return "euler";
    case Method::rk4: return "rk4";
    case Method::dopri5: return "dopri5";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "euler") return Method::euler;
  if (name == "rk4") return Method::rk4;
  if (name == "dopri5") return Method::dopri5;
  throw ConfigError("unknown integrator '" + name + "' (expected euler, rk4 or dopri5)");
}

void IntegratorSpec::validate() const {
  if (n_steps < 1) throw ConfigError("integrator needs n_steps >= 1");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("integrator tolerances must be > 0");
  if (max_steps < 1) throw ConfigError("integrator needs max_steps >= 1");
}

std::vector<Matrix> integrate_to_stops(const BatchField& field, const Matrix& x0, double t_a,
                                       std::span<const double> stops, const IntegratorSpec& spec, Trace* trace) {
  spec.validate();
  check_stops(t_a, stops);
  if (spec.method == Method::dopri5) return dopri5(field, x0, t_a, stops, spec, trace);
  return fixed_step(field, x0, t_a, stops, spec, trace);
}

std::vector<TrajectoryPoint> integrate(const Field& field, const Vector& x0, double t_a, double t_b,
                                       const IntegratorSpec& spec) {
  if (!(t_a < t_b) || t_a < 0.0 || t_b > 1.0) throw DomainError("integration span must satisfy 0 <= t_a < t_b <= 1");
  BatchField batch = [&field](double t, const Matrix& x) -> Matrix {
    return field(t, x.row(0).transpose()).transpose();
  };
  Trace trace;
  const double stop[1] = {t_b};
  integrate_to_stops(batch, Matrix(x0.transpose()), t_a, stop, spec, &trace);
  std::vector<TrajectoryPoint> out;
  out.reserve(trace.size());
  for (auto& [t, x] : trace) out.push_back({t, x.row(0).transpose()});
  return out;
}

std::vector<Matrix> generate(const VectorFieldModel& model, const Matrix& source, const IntegratorSpec& spec,
                             std::span<const double> stops, const Matrix& covariates, double t_start) {
  check_generate(model, source, stops, covariates, t_start);
  spec.validate();
  const Eigen::Index n = source.rows();
  const Eigen::Index block = spec.method == Method::dopri5 ? 1 : static_cast<Eigen::Index>(kRowBlock);
  const Eigen::Index blocks = (n + block - 1) / block;
  std::vector<Matrix> out(stops.size(), Matrix(n, source.cols()));
  const bool conditioned = model.arch.covariate_dim > 0;

  std::vector<std::string> errors(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index r0 = b * block;
    const Eigen::Index m = std::min(block, n - r0);
    try {
      const Matrix cov = conditioned ? Matrix(covariates.middleRows(r0, m)) : Matrix();
      const auto snaps = integrate_to_stops(model_field(model, cov), source.middleRows(r0, m), t_start, stops, spec);
      for (std::size_t s = 0; s < snaps.size(); ++s) out[s].middleRows(r0, m) = snaps[s];
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(b)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw NumericalError("generation failed: " + e);
  return out;
}

namespace reference {

std::vector<Matrix> generate(const VectorFieldModel& model, const Matrix& source, const IntegratorSpec& spec,
                             std::span<const double> stops, const Matrix& covariates, double t_start) {
  check_generate(model, source, stops, covariates, t_start);
  std::vector<Matrix> out(stops.size(), Matrix(source.rows(), source.cols()));
  const bool conditioned = model.arch.covariate_dim > 0;
  for (Eigen::Index r = 0; r < source.rows(); ++r) {
    const Vector c = conditioned ? Vector(covariates.row(r).transpose()) : Vector();
    BatchField f = [&](double t, const Matrix& x) -> Matrix {
      return streamflow::forward(model, t, x.row(0).transpose(), c).transpose();
    };
    const auto snaps = integrate_to_stops(f, source.row(r), t_start, stops, spec);
    for (std::size_t s = 0; s < snaps.size(); ++s) out[s].row(r) = snaps[s].row(0);
  }
  return out;
}

}  // namespace reference
}  // namespace streamflow
