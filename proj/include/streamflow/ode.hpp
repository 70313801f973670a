#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "streamflow/types.hpp"
#include "streamflow/vector_field.hpp"

namespace streamflow {

enum class Method { euler, rk4, dopri5 };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct IntegratorSpec {
  Method method = Method::rk4;
  int n_steps = 100;  // fixed-step methods, over the whole span
  double rtol = 1e-5;
  double atol = 1e-5;
  int max_steps = 100000;
  double initial_step = 0.0;  // <= 0 selects the starting step automatically

  void validate() const;
};

// Velocity of every row of a state matrix; rows are independent systems.
using BatchField = std::function<Matrix(double t, const Matrix& x)>;
using Field = std::function<Vector(double t, const Vector& x)>;

struct TrajectoryPoint {
  double t;
  Vector x;
};

// Integrates dx/dt = field(t, x) from t_a to t_b. The trajectory holds every
// accepted step, starting with (t_a, x0) and ending at t_b.
std::vector<TrajectoryPoint> integrate(const Field& field, const Vector& x0, double t_a, double t_b,
                                       const IntegratorSpec& spec);

// Integrates a whole state matrix as one system from t_a through the sorted
// stops (each > t_a) and returns the state at every stop. Fixed-step methods
// place a step boundary on each stop; dopri5 interpolates with its
// fourth-order dense output.
std::vector<Matrix> integrate_to_stops(const BatchField& field, const Matrix& x0, double t_a,
                                       std::span<const double> stops, const IntegratorSpec& spec,
                                       std::vector<std::pair<double, Matrix>>* trace = nullptr);

// Pushes source rows through the learned flow starting at t_start and
// snapshots them at every stop (sorted, within (t_start, 1]). Fixed-step
// methods integrate row blocks with batched evaluation; dopri5 controls the
// step size of every row separately. Both run OpenMP-parallel over rows.
std::vector<Matrix> generate(const VectorFieldModel& model, const Matrix& source, const IntegratorSpec& spec,
                             std::span<const double> stops, const Matrix& covariates = Matrix(),
                             double t_start = 0.0);

namespace reference {
// Row-by-row integration with single-sample evaluation, serial.
std::vector<Matrix> generate(const VectorFieldModel& model, const Matrix& source, const IntegratorSpec& spec,
                             std::span<const double> stops, const Matrix& covariates = Matrix(),
                             double t_start = 0.0);
}  // namespace reference

}  // namespace streamflow
