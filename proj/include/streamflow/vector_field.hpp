#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "streamflow/types.hpp"

namespace streamflow {

enum class Activation { tanh, selu };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

// MLP v(t, x[, c]) with input layout [t, x, c] and a linear output layer.
struct Architecture {
  int state_dim = 2;
  int covariate_dim = 0;
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::tanh;

  int input_dim() const { return 1 + state_dim + covariate_dim; }
  int output_dim() const { return state_dim; }
  std::size_t parameter_count() const;
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Offsets into the flat parameter vector. Weights are out x in, column-major,
// followed by the out-vector of biases.
struct LayerSlice {
  Eigen::Index in;
  Eigen::Index out;
  std::size_t weights;
  std::size_t biases;
};

std::vector<LayerSlice> layer_layout(const Architecture& arch);

struct VectorFieldModel {
  Architecture arch;
  Vector params;

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static VectorFieldModel initialize(const Architecture& arch, Rng& rng);
  static VectorFieldModel zeros(const Architecture& arch);
};

Vector forward(const VectorFieldModel& model, double t, const Vector& x, const Vector& c = Vector());

// Row-wise evaluation of a batch; c is n x covariate_dim (n x 0 allowed when
// covariate_dim == 0). Blocked and OpenMP-parallel.
Matrix forward_batch(const VectorFieldModel& model, const Vector& t, const Matrix& x,
                     const Matrix& c = Matrix());

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;
};

// loss = mean over rows of |v(t, s, c) - sdot|^2 and its exact gradient.
// Blocked, OpenMP-parallel, reduced in block order. Throws DivergenceError
// tagged with `step` when the loss is not finite.
LossAndGrad loss_and_grad(const VectorFieldModel& model, const StreamBatch& batch, std::size_t step = 0);

struct AdamSettings {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Vector m;
  Vector v;
  std::size_t step = 0;
  AdamSettings settings;

  static AdamState for_size(Eigen::Index n, const AdamSettings& settings = {});
};

void adam_step(AdamState& state, Vector& params, const Vector& grad);

// Text checkpoint (.sfck): architecture descriptor followed by every
// parameter as a 17-significant-digit decimal.
void write_checkpoint(std::ostream& os, const VectorFieldModel& model);
VectorFieldModel read_checkpoint(std::istream& is);
void save_checkpoint(const std::filesystem::path& path, const VectorFieldModel& model);
VectorFieldModel load_checkpoint(const std::filesystem::path& path);

namespace reference {
// Per-sample scalar loops, no blocking or BLAS-style products.
Matrix forward_batch(const VectorFieldModel& model, const Vector& t, const Matrix& x, const Matrix& c = Matrix());
LossAndGrad loss_and_grad(const VectorFieldModel& model, const StreamBatch& batch);
}  // namespace reference

}  // namespace streamflow
