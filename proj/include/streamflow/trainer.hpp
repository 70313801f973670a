#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamflow/coupling.hpp"
#include "streamflow/kernels.hpp"
#include "streamflow/vector_field.hpp"

namespace streamflow {

enum class Algorithm { i_cfm, gp_i_cfm, ot_cfm, gp_ot_cfm };
enum class VarianceKind { none, constant, increasing, decreasing };
enum class CovariateMode { off, x0 };

std::string to_string(Algorithm a);
std::string to_string(VarianceKind v);
std::string to_string(CovariateMode c);
Algorithm parse_algorithm(const std::string& name);
VarianceKind parse_variance(const std::string& name);
CovariateMode parse_covariate_mode(const std::string& name);

struct VarianceScheme {
  VarianceKind kind = VarianceKind::none;
  // sigma_w for constant, alpha for increasing / decreasing.
  double param = 0.0;
};

// none -> SE; constant -> SE + nugget(sigma_w); increasing -> SE + alpha t t';
// decreasing -> SE + alpha (t-1)(t'-1).
KernelSpec make_scheme_kernel(const SquaredExponential& base, const VarianceScheme& scheme);

struct TrainConfig {
  Algorithm algorithm = Algorithm::gp_i_cfm;
  VarianceScheme variance;
  // Stream kernel of the gp_* algorithms. Variance schemes require an SE kernel here.
  KernelSpec gp_kernel = KernelSpec::squared_exponential(0.1, 0.3);
  // Linear-kernel path of i_cfm / ot_cfm; sigma > 0 adds a nugget of that std.
  double linear_sigma_a = 1.0;
  double linear_sigma_b = 1.0;
  double sigma = 0.0;
  CovariateMode covariate = CovariateMode::off;
  Eigen::Index batch_size = 128;
  std::size_t iterations = 5000;
  AdamSettings adam;
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::tanh;
  std::uint64_t seed = 0;
  // One t per iteration instead of one per batch row.
  bool t_per_batch = false;
  std::size_t loss_every = 100;
  // Closed-form ((1-t)x0 + t x1, x1 - x0) for noise-free linear streams on (0, 1).
  bool linear_fast_path = true;

  bool uses_gp() const { return algorithm == Algorithm::gp_i_cfm || algorithm == Algorithm::gp_ot_cfm; }
  bool uses_ot() const { return algorithm == Algorithm::ot_cfm || algorithm == Algorithm::gp_ot_cfm; }
  KernelSpec stream_kernel() const;
  void validate() const;
};

struct LossRecord {
  std::size_t iter;  // iterations completed
  double loss;       // mean loss over the preceding loss_every iterations
};

struct TrainResult {
  VectorFieldModel model;
  std::vector<LossRecord> loss_trace;
};

// Source draws paired with target rows, optionally OT-permuted per batch.
TrainResult train(const TrainConfig& config, const SourceSampler& source, const Matrix& target, Rng& rng);

// Subject-aligned tuples pinned at `times` (first 0, last 1). With
// covariate mode x0, slice 0 of every tuple is the covariate.
TrainResult train_multimarginal(const TrainConfig& config, const std::vector<double>& times,
                                const GroupedTupleSampler& sampler, Rng& rng);

// Header: iter,loss
void write_loss_csv(std::ostream& os, const std::vector<LossRecord>& trace);

}  // namespace streamflow
