#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace streamflow {

// Sample matrices are rows = samples, columns = dimensions.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Seeded generator shared by every stochastic operation. Two generators
// built from the same (seed, stream) pair produce identical sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(make_seq(seed, stream)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = normal();
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::mt19937_64 make_seq(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace streamflow

namespace streamflow {

// Training rows of (t, s_t, sdot_t) with optional covariates (n x 0 when
// the model is not covariate-conditioned).
struct StreamBatch {
  Vector t;
  Matrix s;
  Matrix sdot;
  Matrix covariates;

  Eigen::Index rows() const { return t.size(); }
};

}  // namespace streamflow
