#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "streamflow/types.hpp"

namespace streamflow {

// Draws n rows from a (possibly infinite) source distribution.
using SourceSampler = std::function<Matrix(Eigen::Index n, Rng& rng)>;

SourceSampler gaussian_source(Eigen::Index dim);
// Uniform resampling with replacement from a finite set of rows.
SourceSampler empirical_source(Matrix rows);

// Observation tuples for one training step: slices[j] is n x d and row r
// of every slice belongs to the same tuple. covariates is n x 0 unless set.
struct Batch {
  std::vector<Matrix> slices;
  Matrix covariates;

  const Matrix& source() const { return slices.front(); }
  const Matrix& target() const { return slices.back(); }
  Eigen::Index rows() const { return slices.empty() ? 0 : slices.front().rows(); }
};

// Fresh source draws paired by row with target rows drawn uniformly with
// replacement. Source draws are taken before target indices.
Batch independent_coupling(const SourceSampler& source, const Matrix& target_rows,
                           Eigen::Index batch_size, Rng& rng);

struct Assignment {
  std::vector<Eigen::Index> col_for_row;
  double cost = 0.0;
};

// Exact min-cost perfect matching on a square cost matrix by shortest
// augmenting paths (Jonker-Volgenant style) with dual potentials.
Assignment solve_assignment(const Matrix& cost);

// All pairwise squared Euclidean distances, OpenMP over row blocks.
Matrix squared_distances(const Matrix& a, const Matrix& b);

// Exact minibatch OT: the permutation sigma minimising
// sum_i |source_i - target_sigma(i)|^2.
std::vector<Eigen::Index> ot_coupling(const Matrix& source, const Matrix& target);

inline constexpr Eigen::Index kMaxOtSize = 4096;

// Samples whole subjects: each batch row holds one subject's record at
// every time. Subjects are drawn uniformly; when a subject has several
// records in a slice one is drawn uniformly per slice. With noise_source
// set, slice 0 is filled with fresh source draws and `slices` covers the
// remaining times.
class GroupedTupleSampler {
 public:
  GroupedTupleSampler(std::vector<Matrix> slices, std::vector<int> group_ids,
                      std::optional<SourceSampler> noise_source = std::nullopt);

  Batch draw(Eigen::Index batch_size, Rng& rng) const;

  std::size_t subject_count() const { return members_.size(); }
  std::size_t slice_count() const { return slices_.size() + (noise_ ? 1 : 0); }
  Eigen::Index dim() const { return slices_.front().cols(); }

 private:
  std::vector<Matrix> slices_;
  std::vector<std::vector<Eigen::Index>> members_;  // rows per subject, first-appearance order
  std::optional<SourceSampler> noise_;
};

Batch grouped_tuple_sampler(std::span<const Matrix> slices, std::span<const int> group_ids,
                            Eigen::Index batch_size, Rng& rng,
                            std::optional<SourceSampler> noise_source = std::nullopt);

namespace reference {
Matrix squared_distances(const Matrix& a, const Matrix& b);
}

}  // namespace streamflow
