#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "streamflow/coupling.hpp"
#include "streamflow/types.hpp"

namespace streamflow {

// Standard Gaussian or a diagonal-isotropic Gaussian mixture.
struct Distribution {
  enum class Kind { std_gaussian, gaussian_mixture };

  Kind kind = Kind::std_gaussian;
  int dim = 2;
  Matrix means;    // k x dim
  Vector sds;      // k
  Vector weights;  // k, sums to 1

  static Distribution std_gaussian(int dim);
  static Distribution mixture(Matrix means, Vector sds, Vector weights);

  void validate() const;
  Matrix sample(Eigen::Index n, Rng& rng) const;
  SourceSampler sampler() const;
};

// (-3, 3) and (3, -3), sd 0.5, equal weights.
Distribution two_gaussians();
// two_gaussians plus (0, 3.5).
Distribution three_gaussians();

enum class Layout { pair, paired_v, crossing };

// Figure-style V: slice 0 is noise; each subject picks an arm b = +-1,
// x(0.5) = (arm_x b, arm_y) + u, x(1) = (end_x b, end_y) + 1.5 u + e,
// u ~ N(0, spread^2 I), e ~ N(0, end_noise^2 I).
struct PairedVGeometry {
  double arm_x = 1.5;
  double arm_y = 1.5;
  double end_x = 3.0;
  double end_y = 3.5;
  double spread = 0.35;
  double end_noise = 0.15;
};

// Two groups g = +-1 crossing horizontally: x at t in {0, 1} is -offset g,
// at t = 0.5 it is +offset g. Each subject keeps a level y ~ N(0, level_sd^2);
// every record gets N(0, noise^2) jitter in both coordinates.
struct CrossingGeometry {
  double offset = 2.0;
  double level_sd = 1.0;
  double noise = 0.15;
};

struct DatasetSpec {
  Layout layout = Layout::pair;
  Distribution source = Distribution::std_gaussian(2);
  Distribution target = two_gaussians();
  // Train on the finite source sample instead of fresh source draws.
  bool finite_source = false;
  Eigen::Index n_train = 100;
  Eigen::Index n_test = 1000;
  std::uint64_t seed = 0;
  PairedVGeometry paired_v;
  CrossingGeometry crossing;

  int dim() const;
  void validate() const;
};

// Train and test draws come from disjoint rng streams of the same seed.
inline constexpr std::uint64_t kTrainDataStream = 1;
inline constexpr std::uint64_t kTestDataStream = 4;

struct Dataset {
  std::vector<double> times;
  std::vector<Matrix> train;
  std::vector<Matrix> test;
  std::vector<int> train_groups;
  std::vector<int> test_groups;
  // Slice 0 is fresh source noise rather than data.
  bool noise_slice0 = false;
};

Dataset generate_dataset(const DatasetSpec& spec);

// Header: slice,row,dim,value
void write_dataset_csv(std::ostream& os, const std::vector<Matrix>& slices);
std::vector<Matrix> read_dataset_csv(std::istream& is);

}  // namespace streamflow
