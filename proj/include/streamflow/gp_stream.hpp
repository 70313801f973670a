#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "streamflow/kernels.hpp"
#include "streamflow/types.hpp"

namespace streamflow {

// Prior mean of the auxiliary stream GP. Only the zero mean is used.
class MeanFunction {
 public:
  static MeanFunction zero() { return MeanFunction(); }
  double value(double) const { return 0.0; }
  double derivative(double) const { return 0.0; }
};

struct ObservationSet {
  std::vector<double> times;  // M times, first 0, last 1
  Matrix values;              // M x d pinned stream values
  std::optional<Vector> covariate;

  void validate() const;
};

// Law of (s_t, sdot_t) given the observations. The covariance is shared by
// every dimension; the mean has one column per dimension (row 0: s, row 1: sdot).
struct ConditionalGaussian {
  Eigen::Matrix<double, 2, Eigen::Dynamic> mean;
  Eigen::Matrix2d cov;
  Eigen::Matrix2d factor;  // cov == factor * factor^T
};

struct StreamSample {
  double t = 0.0;
  Vector s;
  Vector sdot;
  std::optional<Vector> covariate;
};

// The part of the conditional law that depends on t but not on the
// observed values: the 2 x M gain Sigma_{t,obs} Sigma_obs^{-1} and the
// 2 x 2 covariance.
struct ConditionalLaw {
  double t = 0.0;
  Eigen::Matrix<double, 2, Eigen::Dynamic> gain;
  Eigen::Vector2d prior_mean;
  Vector prior_obs_mean;
  Eigen::Matrix2d cov;
  Eigen::Matrix2d factor;

  // values: M x d
  Eigen::Matrix<double, 2, Eigen::Dynamic> mean(const Eigen::Ref<const Matrix>& values) const;
};

// Eigenvalues of the conditional covariance below -kNegativeEigenTolerance
// are an error; those in between are clipped to zero.
inline constexpr double kNegativeEigenTolerance = 1e-8;

ConditionalLaw conditional_law(const GramBundle& bundle, const MeanFunction& mean, double t);

ConditionalGaussian condition(const GramBundle& bundle, const MeanFunction& mean,
                              const ObservationSet& obs, double t);

// Draws 2 normals per dimension, in dimension order.
std::pair<Vector, Vector> sample_point(const ConditionalGaussian& cg, Rng& rng);

// One stream draw per batch row. slices[j] holds the values at the bundle's
// j-th observation time; row r of every slice belongs to the same tuple.
StreamBatch sample_streams(const GramBundle& bundle, const MeanFunction& mean,
                           std::span<const Matrix> slices, const Vector& t, Rng& rng);

// Closed form of the noise-free linear-kernel stream: ((1-t)x0 + t x1, x1 - x0).
// Consumes the same normals as sample_streams so both paths stay in lockstep.
StreamBatch linear_interpolant_streams(const Matrix& x0, const Matrix& x1, const Vector& t, Rng& rng);

struct PathStatsRow {
  double t;
  int dim;
  double mean_s;
  double sd_s;
  double mean_sdot;
  double sd_sdot;
};

std::vector<PathStatsRow> path_stats(const GramBundle& bundle, const MeanFunction& mean,
                                     const ObservationSet& obs, std::span<const double> grid);

// Header: t,dim,mean_s,sd_s,mean_sdot,sd_sdot
void write_path_stats_csv(std::ostream& os, std::span<const PathStatsRow> rows);

}  // namespace streamflow
