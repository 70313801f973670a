#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "streamflow/coupling.hpp"
#include "streamflow/gp_stream.hpp"
#include "streamflow/types.hpp"

namespace streamflow {

// Exact empirical 2-Wasserstein distance between equally sized point sets:
// sqrt(min over permutations of mean squared distance).
double w2(const Matrix& a, const Matrix& b);

struct RunMetrics {
  std::uint64_t seed = 0;
  std::string algorithm;
  std::string scheme;
  double w2 = 0.0;
  double train_seconds = 0.0;
  double generate_seconds = 0.0;
};

// Header: seed,algorithm,scheme,w2,train_s,gen_s
void write_metrics_csv(std::ostream& os, const std::vector<RunMetrics>& runs);
std::vector<RunMetrics> read_metrics_csv(std::istream& is);

struct SummaryRow {
  std::string group;
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

enum class GroupKey { algorithm, scheme, algorithm_scheme };

// Groups in first-appearance order; SE = sample sd / sqrt(n). Every group
// needs at least two runs.
std::vector<SummaryRow> summarize(const std::vector<RunMetrics>& runs, GroupKey key = GroupKey::algorithm_scheme);

// Header: group,mean,se,n
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

// Draws n (s_t, sdot_t) pairs at time t.
struct StreamDraws {
  Matrix s;
  Matrix sdot;
};
using StreamDrawer = std::function<StreamDraws(Eigen::Index n, double t, Rng& rng)>;

// Streams of a GP stream model whose observation tuples come from `tuples`
// (e.g. an independent coupling).
using TupleSource = std::function<Batch(Eigen::Index n, Rng& rng)>;
StreamDrawer gp_stream_drawer(TupleSource tuples, GramBundle bundle, MeanFunction mean = MeanFunction::zero());

struct FieldEstimate {
  double t = 0.0;
  Matrix x;       // grid points, one per row
  Matrix u;       // estimated marginal velocity per grid point
  Vector weight;  // total kernel weight per grid point
  std::vector<bool> defined;
};

inline constexpr double kMinOracleWeight = 1e-8;

// Silverman-style per-dimension bandwidth 1.06 sd n^(-1/5).
Vector silverman_bandwidth(const Matrix& draws);

// Nadaraya-Watson estimate of E(sdot_t | s_t = x) from n_draws streams with
// a Gaussian product kernel. Grid points whose total weight is below
// kMinOracleWeight are flagged undefined and left at zero.
FieldEstimate oracle_field(const StreamDrawer& drawer, double t, const Matrix& grid, Eigen::Index n_draws,
                           Rng& rng, std::optional<Vector> bandwidth = std::nullopt);

// Estimator core over precomputed draws (OpenMP over grid points).
FieldEstimate nadaraya_watson(const StreamDraws& draws, double t, const Matrix& grid, const Vector& bandwidth);

namespace reference {
FieldEstimate nadaraya_watson(const StreamDraws& draws, double t, const Matrix& grid, const Vector& bandwidth);
}

}  // namespace streamflow
