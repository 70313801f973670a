#include "streamflow/gp_stream.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "streamflow/errors.hpp"

namespace streamflow {
namespace {

// Eigenvalues below this fraction of the prior scale are treated as exact
// zeros; they are round-off from the Schur complement.
constexpr double kRelativeEigenFloor = 1e-12;

void clip_and_factor(const Eigen::Matrix2d& raw, double scale, Eigen::Matrix2d& cov,
                     Eigen::Matrix2d& factor) {
  const Eigen::Matrix2d sym = 0.5 * (raw + raw.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sym);
  Eigen::Vector2d lambda = eig.eigenvalues();
  const double floor = kRelativeEigenFloor * std::max(1.0, scale);
  for (int i = 0; i < 2; ++i) {
    if (lambda(i) < -kNegativeEigenTolerance)
      throw NumericalError("conditional covariance has eigenvalue " + std::to_string(lambda(i)));
    if (lambda(i) < floor) lambda(i) = 0.0;
  }
  const Eigen::Matrix2d& v = eig.eigenvectors();
  factor = v * lambda.cwiseSqrt().asDiagonal();
  cov = v * lambda.asDiagonal() * v.transpose();
}

}  // namespace

void ObservationSet::validate() const {
  if (times.size() < 2) throw DomainError("an observation set needs M >= 2 times");
  if (static_cast<std::size_t>(values.rows()) != times.size())
    throw DimensionError("observation values must have one row per time");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("observation times must be strictly increasing");
  if (!values.allFinite()) throw DomainError("observation values must be finite");
}

Eigen::Matrix<double, 2, Eigen::Dynamic> ConditionalLaw::mean(const Eigen::Ref<const Matrix>& values) const {
  Eigen::Matrix<double, 2, Eigen::Dynamic> out = gain * (values.colwise() - prior_obs_mean);
  out.colwise() += prior_mean;
  return out;
}

ConditionalLaw conditional_law(const GramBundle& bundle, const MeanFunction& mean, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("conditioning time must lie in [0,1]");
  ConditionalLaw law;
  law.t = t;
  const Eigen::Matrix<double, 2, Eigen::Dynamic> cross = bundle.cross(t);
  const Matrix solved = bundle.factorization().solve(cross.transpose());  // M x 2
  law.gain = solved.transpose();
  law.prior_mean << mean.value(t), mean.derivative(t);
  law.prior_obs_mean.resize(bundle.size());
  for (Eigen::Index j = 0; j < bundle.size(); ++j) law.prior_obs_mean(j) = mean.value(bundle.times()[j]);
  const Eigen::Matrix2d prior = bundle.point(t);
  clip_and_factor(prior - cross * solved, prior.cwiseAbs().maxCoeff(), law.cov, law.factor);
  return law;
}

ConditionalGaussian condition(const GramBundle& bundle, const MeanFunction& mean,
                              const ObservationSet& obs, double t) {
  obs.validate();
  if (obs.times != bundle.times())
    throw DimensionError("observation times differ from the times the gram bundle was built on");
  const ConditionalLaw law = conditional_law(bundle, mean, t);
  return ConditionalGaussian{law.mean(obs.values), law.cov, law.factor};
}

std::pair<Vector, Vector> sample_point(const ConditionalGaussian& cg, Rng& rng) {
  const Eigen::Index d = cg.mean.cols();
  Vector s(d), sdot(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double z0 = rng.normal();
    const double z1 = rng.normal();
    s(i) = cg.mean(0, i) + cg.factor(0, 0) * z0 + cg.factor(0, 1) * z1;
    sdot(i) = cg.mean(1, i) + cg.factor(1, 0) * z0 + cg.factor(1, 1) * z1;
  }
  return {std::move(s), std::move(sdot)};
}

StreamBatch sample_streams(const GramBundle& bundle, const MeanFunction& mean,
                           std::span<const Matrix> slices, const Vector& t, Rng& rng) {
  const auto m = static_cast<std::size_t>(bundle.size());
  if (slices.size() != m) throw DimensionError("need one slice per observation time");
  const Eigen::Index n = t.size();
  const Eigen::Index d = slices.front().cols();
  for (const auto& s : slices)
    if (s.rows() != n || s.cols() != d) throw DimensionError("slices must be n x d with n = len(t)");

  StreamBatch out{t, Matrix(n, d), Matrix(n, d), Matrix(n, 0)};
  Matrix values(static_cast<Eigen::Index>(m), d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const ConditionalLaw law = conditional_law(bundle, mean, t(r));
    for (std::size_t j = 0; j < m; ++j) values.row(static_cast<Eigen::Index>(j)) = slices[j].row(r);
    const ConditionalGaussian cg{law.mean(values), law.cov, law.factor};
    auto [s, sdot] = sample_point(cg, rng);
    out.s.row(r) = s.transpose();
    out.sdot.row(r) = sdot.transpose();
  }
  return out;
}

StreamBatch linear_interpolant_streams(const Matrix& x0, const Matrix& x1, const Vector& t, Rng& rng) {
  const Eigen::Index n = t.size();
  if (x0.rows() != n || x1.rows() != n || x0.cols() != x1.cols())
    throw DimensionError("endpoint matrices must be n x d with n = len(t)");
  StreamBatch out{t, Matrix(n, x0.cols()), x1 - x0, Matrix(n, 0)};
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!(t(r) >= 0.0 && t(r) <= 1.0)) throw DomainError("conditioning time must lie in [0,1]");
    out.s.row(r) = (1.0 - t(r)) * x0.row(r) + t(r) * x1.row(r);
    for (Eigen::Index i = 0; i < 2 * x0.cols(); ++i) rng.normal();
  }
  return out;
}

std::vector<PathStatsRow> path_stats(const GramBundle& bundle, const MeanFunction& mean,
                                     const ObservationSet& obs, std::span<const double> grid) {
  std::vector<PathStatsRow> rows;
  rows.reserve(grid.size() * static_cast<std::size_t>(obs.values.cols()));
  for (double t : grid) {
    const ConditionalGaussian cg = condition(bundle, mean, obs, t);
    const double sd_s = std::sqrt(std::max(0.0, cg.cov(0, 0)));
    const double sd_sdot = std::sqrt(std::max(0.0, cg.cov(1, 1)));
    for (Eigen::Index i = 0; i < cg.mean.cols(); ++i)
      rows.push_back({t, static_cast<int>(i), cg.mean(0, i), sd_s, cg.mean(1, i), sd_sdot});
  }
  return rows;
}

void write_path_stats_csv(std::ostream& os, std::span<const PathStatsRow> rows) {
  const auto old = os.precision(17);
  os << "t,dim,mean_s,sd_s,mean_sdot,sd_sdot\n";
  for (const auto& r : rows)
    os << r.t << ',' << r.dim << ',' << r.mean_s << ',' << r.sd_s << ',' << r.mean_sdot << ',' << r.sd_sdot
       << '\n';
  os.precision(old);
}

}  // namespace streamflow
