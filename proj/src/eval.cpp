#include "streamflow/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "streamflow/errors.hpp"

namespace streamflow {

double w2(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("W2 needs equally sized samples (" + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()) + " rows); subsample explicitly");
  if (a.rows() == 0) throw DimensionError("W2 of empty samples");
  const Assignment best = solve_assignment(squared_distances(a, b));
  return std::sqrt(std::max(0.0, best.cost / static_cast<double>(a.rows())));
}

void write_metrics_csv(std::ostream& os, const std::vector<RunMetrics>& runs) {
  const auto old = os.precision(17);
  os << "seed,algorithm,scheme,w2,train_s,gen_s\n";
  for (const auto& r : runs)
    os << r.seed << ',' << r.algorithm << ',' << r.scheme << ',' << r.w2 << ',' << r.train_seconds << ','
       << r.generate_seconds << '\n';
  os.precision(old);
}

std::vector<RunMetrics> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "seed,algorithm,scheme,w2,train_s,gen_s")
    throw ConfigError("metrics CSV must start with header seed,algorithm,scheme,w2,train_s,gen_s");
  std::vector<RunMetrics> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw ConfigError("metrics CSV row has " + std::to_string(f.size()) + " fields: " + line);
    try {
      out.push_back({std::stoull(f[0]), f[1], f[2], std::stod(f[3]), std::stod(f[4]), std::stod(f[5])});
    } catch (const std::exception&) {
      throw ConfigError("unparseable metrics CSV row: " + line);
    }
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<RunMetrics>& runs, GroupKey key) {
  std::vector<std::string> order;
  std::vector<std::vector<double>> values;
  for (const auto& r : runs) {
    std::string g = key == GroupKey::algorithm ? r.algorithm
                    : key == GroupKey::scheme  ? r.scheme
                                               : r.algorithm + "/" + r.scheme;
    auto it = std::find(order.begin(), order.end(), g);
    if (it == order.end()) {
      order.push_back(g);
      values.emplace_back();
      it = order.end() - 1;
    }
    values[static_cast<std::size_t>(it - order.begin())].push_back(r.w2);
  }
  if (order.empty()) throw DomainError("summary of an empty run list");
  std::vector<SummaryRow> out;
  for (std::size_t g = 0; g < order.size(); ++g) {
    const auto& v = values[g];
    if (v.size() < 2) throw DomainError("group '" + order[g] + "' needs at least two runs");
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out.push_back({order[g], mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n), v.size()});
  }
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  const auto old = os.precision(17);
  os << "group,mean,se,n\n";
  for (const auto& r : rows) os << r.group << ',' << r.mean << ',' << r.se << ',' << r.n << '\n';
  os.precision(old);
}

StreamDrawer gp_stream_drawer(TupleSource tuples, GramBundle bundle, MeanFunction mean) {
  return [tuples = std::move(tuples), bundle = std::move(bundle), mean](Eigen::Index n, double t, Rng& rng) {
    const Batch b = tuples(n, rng);
    const StreamBatch sb = sample_streams(bundle, mean, b.slices, Vector::Constant(n, t), rng);
    return StreamDraws{sb.s, sb.sdot};
  };
}

Vector silverman_bandwidth(const Matrix& draws) {
  const auto n = static_cast<double>(draws.rows());
  if (draws.rows() < 2) throw DomainError("bandwidth needs at least two draws");
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Vector sd = ((draws.rowwise() - mean).colwise().squaredNorm() / (n - 1.0)).cwiseSqrt().transpose();
  return 1.06 * sd * std::pow(n, -0.2);
}

FieldEstimate oracle_field(const StreamDrawer& drawer, double t, const Matrix& grid, Eigen::Index n_draws, Rng& rng,
                           std::optional<Vector> bandwidth) {
  if (n_draws < 1000) throw DomainError("oracle field needs at least 1000 draws");
  const StreamDraws draws = drawer(n_draws, t, rng);
  const Vector h = bandwidth ? *bandwidth : silverman_bandwidth(draws.s);
  return nadaraya_watson(draws, t, grid, h);
}

namespace {

void check_nw(const StreamDraws& draws, const Matrix& grid, const Vector& h) {
  if (grid.cols() != draws.s.cols() || h.size() != draws.s.cols())
    throw DimensionError("grid, draws and bandwidth must share the dimension");
  if ((h.array() <= 0.0).any()) throw DomainError("bandwidth must be > 0");
}

FieldEstimate make_estimate(double t, const Matrix& grid) {
  return FieldEstimate{t, grid, Matrix::Zero(grid.rows(), grid.cols()), Vector::Zero(grid.rows()),
                       std::vector<bool>(static_cast<std::size_t>(grid.rows()), false)};
}

}  // namespace

FieldEstimate nadaraya_watson(const StreamDraws& draws, double t, const Matrix& grid, const Vector& bandwidth) {
  check_nw(draws, grid, bandwidth);
  FieldEstimate est = make_estimate(t, grid);
  const Eigen::ArrayXd inv_h2 = bandwidth.array().square().inverse();
  // Row-major copies keep each draw contiguous for the inner loop.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> s = draws.s;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> v = draws.sdot;
  const Eigen::Index d = grid.cols();
  std::vector<char> defined(static_cast<std::size_t>(grid.rows()), 0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index g = 0; g < grid.rows(); ++g) {
    double wsum = 0.0;
    Vector acc = Vector::Zero(d);
    for (Eigen::Index j = 0; j < s.rows(); ++j) {
      double q = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = s(j, k) - grid(g, k);
        q += diff * diff * inv_h2(k);
      }
      const double w = std::exp(-0.5 * q);
      wsum += w;
      for (Eigen::Index k = 0; k < d; ++k) acc(k) += w * v(j, k);
    }
    est.weight(g) = wsum;
    if (wsum >= kMinOracleWeight) {
      est.u.row(g) = (acc / wsum).transpose();
      defined[static_cast<std::size_t>(g)] = 1;
    }
  }
  for (std::size_t g = 0; g < defined.size(); ++g) est.defined[g] = defined[g] != 0;
  return est;
}

namespace reference {

FieldEstimate nadaraya_watson(const StreamDraws& draws, double t, const Matrix& grid, const Vector& bandwidth) {
  check_nw(draws, grid, bandwidth);
  FieldEstimate est = make_estimate(t, grid);
  for (Eigen::Index g = 0; g < grid.rows(); ++g) {
    double wsum = 0.0;
    Vector acc = Vector::Zero(grid.cols());
    for (Eigen::Index j = 0; j < draws.s.rows(); ++j) {
      const double q = ((draws.s.row(j) - grid.row(g)).array().square() / bandwidth.transpose().array().square()).sum();
      const double w = std::exp(-0.5 * q);
      wsum += w;
      acc += w * draws.sdot.row(j).transpose();
    }
    est.weight(g) = wsum;
    if (wsum >= kMinOracleWeight) {
      est.u.row(g) = (acc / wsum).transpose();
      est.defined[static_cast<std::size_t>(g)] = true;
    }
  }
  return est;
}

}  // namespace reference
}  // namespace streamflow
