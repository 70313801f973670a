#include "streamflow/datasets.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "streamflow/errors.hpp"

namespace streamflow {

Distribution Distribution::std_gaussian(int dim) {
  Distribution d;
  d.kind = Kind::std_gaussian;
  d.dim = dim;
  d.validate();
  return d;
}

Distribution Distribution::mixture(Matrix means, Vector sds, Vector weights) {
  Distribution d;
  d.kind = Kind::gaussian_mixture;
  d.dim = static_cast<int>(means.cols());
  d.means = std::move(means);
  d.sds = std::move(sds);
  d.weights = std::move(weights);
  d.validate();
  return d;
}

void Distribution::validate() const {
  if (dim < 1) throw ConfigError("distribution dimension must be >= 1");
  if (kind == Kind::std_gaussian) return;
  const Eigen::Index k = means.rows();
  if (k < 1) throw ConfigError("mixture needs at least one component");
  if (means.cols() != dim) throw ConfigError("mixture means must have dim columns");
  if (sds.size() != k || weights.size() != k) throw ConfigError("mixture needs one sd and one weight per component");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(sds(i) > 0.0)) throw ConfigError("mixture sds must be > 0");
    if (!(weights(i) >= 0.0)) throw ConfigError("mixture weights must be >= 0");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw ConfigError("mixture weights must sum to 1");
}

Matrix Distribution::sample(Eigen::Index n, Rng& rng) const {
  if (kind == Kind::std_gaussian) return rng.normal_matrix(n, dim);
  Matrix out(n, dim);
  const Eigen::Index k = means.rows();
  for (Eigen::Index r = 0; r < n; ++r) {
    const double u = rng.uniform();
    Eigen::Index comp = 0;
    double acc = weights(0);
    while (comp + 1 < k && u >= acc) acc += weights(++comp);
    for (int c = 0; c < dim; ++c) out(r, c) = means(comp, c) + sds(comp) * rng.normal();
  }
  return out;
}

SourceSampler Distribution::sampler() const {
  return [dist = *this](Eigen::Index n, Rng& rng) { return dist.sample(n, rng); };
}

Distribution two_gaussians() {
  Matrix means(2, 2);
  means << -3.0, 3.0, 3.0, -3.0;
  return Distribution::mixture(means, Vector::Constant(2, 0.5), Vector::Constant(2, 0.5));
}

Distribution three_gaussians() {
  Matrix means(3, 2);
  means << -3.0, 3.0, 3.0, -3.0, 0.0, 3.5;
  return Distribution::mixture(means, Vector::Constant(3, 0.5), Vector::Constant(3, 1.0 / 3.0));
}

int DatasetSpec::dim() const { return layout == Layout::pair ? target.dim : 2; }

void DatasetSpec::validate() const {
  source.validate();
  target.validate();
  if (n_train < 1 || n_test < 1) throw ConfigError("n_train and n_test must be >= 1");
  if (layout == Layout::pair && source.dim != target.dim)
    throw ConfigError("source and target dimensions differ");
  if (layout == Layout::paired_v && (paired_v.spread < 0.0 || paired_v.end_noise < 0.0))
    throw ConfigError("paired_v spreads must be >= 0");
  if (layout == Layout::crossing && (crossing.level_sd < 0.0 || crossing.noise < 0.0))
    throw ConfigError("crossing spreads must be >= 0");
}

namespace {

void fill_pair(const DatasetSpec& spec, Eigen::Index n, Rng& rng, std::vector<Matrix>& slices,
               std::vector<int>& groups) {
  slices.push_back(spec.source.sample(n, rng));
  slices.push_back(spec.target.sample(n, rng));
  groups.resize(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) groups[static_cast<std::size_t>(r)] = static_cast<int>(r);
}

void fill_paired_v(const PairedVGeometry& g, Eigen::Index n, Rng& rng, std::vector<Matrix>& slices,
                   std::vector<int>& groups) {
  Matrix noise = rng.normal_matrix(n, 2);
  Matrix mid(n, 2), end(n, 2);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double b = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double ux = g.spread * rng.normal();
    const double uy = g.spread * rng.normal();
    mid(r, 0) = g.arm_x * b + ux;
    mid(r, 1) = g.arm_y + uy;
    end(r, 0) = g.end_x * b + 1.5 * ux + g.end_noise * rng.normal();
    end(r, 1) = g.end_y + 1.5 * uy + g.end_noise * rng.normal();
  }
  slices = {std::move(noise), std::move(mid), std::move(end)};
  groups.resize(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) groups[static_cast<std::size_t>(r)] = static_cast<int>(r);
}

void fill_crossing(const CrossingGeometry& g, Eigen::Index n, Rng& rng, std::vector<Matrix>& slices,
                   std::vector<int>& groups) {
  slices.assign(3, Matrix(n, 2));
  for (Eigen::Index r = 0; r < n; ++r) {
    const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double level = g.level_sd * rng.normal();
    for (int j = 0; j < 3; ++j) {
      const double x = (j == 1 ? g.offset : -g.offset) * side;
      slices[static_cast<std::size_t>(j)](r, 0) = x + g.noise * rng.normal();
      slices[static_cast<std::size_t>(j)](r, 1) = level + g.noise * rng.normal();
    }
  }
  groups.resize(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) groups[static_cast<std::size_t>(r)] = static_cast<int>(r);
}

void fill(const DatasetSpec& spec, Eigen::Index n, Rng& rng, std::vector<Matrix>& slices, std::vector<int>& groups) {
  switch (spec.layout) {
    case Layout::pair: fill_pair(spec, n, rng, slices, groups); return;
    case Layout::paired_v: fill_paired_v(spec.paired_v, n, rng, slices, groups); return;
    case Layout::crossing: fill_crossing(spec.crossing, n, rng, slices, groups); return;
  }
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.times = spec.layout == Layout::pair ? std::vector<double>{0.0, 1.0} : std::vector<double>{0.0, 0.5, 1.0};
  ds.noise_slice0 = spec.layout == Layout::paired_v;
  Rng train_rng(spec.seed, kTrainDataStream);
  Rng test_rng(spec.seed, kTestDataStream);
  fill(spec, spec.n_train, train_rng, ds.train, ds.train_groups);
  fill(spec, spec.n_test, test_rng, ds.test, ds.test_groups);
  return ds;
}

void write_dataset_csv(std::ostream& os, const std::vector<Matrix>& slices) {
  const auto old = os.precision(17);
  os << "slice,row,dim,value\n";
  for (std::size_t j = 0; j < slices.size(); ++j)
    for (Eigen::Index r = 0; r < slices[j].rows(); ++r)
      for (Eigen::Index c = 0; c < slices[j].cols(); ++c)
        os << j << ',' << r << ',' << c << ',' << slices[j](r, c) << '\n';
  os.precision(old);
}

std::vector<Matrix> read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "slice,row,dim,value")
    throw ConfigError("dataset CSV must start with header slice,row,dim,value");
  std::map<std::size_t, std::map<std::pair<long, long>, double>> cells;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t slice;
    long row, dim;
    double value;
    char c1, c2, c3;
    if (!(ls >> slice >> c1 >> row >> c2 >> dim >> c3 >> value) || c1 != ',' || c2 != ',' || c3 != ',' || row < 0 ||
        dim < 0)
      throw ConfigError("malformed dataset CSV line " + std::to_string(lineno));
    cells[slice][{row, dim}] = value;
  }
  std::vector<Matrix> out;
  for (const auto& [slice, entries] : cells) {
    if (slice != out.size()) throw ConfigError("dataset CSV slices must be numbered 0..M-1");
    long rows = 0, dims = 0;
    for (const auto& [key, v] : entries) {
      rows = std::max(rows, key.first + 1);
      dims = std::max(dims, key.second + 1);
    }
    if (static_cast<long>(entries.size()) != rows * dims)
      throw ConfigError("dataset CSV slice " + std::to_string(slice) + " is not a full rows x dims grid");
    Matrix m(rows, dims);
    for (const auto& [key, v] : entries) m(key.first, key.second) = v;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace streamflow
