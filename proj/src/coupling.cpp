#include "streamflow/coupling.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "streamflow/errors.hpp"
#include "streamflow/parallel.hpp"

namespace streamflow {

SourceSampler gaussian_source(Eigen::Index dim) {
  if (dim < 1) throw DimensionError("source dimension must be >= 1");
  return [dim](Eigen::Index n, Rng& rng) { return rng.normal_matrix(n, dim); };
}

SourceSampler empirical_source(Matrix rows) {
  if (rows.rows() == 0) throw DimensionError("empirical source needs at least one row");
  return [rows = std::move(rows)](Eigen::Index n, Rng& rng) {
    Matrix out(n, rows.cols());
    for (Eigen::Index r = 0; r < n; ++r)
      out.row(r) = rows.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(rows.rows()))));
    return out;
  };
}

Batch independent_coupling(const SourceSampler& source, const Matrix& target_rows,
                           Eigen::Index batch_size, Rng& rng) {
  if (batch_size < 1) throw DimensionError("batch size must be >= 1");
  if (target_rows.rows() == 0) throw DimensionError("empty target set");
  Matrix x0 = source(batch_size, rng);
  if (x0.cols() != target_rows.cols()) throw DimensionError("source and target dimensions differ");
  Matrix x1(batch_size, target_rows.cols());
  const auto n_target = static_cast<std::size_t>(target_rows.rows());
  for (Eigen::Index r = 0; r < batch_size; ++r)
    x1.row(r) = target_rows.row(static_cast<Eigen::Index>(rng.index(n_target)));
  Batch b;
  b.slices.push_back(std::move(x0));
  b.slices.push_back(std::move(x1));
  b.covariates.resize(batch_size, 0);
  return b;
}

Assignment solve_assignment(const Matrix& cost) {
  const Eigen::Index n = cost.rows();
  if (cost.cols() != n) throw DimensionError("assignment needs a square cost matrix");
  if (!cost.allFinite()) throw DomainError("assignment costs must be finite");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Row-major copy: the inner scan walks one row.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c = cost;

  std::vector<double> u(n, 0.0), v(n, 0.0), shortest(n);
  std::vector<Eigen::Index> path(n, -1), col4row(n, -1), row4col(n, -1), remaining(n);
  std::vector<char> sr(n), sc(n);

  for (Eigen::Index cur = 0; cur < n; ++cur) {
    // Remaining columns stored in reverse so that ties resolve to the lowest index.
    Eigen::Index num_remaining = n;
    for (Eigen::Index it = 0; it < n; ++it) remaining[it] = n - it - 1;
    std::fill(sr.begin(), sr.end(), 0);
    std::fill(sc.begin(), sc.end(), 0);
    std::fill(shortest.begin(), shortest.end(), inf);

    double min_val = 0.0;
    Eigen::Index i = cur;
    Eigen::Index sink = -1;
    while (sink == -1) {
      Eigen::Index index = -1;
      double lowest = inf;
      sr[i] = 1;
      for (Eigen::Index it = 0; it < num_remaining; ++it) {
        const Eigen::Index j = remaining[it];
        const double r = min_val + c(i, j) - u[i] - v[j];
        if (r < shortest[j]) {
          path[j] = i;
          shortest[j] = r;
        }
        if (shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == -1)) {
          lowest = shortest[j];
          index = it;
        }
      }
      min_val = lowest;
      if (index < 0 || min_val == inf) throw NumericalError("assignment problem is infeasible");
      const Eigen::Index j = remaining[index];
      if (row4col[j] == -1)
        sink = j;
      else
        i = row4col[j];
      sc[j] = 1;
      remaining[index] = remaining[--num_remaining];
    }

    u[cur] += min_val;
    for (Eigen::Index r = 0; r < n; ++r)
      if (sr[r] && r != cur) u[r] += min_val - shortest[col4row[r]];
    for (Eigen::Index c = 0; c < n; ++c)
      if (sc[c]) v[c] -= min_val - shortest[c];

    Eigen::Index j = sink;
    while (true) {
      const Eigen::Index r = path[j];
      row4col[j] = r;
      std::swap(col4row[r], j);
      if (r == cur) break;
    }
  }

  Assignment out;
  out.col_for_row = std::move(col4row);
  for (Eigen::Index r = 0; r < n; ++r) out.cost += cost(r, out.col_for_row[r]);
  return out;
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("point sets have different dimensions");
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  Matrix out(n, m);
  const Eigen::Index blocks = (n + static_cast<Eigen::Index>(kRowBlock) - 1) / static_cast<Eigen::Index>(kRowBlock);
#pragma omp parallel for schedule(static)
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    const Eigen::Index r0 = blk * static_cast<Eigen::Index>(kRowBlock);
    const Eigen::Index r1 = std::min(n, r0 + static_cast<Eigen::Index>(kRowBlock));
    for (Eigen::Index c = 0; c < m; ++c) {
      for (Eigen::Index r = r0; r < r1; ++r) out(r, c) = (a.row(r) - b.row(c)).squaredNorm();
    }
  }
  return out;
}

std::vector<Eigen::Index> ot_coupling(const Matrix& source, const Matrix& target) {
  if (source.rows() != target.rows() || source.cols() != target.cols())
    throw DimensionError("OT coupling needs equally sized source and target batches");
  if (source.rows() > kMaxOtSize) throw DimensionError("OT coupling batch exceeds 4096 rows");
  return solve_assignment(squared_distances(source, target)).col_for_row;
}

GroupedTupleSampler::GroupedTupleSampler(std::vector<Matrix> slices, std::vector<int> group_ids,
                                         std::optional<SourceSampler> noise_source)
    : slices_(std::move(slices)), noise_(std::move(noise_source)) {
  if (slices_.empty()) throw DimensionError("grouped sampler needs at least one data slice");
  if (slice_count() < 2) throw DimensionError("grouped sampler needs M >= 2 slices");
  const Eigen::Index n = slices_.front().rows();
  for (const auto& s : slices_) {
    if (s.rows() != n || s.cols() != slices_.front().cols())
      throw DimensionError("inconsistent group sizes: slices must share rows and columns");
  }
  if (static_cast<Eigen::Index>(group_ids.size()) != n)
    throw DimensionError("inconsistent group sizes: one group id per slice row required");
  if (n == 0) throw DimensionError("grouped sampler needs at least one subject");
  std::map<int, std::size_t> slot;
  for (Eigen::Index r = 0; r < n; ++r) {
    auto [it, inserted] = slot.try_emplace(group_ids[static_cast<std::size_t>(r)], members_.size());
    if (inserted) members_.emplace_back();
    members_[it->second].push_back(r);
  }
}

Batch GroupedTupleSampler::draw(Eigen::Index batch_size, Rng& rng) const {
  if (batch_size < 1) throw DimensionError("batch size must be >= 1");
  const Eigen::Index d = slices_.front().cols();
  Batch b;
  if (noise_) {
    b.slices.push_back((*noise_)(batch_size, rng));
    if (b.slices.front().cols() != d) throw DimensionError("noise source dimension differs from data");
  }
  for (std::size_t j = 0; j < slices_.size(); ++j) b.slices.emplace_back(batch_size, d);
  const std::size_t offset = noise_ ? 1 : 0;
  for (Eigen::Index r = 0; r < batch_size; ++r) {
    const auto& rows = members_[rng.index(members_.size())];
    for (std::size_t j = 0; j < slices_.size(); ++j) {
      const Eigen::Index pick = rows.size() == 1 ? rows.front() : rows[rng.index(rows.size())];
      b.slices[j + offset].row(r) = slices_[j].row(pick);
    }
  }
  b.covariates.resize(batch_size, 0);
  return b;
}

Batch grouped_tuple_sampler(std::span<const Matrix> slices, std::span<const int> group_ids,
                            Eigen::Index batch_size, Rng& rng, std::optional<SourceSampler> noise_source) {
  GroupedTupleSampler sampler(std::vector<Matrix>(slices.begin(), slices.end()),
                              std::vector<int>(group_ids.begin(), group_ids.end()), std::move(noise_source));
  return sampler.draw(batch_size, rng);
}

namespace reference {

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("point sets have different dimensions");
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < b.rows(); ++c) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double diff = a(r, k) - b(c, k);
        acc += diff * diff;
      }
      out(r, c) = acc;
    }
  return out;
}

}  // namespace reference
}  // namespace streamflow
