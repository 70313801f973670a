#include "streamflow/kernels.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "streamflow/errors.hpp"

namespace streamflow {
namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool finite(double v) { return std::isfinite(v); }

KernelBlocks blocks_of(const KernelSpec& kernel, double t, double u) {
  return std::visit(
      Overloaded{
          [&](const SquaredExponential& k) {
            const double r = t - u;
            const double l2 = k.length * k.length;
            const double e = k.alpha * std::exp(-r * r / (2.0 * l2));
            const double c12 = r / l2 * e;
            return KernelBlocks{e, c12, -c12, (l2 - r * r) / (l2 * l2) * e};
          },
          [&](const LinearKernel& k) {
            const double b2 = k.sigma_b * k.sigma_b;
            return KernelBlocks{k.sigma_a * k.sigma_a + b2 * (t - 1.0) * (u - 1.0), b2 * (t - 1.0),
                                b2 * (u - 1.0), b2};
          },
          [&](const DotProductIncreasing& k) {
            return KernelBlocks{k.alpha * t * u, k.alpha * t, k.alpha * u, k.alpha};
          },
          [&](const DotProductDecreasing& k) {
            return KernelBlocks{k.alpha * (t - 1.0) * (u - 1.0), k.alpha * (t - 1.0),
                                k.alpha * (u - 1.0), k.alpha};
          },
          [&](const Nugget& k) {
            return KernelBlocks{t == u ? k.sigma_w * k.sigma_w : 0.0, 0.0, 0.0, 0.0};
          },
          [&](const KernelSum& k) {
            KernelBlocks acc;
            for (const auto& m : k.members) {
              const KernelBlocks b = blocks_of(m, t, u);
              acc.c11 += b.c11;
              acc.c12 += b.c12;
              acc.c21 += b.c21;
              acc.c22 += b.c22;
            }
            return acc;
          },
      },
      kernel.variant());
}

}  // namespace

KernelSpec KernelSpec::squared_exponential(double alpha, double length) {
  require(finite(alpha) && alpha > 0.0, "squared exponential: alpha must be > 0");
  require(finite(length) && length > 0.0, "squared exponential: length-scale must be > 0");
  return KernelSpec(SquaredExponential{alpha, length});
}

KernelSpec KernelSpec::linear(double sigma_a, double sigma_b) {
  require(finite(sigma_a) && sigma_a >= 0.0, "linear: sigma_a must be >= 0");
  require(finite(sigma_b) && sigma_b > 0.0, "linear: sigma_b must be > 0");
  return KernelSpec(LinearKernel{sigma_a, sigma_b});
}

KernelSpec KernelSpec::dot_increasing(double alpha) {
  require(finite(alpha) && alpha > 0.0, "dot-product (increasing): alpha must be > 0");
  return KernelSpec(DotProductIncreasing{alpha});
}

KernelSpec KernelSpec::dot_decreasing(double alpha) {
  require(finite(alpha) && alpha > 0.0, "dot-product (decreasing): alpha must be > 0");
  return KernelSpec(DotProductDecreasing{alpha});
}

KernelSpec KernelSpec::nugget(double sigma_w) {
  require(finite(sigma_w) && sigma_w >= 0.0, "nugget: sigma_w must be >= 0");
  return KernelSpec(Nugget{sigma_w});
}

KernelSpec KernelSpec::sum(std::vector<KernelSpec> members) {
  require(!members.empty(), "sum kernel needs at least one member");
  bool non_nugget = false;
  for (const auto& m : members) non_nugget = non_nugget || !m.is_nugget();
  require(non_nugget, "sum kernel needs a member other than a nugget");
  return KernelSpec(KernelSum{std::move(members)});
}

bool KernelSpec::has_nugget() const {
  if (is_nugget()) return true;
  if (const auto* s = std::get_if<KernelSum>(&v_)) {
    for (const auto& m : s->members)
      if (m.has_nugget()) return true;
  }
  return false;
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const SquaredExponential& k) { os << "se(alpha=" << k.alpha << ", l=" << k.length << ")"; },
                 [&](const LinearKernel& k) {
                   os << "linear(sigma_a=" << k.sigma_a << ", sigma_b=" << k.sigma_b << ")";
                 },
                 [&](const DotProductIncreasing& k) { os << "dot_increasing(alpha=" << k.alpha << ")"; },
                 [&](const DotProductDecreasing& k) { os << "dot_decreasing(alpha=" << k.alpha << ")"; },
                 [&](const Nugget& k) { os << "nugget(sigma_w=" << k.sigma_w << ")"; },
                 [&](const KernelSum& k) {
                   os << "sum(";
                   for (std::size_t i = 0; i < k.members.size(); ++i)
                     os << (i ? ", " : "") << k.members[i].describe();
                   os << ")";
                 },
             },
             v_);
  return os.str();
}

bool operator==(const SquaredExponential& a, const SquaredExponential& b) {
  return a.alpha == b.alpha && a.length == b.length;
}
bool operator==(const LinearKernel& a, const LinearKernel& b) {
  return a.sigma_a == b.sigma_a && a.sigma_b == b.sigma_b;
}
bool operator==(const DotProductIncreasing& a, const DotProductIncreasing& b) { return a.alpha == b.alpha; }
bool operator==(const DotProductDecreasing& a, const DotProductDecreasing& b) { return a.alpha == b.alpha; }
bool operator==(const Nugget& a, const Nugget& b) { return a.sigma_w == b.sigma_w; }
bool operator==(const KernelSum& a, const KernelSum& b) { return a.members == b.members; }
bool operator==(const KernelSpec& a, const KernelSpec& b) { return a.v_ == b.v_; }

KernelBlocks eval_blocks(const KernelSpec& kernel, double t, double t2) {
  if (kernel.is_nugget()) throw ConfigError("a nugget kernel may only appear inside a sum");
  return blocks_of(kernel, t, t2);
}

namespace {
constexpr double kRelativePivotFloor = 1e-13;
}

std::span<const double> default_jitter_schedule() {
  static constexpr std::array<double, 5> schedule{0.0, 1e-10, 1e-8, 1e-6, 1e-4};
  return schedule;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> GramBundle::cross(double t) const {
  Eigen::Matrix<double, 2, Eigen::Dynamic> out(2, size());
  for (Eigen::Index j = 0; j < size(); ++j) {
    const KernelBlocks b = blocks_of(kernel_, t, times_[j]);
    out(0, j) = b.c11;
    out(1, j) = b.c21;
  }
  return out;
}

Eigen::Matrix2d GramBundle::point(double t) const {
  const KernelBlocks b = blocks_of(kernel_, t, t);
  Eigen::Matrix2d out;
  out << b.c11, b.c12, b.c21, b.c22;
  return out;
}

GramBundle build_gram(const KernelSpec& kernel, std::vector<double> obs_times,
                      std::span<const double> jitter_schedule) {
  if (kernel.is_nugget()) throw ConfigError("a nugget kernel may only appear inside a sum");
  if (obs_times.size() < 2) throw DomainError("need at least two observation times");
  for (std::size_t i = 0; i < obs_times.size(); ++i) {
    const double t = obs_times[i];
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("observation times must lie in [0,1]");
    if (i > 0 && !(t > obs_times[i - 1]))
      throw DomainError("observation times must be strictly increasing");
  }
  if (obs_times.front() != 0.0 || obs_times.back() != 1.0)
    throw DomainError("observation times must start at 0 and end at 1");
  if (jitter_schedule.empty()) throw ConfigError("empty jitter schedule");

  GramBundle bundle(kernel, std::move(obs_times));
  const Eigen::Index m = bundle.size();
  bundle.gram_.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      bundle.gram_(i, j) = blocks_of(kernel, bundle.times_[i], bundle.times_[j]).c11;

  for (double jitter : jitter_schedule) {
    Matrix k = bundle.gram_;
    k.diagonal().array() += jitter;
    bundle.llt_.compute(k);
    if (bundle.llt_.info() != Eigen::Success) continue;
    const auto diag = Matrix(bundle.llt_.matrixL()).diagonal();
    // A pivot at round-off level means the gram is singular in practice.
    const double floor = kRelativePivotFloor * std::max(1.0, bundle.gram_.diagonal().cwiseAbs().maxCoeff());
    if (!diag.allFinite() || (diag.array().square() <= floor).any()) continue;
    bundle.jitter_ = jitter;
    return bundle;
  }

  std::ostringstream os;
  os << "gram matrix of " << kernel.describe() << " at times (";
  for (std::size_t i = 0; i < bundle.times_.size(); ++i) os << (i ? ", " : "") << bundle.times_[i];
  os << ") is not positive definite even with jitter " << jitter_schedule.back();
  throw DegenerateGramError(os.str());
}

}  // namespace streamflow
