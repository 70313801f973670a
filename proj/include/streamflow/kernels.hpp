#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>

#include "streamflow/types.hpp"

namespace streamflow {

// Covariance kernels over time for a scalar stream coordinate. Every kernel
// exposes the four blocks of the joint (s, sdot) process:
//   c11(t, t2)                 Cov(s_t, s_t2)
//   c12 = d c11 / d t2         Cov(s_t, sdot_t2)
//   c21 = d c11 / d t          Cov(sdot_t, s_t2)
//   c22 = d^2 c11 / dt dt2     Cov(sdot_t, sdot_t2)

struct SquaredExponential {
  double alpha;   // variance
  double length;  // length-scale
};

// sigma_a^2 + sigma_b^2 (t - 1)(t2 - 1)
struct LinearKernel {
  double sigma_a;
  double sigma_b;
};

// alpha t t2
struct DotProductIncreasing {
  double alpha;
};

// alpha (t - 1)(t2 - 1)
struct DotProductDecreasing {
  double alpha;
};

// White noise on positions only; sigma_w^2 at coincident times.
struct Nugget {
  double sigma_w;
};

class KernelSpec;

struct KernelSum {
  std::vector<KernelSpec> members;
};

class KernelSpec {
 public:
  using Variant = std::variant<SquaredExponential, LinearKernel, DotProductIncreasing,
                               DotProductDecreasing, Nugget, KernelSum>;

  // Factories validate hyper-parameters and throw ConfigError.
  static KernelSpec squared_exponential(double alpha, double length);
  static KernelSpec linear(double sigma_a, double sigma_b);
  static KernelSpec dot_increasing(double alpha);
  static KernelSpec dot_decreasing(double alpha);
  // A nugget is only usable as a member of sum().
  static KernelSpec nugget(double sigma_w);
  static KernelSpec sum(std::vector<KernelSpec> members);

  const Variant& variant() const { return v_; }
  bool is_nugget() const { return std::holds_alternative<Nugget>(v_); }
  bool has_nugget() const;
  std::string describe() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&);

 private:
  explicit KernelSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

bool operator==(const SquaredExponential&, const SquaredExponential&);
bool operator==(const LinearKernel&, const LinearKernel&);
bool operator==(const DotProductIncreasing&, const DotProductIncreasing&);
bool operator==(const DotProductDecreasing&, const DotProductDecreasing&);
bool operator==(const Nugget&, const Nugget&);
bool operator==(const KernelSum&, const KernelSum&);

struct KernelBlocks {
  double c11 = 0.0;
  double c12 = 0.0;
  double c21 = 0.0;
  double c22 = 0.0;
};

// No clamping of t, t2 to [0,1]. Throws ConfigError on a bare nugget.
KernelBlocks eval_blocks(const KernelSpec& kernel, double t, double t2);

std::span<const double> default_jitter_schedule();

// Gram matrix of c11 over the observation times plus its Cholesky factor.
// Immutable after construction; shared read-only across workers.
class GramBundle {
 public:
  const KernelSpec& kernel() const { return kernel_; }
  const std::vector<double>& times() const { return times_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(times_.size()); }
  // K_obs without jitter.
  const Matrix& gram() const { return gram_; }
  double jitter() const { return jitter_; }
  const Eigen::LLT<Matrix>& factorization() const { return llt_; }
  Matrix lower() const { return llt_.matrixL(); }

  // [c11(t, t_j); c21(t, t_j)] for every observation time t_j.
  Eigen::Matrix<double, 2, Eigen::Dynamic> cross(double t) const;
  // [[c11(t,t), c12(t,t)], [c21(t,t), c22(t,t)]]
  Eigen::Matrix2d point(double t) const;

 private:
  friend GramBundle build_gram(const KernelSpec&, std::vector<double>, std::span<const double>);
  GramBundle(KernelSpec k, std::vector<double> times) : kernel_(std::move(k)), times_(std::move(times)) {}

  KernelSpec kernel_;
  std::vector<double> times_;
  Matrix gram_;
  double jitter_ = 0.0;
  Eigen::LLT<Matrix> llt_;
};

// obs_times must be strictly increasing in [0,1], starting at 0 and ending
// at 1. Uses the smallest jitter in the schedule whose factorization
// succeeds; throws DegenerateGramError if none does.
GramBundle build_gram(const KernelSpec& kernel, std::vector<double> obs_times,
                      std::span<const double> jitter_schedule = default_jitter_schedule());

}  // namespace streamflow
