#include "streamflow/trainer.hpp"

#include <functional>
#include <ostream>

#include "streamflow/errors.hpp"
#include "streamflow/gp_stream.hpp"

namespace streamflow {
namespace {

using TupleDraw = std::function<Batch(Eigen::Index, Rng&)>;

void permute_rows(Matrix& m, const std::vector<Eigen::Index>& perm) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.row(r) = m.row(perm[static_cast<std::size_t>(r)]);
  m = std::move(out);
}

TrainResult run(const TrainConfig& config, const std::vector<double>& times, const TupleDraw& draw, int state_dim,
                Rng& rng) {
  config.validate();
  Architecture arch;
  arch.state_dim = state_dim;
  arch.covariate_dim = config.covariate == CovariateMode::x0 ? state_dim : 0;
  arch.hidden = config.hidden;
  arch.activation = config.activation;

  TrainResult result{VectorFieldModel::initialize(arch, rng), {}};
  AdamState adam = AdamState::for_size(result.model.params.size(), config.adam);

  const bool fast = config.linear_fast_path && !config.uses_gp() && config.sigma == 0.0 && times.size() == 2;
  const GramBundle bundle = build_gram(config.stream_kernel(), times);
  const MeanFunction mean = MeanFunction::zero();

  double window = 0.0;
  std::size_t in_window = 0;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    Batch batch = draw(config.batch_size, rng);
    if (config.uses_ot()) {
      const auto perm = ot_coupling(batch.source(), batch.target());
      for (std::size_t j = 1; j < batch.slices.size(); ++j) permute_rows(batch.slices[j], perm);
    }
    Vector t(config.batch_size);
    if (config.t_per_batch)
      t.setConstant(rng.uniform());
    else
      for (Eigen::Index r = 0; r < t.size(); ++r) t(r) = rng.uniform();

    StreamBatch streams = fast ? linear_interpolant_streams(batch.source(), batch.target(), t, rng)
                               : sample_streams(bundle, mean, batch.slices, t, rng);
    if (config.covariate == CovariateMode::x0) streams.covariates = batch.source();

    const LossAndGrad lg = loss_and_grad(result.model, streams, it);
    adam_step(adam, result.model.params, lg.grad);

    window += lg.loss;
    if (++in_window == config.loss_every) {
      result.loss_trace.push_back({it + 1, window / static_cast<double>(in_window)});
      window = 0.0;
      in_window = 0;
    }
  }
  return result;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::i_cfm: return "i_cfm";
    case Algorithm::gp_i_cfm: return "gp_i_cfm";
    case Algorithm::ot_cfm: return "ot_cfm";
    case Algorithm::gp_ot_cfm: return "gp_ot_cfm";
  }
  return "?";
}

std::string to_string(VarianceKind v) {
  switch (v) {
    case VarianceKind::none: return "none";
    case VarianceKind::constant: return "constant";
    case VarianceKind::increasing: return "increasing";
    case VarianceKind::decreasing: return "decreasing";
  }
  return "?";
}

std::string to_string(CovariateMode c) { return c == CovariateMode::x0 ? "x0" : "off"; }

Algorithm parse_algorithm(const std::string& name) {
  for (auto a : {Algorithm::i_cfm, Algorithm::gp_i_cfm, Algorithm::ot_cfm, Algorithm::gp_ot_cfm})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown algorithm '" + name + "' (expected i_cfm, gp_i_cfm, ot_cfm or gp_ot_cfm)");
}

VarianceKind parse_variance(const std::string& name) {
  for (auto v : {VarianceKind::none, VarianceKind::constant, VarianceKind::increasing, VarianceKind::decreasing})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown variance scheme '" + name + "' (expected none, constant, increasing or decreasing)");
}

CovariateMode parse_covariate_mode(const std::string& name) {
  if (name == "off") return CovariateMode::off;
  if (name == "x0") return CovariateMode::x0;
  throw ConfigError("unknown covariate mode '" + name + "' (expected off or x0)");
}

KernelSpec make_scheme_kernel(const SquaredExponential& base, const VarianceScheme& scheme) {
  KernelSpec se = KernelSpec::squared_exponential(base.alpha, base.length);
  switch (scheme.kind) {
    case VarianceKind::none: return se;
    case VarianceKind::constant: return KernelSpec::sum({se, KernelSpec::nugget(scheme.param)});
    case VarianceKind::increasing: return KernelSpec::sum({se, KernelSpec::dot_increasing(scheme.param)});
    case VarianceKind::decreasing: return KernelSpec::sum({se, KernelSpec::dot_decreasing(scheme.param)});
  }
  throw ConfigError("unknown variance scheme");
}

KernelSpec TrainConfig::stream_kernel() const {
  if (uses_gp()) {
    if (variance.kind == VarianceKind::none) return gp_kernel;
    const auto* se = std::get_if<SquaredExponential>(&gp_kernel.variant());
    if (!se) throw ConfigError("variance schemes modify an SE kernel; got " + gp_kernel.describe());
    return make_scheme_kernel(*se, variance);
  }
  KernelSpec lin = KernelSpec::linear(linear_sigma_a, linear_sigma_b);
  if (sigma > 0.0) return KernelSpec::sum({lin, KernelSpec::nugget(sigma)});
  return lin;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (loss_every < 1) throw ConfigError("loss_every must be >= 1");
  if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
  if (!uses_gp() && variance.kind != VarianceKind::none)
    throw ConfigError("variance schemes apply to gp_* algorithms only");
  if (uses_ot() && batch_size > kMaxOtSize) throw ConfigError("OT minibatch exceeds 4096 rows");
  (void)stream_kernel();
  AdamState::for_size(0, adam);
  Architecture probe;
  probe.hidden = hidden;
  probe.validate();
}

TrainResult train(const TrainConfig& config, const SourceSampler& source, const Matrix& target, Rng& rng) {
  if (target.rows() == 0) throw DimensionError("empty target set");
  TupleDraw draw = [&](Eigen::Index n, Rng& r) { return independent_coupling(source, target, n, r); };
  return run(config, {0.0, 1.0}, draw, static_cast<int>(target.cols()), rng);
}

TrainResult train_multimarginal(const TrainConfig& config, const std::vector<double>& times,
                                const GroupedTupleSampler& sampler, Rng& rng) {
  if (times.size() < 2) throw DomainError("multi-marginal training needs M >= 2 times");
  if (sampler.slice_count() != times.size()) throw DimensionError("need one slice per observation time");
  const int dim = static_cast<int>(sampler.dim());
  TupleDraw draw = [&](Eigen::Index n, Rng& r) { return sampler.draw(n, r); };
  return run(config, times, draw, dim, rng);
}

void write_loss_csv(std::ostream& os, const std::vector<LossRecord>& trace) {
  const auto old = os.precision(17);
  os << "iter,loss\n";
  for (const auto& r : trace) os << r.iter << ',' << r.loss << '\n';
  os.precision(old);
}

}  // namespace streamflow
