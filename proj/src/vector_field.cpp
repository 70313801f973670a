#include "streamflow/vector_field.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "streamflow/errors.hpp"
#include "streamflow/parallel.hpp"

namespace streamflow {
namespace {

constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
constexpr const char* kCheckpointMagic = "streamflow-checkpoint";
constexpr int kCheckpointVersion = 1;

double activate(Activation a, double z) {
  if (a == Activation::tanh) return std::tanh(z);
  return z > 0.0 ? kSeluLambda * z : kSeluLambda * kSeluAlpha * std::expm1(z);
}

// Derivative expressed through the activation output.
double activate_grad(Activation a, double y) {
  if (a == Activation::tanh) return 1.0 - y * y;
  return y > 0.0 ? kSeluLambda : y + kSeluLambda * kSeluAlpha;
}

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

void check_inputs(const Architecture& arch, Eigen::Index n, const Matrix& x, const Matrix& c) {
  if (x.rows() != n || x.cols() != arch.state_dim)
    throw DimensionError("state batch must be n x " + std::to_string(arch.state_dim));
  if (arch.covariate_dim > 0) {
    if (c.rows() != n || c.cols() != arch.covariate_dim)
      throw DimensionError("covariate batch must be n x " + std::to_string(arch.covariate_dim));
  } else if (c.size() != 0) {
    throw DimensionError("model takes no covariates");
  }
}

// Column-per-sample input block [t; x^T; c^T].
Matrix input_block(const Architecture& arch, const Vector& t, const Matrix& x, const Matrix& c,
                   Eigen::Index r0, Eigen::Index m) {
  Matrix in(arch.input_dim(), m);
  in.row(0) = t.segment(r0, m).transpose();
  in.middleRows(1, arch.state_dim) = x.middleRows(r0, m).transpose();
  if (arch.covariate_dim > 0) in.bottomRows(arch.covariate_dim) = c.middleRows(r0, m).transpose();
  return in;
}

// Activations of every layer for one block; acts[0] is the input.
std::vector<Matrix> block_forward(const VectorFieldModel& model, const std::vector<LayerSlice>& layout,
                                  Matrix input) {
  std::vector<Matrix> acts;
  acts.reserve(layout.size() + 1);
  acts.push_back(std::move(input));
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const auto& s = layout[l];
    ConstMap w(model.params.data() + s.weights, s.out, s.in);
    Eigen::Map<const Vector> b(model.params.data() + s.biases, s.out);
    Matrix z = w * acts.back();
    z.colwise() += b;
    if (l + 1 < layout.size()) z = z.unaryExpr([&](double v) { return activate(model.arch.activation, v); });
    acts.push_back(std::move(z));
  }
  return acts;
}

Eigen::Index block_count(Eigen::Index n) {
  const auto bs = static_cast<Eigen::Index>(kRowBlock);
  return (n + bs - 1) / bs;
}

void check_loss(double loss, std::size_t step) {
  if (!std::isfinite(loss))
    throw DivergenceError(step, "training diverged: non-finite loss at step " + std::to_string(step));
}

void check_batch(const Architecture& arch, const StreamBatch& batch) {
  const Eigen::Index n = batch.rows();
  if (n == 0) throw DimensionError("loss needs a non-empty batch");
  check_inputs(arch, n, batch.s, batch.covariates);
  if (batch.sdot.rows() != n || batch.sdot.cols() != arch.state_dim)
    throw DimensionError("velocity batch must match the state batch");
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "selu"; }

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "selu") return Activation::selu;
  throw ConfigError("unknown activation '" + name + "' (expected tanh or selu)");
}

std::size_t Architecture::parameter_count() const {
  std::size_t total = 0;
  for (const auto& s : layer_layout(*this)) total += static_cast<std::size_t>(s.out * (s.in + 1));
  return total;
}

void Architecture::validate() const {
  if (state_dim < 1) throw ConfigError("state dimension must be >= 1");
  if (covariate_dim < 0) throw ConfigError("covariate dimension must be >= 0");
  for (int w : hidden)
    if (w < 1) throw ConfigError("hidden widths must be >= 1");
}

std::vector<LayerSlice> layer_layout(const Architecture& arch) {
  arch.validate();
  std::vector<LayerSlice> out;
  Eigen::Index in = arch.input_dim();
  std::size_t offset = 0;
  auto add = [&](Eigen::Index width) {
    LayerSlice s{in, width, offset, offset + static_cast<std::size_t>(width * in)};
    offset = s.biases + static_cast<std::size_t>(width);
    out.push_back(s);
    in = width;
  };
  for (int w : arch.hidden) add(w);
  add(arch.output_dim());
  return out;
}

VectorFieldModel VectorFieldModel::initialize(const Architecture& arch, Rng& rng) {
  VectorFieldModel m = zeros(arch);
  for (const auto& s : layer_layout(arch)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.in));
    const std::size_t end = s.biases + static_cast<std::size_t>(s.out);
    for (std::size_t i = s.weights; i < end; ++i)
      m.params(static_cast<Eigen::Index>(i)) = bound * (2.0 * rng.uniform() - 1.0);
  }
  return m;
}

VectorFieldModel VectorFieldModel::zeros(const Architecture& arch) {
  return VectorFieldModel{arch, Vector::Zero(static_cast<Eigen::Index>(arch.parameter_count()))};
}

Vector forward(const VectorFieldModel& model, double t, const Vector& x, const Vector& c) {
  Vector tv(1);
  tv(0) = t;
  const Matrix xm = x.transpose();
  const Matrix cm = c.size() ? Matrix(c.transpose()) : Matrix(1, 0);
  return forward_batch(model, tv, xm, c.size() || model.arch.covariate_dim ? cm : Matrix()).row(0).transpose();
}

Matrix forward_batch(const VectorFieldModel& model, const Vector& t, const Matrix& x, const Matrix& c) {
  const Eigen::Index n = t.size();
  check_inputs(model.arch, n, x, c);
  if (static_cast<std::size_t>(model.params.size()) != model.arch.parameter_count())
    throw DimensionError("parameter vector does not match the architecture");
  const auto layout = layer_layout(model.arch);
  Matrix out(n, model.arch.output_dim());
  const auto bs = static_cast<Eigen::Index>(kRowBlock);
#pragma omp parallel for schedule(static)
  for (Eigen::Index blk = 0; blk < block_count(n); ++blk) {
    const Eigen::Index r0 = blk * bs;
    const Eigen::Index m = std::min(bs, n - r0);
    const auto acts = block_forward(model, layout, input_block(model.arch, t, x, c, r0, m));
    out.middleRows(r0, m) = acts.back().transpose();
  }
  return out;
}

LossAndGrad loss_and_grad(const VectorFieldModel& model, const StreamBatch& batch, std::size_t step) {
  check_batch(model.arch, batch);
  const Eigen::Index n = batch.rows();
  const auto layout = layer_layout(model.arch);
  const Eigen::Index blocks = block_count(n);
  const auto bs = static_cast<Eigen::Index>(kRowBlock);
  const double scale = 1.0 / static_cast<double>(n);

  std::vector<Vector> grads(static_cast<std::size_t>(blocks));
  std::vector<double> losses(static_cast<std::size_t>(blocks), 0.0);

#pragma omp parallel for schedule(static)
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    const Eigen::Index r0 = blk * bs;
    const Eigen::Index m = std::min(bs, n - r0);
    const auto acts = block_forward(model, layout, input_block(model.arch, batch.t, batch.s, batch.covariates, r0, m));
    Matrix g = acts.back() - batch.sdot.middleRows(r0, m).transpose();
    losses[static_cast<std::size_t>(blk)] = g.squaredNorm() * scale;
    g *= 2.0 * scale;

    Vector grad = Vector::Zero(model.params.size());
    for (std::size_t l = layout.size(); l-- > 0;) {
      const auto& s = layout[l];
      MutMap(grad.data() + s.weights, s.out, s.in).noalias() = g * acts[l].transpose();
      Eigen::Map<Vector>(grad.data() + s.biases, s.out) = g.rowwise().sum();
      if (l == 0) break;
      ConstMap w(model.params.data() + s.weights, s.out, s.in);
      Matrix back = w.transpose() * g;
      const Activation act = model.arch.activation;
      g = back.cwiseProduct(acts[l].unaryExpr([act](double y) { return activate_grad(act, y); }));
    }
    grads[static_cast<std::size_t>(blk)] = std::move(grad);
  }

  LossAndGrad out{0.0, Vector::Zero(model.params.size())};
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    out.loss += losses[static_cast<std::size_t>(blk)];
    out.grad += grads[static_cast<std::size_t>(blk)];
  }
  check_loss(out.loss, step);
  return out;
}

AdamState AdamState::for_size(Eigen::Index n, const AdamSettings& settings) {
  if (!(settings.lr > 0.0) || !(settings.eps > 0.0) || settings.beta1 < 0.0 || settings.beta1 >= 1.0 ||
      settings.beta2 < 0.0 || settings.beta2 >= 1.0)
    throw ConfigError("invalid Adam settings");
  return AdamState{Vector::Zero(n), Vector::Zero(n), 0, settings};
}

void adam_step(AdamState& state, Vector& params, const Vector& grad) {
  if (grad.size() != params.size() || state.m.size() != params.size())
    throw DimensionError("Adam state, parameters and gradient must have equal length");
  const auto& s = state.settings;
  ++state.step;
  state.m = s.beta1 * state.m + (1.0 - s.beta1) * grad;
  state.v = s.beta2 * state.v + (1.0 - s.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(state.step));
  params.array() -= s.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + s.eps);
}

void write_checkpoint(std::ostream& os, const VectorFieldModel& model) {
  const auto& a = model.arch;
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  os << "state_dim " << a.state_dim << '\n';
  os << "covariate_dim " << a.covariate_dim << '\n';
  os << "hidden";
  for (int w : a.hidden) os << ' ' << w;
  os << '\n';
  os << "activation " << to_string(a.activation) << '\n';
  os << "parameters " << model.params.size() << '\n';
  const auto old = os.precision(17);
  for (Eigen::Index i = 0; i < model.params.size(); ++i) os << model.params(i) << '\n';
  os.precision(old);
  os << "end\n";
}

VectorFieldModel read_checkpoint(std::istream& is) {
  auto fail = [](const std::string& what) -> ConfigError { return ConfigError("bad checkpoint: " + what); };
  std::string line, key;
  auto next_line = [&](const char* expected) {
    if (!std::getline(is, line)) throw fail(std::string("missing '") + expected + "'");
    std::istringstream ls(line);
    ls >> key;
    if (key != expected) throw fail(std::string("expected '") + expected + "', got '" + key + "'");
    return ls;
  };
  Architecture arch;
  {
    auto ls = next_line(kCheckpointMagic);
    int version = 0;
    ls >> version;
    if (version != kCheckpointVersion) throw fail("unsupported version");
  }
  next_line("state_dim") >> arch.state_dim;
  next_line("covariate_dim") >> arch.covariate_dim;
  {
    auto ls = next_line("hidden");
    arch.hidden.clear();
    for (int w; ls >> w;) arch.hidden.push_back(w);
  }
  {
    std::string act;
    next_line("activation") >> act;
    arch.activation = parse_activation(act);
  }
  arch.validate();
  Eigen::Index count = -1;
  next_line("parameters") >> count;
  if (count < 0 || static_cast<std::size_t>(count) != arch.parameter_count())
    throw fail("parameter count does not match the architecture");
  VectorFieldModel model{arch, Vector(count)};
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw fail("truncated parameter list");
    std::size_t used = 0;
    try {
      model.params(i) = std::stod(line, &used);
    } catch (const std::exception&) {
      throw fail("unparseable parameter '" + line + "'");
    }
  }
  if (!std::getline(is, line) || line != "end") throw fail("missing end marker");
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const VectorFieldModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write checkpoint " + path.string());
  write_checkpoint(os, model);
}

VectorFieldModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint " + path.string());
  return read_checkpoint(is);
}

namespace reference {
namespace {

struct Trace {
  std::vector<std::vector<double>> acts;  // per layer outputs, acts[0] = input
};

Trace sample_forward(const VectorFieldModel& model, const std::vector<LayerSlice>& layout,
                     std::vector<double> input) {
  Trace tr;
  tr.acts.push_back(std::move(input));
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const auto& s = layout[l];
    const auto& prev = tr.acts.back();
    std::vector<double> next(static_cast<std::size_t>(s.out));
    for (Eigen::Index o = 0; o < s.out; ++o) {
      double z = model.params(static_cast<Eigen::Index>(s.biases) + o);
      for (Eigen::Index i = 0; i < s.in; ++i)
        z += model.params(static_cast<Eigen::Index>(s.weights) + i * s.out + o) * prev[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = l + 1 < layout.size() ? activate(model.arch.activation, z) : z;
    }
    tr.acts.push_back(std::move(next));
  }
  return tr;
}

std::vector<double> sample_input(const Architecture& arch, double t, const Matrix& x, const Matrix& c,
                                 Eigen::Index r) {
  std::vector<double> in;
  in.push_back(t);
  for (Eigen::Index k = 0; k < arch.state_dim; ++k) in.push_back(x(r, k));
  for (Eigen::Index k = 0; k < arch.covariate_dim; ++k) in.push_back(c(r, k));
  return in;
}

}  // namespace

Matrix forward_batch(const VectorFieldModel& model, const Vector& t, const Matrix& x, const Matrix& c) {
  check_inputs(model.arch, t.size(), x, c);
  const auto layout = layer_layout(model.arch);
  Matrix out(t.size(), model.arch.output_dim());
  for (Eigen::Index r = 0; r < t.size(); ++r) {
    const auto tr = sample_forward(model, layout, sample_input(model.arch, t(r), x, c, r));
    for (Eigen::Index k = 0; k < out.cols(); ++k) out(r, k) = tr.acts.back()[static_cast<std::size_t>(k)];
  }
  return out;
}

LossAndGrad loss_and_grad(const VectorFieldModel& model, const StreamBatch& batch) {
  check_batch(model.arch, batch);
  const auto layout = layer_layout(model.arch);
  const Eigen::Index n = batch.rows();
  const double scale = 1.0 / static_cast<double>(n);
  LossAndGrad out{0.0, Vector::Zero(model.params.size())};
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto tr = sample_forward(model, layout, sample_input(model.arch, batch.t(r), batch.s, batch.covariates, r));
    std::vector<double> g(static_cast<std::size_t>(model.arch.output_dim()));
    for (Eigen::Index k = 0; k < model.arch.output_dim(); ++k) {
      const double diff = tr.acts.back()[static_cast<std::size_t>(k)] - batch.sdot(r, k);
      out.loss += diff * diff * scale;
      g[static_cast<std::size_t>(k)] = 2.0 * diff * scale;
    }
    for (std::size_t l = layout.size(); l-- > 0;) {
      const auto& s = layout[l];
      const auto& prev = tr.acts[l];
      std::vector<double> back(static_cast<std::size_t>(s.in), 0.0);
      for (Eigen::Index o = 0; o < s.out; ++o) {
        const double go = g[static_cast<std::size_t>(o)];
        out.grad(static_cast<Eigen::Index>(s.biases) + o) += go;
        for (Eigen::Index i = 0; i < s.in; ++i) {
          const Eigen::Index w = static_cast<Eigen::Index>(s.weights) + i * s.out + o;
          out.grad(w) += go * prev[static_cast<std::size_t>(i)];
          back[static_cast<std::size_t>(i)] += model.params(w) * go;
        }
      }
      if (l == 0) break;
      for (Eigen::Index i = 0; i < s.in; ++i)
        back[static_cast<std::size_t>(i)] *= activate_grad(model.arch.activation, prev[static_cast<std::size_t>(i)]);
      g = std::move(back);
    }
  }
  check_loss(out.loss, 0);
  return out;
}

}  // namespace reference
}  // namespace streamflow
