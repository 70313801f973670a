// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "streamflow/coupling.hpp"
#include "streamflow/eval.hpp"
#include "streamflow/ode.hpp"
#include "streamflow/parallel.hpp"
#include "streamflow/vector_field.hpp"

using namespace streamflow;

namespace {

VectorFieldModel bench_model() {
  Rng rng(1);
  return VectorFieldModel::initialize(Architecture{}, rng);
}

StreamBatch bench_batch(Eigen::Index n) {
  Rng rng(2);
  StreamBatch b;
  b.t = (rng.normal_matrix(n, 1).array().abs().min(1.0)).matrix();
  b.s = rng.normal_matrix(n, 2);
  b.sdot = rng.normal_matrix(n, 2);
  b.covariates = Matrix(n, 0);
  return b;
}

void BM_forward_batch_serial(benchmark::State& st) {
  const auto m = bench_model();
  const auto b = bench_batch(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(reference::forward_batch(m, b.t, b.s));
}

void BM_forward_batch_omp(benchmark::State& st) {
  const auto m = bench_model();
  const auto b = bench_batch(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(forward_batch(m, b.t, b.s));
}

void BM_loss_and_grad_serial(benchmark::State& st) {
  const auto m = bench_model();
  const auto b = bench_batch(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(reference::loss_and_grad(m, b));
}

void BM_loss_and_grad_omp(benchmark::State& st) {
  const auto m = bench_model();
  const auto b = bench_batch(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(loss_and_grad(m, b));
}

void BM_squared_distances_serial(benchmark::State& st) {
  Rng rng(3);
  const Matrix a = rng.normal_matrix(st.range(0), 2), b = rng.normal_matrix(st.range(0), 2);
  for (auto _ : st) benchmark::DoNotOptimize(reference::squared_distances(a, b));
}

void BM_squared_distances_omp(benchmark::State& st) {
  Rng rng(3);
  const Matrix a = rng.normal_matrix(st.range(0), 2), b = rng.normal_matrix(st.range(0), 2);
  for (auto _ : st) benchmark::DoNotOptimize(squared_distances(a, b));
}

void BM_generate_serial(benchmark::State& st) {
  const auto m = bench_model();
  Rng rng(4);
  const Matrix src = rng.normal_matrix(st.range(0), 2);
  const std::vector<double> stops{1.0};
  IntegratorSpec spec;
  spec.n_steps = 20;
  for (auto _ : st) benchmark::DoNotOptimize(reference::generate(m, src, spec, stops));
}

void BM_generate_omp(benchmark::State& st) {
  const auto m = bench_model();
  Rng rng(4);
  const Matrix src = rng.normal_matrix(st.range(0), 2);
  const std::vector<double> stops{1.0};
  IntegratorSpec spec;
  spec.n_steps = 20;
  for (auto _ : st) benchmark::DoNotOptimize(generate(m, src, spec, stops));
}

StreamDraws nw_draws() {
  Rng rng(5);
  return {rng.normal_matrix(20000, 2), rng.normal_matrix(20000, 2)};
}

void BM_nadaraya_watson_serial(benchmark::State& st) {
  const auto d = nw_draws();
  Rng rng(6);
  const Matrix grid = rng.normal_matrix(st.range(0), 2);
  const Vector bw = silverman_bandwidth(d.s);
  for (auto _ : st) benchmark::DoNotOptimize(reference::nadaraya_watson(d, 0.5, grid, bw));
}

void BM_nadaraya_watson_omp(benchmark::State& st) {
  const auto d = nw_draws();
  Rng rng(6);
  const Matrix grid = rng.normal_matrix(st.range(0), 2);
  const Vector bw = silverman_bandwidth(d.s);
  for (auto _ : st) benchmark::DoNotOptimize(nadaraya_watson(d, 0.5, grid, bw));
}

}  // namespace

BENCHMARK(BM_forward_batch_serial)->Arg(128)->Arg(1024);
BENCHMARK(BM_forward_batch_omp)->Arg(128)->Arg(1024);
BENCHMARK(BM_loss_and_grad_serial)->Arg(128)->Arg(1024);
BENCHMARK(BM_loss_and_grad_omp)->Arg(128)->Arg(1024);
BENCHMARK(BM_squared_distances_serial)->Arg(128)->Arg(1000);
BENCHMARK(BM_squared_distances_omp)->Arg(128)->Arg(1000);
BENCHMARK(BM_generate_serial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_generate_omp)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_nadaraya_watson_serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_nadaraya_watson_omp)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
