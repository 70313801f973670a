#include "streamflow/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "streamflow/coupling.hpp"
#include "streamflow/errors.hpp"
#include "streamflow/io.hpp"
#include "streamflow/ode.hpp"
#include "streamflow/parallel.hpp"

namespace streamflow {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix head(const Matrix& m, Eigen::Index n) { return m.topRows(n); }

Matrix covariates_for(const ExperimentConfig& config, const Matrix& source) {
  return config.train.covariate == CovariateMode::x0 ? source : Matrix();
}

Distribution two_gaussians_diagonal() {
  Matrix means(2, 2);
  means << -3.0, -3.0, 3.0, 3.0;
  return Distribution::mixture(means, Vector::Constant(2, 0.5), Vector::Constant(2, 0.5));
}

BenchVariant algorithm_variant(Algorithm a) {
  return {to_string(a), "none", Pipeline::single, [a](ExperimentConfig& c) { c.train.algorithm = a; }};
}

BenchVariant scheme_variant(VarianceKind kind) {
  return {"gp_i_cfm", to_string(kind), Pipeline::single, [kind](ExperimentConfig& c) {
            c.train.algorithm = Algorithm::gp_i_cfm;
            c.train.variance.kind = kind;
            switch (kind) {
              case VarianceKind::none: c.train.variance.param = 0.0; break;
              case VarianceKind::constant: c.train.variance.param = c.schemes.constant; break;
              case VarianceKind::increasing: c.train.variance.param = c.schemes.increasing; break;
              case VarianceKind::decreasing: c.train.variance.param = c.schemes.decreasing; break;
            }
          }};
}

std::vector<BenchVariant> scheme_variants() {
  return {scheme_variant(VarianceKind::none), scheme_variant(VarianceKind::constant),
          scheme_variant(VarianceKind::increasing), scheme_variant(VarianceKind::decreasing)};
}

std::vector<BenchVariant> algorithm_variants() {
  return {algorithm_variant(Algorithm::i_cfm), algorithm_variant(Algorithm::gp_i_cfm),
          algorithm_variant(Algorithm::ot_cfm), algorithm_variant(Algorithm::gp_ot_cfm)};
}

std::string run_dir_name(const BenchVariant& v, std::uint64_t seed) {
  return v.algorithm + "_" + v.scheme + "_seed" + std::to_string(seed);
}

}  // namespace

TrainedExperiment train_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  DatasetSpec spec = config.data;
  spec.seed = seed;
  TrainConfig tc = config.train;
  tc.seed = seed;
  TrainedExperiment out{generate_dataset(spec), {}};
  const Dataset& ds = out.data;
  Rng rng(seed, kTrainStream);
  if (spec.layout == Layout::pair) {
    const SourceSampler source = spec.finite_source ? empirical_source(ds.train[0]) : spec.source.sampler();
    out.result = train(tc, source, ds.train[1], rng);
    return out;
  }
  std::vector<Matrix> slices(ds.train.begin() + (ds.noise_slice0 ? 1 : 0), ds.train.end());
  std::optional<SourceSampler> noise;
  if (ds.noise_slice0) noise = spec.source.sampler();
  GroupedTupleSampler sampler(std::move(slices), ds.train_groups, noise);
  out.result = train_multimarginal(tc, ds.times, sampler, rng);
  return out;
}

Matrix generation_source(const ExperimentConfig& config, const Dataset& data) {
  return head(data.test.front(), config.eval.w2_size);
}

std::vector<double> evaluation_stops(const Dataset& data) {
  return std::vector<double>(data.times.begin() + 1, data.times.end());
}

std::string hash_matrices(const std::vector<const Matrix*>& mats) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const Matrix* m : mats) {
    const std::int64_t shape[2] = {m->rows(), m->cols()};
    mix(shape, sizeof shape);
    mix(m->data(), sizeof(double) * static_cast<std::size_t>(m->size()));
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

VariantOutcome run_variant(const ExperimentConfig& config, Pipeline pipeline, std::uint64_t seed,
                           const std::vector<double>& snapshot_stops) {
  VariantOutcome out;
  const Eigen::Index n = config.eval.w2_size;

  if (pipeline == Pipeline::single) {
    auto start = Clock::now();
    TrainedExperiment run = train_experiment(config, seed);
    out.train_seconds = seconds_since(start);
    out.loss_traces.push_back(run.result.loss_trace);

    const Matrix source = generation_source(config, run.data);
    const std::vector<double> scored = evaluation_stops(run.data);
    std::vector<double> stops = scored;
    stops.insert(stops.end(), snapshot_stops.begin(), snapshot_stops.end());
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    start = Clock::now();
    const auto samples = generate(run.result.model, source, config.integrator, stops, covariates_for(config, source));
    out.generate_seconds = seconds_since(start);

    std::vector<const Matrix*> hashed{&source};
    for (std::size_t k = 0; k < stops.size(); ++k) {
      const auto it = std::find(scored.begin(), scored.end(), stops[k]);
      if (it != scored.end()) {
        const std::size_t slice = static_cast<std::size_t>(it - scored.begin()) + 1;
        out.scores.push_back({stops[k], w2(samples[k], head(run.data.test[slice], n))});
      }
      if (std::find(snapshot_stops.begin(), snapshot_stops.end(), stops[k]) != snapshot_stops.end())
        out.snapshots.emplace_back(stops[k], samples[k]);
    }
    for (const auto& m : run.data.test) hashed.push_back(&m);
    out.data_hash = hash_matrices(hashed);
    return out;
  }

  // Two-model pipeline: i_cfm from the slice-0 source to slice 1, then from
  // the empirical slice 1 to slice 2, each with independent coupling.
  DatasetSpec spec = config.data;
  spec.seed = seed;
  const Dataset ds = generate_dataset(spec);
  if (ds.train.size() != 3) throw ConfigError("the two-model pipeline needs a three-slice dataset");
  TrainConfig tc = config.train;
  tc.algorithm = Algorithm::i_cfm;
  tc.variance = {};
  tc.covariate = CovariateMode::off;
  tc.seed = seed;

  auto start = Clock::now();
  Rng rng_a(seed, kTrainStream);
  const SourceSampler source_a = ds.noise_slice0 ? spec.source.sampler() : empirical_source(ds.train[0]);
  const TrainResult first = train(tc, source_a, ds.train[1], rng_a);
  Rng rng_b(seed, kSecondModelStream);
  const TrainResult second = train(tc, empirical_source(ds.train[1]), ds.train[2], rng_b);
  out.train_seconds = seconds_since(start);
  out.loss_traces = {first.loss_trace, second.loss_trace};

  const Matrix source = generation_source(config, ds);
  const std::vector<double> one{1.0};
  start = Clock::now();
  const Matrix mid = generate(first.model, source, config.integrator, one).front();
  const Matrix end = generate(second.model, mid, config.integrator, one).front();
  out.generate_seconds = seconds_since(start);
  out.scores = {{ds.times[1], w2(mid, head(ds.test[1], n))}, {ds.times[2], w2(end, head(ds.test[2], n))}};

  std::vector<const Matrix*> hashed{&source};
  for (const auto& m : ds.test) hashed.push_back(&m);
  out.data_hash = hash_matrices(hashed);
  return out;
}

std::vector<std::string> benchmark_names() { return {"table1", "table2", "table4", "crossing", "smoothpath", "paired"}; }

BenchmarkSpec benchmark_spec(const std::string& name) {
  BenchmarkSpec b;
  b.name = name;
  ExperimentConfig& c = b.base;
  c.output_dir = "bench_" + name;
  if (name == "table1") {
    c.data.source = Distribution::std_gaussian(2);
    c.data.target = two_gaussians();
    b.variants = algorithm_variants();
  } else if (name == "table2") {
    c.data.source = Distribution::std_gaussian(2);
    c.data.target = two_gaussians();
    b.variants = scheme_variants();
  } else if (name == "table4") {
    c.data.source = two_gaussians_diagonal();
    c.data.target = two_gaussians();
    c.data.finite_source = true;
    b.variants = scheme_variants();
  } else if (name == "crossing") {
    c.data.layout = Layout::crossing;
    b.variants = {{"gp_i_cfm", "none", Pipeline::single,
                   [](ExperimentConfig& x) {
                     x.train.algorithm = Algorithm::gp_i_cfm;
                     x.train.covariate = CovariateMode::off;
                   }},
                  {"gp_i_cfm_x0", "none", Pipeline::single, [](ExperimentConfig& x) {
                     x.train.algorithm = Algorithm::gp_i_cfm;
                     x.train.covariate = CovariateMode::x0;
                   }}};
  } else if (name == "smoothpath") {
    c.data.source = two_gaussians_diagonal();
    c.data.target = three_gaussians();
    c.data.finite_source = true;
    b.variants = algorithm_variants();
    b.snapshot_stops = {0.25, 0.5, 0.75};
  } else if (name == "paired") {
    c.data.layout = Layout::paired_v;
    b.variants = {{"gp_i_cfm", "none", Pipeline::single,
                   [](ExperimentConfig& x) { x.train.algorithm = Algorithm::gp_i_cfm; }},
                  {"i_cfm_two_model", "none", Pipeline::two_model, [](ExperimentConfig& x) {
                     x.train.algorithm = Algorithm::i_cfm;
                   }}};
  } else {
    std::string known;
    for (const auto& n : benchmark_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown benchmark '" + name + "' (expected one of " + known + ")");
  }
  c.validate();
  return b;
}

void write_failures_csv(std::ostream& os, const std::vector<BenchFailure>& failures) {
  os << "seed,algorithm,scheme,error\n";
  for (const auto& f : failures) {
    std::string err = f.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    os << f.seed << ',' << f.algorithm << ',' << f.scheme << ',' << err << '\n';
  }
}

BenchReport run_benchmark(const std::string& name, const BenchOptions& options) {
  BenchmarkSpec spec = benchmark_spec(name);
  Json doc = to_json(spec.base);
  for (const auto& o : options.overrides) apply_override(doc, o);
  BenchReport report;
  report.name = name;
  report.config = experiment_from_json(doc);
  if (!options.seeds.empty()) report.config.seeds = options.seeds;
  if (options.jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (!options.variants.empty()) {
    std::vector<BenchVariant> kept;
    for (const auto& want : options.variants) {
      bool found = false;
      for (const auto& v : spec.variants)
        if (want == v.algorithm || want == v.algorithm + "/" + v.scheme) {
          kept.push_back(v);
          found = true;
        }
      if (!found) throw ConfigError("benchmark '" + name + "' has no variant '" + want + "'");
    }
    spec.variants = std::move(kept);
  }

  const auto& seeds = report.config.seeds;
  const std::size_t nv = spec.variants.size();
  const std::size_t n_tasks = seeds.size() * nv;

  struct TaskResult {
    std::vector<RunMetrics> metrics;
    std::optional<BenchFailure> failure;
    std::string data_hash;
  };
  std::vector<TaskResult> results(n_tasks);

  if (!options.output_dir.empty()) ensure_directory(options.output_dir + "/runs");

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex log_mutex;
  auto worker = [&] {
    std::optional<ThreadLimit> limit;
    if (options.jobs > 1) limit.emplace(1);
    for (std::size_t task; (task = next.fetch_add(1)) < n_tasks;) {
      const std::uint64_t seed = seeds[task / nv];
      const BenchVariant& v = spec.variants[task % nv];
      TaskResult& r = results[task];
      try {
        ExperimentConfig cfg = report.config;
        v.adjust(cfg);
        cfg.validate();
        VariantOutcome o = run_variant(cfg, v.pipeline, seed, spec.snapshot_stops);
        for (const auto& s : o.scores) {
          const std::string tag = o.scores.size() > 1 ? v.scheme + "@t" + format_time(s.t) : v.scheme;
          r.metrics.push_back({seed, v.algorithm, tag, s.w2, o.train_seconds, o.generate_seconds});
        }
        r.data_hash = o.data_hash;
        if (!options.output_dir.empty()) {
          const std::string dir = options.output_dir + "/runs/" + run_dir_name(v, seed);
          ensure_directory(dir);
          for (std::size_t k = 0; k < o.loss_traces.size(); ++k) {
            std::ostringstream os;
            write_loss_csv(os, o.loss_traces[k]);
            write_text_file(dir + (o.loss_traces.size() == 1 ? "/loss.csv" : "/loss_model" + std::to_string(k + 1) + ".csv"),
                            os.str());
          }
          for (const auto& [t, m] : o.snapshots) {
            std::ostringstream os;
            write_samples_csv(os, t, m);
            write_text_file(dir + "/samples_t" + format_time(t) + ".csv", os.str());
          }
          Json run = {{"seed", seed},
                      {"algorithm", v.algorithm},
                      {"scheme", v.scheme},
                      {"config_hash", config_hash(cfg)},
                      {"data_hash", o.data_hash}};
          write_text_file(dir + "/run.json", run.dump(2) + "\n");
        }
      } catch (const std::exception& e) {
        r.metrics.clear();
        r.failure = BenchFailure{seed, v.algorithm, v.scheme, e.what()};
      }
      const std::size_t k = ++done;
      if (options.log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::ostringstream msg;
        msg << "[" << k << "/" << n_tasks << "] " << name << ' ' << v.algorithm << '/' << v.scheme << " seed " << seed;
        if (r.failure)
          msg << " FAILED: " << r.failure->error;
        else
          for (const auto& m : r.metrics) msg << ' ' << m.scheme << " w2=" << m.w2;
        options.log(msg.str());
      }
    }
  };

  const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.jobs), n_tasks));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& r : results) {
    report.runs.insert(report.runs.end(), r.metrics.begin(), r.metrics.end());
    if (r.failure) report.failures.push_back(*r.failure);
    report.data_hashes.push_back(r.data_hash);
  }
  try {
    report.summary = summarize(report.runs);
  } catch (const std::exception&) {
    report.summary.clear();
  }

  if (!options.output_dir.empty()) {
    const std::string& dir = options.output_dir;
    std::ostringstream metrics, summary, failures;
    write_metrics_csv(metrics, report.runs);
    write_text_file(dir + "/metrics.csv", metrics.str());
    write_summary_csv(summary, report.summary);
    write_text_file(dir + "/summary.csv", summary.str());
    write_failures_csv(failures, report.failures);
    write_text_file(dir + "/failures.csv", failures.str());
    Json variants = Json::array();
    for (const auto& v : spec.variants) variants.push_back(v.algorithm + "/" + v.scheme);
    Json manifest = {{"benchmark", name},
                     {"config", to_json(report.config)},
                     {"config_hash", config_hash(report.config)},
                     {"overrides", options.overrides},
                     {"variants", variants},
                     {"tasks", n_tasks},
                     {"failures", report.failures.size()}};
    write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  }
  return report;
}

}  // namespace streamflow
