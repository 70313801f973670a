#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "streamflow/config.hpp"
#include "streamflow/datasets.hpp"
#include "streamflow/eval.hpp"
#include "streamflow/trainer.hpp"

namespace streamflow {

// Rng streams derived from a run seed. Data streams live in datasets.hpp.
inline constexpr std::uint64_t kTrainStream = 2;
inline constexpr std::uint64_t kSecondModelStream = 5;

struct TrainedExperiment {
  Dataset data;
  TrainResult result;
};

// Generates the seed's dataset and trains one model on it: pair layouts use
// train(), multi-slice layouts train_multimarginal() over the slice times.
TrainedExperiment train_experiment(const ExperimentConfig& config, std::uint64_t seed);

// Held-out rows generation starts from: the first w2_size rows of test slice 0.
Matrix generation_source(const ExperimentConfig& config, const Dataset& data);
// Slice times after 0, where generated samples are scored.
std::vector<double> evaluation_stops(const Dataset& data);

enum class Pipeline {
  single,     // one model over all slice times
  two_model,  // i_cfm per consecutive slice pair, chained at generation
};

struct StopScore {
  double t;
  double w2;
};

struct VariantOutcome {
  std::vector<StopScore> scores;
  double train_seconds = 0.0;
  double generate_seconds = 0.0;
  std::vector<std::vector<LossRecord>> loss_traces;  // one per trained model
  std::vector<std::pair<double, Matrix>> snapshots;  // extra stops, if requested
  std::string data_hash;  // test slices and generation source; equal across paired variants
};

VariantOutcome run_variant(const ExperimentConfig& config, Pipeline pipeline, std::uint64_t seed,
                           const std::vector<double>& snapshot_stops = {});

struct BenchVariant {
  std::string algorithm;  // tag in metrics
  std::string scheme;     // tag in metrics; "@t<stop>" is appended for multi-stop scoring
  Pipeline pipeline = Pipeline::single;
  std::function<void(ExperimentConfig&)> adjust;
};

struct BenchmarkSpec {
  std::string name;
  ExperimentConfig base;
  std::vector<BenchVariant> variants;
  std::vector<double> snapshot_stops;
};

std::vector<std::string> benchmark_names();
BenchmarkSpec benchmark_spec(const std::string& name);

struct BenchOptions {
  std::vector<std::uint64_t> seeds;  // empty: the base config's seeds
  std::vector<std::string> overrides;
  // Keep only these variants, named by "algorithm" or "algorithm/scheme";
  // empty keeps all.
  std::vector<std::string> variants;
  int jobs = 1;
  std::string output_dir;  // empty: nothing is written
  std::function<void(const std::string&)> log;
};

struct BenchFailure {
  std::uint64_t seed;
  std::string algorithm;
  std::string scheme;
  std::string error;
};

struct BenchReport {
  std::string name;
  ExperimentConfig config;
  std::vector<RunMetrics> runs;
  std::vector<BenchFailure> failures;
  std::vector<SummaryRow> summary;  // empty when some group has fewer than two runs
  std::vector<std::string> data_hashes;  // per (seed, variant) task, seed-major
};

// Runs the seed x variant grid on `jobs` threads. Results are ordered
// seed-major, variant-minor regardless of completion order.
BenchReport run_benchmark(const std::string& name, const BenchOptions& options);

// Header: seed,algorithm,scheme,error
void write_failures_csv(std::ostream& os, const std::vector<BenchFailure>& failures);

std::string hash_matrices(const std::vector<const Matrix*>& mats);

}  // namespace streamflow
