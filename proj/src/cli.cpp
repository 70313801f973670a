#include "streamflow/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "streamflow/config.hpp"
#include "streamflow/errors.hpp"
#include "streamflow/experiments.hpp"
#include "streamflow/gp_stream.hpp"
#include "streamflow/io.hpp"
#include "streamflow/ode.hpp"

namespace streamflow::cli {
namespace {

constexpr std::uint64_t kGenerateStream = 3;

int default_jobs() {
  if (const char* env = std::getenv("STREAMFLOW_JOBS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

Matrix first_block(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  char magic[5] = {};
  in.read(magic, 5);
  in.clear();
  in.seekg(0);
  const auto blocks =
      std::string(magic, 5) == "SFLW1" ? read_samples_binary(in) : read_samples_csv(in);
  if (blocks.empty()) throw ConfigError("'" + path + "' holds no samples");
  return blocks.front().second;
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = load_experiment_config(a.config, a.overrides);
  const std::string root = a.out.empty() ? cfg.output_dir : a.out;
  ensure_directory(root);
  write_text_file(root + "/config.json", to_json(cfg).dump(2) + "\n");
  for (const auto seed : cfg.seeds) {
    const std::string dir = root + "/seed" + std::to_string(seed);
    ensure_directory(dir);
    const TrainedExperiment run = train_experiment(cfg, seed);
    save_checkpoint(dir + "/checkpoint.sfck", run.result.model);
    std::ostringstream loss, train_csv, test_csv;
    write_loss_csv(loss, run.result.loss_trace);
    write_text_file(dir + "/loss.csv", loss.str());
    write_dataset_csv(train_csv, run.data.train);
    write_text_file(dir + "/dataset_train.csv", train_csv.str());
    write_dataset_csv(test_csv, run.data.test);
    write_text_file(dir + "/dataset_test.csv", test_csv.str());
    Json data_spec = to_json(cfg)["data"];
    data_spec["seed"] = seed;
    data_spec["n_test"] = cfg.data.n_test;
    data_spec["times"] = run.data.times;
    write_text_file(dir + "/dataset_spec.json", data_spec.dump(2) + "\n");
    const Json manifest = {{"command", "train"},
                           {"seed", seed},
                           {"config_hash", config_hash(cfg)},
                           {"config", to_json(cfg)},
                           {"overrides", a.overrides},
                           {"artifacts", {"checkpoint.sfck", "loss.csv", "dataset_train.csv", "dataset_test.csv",
                                          "dataset_spec.json"}}};
    write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
    out << "seed " << seed << ": final loss "
        << (run.result.loss_trace.empty() ? std::string("n/a") : std::to_string(run.result.loss_trace.back().loss))
        << " -> " << dir << "\n";
  }
  return kExitOk;
}

struct GenerateArgs {
  std::string checkpoint;
  long n = 1000;
  std::string stops = "1.0";
  std::string method = "rk4";
  int steps = 100;
  double rtol = 1e-5, atol = 1e-5;
  int max_steps = 100000;
  double t_start = 0.0;
  std::uint64_t seed = 0;
  std::string source;
  std::string covariates;
  std::string out = ".";
  std::string format = "csv";
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const VectorFieldModel model = load_checkpoint(a.checkpoint);
  IntegratorSpec spec;
  spec.method = parse_method(a.method);
  spec.n_steps = a.steps;
  spec.rtol = a.rtol;
  spec.atol = a.atol;
  spec.max_steps = a.max_steps;
  spec.validate();
  if (a.format != "csv" && a.format != "binary") throw ConfigError("--format must be csv or binary");
  if (a.n < 1) throw ConfigError("--n must be >= 1");
  const std::vector<double> stops = parse_number_list(a.stops);

  Matrix source;
  if (a.source.empty()) {
    Rng rng(a.seed, kGenerateStream);
    source = rng.normal_matrix(a.n, model.arch.state_dim);
  } else {
    source = first_block(a.source);
    if (source.rows() < a.n) throw DimensionError("--source holds fewer than --n rows");
    source = source.topRows(a.n).eval();
  }
  Matrix cov;
  if (model.arch.covariate_dim > 0) {
    if (a.covariates.empty()) throw ConfigError("this model is covariate-conditioned; pass --covariates FILE or 'source'");
    cov = a.covariates == "source" ? source : first_block(a.covariates);
    if (cov.rows() < a.n) throw DimensionError("--covariates holds fewer than --n rows");
    cov = cov.topRows(a.n).eval();
  } else if (!a.covariates.empty()) {
    throw ConfigError("--covariates given but the model takes no covariates");
  }

  const auto samples = generate(model, source, spec, stops, cov, a.t_start);
  ensure_directory(a.out);
  for (std::size_t k = 0; k < stops.size(); ++k) {
    const std::string base = a.out + "/samples_t" + format_time(stops[k]);
    if (a.format == "csv") {
      std::ostringstream os;
      write_samples_csv(os, stops[k], samples[k]);
      write_text_file(base + ".csv", os.str());
      out << base << ".csv\n";
    } else {
      std::ostringstream os(std::ios::binary);
      write_samples_binary(os, {stops[k]}, {samples[k]});
      write_text_file(base + ".sflw", os.str());
      out << base << ".sflw\n";
    }
  }
  return kExitOk;
}

struct BenchArgs {
  std::string name;
  std::string seeds;
  int jobs = 1;
  std::vector<std::string> overrides;
  std::string variants;
  std::string out;
  bool quiet = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  BenchOptions opt;
  if (!a.seeds.empty()) opt.seeds = parse_seed_list(a.seeds);
  opt.overrides = a.overrides;
  if (!a.variants.empty()) {
    std::istringstream is(a.variants);
    for (std::string v; std::getline(is, v, ',');) opt.variants.push_back(v);
  }
  opt.jobs = a.jobs;
  opt.output_dir = a.out.empty() ? benchmark_spec(a.name).base.output_dir : a.out;
  if (!a.quiet) opt.log = [&err](const std::string& line) { err << line << std::endl; };
  const BenchReport report = run_benchmark(a.name, opt);
  out << "benchmark " << a.name << ": " << report.runs.size() << " scored runs, " << report.failures.size()
      << " failures -> " << opt.output_dir << "\n";
  if (report.summary.empty()) out << "(summary needs at least two runs per group)\n";
  write_summary_csv(out, report.summary);
  return report.failures.empty() ? kExitOk : kExitPartialBench;
}

struct PathArgs {
  std::string kernel = "{ type = \"se\", alpha = 0.1, l = 0.3 }";
  std::string scheme = "none";
  double scheme_param = 0.0;
  std::string times = "0,1";
  std::string values = "0;0";
  int grid = 101;
  std::string out;
};

int cmd_pathstats(const PathArgs& a, std::ostream& out) {
  KernelSpec kernel = kernel_from_json(parse_toml_value(a.kernel), "--kernel");
  const VarianceKind scheme = parse_variance(a.scheme);
  if (scheme != VarianceKind::none) {
    const auto* se = std::get_if<SquaredExponential>(&kernel.variant());
    if (!se) throw ConfigError("--scheme modifies an SE kernel; got " + kernel.describe());
    kernel = make_scheme_kernel(*se, {scheme, a.scheme_param});
  }
  ObservationSet obs;
  obs.times = parse_number_list(a.times);
  std::vector<std::vector<double>> rows;
  std::stringstream vs(a.values);
  for (std::string row; std::getline(vs, row, ';');) rows.push_back(parse_number_list(row));
  if (rows.size() != obs.times.size()) throw ConfigError("--values needs one ';'-separated row per --times entry");
  obs.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ConfigError("--values rows differ in dimension");
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      obs.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  if (a.grid < 1) throw ConfigError("--grid must be >= 1");
  std::vector<double> grid(static_cast<std::size_t>(a.grid));
  for (int i = 0; i < a.grid; ++i) grid[static_cast<std::size_t>(i)] = a.grid == 1 ? 0.5 : double(i) / (a.grid - 1);
  const GramBundle bundle = build_gram(kernel, obs.times);
  const auto stats = path_stats(bundle, MeanFunction::zero(), obs, grid);
  if (a.out.empty()) {
    write_path_stats_csv(out, stats);
  } else {
    std::ostringstream os;
    write_path_stats_csv(os, stats);
    write_text_file(a.out, os.str());
  }
  return kExitOk;
}

struct EvalArgs {
  std::string samples, reference, metrics, summary_out;
  std::string group = "algorithm_scheme";
  long n = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (!a.metrics.empty()) {
    std::ifstream in(a.metrics);
    if (!in) throw ConfigError("cannot open '" + a.metrics + "'");
    GroupKey key = GroupKey::algorithm_scheme;
    if (a.group == "algorithm") key = GroupKey::algorithm;
    else if (a.group == "scheme") key = GroupKey::scheme;
    else if (a.group != "algorithm_scheme") throw ConfigError("--group must be algorithm, scheme or algorithm_scheme");
    const auto rows = summarize(read_metrics_csv(in), key);
    std::ostringstream os;
    write_summary_csv(os, rows);
    if (!a.summary_out.empty()) write_text_file(a.summary_out, os.str());
    out << os.str();
    return kExitOk;
  }
  if (a.samples.empty() || a.reference.empty())
    throw ConfigError("eval needs --samples and --reference, or --metrics");
  Matrix x = first_block(a.samples), y = first_block(a.reference);
  if (a.n > 0) {
    if (x.rows() < a.n || y.rows() < a.n) throw DimensionError("--n exceeds the rows available");
    x = x.topRows(a.n).eval();
    y = y.topRows(a.n).eval();
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", w2(x, y));
  out << "w2," << buf << "\n";
  return kExitOk;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  const std::string s = trim(text);
  std::vector<std::uint64_t> out;
  try {
    if (const auto colon = s.find(':'); colon != std::string::npos) {
      const auto lo = std::stoull(s.substr(0, colon));
      const auto hi = std::stoull(s.substr(colon + 1));
      if (hi <= lo) throw ConfigError("seed range '" + s + "' is empty");
      for (auto k = lo; k < hi; ++k) out.push_back(k);
      return out;
    }
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
      std::size_t used = 0;
      const std::string t = trim(item);
      out.push_back(std::stoull(t, &used));
      if (used != t.size() || t.front() == '-') throw std::invalid_argument(t);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("invalid seed list '" + text + "' (use 0:30 or 0,1,2)");
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const std::string t = trim(item);
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (t.empty() || used != t.size()) throw ConfigError("invalid number '" + t + "' in list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"streamflow: stream-level conditional flow matching with Gaussian-process streams"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train one model per configured seed");
  train->add_option("config", ta.config, "TOML-style experiment config")->required();
  train->add_option("--set", ta.overrides, "Override a config key, e.g. train.iterations=2000");
  train->add_option("--out", ta.out, "Output directory (default: output_dir from the config)");

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Integrate samples through a trained model");
  gen->add_option("checkpoint", ga.checkpoint, "Checkpoint written by train")->required();
  gen->add_option("--n", ga.n, "Number of samples");
  gen->add_option("--stops", ga.stops, "Comma-separated snapshot times, e.g. 0.5,1.0");
  gen->add_option("--method", ga.method, "euler, rk4 or dopri5");
  gen->add_option("--steps", ga.steps, "Steps for fixed-step methods");
  gen->add_option("--rtol", ga.rtol, "dopri5 relative tolerance");
  gen->add_option("--atol", ga.atol, "dopri5 absolute tolerance");
  gen->add_option("--max-steps", ga.max_steps, "dopri5 step limit");
  gen->add_option("--t-start", ga.t_start, "Start time of the source rows");
  gen->add_option("--seed", ga.seed, "Seed of the standard Gaussian source draws");
  gen->add_option("--source", ga.source, "Sample file (CSV or SFLW1) of start rows instead of Gaussian draws");
  gen->add_option("--covariates", ga.covariates, "Sample file of covariates, or 'source'");
  gen->add_option("--out", ga.out, "Output directory");
  gen->add_option("--format", ga.format, "csv or binary");

  BenchArgs ba;
  ba.jobs = default_jobs();
  auto* bench = app.add_subcommand("bench", "Run a multi-seed benchmark grid");
  bench->add_option("name", ba.name, "table1, table2, table4, crossing, smoothpath or paired")->required();
  bench->add_option("--seeds", ba.seeds, "Seed range 0:30 or list 0,1,2");
  bench->add_option("--jobs", ba.jobs, "Concurrent runs (default $STREAMFLOW_JOBS or 1)");
  bench->add_option("--set", ba.overrides, "Override a config key");
  bench->add_option("--variants", ba.variants, "Comma-separated subset, e.g. gp_i_cfm or gp_i_cfm/increasing");
  bench->add_option("--out", ba.out, "Output directory");
  bench->add_flag("--quiet", ba.quiet, "No per-run progress on stderr");

  PathArgs pa;
  auto* paths = app.add_subcommand("pathstats", "Conditional stream mean and sd over a time grid");
  paths->add_option("--kernel", pa.kernel, "Inline kernel table, e.g. '{ type = \"se\", alpha = 1.0, l = 0.3 }'");
  paths->add_option("--scheme", pa.scheme, "Variance scheme applied to an SE kernel");
  paths->add_option("--scheme-param", pa.scheme_param, "sigma_w (constant) or alpha (increasing/decreasing)");
  paths->add_option("--times", pa.times, "Observation times, e.g. 0,0.5,1");
  paths->add_option("--values", pa.values, "Observation rows separated by ';', dims by ','");
  paths->add_option("--grid", pa.grid, "Number of grid points on [0, 1]");
  paths->add_option("--out", pa.out, "CSV path (default stdout)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "W2 between sample files, or a summary of a metrics CSV");
  eval->add_option("--samples", ea.samples, "Generated samples (CSV or SFLW1)");
  eval->add_option("--reference", ea.reference, "Reference samples (CSV or SFLW1)");
  eval->add_option("--n", ea.n, "Use the first n rows of both");
  eval->add_option("--metrics", ea.metrics, "Metrics CSV to summarize");
  eval->add_option("--summary", ea.summary_out, "Write the summary CSV here");
  eval->add_option("--group", ea.group, "algorithm, scheme or algorithm_scheme");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) return cmd_train(ta, out);
    if (*gen) return cmd_generate(ga, out);
    if (*bench) return cmd_bench(ba, out, err);
    if (*paths) return cmd_pathstats(pa, out);
    if (*eval) return cmd_eval(ea, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}

}  // namespace streamflow::cli
