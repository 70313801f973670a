#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamflow/datasets.hpp"
#include "streamflow/kernels.hpp"
#include "streamflow/ode.hpp"
#include "streamflow/trainer.hpp"

namespace streamflow {

using Json = nlohmann::json;

// TOML subset: comments, [table] / [a.b] headers, bare and dotted keys,
// strings, integers, floats, booleans, (nested, multi-line) arrays and
// inline tables. Duplicate keys are rejected.
Json parse_toml(const std::string& text);
// One TOML value, e.g. the right-hand side of `--set key=value`. Text that
// does not parse as a value is taken as a bare string.
Json parse_toml_value(const std::string& text);

struct EvalSettings {
  Eigen::Index test_size = 1000;  // held-out points per slice
  Eigen::Index w2_size = 1000;    // generated and test points entering W2
};

// Scheme parameters used by benchmarks that sweep variance schemes:
// sigma_w for constant, alpha for increasing and decreasing.
struct SchemeParams {
  double constant = 0.1;
  double increasing = 1.0;
  double decreasing = 1.0;
};

struct ExperimentConfig {
  DatasetSpec data;
  TrainConfig train;
  IntegratorSpec integrator;
  EvalSettings eval;
  SchemeParams schemes;
  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds{0};

  void validate() const;
};

// Every field with its current value; keys sorted, so dump() is canonical.
Json to_json(const ExperimentConfig& config);
// Strict: unknown keys and wrong types throw ConfigError naming the key.
ExperimentConfig experiment_from_json(const Json& j);

// Applies a `key.path=value` override to a config document.
void apply_override(Json& doc, const std::string& assignment);

// Defaults <- file text <- overrides, validated.
ExperimentConfig parse_experiment_config(const std::string& text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_experiment_config(const std::string& path, const std::vector<std::string>& overrides = {});

// 16 hex digits of FNV-1a over the canonical JSON.
std::string config_hash(const ExperimentConfig& config);

Json kernel_to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const Json& j, const std::string& where = "kernel");
Json distribution_to_json(const Distribution& d);
Distribution distribution_from_json(const Json& j, const std::string& where);

std::string to_string(Layout layout);
Layout parse_layout(const std::string& name);

}  // namespace streamflow
