#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsalab/errors.hpp"
#include "rsalab/field.hpp"
#include "rsalab/geometry.hpp"

namespace rsalab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kWorkersEnvVar = "RSALAB_WORKERS";

// Filesystem failure writing results; mapped to its own exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string kind;  // pack | correlate | clt | boundary | cones | nn | oracle
  int dimension = 1;
  FieldMode mode = FieldMode::continuum;
  double tau = 1.0;  // ignored (unbounded) in lattice mode
  std::uint64_t master_seed = 1;
  int replicates = 100;
  int workers = 0;  // 0: env var, then hardware
  std::string out_dir = "out";
  std::vector<double> lambdas;
  Region region;              // window / A, when the experiment needs one
  std::vector<Region> boxes;  // box family, when the experiment needs one
  nlohmann::json options = nlohmann::json::object();
};

// Defaults that make each experiment kind runnable without a config file.
// dimension 0 picks the kind's natural default (2 for boundary, else 1).
ExperimentConfig default_config(const std::string& kind, int dimension = 0);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);  // canonical

nlohmann::json region_to_json(const Region& region);
Region region_from_json(const nlohmann::json& j);

struct RunResult {
  std::filesystem::path out_dir;
  nlohmann::json manifest;
  nlohmann::json summary;
};

// Executes the configured experiment and writes manifest.json, summary.json,
// replicates.csv and curves.csv into out_dir. Output bytes depend only on
// (config, master_seed), never on the worker count.
RunResult run_experiment(const ExperimentConfig& config);

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

// Replicate-parallel loop; results must be written into per-index slots.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body);
int resolve_workers(int requested);

}  // namespace rsalab
