#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsalab/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiagnostic = 3;
constexpr int kExitIo = 4;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = -1;
  int dimension = 0;
  bool dimension_set = false;
  double tau = 0.0;
  bool tau_set = false;
  std::vector<double> lambdas;
  int replicates = 0;
  bool replicates_set = false;
  std::string mode;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--workers", flags.workers,
                  "worker threads (env " + std::string(rsalab::kWorkersEnvVar) +
                      " overrides)");
  cmd->add_option("--dim", flags.dimension, "substrate dimension")
      ->each([&flags](const std::string&) { flags.dimension_set = true; });
  cmd->add_option("--tau", flags.tau, "input time horizon")
      ->each([&flags](const std::string&) { flags.tau_set = true; });
  cmd->add_option("--lambda", flags.lambdas, "rescaling factor (repeatable)");
  cmd->add_option("--replicates", flags.replicates, "replicate count")
      ->each([&flags](const std::string&) { flags.replicates_set = true; });
  cmd->add_option("--mode", flags.mode, "continuum or lattice");
}

rsalab::ExperimentConfig build_config(const std::string& kind,
                                      const CommonFlags& flags) {
  nlohmann::json j;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in)
      throw rsalab::ConfigError("cannot open config: " + flags.config_path);
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw rsalab::ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.contains("kind")) j["kind"] = kind;
    if (j.at("kind").get<std::string>() != kind)
      throw rsalab::ConfigError("config kind does not match the subcommand");
  } else {
    j["kind"] = kind;
  }
  // Flags override the file; everything merges into the JSON so validation
  // sees the final values.
  if (flags.dimension_set) j["dimension"] = flags.dimension;
  if (!flags.mode.empty()) j["mode"] = flags.mode;
  if (flags.replicates_set) j["replicates"] = flags.replicates;
  if (flags.tau_set) j["tau"] = flags.tau;
  if (flags.seed_set) j["master_seed"] = flags.seed;
  if (flags.workers >= 0) j["workers"] = flags.workers;
  if (!flags.lambdas.empty()) j["lambdas"] = flags.lambdas;
  if (!flags.out_dir.empty()) j["out_dir"] = flags.out_dir;
  return rsalab::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rsalab: Monte Carlo laboratory for random sequential "
               "adsorption and related spatial processes"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds{"pack",  "correlate", "clt",   "boundary",
                                       "cones", "nn",        "oracle"};
  std::map<std::string, CommonFlags> flags;
  for (const auto& kind : kinds) {
    auto* cmd = app.add_subcommand(kind, kind + " experiment");
    add_common_flags(cmd, flags[kind]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    const std::string kind = app.get_subcommands().front()->get_name();
    const rsalab::ExperimentConfig config = build_config(kind, flags[kind]);
    const rsalab::RunResult result = rsalab::run_experiment(config);
    std::cout << "wrote " << (result.out_dir / "manifest.json").string()
              << "\n";
    return kExitOk;
  } catch (const rsalab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rsalab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const rsalab::ConeCapError& e) {
    std::cerr << "diagnostic failure: " << e.what() << "\n";
    return kExitDiagnostic;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitDiagnostic;
  }
}
