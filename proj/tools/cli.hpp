#pragma once

#include "thmrom/experiments.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace thmrom::cli {

// Bad arguments or config; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CliInvocation {
  std::string subcommand;  // run | convergence | pod | rom | info
  std::optional<std::filesystem::path> config_path;
  ExperimentConfig config;
  int threads = 0;  // 0: OpenMP default
};

// Reads a YAML config on top of the defaults of its `experiment` key (or of
// `fallback_id` when the key is absent). Unknown keys and type mismatches
// throw UsageError naming the key path, e.g. "time.dt_train".
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::optional<std::string>& fallback_id = std::nullopt);

// args excludes the program name.
CliInvocation parse_and_validate(const std::vector<std::string>& args);

int dispatch(const CliInvocation& inv, std::ostream& out, std::ostream& err);

// parse + dispatch with exit-code mapping: 0 ok, 1 numerical or parameter
// failure, 2 usage.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thmrom::cli
