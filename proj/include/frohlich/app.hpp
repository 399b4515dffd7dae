#pragma once

// Configuration schema and command implementations behind the `frohlich` tool.

#include "frohlich/checks.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace frohlich::app {

/// Schema violation; `path` names the offending field, e.g. "run.lambdas[2]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Format { json, csv };

struct ModelConfig {
  double alpha = 1.0;
  double lambda_max = 3.0;
  int n_shells = 4;
  int n_dirs = 6;
  double r_min = 0.3;
  int n_max = 3;
  bool repulsive = false;  // flips the coupling sign, a deliberate violation
};

struct RunSection {
  Vec3 P = Vec3::Zero();
  std::optional<std::vector<double>> lambdas;  // shell radii when absent
  std::vector<double> t_list = {0.1, 1.0};
  std::optional<double> mu;                    // nullopt: automatic shift
  Tolerances tolerances;
  std::vector<Vec3> P_list;
};

struct OutputSection {
  std::optional<std::string> report_path;
  std::optional<std::string> table_path;
  std::optional<Format> format;
};

struct RunConfig {
  ModelConfig model;
  RunSection run;
  OutputSection outputs;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Applies a KEY=VALUE tolerance override.
void apply_tolerance_override(Tolerances& tol, const std::string& assignment);

struct CommandOptions {
  std::optional<std::string> out;
  std::optional<Format> format;
  int threads = 1;
  std::vector<std::string> tol_overrides;
};

/// Each command writes its output and returns the process exit status.
int cmd_build(const RunConfig& config, const CommandOptions& options, std::ostream& console);
int cmd_sweep(const RunConfig& config, const CommandOptions& options, std::ostream& console);
int cmd_verify(const RunConfig& config, const CommandOptions& options, std::ostream& console);
int cmd_dispersion(const RunConfig& config, const CommandOptions& options, std::ostream& console);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// Shortest round-trip float text for JSON, %.17g for CSV.
std::string csv_number(double x);

}  // namespace frohlich::app
