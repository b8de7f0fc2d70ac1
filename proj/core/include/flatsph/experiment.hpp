#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flatsph/kernels.hpp"

namespace flatsph::experiment {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Every knob of every subcommand.  Fields a command does not use are kept so
// the config round-trips unchanged.
struct ExperimentConfig {
  std::string command;  // "dichotomy scan", "mc validate", ...
  // "rank1:LABEL" or "aiii" for dichotomy, "AI" or "aiii" for mc.
  std::string space = "rank1:AI";
  int p = 2;
  std::optional<int> q;
  std::vector<double> point;  // orbit point; rank one uses t
  double t = 1.0;
  int k = 2;
  int k_max = 6;
  double r0 = 16.0;
  int levels = 9;
  std::uint64_t samples = 200000;
  std::uint64_t seed = 20240611;
  // lower bounds
  double x = 1.0;
  double eta = 0.39269908169872414;  // pi / 8
  int terms = 50;
  // mc validate
  std::vector<std::vector<double>> factors;
  std::uint64_t n = 100000;
  int grid = 20;
  // kernel eval: rows of lambda
  std::vector<std::vector<double>> lambdas;
  std::string format = "json";
  std::string output;
  std::string plotdata;
  bool strict = false;
};

nlohmann::json to_json(const ExperimentConfig& config);
// Overlays the keys present in `j` onto `base`.  Unknown keys are an error.
ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);

// Parses "2,1" and "2,1;2,1".
std::vector<double> parse_vector(const std::string& text);
std::vector<std::vector<double>> parse_matrix(const std::string& text);

// Builds the integrand description for dichotomy commands.
kernels::IntegrandSpec integrand_spec(const ExperimentConfig& config);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  nlohmann::json document;  // {"config", "result", "content_hash"}
  std::vector<Table> tables;  // the first one is the CSV form of the result
  bool completed = true;
  bool ambiguous = false;
};

// Dispatches on config.command.
Report run(const ExperimentConfig& config);

// Embeds the config and the FNV-1a hash of the serialized config and result.
nlohmann::json finalize(const ExperimentConfig& config, nlohmann::json result);

std::string render_csv(const Table& table);
// One file per table, named <dir>/<table.name>.csv.  Returns the paths.
std::vector<std::string> emit_plotdata(const Report& report, const std::string& dir);

}  // namespace flatsph::experiment
