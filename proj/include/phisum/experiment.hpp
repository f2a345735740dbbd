#pragma once

// Experiment configs and the task runner behind the command line.
//
// Config documents are JSON with "schema": 1. Coefficient arrays are flat and
// row-major with the codomain index last: entry (i_1, ..., i_m, k) is the k-th
// coordinate of T(e_{i_1}, ..., e_{i_m}). A linear operator is the case m = 1.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace phisum {

inline constexpr int kConfigSchema = 1;
inline constexpr const char* kVersion = "0.1.0";

struct SpaceSpec {
  std::string name;
  std::string kind = "lq";  // lq | polytope
  int dim = 0;
  double q = 2.0;           // +inf allowed, written "inf"
  std::vector<std::vector<double>> facets;

  bool operator==(const SpaceSpec&) const = default;
};

struct OperatorSpec {
  std::string name;
  std::vector<std::string> domains;
  std::string codomain;
  std::vector<double> coefficients;

  bool operator==(const OperatorSpec&) const = default;
};

/// Linear kinds: identity | sigma_interp | square_over_norm | anchored.
/// Tensor kinds (strongly task): identity | factorable.
struct PhiSpec {
  std::string kind = "identity";
  double sigma = 0.0;
  std::vector<double> anchor;

  bool operator==(const PhiSpec&) const = default;
};

struct SolverSpec {
  int max_iter = 200;
  double tol_gap = 1e-6;
  int mesh_resolution = 16;
  std::uint64_t seed = 0x5EED5EEDULL;
  int restarts = 32;
  int family_size = 3;
  int rank_cap = 4;
  int samples = 100;
  int threads = 1;

  bool operator==(const SolverSpec&) const = default;
};

struct ExperimentConfig {
  int schema = kConfigSchema;
  std::string task;  // summing | strongly | multi-ideal | dimant | factorable | factorize | verify-suite
  std::vector<SpaceSpec> spaces;
  std::vector<OperatorSpec> operators;
  std::string target;  // operator name
  PhiSpec phi;
  std::vector<PhiSpec> phis;  // one per factor, multi-ideal only
  std::optional<double> p;
  std::optional<double> r;
  std::vector<double> p_j;
  double sigma = 0.0;
  SolverSpec solver;
  std::vector<int> filter;  // verify-suite only
  bool timings = false;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws Error(parse_error) with a "source:line:column: message" text.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

/// Normalized JSON with every default spelled out; parses back to an equal config.
std::string config_to_json(const ExperimentConfig& cfg);

struct RunResult {
  std::string report;  // JSON, newline terminated
  int exit_code = 1;   // 0 certified, 2 gap-open, 1 error
};

/// Never throws; errors become exit code 1 with an "error" field.
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace phisum
