#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Run configuration: a flat key = value document (lists in brackets), parsed
// into a validated RunConfig, plus the orchestrator that dispatches a config
// to the module pipelines and writes the output files.
//
// All couplings are accepted either as tau-products (A_alpha_tau, b_tau, ...)
// or as plain energies alongside an explicit tau; internally everything is
// reduced to energies at the configured tau.

namespace nucpol {

enum class RunMode { exact, trajectory, spectrum, largek, largek_uneven };
enum class OutputFormat { csv, json };
enum class InitialState { even, uneven };

struct AlphaSpec {
  enum class Kind { uniform, exponential_envelope, explicit_list };
  Kind kind = Kind::uniform;
  double decay = 0.0;                 // exponential_envelope
  std::vector<double> values;         // explicit_list, normalized after parse
  bool operator==(const AlphaSpec&) const = default;
};

struct HNucConfig {
  enum class Kind { none, dipolar, custom_file };
  Kind kind = Kind::none;
  double b = 0.0;                     // uniform all-pairs coupling (energy)
  std::vector<double> b_matrix;       // optional K*K row-major (energy)
  std::string file;                   // custom_file: sparse Hermitian entries
  bool operator==(const HNucConfig&) const = default;
};

struct RunConfig {
  RunMode mode = RunMode::exact;
  int K = 0;
  double a = 0.5;
  double tau = 1.0;
  double hyperfine_A = 0.0;           // energy; hyperfine_A * tau is the dimensionless knob
  AlphaSpec alpha;
  double electron_zeeman = 0.0;
  double nuclear_zeeman = 0.0;
  bool flip_flop_only = false;
  HNucConfig hnuc;
  InitialState state = InitialState::even;
  int M_max = 50;
  double theta = 0.999;
  double Vbar = 0.9;
  std::uint64_t seed = 0;
  int max_attempts = 1000;
  int target_streak = 50;
  bool reset_on_failure = false;
  int dimension_cap = 4096;
  int threads = 1;
  std::string out = "nucpol_out";
  OutputFormat format = OutputFormat::csv;

  bool operator==(const RunConfig&) const = default;
};

struct ParseResult {
  RunConfig config;
  std::vector<std::string> warnings;  // e.g. alpha renormalization
};

// Throws std::invalid_argument with the offending key on malformed input,
// unknown keys, or failed validation.
ParseResult parse_config(const std::string& text);

// Canonical round-trip form: parse_config(emit_config(c)).config == c.
std::string emit_config(const RunConfig& config);

// Exit codes of the orchestrator (and the CLI).
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitNumericalError = 3,
  kExitCapExceeded = 4,
};

struct ExecResult {
  int exit_code = kExitOk;
  std::string error_category;  // "config" | "numerical" | "cap" on failure
  std::string message;
  std::vector<std::string> files_written;
};

ExecResult execute(const RunConfig& config);

}  // namespace nucpol
