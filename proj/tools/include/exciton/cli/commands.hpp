#pragma once

#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exciton/dynamics.hpp"
#include "exciton/liouville.hpp"
#include "exciton/model.hpp"

namespace exciton::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailed = 1,
  kExitInvalidFlags = 2,
  kExitNumericalFailure = 3,
  kExitIoFailure = 4,
};

/// A trajectory that fails its trace or hermiticity check.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_string(LiouvillianMode mode);
std::string to_string(EvolutionMethod method);

// spectrum

enum class SourceRequest { Auto, ClosedForm, Numerical, Both };

struct SpectrumConfig {
  BlockIndex index{1, 1};
  ModelParams params;
  LiouvillianMode mode = LiouvillianMode::Printed;
  SourceRequest source = SourceRequest::Auto;
};

nlohmann::json spectrum_report(const SpectrumConfig& config);

// evolve

struct EvolveConfig {
  ModelParams params;
  EvolveOptions options;
  double dt = 0.01;
  double t_max = 20.0;
};

struct EvolveResult {
  Trajectory trajectory;
  std::vector<TimeSample> rows;
};

/// Rejects initial states that are not Hermitian (1e-12) or not of unit
/// trace (1e-10) with Error(InvalidArgument).
void check_initial_state(const BlockedDensity& rho0);

/// Throws NumericalFailure when any sample has |Tr ρ - 1| or a hermiticity
/// defect above 1e-9.
void check_trajectory(const Trajectory& trajectory);

EvolveResult run_evolve(const EvolveConfig& config, const BlockedDensity& rho0);

// figures

struct FigurePreset {
  std::string file;  // file stem, e.g. fig1_dotted
  int figure = 1;    // 1: dressed, 2: superposition
  std::string curve;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
};

/// Four curves per figure at n = 2. The equal-rate curve of the first
/// figure uses 0.4 for both rates; the second figure's gray curve is
/// dissipation free.
std::vector<FigurePreset> figure_presets();

struct FiguresConfig {
  std::filesystem::path outdir;
  int n = 2;
  double alpha = std::numbers::pi / 4.0;
  double dt = 0.01;
  double t_max = 20.0;
  LiouvillianMode mode = LiouvillianMode::Printed;
  std::optional<std::string> timestamp;
  unsigned threads = 1;
};

/// Writes one CSV per preset plus manifest.json; returns the manifest.
nlohmann::json run_figures(const FiguresConfig& config);

// validate

struct CheckResult {
  std::string name;
  bool passed = true;
  bool informational = false;
  std::string detail;
};

struct ValidateConfig {
  /// Builds printed blocks with γ̃ = γ1 - γ0, which must break the trace
  /// consistency check.
  bool inject_gamma_sign_flip = false;
  unsigned seed = 20240917;
};

std::vector<CheckResult> run_validation(const ValidateConfig& config);
std::string format_report(const std::vector<CheckResult>& results);
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace exciton::cli
