#include "exciton/cli/app.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "exciton/cli/commands.hpp"
#include "exciton/cli/io.hpp"
#include "exciton/error.hpp"

namespace exciton::cli {

namespace {

const std::map<std::string, LiouvillianMode> kModes{{"printed", LiouvillianMode::Printed},
                                                    {"canonical", LiouvillianMode::Canonical}};
const std::map<std::string, EvolutionMethod> kMethods{{"spectral", EvolutionMethod::Spectral},
                                                      {"expm", EvolutionMethod::Expm},
                                                      {"ode", EvolutionMethod::Ode}};
const std::map<std::string, SourceRequest> kSources{{"auto", SourceRequest::Auto},
                                                    {"closed", SourceRequest::ClosedForm},
                                                    {"numerical", SourceRequest::Numerical},
                                                    {"both", SourceRequest::Both}};

void add_params(CLI::App& cmd, ModelParams& p) {
  cmd.add_option("--delta", p.delta, "Detuning")->capture_default_str();
  cmd.add_option("--g", p.g, "Atom-cavity coupling")->capture_default_str();
  cmd.add_option("--gamma0", p.gamma0, "Rate of the jump a^dag sigma-")->capture_default_str();
  cmd.add_option("--gamma1", p.gamma1, "Rate of the jump a sigma+")->capture_default_str();
}

unsigned default_threads() {
  if (const char* env = std::getenv("EXCITON_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
  } else {
    write_atomic(path, content);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidExcitation:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::PreconditionViolated:
    case ErrorCode::MethodUnavailable:
    case ErrorCode::TruncationTooLarge:
    case ErrorCode::TruncationTooSmall:
      return kExitInvalidFlags;
    default:
      return kExitNumericalFailure;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dissipative Jaynes-Cummings model: spectra, trajectories and validation", "exciton"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "exciton 0.1.0");

  // spectrum
  SpectrumConfig spectrum;
  std::string spectrum_out = "-";
  auto* cmd_spectrum = app.add_subcommand("spectrum", "Eigensystem of one Liouvillian block as JSON");
  cmd_spectrum->add_option("--n", spectrum.index.n, "Left excitation number")->required()->check(CLI::NonNegativeNumber);
  cmd_spectrum->add_option("--m", spectrum.index.m, "Right excitation number")->required()->check(CLI::NonNegativeNumber);
  add_params(*cmd_spectrum, spectrum.params);
  cmd_spectrum->add_option("--mode", spectrum.mode, "printed or canonical")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case))
      ->default_str("printed");
  cmd_spectrum->add_option("--source", spectrum.source, "auto, closed, numerical or both")
      ->transform(CLI::CheckedTransformer(kSources, CLI::ignore_case))
      ->default_str("auto");
  cmd_spectrum->add_option("--output,-o", spectrum_out, "Output path, - for stdout")->capture_default_str();

  // evolve
  EvolveConfig evolve_cfg;
  evolve_cfg.options.threads = default_threads();
  std::string initial;
  std::string evolve_out = "-";
  auto* cmd_evolve = app.add_subcommand("evolve", "Trajectory of atomic observables as CSV");
  cmd_evolve->add_option("--initial", initial,
                         "dressed:n=N | superposition:n=N,alpha=A | fock:photons=K,atom=J | file:PATH")
      ->required();
  add_params(*cmd_evolve, evolve_cfg.params);
  cmd_evolve->add_option("--method", evolve_cfg.options.method, "spectral, expm or ode")
      ->transform(CLI::CheckedTransformer(kMethods, CLI::ignore_case))
      ->default_str("spectral");
  cmd_evolve->add_option("--mode", evolve_cfg.options.mode, "printed or canonical")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case))
      ->default_str("canonical");
  cmd_evolve->add_option("--dt", evolve_cfg.dt, "Sample spacing")->capture_default_str()->check(CLI::PositiveNumber);
  cmd_evolve->add_option("--tmax", evolve_cfg.t_max, "Final time")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd_evolve->add_option("--n-max", evolve_cfg.options.n_max, "Photon truncation for the ode method")
      ->capture_default_str();
  cmd_evolve->add_option("--ode-dt", evolve_cfg.options.ode_dt, "RK4 step; 0 picks the default bound")
      ->capture_default_str();
  cmd_evolve->add_option("--threads", evolve_cfg.options.threads, "Worker threads; 0 uses all cores");
  cmd_evolve->add_option("--output,-o", evolve_out, "Output path, - for stdout")->capture_default_str();

  // figures
  FiguresConfig figures;
  figures.threads = default_threads();
  bool with_timestamp = false;
  auto* cmd_figures = app.add_subcommand("figures", "Reproduce the figure data sets as CSV files");
  cmd_figures->add_option("--outdir", figures.outdir, "Output directory")->required();
  cmd_figures->add_option("--alpha", figures.alpha, "Superposition angle")->capture_default_str();
  cmd_figures->add_option("--dt", figures.dt, "Sample spacing")->capture_default_str()->check(CLI::PositiveNumber);
  cmd_figures->add_option("--tmax", figures.t_max, "Final time")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd_figures->add_option("--mode", figures.mode, "printed or canonical")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case))
      ->default_str("printed");
  cmd_figures->add_flag("--timestamp", with_timestamp, "Record the wall-clock time in the manifest");
  cmd_figures->add_option("--threads", figures.threads, "Worker threads; 0 uses all cores");

  // validate
  ValidateConfig validate;
  auto* cmd_validate = app.add_subcommand("validate", "Run the invariant suites and print a pass/fail table");
  cmd_validate->add_flag("--inject-gamma-sign-flip", validate.inject_gamma_sign_flip,
                         "Build printed blocks with gamma_tilde = gamma1 - gamma0");
  cmd_validate->add_option("--seed", validate.seed, "Seed for the random rate sweep")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidFlags;
  }

  try {
    if (*cmd_spectrum) {
      emit(spectrum_out, spectrum_report(spectrum).dump(2) + "\n", out);
    } else if (*cmd_evolve) {
      const BlockedDensity rho0 = parse_initial(initial);
      const EvolveResult res = run_evolve(evolve_cfg, rho0);
      for (const BlockIndex& b : res.trajectory.expm_fallbacks) {
        err << "note: block (" << b.n << "," << b.m << ") has coalesced eigenvalues; propagated with expm\n";
      }
      emit(evolve_out, format_csv(res.rows), out);
    } else if (*cmd_figures) {
      if (with_timestamp) figures.timestamp = utc_timestamp();
      const auto manifest = run_figures(figures);
      out << "wrote " << manifest.at("files").size() << " data files and manifest.json to "
          << figures.outdir.string() << "\n";
    } else if (*cmd_validate) {
      const auto results = run_validation(validate);
      out << format_report(results);
      return all_passed(results) ? kExitOk : kExitValidationFailed;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoFailure;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kExitOk;
}

}  // namespace exciton::cli
