#pragma once

// Text formats shared by the subcommands: CSV time series, JSON matrices and
// blocked densities, initial-state specs and atomic file output.

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "exciton/density.hpp"
#include "exciton/dynamics.hpp"

namespace exciton::cli {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.12g with negative zero printed as 0.
std::string format_number(double v);
/// v rounded to 12 significant digits.
double round12(double v);

inline constexpr std::string_view kCsvHeader = "t,W,P,trace_re,trace_im,rho11,rho00,re_rho01,im_rho01";

/// Header plus one LF-terminated row per sample.
std::string format_csv(std::span<const TimeSample> rows);

/// Writes through a temporary file in the same directory and renames it into
/// place. Throws IoError.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

nlohmann::json complex_to_json(Complex z);
/// {"re": [[...]], "im": [[...]]}
nlohmann::json matrix_to_json(const CMat& m);
CMat matrix_from_json(const nlohmann::json& j);

/// {"blocks": [{"n": .., "m": .., "re": [[..]], "im": [[..]]}, ...]}; "im"
/// may be omitted for real blocks.
nlohmann::json density_to_json(const BlockedDensity& rho);
BlockedDensity density_from_json(const nlohmann::json& j);

/// Parses dressed:n=<int>, superposition:n=<int>,alpha=<float>,
/// fock:photons=<int>,atom=<0|1> or file:<path>. Throws Error(InvalidArgument)
/// for malformed specs and IoError for unreadable files.
BlockedDensity parse_initial(std::string_view spec);

}  // namespace exciton::cli
