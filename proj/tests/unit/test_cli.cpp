#include <cmath>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "exciton/cli/app.hpp"
#include "exciton/cli/commands.hpp"
#include "exciton/cli/io.hpp"
#include "test_support.hpp"

namespace exciton::cli {
namespace {

namespace fs = std::filesystem;
using exciton::testing::code_of;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "exciton");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(EXCITON_TEST_TMPDIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Rows of a CSV body as numbers; the header is checked and dropped.
std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kCsvHeader);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    EXPECT_EQ(row.size(), 9u);
    rows.push_back(std::move(row));
  }
  return rows;
}

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1e-20), "1e-20");
  EXPECT_EQ(format_number(20.0), "20");
  EXPECT_DOUBLE_EQ(round12(std::numbers::pi), 3.14159265359);
}

TEST(FormatCsv, HeaderAndLineEndings) {
  const std::vector<TimeSample> rows{{0.0, 0.0, 0.5, 1.0, 0.0, 0.5, 0.5, 0.25, -0.0},
                                     {0.01, -1e-3, 0.5, 1.0, 0.0, 0.4995, 0.5005, 0.0, 0.0}};
  EXPECT_EQ(format_csv(rows), std::string(kCsvHeader) + "\n0,0,0.5,1,0,0.5,0.5,0.25,0\n" +
                                  "0.01,-0.001,0.5,1,0,0.4995,0.5005,0,0\n");
}

TEST(ParseInitial, BuiltinSpecs) {
  EXPECT_EQ(parse_initial("dressed:n=2").max_abs_diff(initial_dressed(2)), 0.0);
  EXPECT_EQ(parse_initial("superposition:n=2,alpha=0.785398").max_abs_diff(initial_superposition(2, 0.785398)), 0.0);
  EXPECT_EQ(parse_initial("fock:photons=1,atom=0").max_abs_diff(initial_fock(1, 0)), 0.0);
  EXPECT_EQ(parse_initial("fock:atom=1,photons=3").max_abs_diff(initial_fock(3, 1)), 0.0);
}

TEST(ParseInitial, MalformedSpecs) {
  for (const char* bad : {"", "dressed", "dressed:n=", "dressed:n=2x", "dressed:m=2", "dressed:n=2,alpha=1",
                          "superposition:n=2", "fock:photons=1", "fock:photons=1,atom=2", "thermal:n=1"}) {
    EXPECT_EQ(code_of([&] { (void)parse_initial(bad); }), ErrorCode::InvalidArgument) << bad;
  }
  EXPECT_EQ(code_of([] { (void)parse_initial("dressed:n=0"); }), ErrorCode::InvalidExcitation);
  EXPECT_THROW((void)parse_initial("file:/nonexistent/state.json"), IoError);
}

TEST(DensityJson, RoundTrip) {
  const BlockedDensity rho = exciton::testing::random_state(2);
  const BlockedDensity back = density_from_json(nlohmann::json::parse(density_to_json(rho).dump()));
  EXPECT_LE(back.max_abs_diff(rho), 1e-12);
  const auto j = nlohmann::json::parse(R"({"blocks":[{"n":1,"m":1,"re":[[1,0],[0,0]]}]})");
  EXPECT_EQ(density_from_json(j).max_abs_diff(initial_fock(0, 1)), 0.0);
  EXPECT_EQ(code_of([] { (void)density_from_json(nlohmann::json::parse(R"({"blocks":[{"n":1,"m":1,"re":[[1]]}]})")); }),
            ErrorCode::DimensionMismatch);
}

TEST(ParseInitial, FileSpec) {
  const fs::path dir = scratch("initial_file");
  const fs::path path = dir / "state.json";
  write_atomic(path, density_to_json(initial_superposition(2, 0.3)).dump());
  EXPECT_LE(parse_initial("file:" + path.string()).max_abs_diff(initial_superposition(2, 0.3)), 1e-12);
}

TEST(WriteAtomic, ReplacesContentAndLeavesNoTemporaries) {
  const fs::path dir = scratch("atomic");
  write_atomic(dir / "a.txt", "first");
  write_atomic(dir / "a.txt", "second");
  EXPECT_EQ(read_file(dir / "a.txt"), "second");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), 1);
  EXPECT_THROW(write_atomic("/dev/null/x.txt", "x"), IoError);
}

TEST(Run, InvalidFlagsExitTwo) {
  EXPECT_EQ(invoke({}).code, kExitInvalidFlags);
  EXPECT_EQ(invoke({"spectrum", "--n", "2"}).code, kExitInvalidFlags);
  EXPECT_EQ(invoke({"spectrum", "--n", "2", "--m", "2", "--bogus", "1"}).code, kExitInvalidFlags);
  EXPECT_EQ(invoke({"evolve", "--initial", "dressed:n=0"}).code, kExitInvalidFlags);
  EXPECT_EQ(invoke({"evolve", "--initial", "dressed:n=2", "--gamma0", "-1"}).code, kExitInvalidFlags);
  EXPECT_EQ(invoke({"evolve", "--initial", "dressed:n=2", "--method", "ode", "--mode", "printed"}).code,
            kExitInvalidFlags);
  EXPECT_EQ(invoke({"evolve", "--initial", "dressed:n=2", "--method", "euler"}).code, kExitInvalidFlags);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST(Run, DegenerateBlockOverflowExitsThree) {
  // Coalesced block forces expm, which overflows on the huge step.
  const RunResult r = invoke({"evolve", "--initial", "dressed:n=1", "--gamma0", "4", "--gamma1", "4", "--mode",
                              "printed", "--tmax", "1e8", "--dt", "1e8"});
  EXPECT_EQ(r.code, kExitNumericalFailure) << r.err;
}

TEST(Run, UnwritableOutputExitsFour) {
  EXPECT_EQ(invoke({"figures", "--outdir", "/dev/null/figs"}).code, kExitIoFailure);
  EXPECT_EQ(invoke({"evolve", "--initial", "dressed:n=2", "--tmax", "1", "-o", "/dev/null/x.csv"}).code,
            kExitIoFailure);
}

TEST(Run, EvolveEqualRatesIsConstant) {
  const RunResult r = invoke({"evolve", "--initial", "dressed:n=2", "--gamma0", "0.7", "--gamma1", "0.7"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = parse_csv(r.out);
  EXPECT_EQ(rows.size(), 2001u);
  for (const auto& row : rows) {
    EXPECT_NEAR(row[1], 0.0, 1e-12);
    EXPECT_NEAR(row[2], 0.5, 1e-12);
  }
}

TEST(Run, EvolveRabi) {
  const RunResult r = invoke({"evolve", "--initial", "fock:photons=1,atom=0", "--gamma0", "0", "--gamma1", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const auto& row : parse_csv(r.out)) EXPECT_NEAR(row[1], -std::cos(2.0 * row[0]), 1e-7);
}

TEST(Run, EvolveOdeMatchesSpectral) {
  const std::vector<std::string> base{"evolve", "--initial", "superposition:n=2,alpha=0.785398163397",
                                      "--gamma0", "0.08", "--gamma1", "0.3", "--tmax", "5", "--dt", "0.05"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    const RunResult r = invoke(args);
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return parse_csv(r.out);
  };
  const auto ode = with({"--method", "ode", "--n-max", "5"});
  const auto spectral = with({"--method", "spectral", "--mode", "canonical"});
  ASSERT_EQ(ode.size(), spectral.size());
  for (std::size_t i = 0; i < ode.size(); ++i)
    for (std::size_t c = 0; c < 9; ++c) EXPECT_NEAR(ode[i][c], spectral[i][c], 1e-6);
}

TEST(Run, SpectrumStationaryEigenvalue) {
  const RunResult r = invoke({"spectrum", "--n", "2", "--m", "2", "--gamma0", "0.08", "--gamma1", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["source"], "closed_form");
  EXPECT_EQ(doc["degenerate"], false);
  // Sorted by descending real part: the zero comes first.
  EXPECT_EQ(doc["eigenvalues"][0]["re"], 0.0);
  EXPECT_EQ(doc["eigenvalues"][0]["im"], 0.0);
  EXPECT_EQ(doc["trace_consistency"]["sum"]["consistent"], true);
  EXPECT_EQ(doc["trace_consistency"]["difference"]["consistent"], false);
}

TEST(Run, SpectrumUnitary) {
  const RunResult r = invoke({"spectrum", "--n", "1", "--m", "1", "--gamma0", "0", "--gamma1", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  CVec values;
  for (const auto& v : doc["eigenvalues"]) values.emplace_back(v["re"].get<double>(), v["im"].get<double>());
  EXPECT_LT(exciton::testing::multiset_distance(values, {Complex(0, 2), Complex(0, -2), 0.0, 0.0}), 1e-10);
}

TEST(Run, SpectrumSourcesAgree) {
  const RunResult r = invoke({"spectrum", "--n", "2", "--m", "3", "--gamma0", "0.3", "--gamma1", "0.1", "--source", "both"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["source"], "closed_form");
  EXPECT_EQ(doc["numerical"]["source"], "numerical");
  EXPECT_EQ(doc["source_agreement"]["agree"], true);
  EXPECT_EQ(invoke({"spectrum", "--n", "2", "--m", "3", "--delta", "0.1", "--source", "closed"}).code,
            kExitInvalidFlags);
}

TEST(Run, FiguresValuesAndDeterminism) {
  const fs::path a = scratch("figures_a"), b = scratch("figures_b");
  ASSERT_EQ(invoke({"figures", "--outdir", a.string()}).code, kExitOk);
  ASSERT_EQ(invoke({"figures", "--outdir", b.string(), "--threads", "4"}).code, kExitOk);

  const auto manifest = nlohmann::json::parse(read_file(a / "manifest.json"));
  EXPECT_EQ(manifest["files"].size(), 8u);
  EXPECT_FALSE(manifest.contains("timestamp"));
  for (const auto& f : manifest["files"]) {
    const std::string name = f["file"];
    EXPECT_EQ(read_file(a / name), read_file(b / name)) << name;
  }
  EXPECT_EQ(read_file(a / "manifest.json"), read_file(b / "manifest.json"));

  for (const auto& row : parse_csv(read_file(a / "fig1_gray.csv"))) {
    EXPECT_NEAR(row[1], 0.0, 1e-12);
    EXPECT_NEAR(row[2], 0.5, 1e-12);
  }
  EXPECT_NEAR(parse_csv(read_file(a / "fig1_dotted.csv")).back()[1], 0.2647, 1e-3);
  EXPECT_NEAR(parse_csv(read_file(a / "fig1_dashed.csv")).back()[1], -0.2647, 1e-3);

  ASSERT_EQ(invoke({"figures", "--outdir", a.string(), "--timestamp"}).code, kExitOk);
  EXPECT_TRUE(nlohmann::json::parse(read_file(a / "manifest.json")).contains("timestamp"));
}

TEST(Run, ValidateCleanAndMutated) {
  const RunResult clean = invoke({"validate"});
  EXPECT_EQ(clean.code, kExitOk) << clean.out;
  EXPECT_EQ(clean.out.find("FAIL"), std::string::npos);
  EXPECT_NE(clean.out.find("INFO"), std::string::npos);
  const RunResult flipped = invoke({"validate", "--inject-gamma-sign-flip"});
  EXPECT_EQ(flipped.code, kExitValidationFailed);
  EXPECT_NE(flipped.out.find("FAIL"), std::string::npos);
}

TEST(CheckInitialState, RejectsUnphysicalInput) {
  BlockedDensity half;
  half.set({{1, 1}, CMat{{0.5, 0.0}, {0.0, 0.0}}});
  EXPECT_EQ(code_of([&] { check_initial_state(half); }), ErrorCode::InvalidArgument);
  BlockedDensity skew;
  skew.set({{1, 1}, CMat{{0.5, 0.1}, {0.0, 0.5}}});
  EXPECT_EQ(code_of([&] { check_initial_state(skew); }), ErrorCode::InvalidArgument);
  EXPECT_NO_THROW(check_initial_state(initial_superposition(2, 0.4)));
}

}  // namespace
}  // namespace exciton::cli
