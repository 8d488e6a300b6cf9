#include "exciton/cli/io.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "exciton/error.hpp"

namespace exciton::cli {

namespace {

[[noreturn]] void bad_spec(std::string_view spec, std::string_view why) {
  throw Error(ErrorCode::InvalidArgument,
              "invalid initial state '" + std::string(spec) + "': " + std::string(why));
}

std::map<std::string, std::string> parse_pairs(std::string_view spec, std::string_view body) {
  std::map<std::string, std::string> out;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) bad_spec(spec, "expected key=value");
    const std::string key(item.substr(0, eq));
    if (!out.emplace(key, std::string(item.substr(eq + 1))).second) bad_spec(spec, "repeated key " + key);
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
  }
  return out;
}

template <typename T>
T parse_value(std::string_view spec, const std::map<std::string, std::string>& pairs,
              const std::string& key) {
  const auto it = pairs.find(key);
  if (it == pairs.end()) bad_spec(spec, "missing " + key);
  T value{};
  const std::string& text = it->second;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) bad_spec(spec, "bad value for " + key);
  return value;
}

void expect_keys(std::string_view spec, const std::map<std::string, std::string>& pairs,
                 std::initializer_list<std::string_view> keys) {
  for (const auto& [k, _] : pairs) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) bad_spec(spec, "unknown key " + k);
  }
}

std::vector<std::vector<double>> real_rows(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be an array of rows");
  return j.get<std::vector<std::vector<double>>>();
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round12(double v) { return std::stod(format_number(v)); }

std::string format_csv(std::span<const TimeSample> rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const TimeSample& r : rows) {
    for (double v : {r.t, r.w, r.p, r.trace_re, r.trace_im, r.rho11, r.rho00, r.re_rho01, r.im_rho01}) {
      out += format_number(v);
      out += ',';
    }
    out.back() = '\n';
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json complex_to_json(Complex z) { return {{"re", round12(z.real())}, {"im", round12(z.imag())}}; }

nlohmann::json matrix_to_json(const CMat& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    nlohmann::json rr = nlohmann::json::array(), ir = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      rr.push_back(round12(m(r, c).real()));
      ir.push_back(round12(m(r, c).imag()));
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  return {{"re", std::move(re)}, {"im", std::move(im)}};
}

CMat matrix_from_json(const nlohmann::json& j) {
  try {
    const auto re = real_rows(j.at("re"), "re");
    const auto im = j.contains("im") ? real_rows(j.at("im"), "im")
                                     : std::vector<std::vector<double>>(re.size(), std::vector<double>(
                                                                                       re.empty() ? 0 : re[0].size()));
    if (re.empty() || im.size() != re.size()) throw Error(ErrorCode::DimensionMismatch, "matrix row count mismatch");
    const std::size_t cols = re[0].size();
    std::vector<Complex> entries;
    for (std::size_t r = 0; r < re.size(); ++r) {
      if (re[r].size() != cols || im[r].size() != cols) {
        throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
      }
      for (std::size_t c = 0; c < cols; ++c) entries.emplace_back(re[r][c], im[r][c]);
    }
    return CMat(re.size(), cols, std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed matrix: ") + e.what());
  }
}

nlohmann::json density_to_json(const BlockedDensity& rho) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& [idx, block] : rho.blocks()) {
    nlohmann::json b = matrix_to_json(block.matrix);
    b["n"] = idx.n;
    b["m"] = idx.m;
    blocks.push_back(std::move(b));
  }
  return {{"blocks", std::move(blocks)}};
}

BlockedDensity density_from_json(const nlohmann::json& j) {
  BlockedDensity rho;
  try {
    for (const auto& b : j.at("blocks")) {
      const BlockIndex idx{b.at("n").get<int>(), b.at("m").get<int>()};
      if (rho.find(idx) != nullptr) throw Error(ErrorCode::InvalidArgument, "repeated block");
      rho.set({idx, matrix_from_json(b)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed density: ") + e.what());
  }
  return rho;
}

BlockedDensity parse_initial(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) bad_spec(spec, "expected kind:arguments");
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view body = spec.substr(colon + 1);

  if (kind == "file") {
    if (body.empty()) bad_spec(spec, "missing path");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(std::string(body)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("cannot parse ") + std::string(body) + ": " + e.what());
    }
    return density_from_json(j);
  }

  const auto pairs = parse_pairs(spec, body);
  if (kind == "dressed") {
    expect_keys(spec, pairs, {"n"});
    return initial_dressed(parse_value<int>(spec, pairs, "n"));
  }
  if (kind == "superposition") {
    expect_keys(spec, pairs, {"n", "alpha"});
    return initial_superposition(parse_value<int>(spec, pairs, "n"), parse_value<double>(spec, pairs, "alpha"));
  }
  if (kind == "fock") {
    expect_keys(spec, pairs, {"photons", "atom"});
    return initial_fock(parse_value<int>(spec, pairs, "photons"), parse_value<int>(spec, pairs, "atom"));
  }
  bad_spec(spec, "unknown kind");
}

}  // namespace exciton::cli
