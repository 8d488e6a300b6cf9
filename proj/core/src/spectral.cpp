#include "exciton/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "exciton/error.hpp"

namespace exciton {

namespace {

constexpr double kDenominatorFloor = 1e-8;

bool in_closed_domain(BlockIndex index, const ModelParams& p) {
  return index.n >= 1 && index.m >= 1 && p.delta == 0.0 && p.g == 1.0;
}

void require_closed_domain(BlockIndex index, const ModelParams& p) {
  index.validate();
  p.validate();
  if (!in_closed_domain(index, p)) {
    throw Error(ErrorCode::PreconditionViolated, "closed forms need n, m >= 1, delta = 0, g = 1");
  }
}

Complex checked(Complex denominator) {
  if (std::abs(denominator) < kDenominatorFloor) {
    throw Error(ErrorCode::FallbackRequired, "closed-form denominator vanishes");
  }
  return denominator;
}

Complex principal_sqrt(double x) {
  return x >= 0.0 ? Complex(std::sqrt(x), 0.0) : Complex(0.0, std::sqrt(-x));
}

bool coalesced(std::span<const Complex> values, double scale) {
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j)
      if (std::abs(values[i] - values[j]) < kDegeneracyTolerance * (1.0 + scale)) return true;
  return false;
}

void normalize_pairs(SpectralDecomposition& dec) {
  for (std::size_t j = 0; j < dec.eigenvalues.size(); ++j) {
    const Complex pairing = trace_pairing(dec.left[j], dec.right[j]);
    if (std::abs(pairing) > 1e-300) dec.left[j] *= 1.0 / pairing;
  }
}

}  // namespace

Complex trace_pairing(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "trace pairing shape mismatch");
  }
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, i);
  return s;
}

std::array<Complex, 4> eigenvalues_closed(BlockIndex index, const ModelParams& p,
                                          GammaTildeConvention convention) {
  require_closed_domain(index, p);
  const double n = index.n;
  const double m = index.m;
  const double gt = gamma_tilde(p, convention);
  // a = √(mn)γ̃/4, so the radicands are a² - (√m ± √n)². Keeping a explicit
  // makes λ4 exactly zero on diagonal blocks, since sqrt(a²) = |a| in IEEE.
  const double a = std::sqrt(m * n) * gt / 4.0;
  const double sp = std::sqrt(m) + std::sqrt(n);
  const double sm = std::sqrt(m) - std::sqrt(n);
  const Complex outer = principal_sqrt(a * a - sp * sp);
  const Complex inner = principal_sqrt(a * a - sm * sm);
  return {-3.0 * a - outer, -3.0 * a + outer, -a - inner, -a + inner};
}

std::array<Complex, 4> l_values(BlockIndex index, const ModelParams& p) {
  const auto lambda = eigenvalues_closed(index, p);
  const double shift = 0.5 * std::sqrt(static_cast<double>(index.n) * index.m) * gamma_tilde(p);
  return {shift + lambda[0], shift + lambda[1], shift + lambda[2], shift + lambda[3]};
}

ClosedFormEigenvectors eigenvectors_closed(BlockIndex index, const ModelParams& p) {
  require_closed_domain(index, p);
  const auto lam = eigenvalues_closed(index, p);
  const auto l = l_values(index, p);
  const double scale = liouvillian_block(index, p, LiouvillianMode::Printed).matrix.norm();
  if (coalesced(lam, scale)) {
    throw Error(ErrorCode::FallbackRequired, "closed-form spectrum is degenerate");
  }

  const double n = index.n;
  const double m = index.m;
  const double g0 = p.gamma0;
  const double g1 = p.gamma1;
  const double gt = gamma_tilde(p);
  const double sp = std::sqrt(m) + std::sqrt(n);
  const double sm = std::sqrt(m) - std::sqrt(n);
  const Complex l1 = l[0], l2 = l[1];
  const Complex lam3 = lam[2], lam4 = lam[3];

  ClosedFormEigenvectors out;

  // Right eigenmatrices.
  const Complex d12 = checked(l2 - l1);
  out.right[0] = CMat{{kI * sp / d12, -l2 / d12}, {l2 / d12, -kI * sp / d12}};
  out.right[1] = CMat{{-l2 / d12, -kI * sp / d12}, {kI * sp / d12, l2 / d12}};
  const Complex d3 = checked(lam3) * checked(4.0 - lam4 * gt);
  out.right[2] = CMat{{kI * (2.0 - g1 * lam4) * sm / d3, -(n * g0 + m * g1 + 2.0 * lam4) / d3},
                      {-(m * g0 + n * g1 + 2.0 * lam4) / d3, kI * (2.0 - g0 * lam4) * sm / d3}};
  if (index.n == index.m) {
    const double d = 8.0 + n * gt * gt;
    const double coherence = 2.0 * std::sqrt(n) * (g0 - g1) / d;
    out.right[3] = CMat{{(4.0 + n * gt * g1) / d, -kI * coherence},
                        {kI * coherence, (4.0 + n * gt * g0) / d}};
  } else {
    const Complex d4 = checked(4.0 - lam3 * gt);
    const Complex d4c = checked(sm) * d4;
    out.right[3] = CMat{{(2.0 - g1 * lam3) / d4, kI * (n * g0 + m * g1 + 2.0 * lam3) / d4c},
                        {kI * (m * g0 + n * g1 + 2.0 * lam3) / d4c, (2.0 - g0 * lam3) / d4}};
  }

  // Left eigenmatrices, first written in the row-major pairing
  // Σ_jk P_jk ρ_jk and transposed into the trace pairing below.
  std::array<CMat, 4> rowwise;
  const Complex e1 = checked(l2) * checked(4.0 + l1 * gt);
  rowwise[0] = CMat{{kI * (2.0 + g0 * l1) * sp / e1, -(m * g0 + n * g1 - 2.0 * l1) / e1},
                    {(n * g0 + m * g1 - 2.0 * l1) / e1, -kI * (2.0 + g1 * l1) * sp / e1}};
  const Complex e2 = checked(4.0 + l2 * gt);
  rowwise[1] = CMat{{-(2.0 + g0 * l2) / e2, -kI * (m * g0 + n * g1 - 2.0 * l2) / (sp * e2)},
                    {kI * (n * g0 + m * g1 - 2.0 * l2) / (sp * e2), (2.0 + g1 * l2) / e2}};
  const Complex e34 = checked(lam3 - lam4);
  rowwise[2] = CMat{{kI * sm / e34, lam3 / e34}, {lam3 / e34, kI * sm / e34}};
  rowwise[3] = CMat{{lam3 / e34, -kI * sm / e34}, {-kI * sm / e34, lam3 / e34}};
  for (std::size_t j = 0; j < 4; ++j) out.left[j] = rowwise[j].transpose();
  return out;
}

bool closed_form_applicable(BlockIndex index, const ModelParams& p, LiouvillianMode mode) {
  if (mode != LiouvillianMode::Printed || !in_closed_domain(index, p)) return false;
  try {
    (void)eigenvectors_closed(index, p);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FallbackRequired) return false;
    throw;
  }
  return true;
}

SpectralDecomposition closed_form_decomposition(BlockIndex index, const ModelParams& p) {
  const auto lam = eigenvalues_closed(index, p);
  auto vecs = eigenvectors_closed(index, p);
  SpectralDecomposition dec;
  dec.index = index;
  dec.mode = LiouvillianMode::Printed;
  dec.source = SpectralSource::ClosedForm;
  dec.eigenvalues.assign(lam.begin(), lam.end());
  dec.right.assign(vecs.right.begin(), vecs.right.end());
  dec.left.assign(vecs.left.begin(), vecs.left.end());
  normalize_pairs(dec);
  return dec;
}

SpectralDecomposition numerical_decomposition(const LiouvillianBlock& block) {
  const EigSystem es = eig_general(block.matrix);
  SpectralDecomposition dec;
  dec.index = block.index;
  dec.mode = block.mode;
  dec.source = SpectralSource::Numerical;
  dec.eigenvalues = es.values;
  dec.degenerate = es.degenerate;
  for (std::size_t j = 0; j < es.values.size(); ++j) {
    dec.right.push_back(devectorize(es.right[j], block.index).matrix);
    dec.left.push_back(devectorize(es.left[j], block.index).matrix.transpose());
  }
  if (!dec.degenerate) normalize_pairs(dec);
  return dec;
}

SpectralDecomposition spectral_decomposition(BlockIndex index, const ModelParams& p,
                                             LiouvillianMode mode) {
  index.validate();
  p.validate();
  if (mode == LiouvillianMode::Printed && in_closed_domain(index, p)) {
    try {
      return closed_form_decomposition(index, p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FallbackRequired) throw;
    }
  }

  const LiouvillianBlock block = liouvillian_block(index, p, mode);
  SpectralDecomposition dec = numerical_decomposition(block);
  // The closed-form spectrum is exact where defined; trust it for coalescence.
  if (mode == LiouvillianMode::Printed && in_closed_domain(index, p)) {
    const auto lam = eigenvalues_closed(index, p);
    if (coalesced(lam, block.matrix.norm())) dec.degenerate = true;
  }
  return dec;
}

DensityBlock propagate_block(const SpectralDecomposition& dec, const DensityBlock& block0, double t) {
  if (dec.degenerate) {
    throw Error(ErrorCode::DegenerateBlock, "degenerate block has no complete eigenbasis");
  }
  if (block0.index != dec.index) {
    throw Error(ErrorCode::DimensionMismatch, "initial block does not match decomposition index");
  }
  DensityBlock out = DensityBlock::zero(dec.index);
  for (std::size_t j = 0; j < dec.eigenvalues.size(); ++j) {
    const Complex c = trace_pairing(dec.left[j], block0.matrix);
    if (c == Complex{}) continue;
    out.matrix += dec.right[j] * (c * std::exp(dec.eigenvalues[j] * t));
  }
  return out;
}

std::vector<std::size_t> match_eigenvalues(const CVec& reference, const CVec& other) {
  if (reference.size() != other.size()) {
    throw Error(ErrorCode::DimensionMismatch, "eigenvalue sets differ in size");
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < reference.size(); ++i)
    for (std::size_t j = 0; j < other.size(); ++j)
      pairs.emplace_back(std::abs(reference[i] - other[j]), i, j);
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
  std::vector<std::size_t> match(reference.size(), reference.size());
  std::vector<bool> used(other.size(), false);
  for (const auto& [d, i, j] : pairs) {
    if (match[i] != reference.size() || used[j]) continue;
    match[i] = j;
    used[j] = true;
  }
  return match;
}

}  // namespace exciton
