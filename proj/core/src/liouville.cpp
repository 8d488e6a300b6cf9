#include "exciton/liouville.hpp"

#include <array>
#include <cmath>
#include <string>

#include "exciton/error.hpp"

namespace exciton {

void BlockIndex::validate() const {
  if (n < 0 || m < 0) {
    throw Error(ErrorCode::InvalidExcitation,
                "block index (" + std::to_string(n) + "," + std::to_string(m) + ") is negative");
  }
}

std::vector<std::pair<int, int>> block_components(BlockIndex index) {
  index.validate();
  std::vector<std::pair<int, int>> out;
  for (int j : {1, 0}) {
    if (j == 1 && index.n == 0) continue;
    for (int k : {1, 0}) {
      if (k == 1 && index.m == 0) continue;
      out.emplace_back(j, k);
    }
  }
  return out;
}

int atom_row(int n, int j) {
  if (n == 0) {
    if (j != 0) throw Error(ErrorCode::InvalidArgument, "vacuum sector has no excited atom");
    return 0;
  }
  return 1 - j;
}

DensityBlock DensityBlock::zero(BlockIndex index) {
  index.validate();
  return {index, CMat(static_cast<std::size_t>(index.left_dim()),
                      static_cast<std::size_t>(index.right_dim()))};
}

Complex DensityBlock::element(int j, int k) const {
  return matrix(static_cast<std::size_t>(atom_row(index.n, j)),
                static_cast<std::size_t>(atom_row(index.m, k)));
}

Complex& DensityBlock::element(int j, int k) {
  return matrix(static_cast<std::size_t>(atom_row(index.n, j)),
                static_cast<std::size_t>(atom_row(index.m, k)));
}

CVec vectorize(const DensityBlock& block) {
  if (block.matrix.rows() != static_cast<std::size_t>(block.index.left_dim()) ||
      block.matrix.cols() != static_cast<std::size_t>(block.index.right_dim())) {
    throw Error(ErrorCode::DimensionMismatch, "density block shape does not match its index");
  }
  // Row-major order of the matrix is exactly the component order.
  return {block.matrix.data().begin(), block.matrix.data().end()};
}

DensityBlock devectorize(std::span<const Complex> v, BlockIndex index) {
  if (v.size() != static_cast<std::size_t>(index.vector_dim())) {
    throw Error(ErrorCode::DimensionMismatch, "vector length does not match block index");
  }
  DensityBlock b = DensityBlock::zero(index);
  std::copy(v.begin(), v.end(), b.matrix.data().begin());
  return b;
}

double gamma_tilde(const ModelParams& p, GammaTildeConvention convention) {
  return convention == GammaTildeConvention::Sum ? p.gamma0 + p.gamma1 : p.gamma1 - p.gamma0;
}

namespace {

// Jump a†σ- restricted to sector n: |n-1,1> -> √n |n,0>.
CMat lowering_jump(int n) {
  if (n == 0) return CMat(1, 1);
  CMat j(2, 2);
  j(1, 0) = std::sqrt(static_cast<double>(n));
  return j;
}

// Jump aσ+ restricted to sector n: |n,0> -> √n |n-1,1>.
CMat raising_jump(int n) {
  if (n == 0) return CMat(1, 1);
  CMat j(2, 2);
  j(0, 1) = std::sqrt(static_cast<double>(n));
  return j;
}

CMat canonical_block(BlockIndex index, const ModelParams& p) {
  const CMat hn = sector_hamiltonian(index.n, p);
  const CMat hm = sector_hamiltonian(index.m, p);
  const std::array<std::pair<double, std::pair<CMat, CMat>>, 2> jumps{{
      {p.gamma0, {lowering_jump(index.n), lowering_jump(index.m)}},
      {p.gamma1, {raising_jump(index.n), raising_jump(index.m)}},
  }};

  const std::size_t dim = static_cast<std::size_t>(index.vector_dim());
  CMat out(dim, dim);
  CVec unit(dim);
  for (std::size_t q = 0; q < dim; ++q) {
    std::fill(unit.begin(), unit.end(), Complex{});
    unit[q] = 1.0;
    const CMat rho = devectorize(unit, index).matrix;
    CMat drho = (hn * rho - rho * hm) * (-kI);
    for (const auto& [rate, ops] : jumps) {
      if (rate == 0.0) continue;
      const auto& [jn, jm] = ops;
      const CMat jn_dag = jn.adjoint();
      const CMat jm_dag = jm.adjoint();
      CMat term = jn * rho * jm_dag;
      term -= (jn_dag * jn * rho + rho * (jm_dag * jm)) * Complex(0.5);
      drho += term * Complex(rate);
    }
    for (std::size_t r = 0; r < dim; ++r) out(r, q) = drho.data()[r];
  }
  return out;
}

CMat printed_block(BlockIndex index, const ModelParams& p, GammaTildeConvention convention) {
  const double sn = std::sqrt(static_cast<double>(index.n));
  const double sm = std::sqrt(static_cast<double>(index.m));
  const double smn = sn * sm;
  const double gt = gamma_tilde(p, convention);
  const Complex a = kI * p.g * sm;
  const Complex b = -kI * p.g * sn;
  const CMat full{
      {-smn * p.gamma0, a, b, smn * p.gamma1},
      {a, -2.0 * kI * p.delta - 0.5 * smn * gt, 0.0, b},
      {b, 0.0, 2.0 * kI * p.delta - 0.5 * smn * gt, a},
      {smn * p.gamma0, b, a, -smn * p.gamma1},
  };
  // Keep only the rows/columns of allowed components.
  const auto comps = block_components(index);
  auto full_pos = [](std::pair<int, int> c) { return static_cast<std::size_t>(2 * (1 - c.first) + (1 - c.second)); };
  CMat out(comps.size(), comps.size());
  for (std::size_t r = 0; r < comps.size(); ++r)
    for (std::size_t c = 0; c < comps.size(); ++c) out(r, c) = full(full_pos(comps[r]), full_pos(comps[c]));
  return out;
}

}  // namespace

LiouvillianBlock liouvillian_block(BlockIndex index, const ModelParams& p, LiouvillianMode mode,
                                   GammaTildeConvention convention) {
  index.validate();
  p.validate();
  LiouvillianBlock out{index, mode, {}};
  out.matrix = mode == LiouvillianMode::Printed ? printed_block(index, p, convention)
                                                : canonical_block(index, p);
  return out;
}

CVec block_trace_vector(BlockIndex index) {
  const auto comps = block_components(index);
  CVec t(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].first == comps[i].second) t[i] = 1.0;
  }
  return t;
}

}  // namespace exciton
