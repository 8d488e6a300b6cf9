#include "exciton/density.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "exciton/error.hpp"

namespace exciton {

void BlockedDensity::set(DensityBlock block) {
  block.index.validate();
  if (block.matrix.rows() != static_cast<std::size_t>(block.index.left_dim()) ||
      block.matrix.cols() != static_cast<std::size_t>(block.index.right_dim())) {
    throw Error(ErrorCode::DimensionMismatch, "density block shape does not match its index");
  }
  const BlockIndex key = block.index;
  blocks_.insert_or_assign(key, std::move(block));
}

const DensityBlock* BlockedDensity::find(BlockIndex index) const {
  const auto it = blocks_.find(index);
  return it == blocks_.end() ? nullptr : &it->second;
}

Complex BlockedDensity::element(BlockIndex index, int j, int k) const {
  const DensityBlock* b = find(index);
  if (b == nullptr) return 0.0;
  if ((j == 1 && index.n == 0) || (k == 1 && index.m == 0)) return 0.0;
  return b->element(j, k);
}

int BlockedDensity::max_excitation() const {
  int best = -1;
  for (const auto& [idx, _] : blocks_) best = std::max({best, idx.n, idx.m});
  return best;
}

Complex BlockedDensity::trace() const {
  Complex t = 0.0;
  for (const auto& [idx, b] : blocks_)
    if (idx.diagonal()) t += b.matrix.trace();
  return t;
}

double BlockedDensity::hermiticity_defect() const {
  double worst = 0.0;
  for (const auto& [idx, b] : blocks_) {
    const DensityBlock* partner = find(BlockIndex{idx.m, idx.n});
    const CMat expected = b.matrix.adjoint();
    if (partner == nullptr) {
      for (const auto& z : expected.data()) worst = std::max(worst, std::abs(z));
    } else {
      worst = std::max(worst, exciton::max_abs_diff(partner->matrix, expected));
    }
  }
  return worst;
}

double BlockedDensity::purity() const {
  double s = 0.0;
  for (const auto& [idx, b] : blocks_) {
    const double f = b.matrix.norm();
    s += f * f;
  }
  return s;
}

double BlockedDensity::max_abs_diff(const BlockedDensity& other) const {
  std::set<BlockIndex> keys;
  for (const auto& [idx, _] : blocks_) keys.insert(idx);
  for (const auto& [idx, _] : other.blocks_) keys.insert(idx);
  double worst = 0.0;
  for (const auto& idx : keys) {
    const DensityBlock* a = find(idx);
    const DensityBlock* b = other.find(idx);
    const CMat za = a ? a->matrix : DensityBlock::zero(idx).matrix;
    const CMat zb = b ? b->matrix : DensityBlock::zero(idx).matrix;
    worst = std::max(worst, exciton::max_abs_diff(za, zb));
  }
  return worst;
}

}  // namespace exciton
