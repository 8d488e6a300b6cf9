#pragma once

#include <map>

#include "exciton/liouville.hpp"

namespace exciton {

/// Sparse collection of density blocks ρ_{n,m}; absent blocks are zero.
class BlockedDensity {
 public:
  using BlockMap = std::map<BlockIndex, DensityBlock>;

  BlockedDensity() = default;

  /// Inserts or replaces a block. Throws DimensionMismatch on a shape mismatch.
  void set(DensityBlock block);
  const DensityBlock* find(BlockIndex index) const;
  /// Element ρ_{n,m}^{j,k}, zero when the block is absent.
  Complex element(BlockIndex index, int j, int k) const;

  const BlockMap& blocks() const noexcept { return blocks_; }
  bool empty() const noexcept { return blocks_.empty(); }
  /// Largest n or m among stored blocks; -1 when empty.
  int max_excitation() const;

  /// Σ_n Tr ρ_{n,n}.
  Complex trace() const;
  /// max over blocks of |ρ_{m,n} - ρ_{n,m}^†|, counting absent partners as zero.
  double hermiticity_defect() const;
  /// Tr ρ² of the assembled state, Σ ‖ρ_{n,m}‖_F² for Hermitian ρ.
  double purity() const;
  /// Largest entrywise difference to another blocked state.
  double max_abs_diff(const BlockedDensity& other) const;

 private:
  BlockMap blocks_;
};

}  // namespace exciton
