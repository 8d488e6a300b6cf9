#pragma once

// Excitation-conserving Liouvillian blocks L_{n,m} acting on vectorized
// density blocks rho_{n,m} = sum_{j,k} rho^{j,k} |n-j,j><m-k,k|.

#include <compare>
#include <utility>
#include <vector>

#include "exciton/model.hpp"
#include "exciton/smallmat.hpp"

namespace exciton {

struct BlockIndex {
  int n = 0;  // left excitation number
  int m = 0;  // right excitation number

  int left_dim() const noexcept { return n == 0 ? 1 : 2; }
  int right_dim() const noexcept { return m == 0 ? 1 : 2; }
  int vector_dim() const noexcept { return left_dim() * right_dim(); }
  bool diagonal() const noexcept { return n == m; }

  /// Throws InvalidExcitation for negative n or m.
  void validate() const;

  friend auto operator<=>(const BlockIndex&, const BlockIndex&) = default;
};

/// Atom index pairs (j, k) present in a block, in vectorization order
/// (1,1), (1,0), (0,1), (0,0) with forbidden pairs removed.
std::vector<std::pair<int, int>> block_components(BlockIndex index);

/// Row (or column) of atom index j inside a sector of excitation n.
int atom_row(int n, int j);

/// One block of a density matrix. `matrix` is left_dim x right_dim with row 0
/// holding the excited atom (j = 1) whenever the sector has two states.
struct DensityBlock {
  BlockIndex index;
  CMat matrix;

  static DensityBlock zero(BlockIndex index);
  Complex element(int j, int k) const;
  Complex& element(int j, int k);
};

CVec vectorize(const DensityBlock& block);
DensityBlock devectorize(std::span<const Complex> v, BlockIndex index);

enum class LiouvillianMode {
  Printed,    // the closed-form 4x4 matrix with geometric-mean rates
  Canonical,  // entrywise from the Lindblad generator
};

/// Sign convention for γ̃ entering the printed coherence decay.
enum class GammaTildeConvention {
  Sum,         // γ̃ = γ0 + γ1 (trace-consistent)
  Difference,  // γ̃ = γ1 - γ0 (kept only to demonstrate the inconsistency)
};

double gamma_tilde(const ModelParams& p,
                   GammaTildeConvention convention = GammaTildeConvention::Sum);

struct LiouvillianBlock {
  BlockIndex index;
  LiouvillianMode mode = LiouvillianMode::Canonical;
  CMat matrix;
};

/// Builds L_{n,m}. Sectors with n = 0 or m = 0 drop the rows and columns of
/// forbidden atom indices.
LiouvillianBlock liouvillian_block(BlockIndex index, const ModelParams& p, LiouvillianMode mode,
                                   GammaTildeConvention convention = GammaTildeConvention::Sum);

/// Row vector t with t·vectorize(rho) = sum of the diagonal positions of rho.
CVec block_trace_vector(BlockIndex index);

}  // namespace exciton
