#pragma once

// Per-block eigensystems of the Liouvillian and spectral propagation.
//
// Right eigenmatrices are shaped like the density block (left_dim x
// right_dim). Left eigenmatrices are stored in the trace pairing: they are
// right_dim x left_dim and c = Tr{left * rho} projects a block onto a mode.

#include <array>
#include <vector>

#include "exciton/liouville.hpp"
#include "exciton/model.hpp"
#include "exciton/smallmat.hpp"

namespace exciton {

enum class SpectralSource { ClosedForm, Numerical };

struct SpectralDecomposition {
  BlockIndex index;
  LiouvillianMode mode = LiouvillianMode::Canonical;
  SpectralSource source = SpectralSource::Numerical;
  CVec eigenvalues;
  std::vector<CMat> right;
  std::vector<CMat> left;
  /// Coalesced eigenvalues or an ill-conditioned eigenbasis. Such blocks
  /// must be propagated with expm.
  bool degenerate = false;
};

/// Tr{a b} for matrices whose product is square.
Complex trace_pairing(const CMat& a, const CMat& b);

/// Eigenvalues λ1..λ4 at zero detuning and g = 1 (n, m >= 1). Principal
/// square roots. Throws PreconditionViolated outside that domain.
std::array<Complex, 4> eigenvalues_closed(BlockIndex index, const ModelParams& p,
                                          GammaTildeConvention convention = GammaTildeConvention::Sum);

/// l_j = (√(mn)/2) γ̃ + λ_j.
std::array<Complex, 4> l_values(BlockIndex index, const ModelParams& p);

struct ClosedFormEigenvectors {
  std::array<CMat, 4> left;   // trace pairing, see header comment
  std::array<CMat, 4> right;
};

/// Closed-form left/right eigenmatrices for n, m >= 1 at δ = 0, g = 1.
/// The n = m case uses the limiting form of the stationary eigenmatrix.
/// Throws FallbackRequired on a degenerate spectrum or a vanishing
/// denominator (|d| < 1e-8), PreconditionViolated outside the domain.
ClosedFormEigenvectors eigenvectors_closed(BlockIndex index, const ModelParams& p);

/// True when the closed forms are defined and the block should use them.
bool closed_form_applicable(BlockIndex index, const ModelParams& p, LiouvillianMode mode);

/// Dispatches to the closed forms when applicable, otherwise to the numerical
/// eigensolver. Left eigenmatrices are rescaled so Tr{ρ̌_j ρ̂_j} = 1.
SpectralDecomposition spectral_decomposition(BlockIndex index, const ModelParams& p,
                                             LiouvillianMode mode);

/// Always uses the numerical eigensolver.
SpectralDecomposition numerical_decomposition(const LiouvillianBlock& block);

/// Closed-form decomposition, bypassing dispatch. Throws like eigenvectors_closed.
SpectralDecomposition closed_form_decomposition(BlockIndex index, const ModelParams& p);

/// Σ_j c_j e^{λ_j t} ρ̂_j with c_j = Tr{ρ̌_j block0}. Throws DegenerateBlock for
/// degenerate decompositions and DimensionMismatch on a shape mismatch.
DensityBlock propagate_block(const SpectralDecomposition& dec, const DensityBlock& block0, double t);

/// For each reference eigenvalue the index of its partner in `other`,
/// assigned greedily by smallest distance.
std::vector<std::size_t> match_eigenvalues(const CVec& reference, const CVec& other);

}  // namespace exciton
