#pragma once

// Brute-force reference: the Lindblad generator on the truncated space
// Fock(0..N_max) ⊗ atom, built from explicit ladder operators, and a
// fixed-step RK4 integrator. Shares no code with the block construction.
//
// Basis order is (photons, atom) lexicographic with the atom fastest:
// |k, j> sits at index 2k + j. Density matrices are vectorized row-major,
// vec(ρ)[a·D + b] = ρ(a, b).

#include <span>
#include <vector>

#include "exciton/density.hpp"
#include "exciton/model.hpp"
#include "exciton/smallmat.hpp"

namespace exciton {

inline constexpr int kDefaultTruncation = 8;
inline constexpr int kMaxTruncation = 12;

std::size_t full_dimension(int n_max);
std::size_t full_index(int photons, int atom);

struct FullState {
  int n_max = kDefaultTruncation;
  CMat rho;
};

class FullSuperoperator {
 public:
  FullSuperoperator(const ModelParams& params, int n_max, CMat matrix);

  int n_max() const noexcept { return n_max_; }
  const ModelParams& params() const noexcept { return params_; }
  const CMat& matrix() const noexcept { return matrix_; }

  /// L·v using the nonzero pattern of the matrix.
  CVec apply(std::span<const Complex> v) const;
  void apply(std::span<const Complex> v, std::span<Complex> out) const;
  std::size_t nonzeros() const noexcept { return values_.size(); }

 private:
  int n_max_;
  ModelParams params_;
  CMat matrix_;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> col_;
  std::vector<Complex> values_;
};

/// Matrix of ρ ↦ -i[H,ρ] + Σ_k γ_k (J_k ρ J_k† - ½{J_k†J_k, ρ}) with
/// J_0 = a†σ-, J_1 = aσ+. Throws TruncationTooLarge outside 1..kMaxTruncation.
FullSuperoperator build_full_superoperator(const ModelParams& p, int n_max = kDefaultTruncation);

/// Restriction of the full generator to sector (n, m), in block component order.
/// Requires n, m <= n_max.
CMat extract_sector(const FullSuperoperator& sup, BlockIndex index);

/// Largest absolute matrix element connecting two different (n, m) sectors.
double cross_sector_leakage(const FullSuperoperator& sup);

/// Throws TruncationTooSmall when the state reaches beyond n_max.
FullState assemble(const BlockedDensity& blocked, int n_max = kDefaultTruncation);
/// Inverse of assemble; blocks that are exactly zero are omitted. Throws
/// TruncationTooSmall when the partial sector n_max+1 carries weight.
BlockedDensity disassemble(const FullState& full);

/// 0.01 / (g + γ0 + γ1 + |δ| + ‖L‖_∞).
double max_stable_step(const FullSuperoperator& sup);

struct Rk4Trajectory {
  std::vector<FullState> states;
  double dt = 0.0;
  /// Max deviation between the dt and dt/2 runs over all samples; negative
  /// when the estimate was not requested.
  double halving_error = -1.0;
};

/// Classical fixed-step RK4 from t = 0. Sample times must be strictly
/// increasing and multiples of dt. dt <= 0 selects the largest step not above
/// max_stable_step that divides the grid. An explicit dt may exceed that
/// bound; the step-halving estimate is the guard and throws StepTooLarge
/// above 1e-6.
Rk4Trajectory rk4_evolve(const FullState& rho0, const FullSuperoperator& sup,
                         std::span<const double> times, double dt = 0.0,
                         bool estimate_error = true);

double min_eigenvalue(const FullState& state);

}  // namespace exciton
