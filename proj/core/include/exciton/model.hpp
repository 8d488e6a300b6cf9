#pragma once

// Closed Jaynes-Cummings system in the excitation-number basis.
//
// Within excitation sector n >= 1 the basis order is (|n-1,1>, |n,0>):
// index 0 carries the excited atom, index 1 the ground-state atom. The
// vacuum sector n = 0 is one-dimensional, spanned by |0,0>. Energies and
// rates are in units of the coupling g, with hbar = 1.

#include <utility>

#include "exciton/smallmat.hpp"

namespace exciton {

struct ModelParams {
  double delta = 0.0;   // detuning
  double g = 1.0;       // atom-cavity coupling
  double gamma0 = 0.0;  // rate of the jump a† σ-
  double gamma1 = 0.0;  // rate of the jump a σ+

  /// Throws InvalidArgument unless g > 0, rates >= 0 and everything finite.
  void validate() const;
};

struct BasisLabel {
  int photons = 0;
  int atom = 0;  // 0 ground, 1 excited
};

/// Number of excitations photons + atom. Throws InvalidArgument for a label
/// with negative photons or an atom index outside {0, 1}.
int excitation_of(BasisLabel label);

/// 2x2 Hamiltonian block [[δ, g√n], [g√n, -δ]]; n must be >= 1.
CMat hamiltonian_block(int n, const ModelParams& p);

/// Hamiltonian restricted to sector n >= 0. The vacuum sector gives the 1x1
/// block [-δ] (δσ_z acting on |0,0>).
CMat sector_hamiltonian(int n, const ModelParams& p);

/// (+E_n, -E_n) with E_n = sqrt(δ² + g² n).
std::pair<double, double> eigenenergies(int n, const ModelParams& p);

/// θ_n = arctan(sqrt((E_n - δ)/(E_n + δ))), in [0, π/2).
double mixing_angle(int n, const ModelParams& p);

enum class DressedBranch { Plus, Minus };

/// |φ_n^+> = (cos θ_n, sin θ_n), |φ_n^-> = (-sin θ_n, cos θ_n).
CVec dressed_state(int n, DressedBranch branch, const ModelParams& p);

}  // namespace exciton
