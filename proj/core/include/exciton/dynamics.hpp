#pragma once

// Initial states, time evolution of blocked density matrices and the
// reduced atomic observables.

#include <span>
#include <utility>
#include <vector>

#include "exciton/density.hpp"
#include "exciton/liouville.hpp"
#include "exciton/model.hpp"
#include "exciton/oracle.hpp"

namespace exciton {

/// |φ_n^+><φ_n^+| at zero detuning: block (n, n) = ½[[1,1],[1,1]].
BlockedDensity initial_dressed(int n);

/// |Ψ0> = cos α |n,0> + sin α |n,1>, spread over the blocks (n,n), (n+1,n+1),
/// (n+1,n) and (n,n+1).
BlockedDensity initial_superposition(int n, double alpha);

/// Fock state |photons, atom>.
BlockedDensity initial_fock(int photons, int atom);

enum class EvolutionMethod { Spectral, Expm, Ode };

struct EvolveOptions {
  EvolutionMethod method = EvolutionMethod::Spectral;
  LiouvillianMode mode = LiouvillianMode::Canonical;
  /// Photon truncation used by the ode method.
  int n_max = kDefaultTruncation;
  /// RK4 step for the ode method; <= 0 picks the default bound.
  double ode_dt = 0.0;
  /// Worker threads for per-block evolution; 0 uses the hardware count.
  unsigned threads = 1;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<BlockedDensity> states;
  /// Blocks whose spectral propagation was replaced by expm.
  std::vector<BlockIndex> expm_fallbacks;
  double ode_dt = 0.0;
  double ode_halving_error = -1.0;
};

/// Evolves every block independently. The spectral method switches degenerate
/// blocks to expm; the ode method runs the full-space oracle and is canonical
/// only. Throws MethodUnavailable for ode in printed mode or when the state
/// does not fit the truncation, InvalidArgument for a bad time grid.
Trajectory evolve(const BlockedDensity& rho0, const ModelParams& p, std::span<const double> times,
                  const EvolveOptions& options = {});

/// Reduced atomic density matrix; index 1 is the excited state.
struct AtomState {
  Complex rho11 = 0.0;
  Complex rho10 = 0.0;
  Complex rho01 = 0.0;
  Complex rho00 = 0.0;

  Complex trace() const { return rho11 + rho00; }
};

/// ϱ11 = Σ ρ_{n,n}^{1,1}, ϱ00 = Σ ρ_{n,n}^{0,0}, ϱ10 = Σ ρ_{n+1,n}^{1,0},
/// ϱ01 = Σ ρ_{n,n+1}^{0,1}.
AtomState reduce_atom(const BlockedDensity& rho);

/// W = ϱ11 - ϱ00.
double population_inversion(const AtomState& a);
/// P = Tr ϱ².
double purity(const AtomState& a);

struct TimeSample {
  double t = 0.0;
  double w = 0.0;
  double p = 0.0;
  double trace_re = 0.0;
  double trace_im = 0.0;
  double rho11 = 0.0;
  double rho00 = 0.0;
  double re_rho01 = 0.0;
  double im_rho01 = 0.0;
};

std::vector<TimeSample> time_series(const Trajectory& trajectory);

/// 0, dt, 2dt, ... up to t_max (inclusive, to rounding).
std::vector<double> uniform_grid(double t_max, double dt);

/// Closed-form (ρ_{n,n}^{1,1}(t), ρ_{n,n}^{1,0}(t)) for the dressed initial
/// state at δ = 0, g = 1, printed mode. Throws FallbackRequired when a
/// denominator vanishes.
std::pair<Complex, Complex> closed_form_dressed(int n, const ModelParams& p, double t);

/// Closed-form (ϱ11(t), ϱ01(t)) for the superposition initial state at
/// δ = 0, g = 1, printed mode. Throws FallbackRequired when a denominator
/// vanishes.
std::pair<Complex, Complex> closed_form_superposition(int n, double alpha, const ModelParams& p,
                                                      double t);

}  // namespace exciton
