#include "exciton/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "exciton/error.hpp"
#include "exciton/spectral.hpp"

namespace exciton {

namespace {

constexpr double kDenominatorFloor = 1e-8;

Complex checked(Complex d) {
  if (std::abs(d) < kDenominatorFloor) {
    throw Error(ErrorCode::FallbackRequired, "closed-form denominator vanishes");
  }
  return d;
}

void require_closed_domain(int n, const ModelParams& p) {
  p.validate();
  if (n < 1) throw Error(ErrorCode::InvalidExcitation, "excitation number must be >= 1");
  if (p.delta != 0.0 || p.g != 1.0) {
    throw Error(ErrorCode::PreconditionViolated, "closed forms need delta = 0, g = 1");
  }
}

void validate_times(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0 || (i > 0 && times[i] <= times[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "times must be finite, non-negative and increasing");
    }
  }
}

struct BlockRun {
  std::vector<DensityBlock> samples;
  bool fell_back = false;
};

BlockRun evolve_block(const DensityBlock& block0, const ModelParams& p, std::span<const double> times,
                      const EvolveOptions& options) {
  BlockRun run;
  run.samples.reserve(times.size());
  const BlockIndex idx = block0.index;

  bool use_expm = options.method == EvolutionMethod::Expm;
  SpectralDecomposition dec;
  if (!use_expm) {
    dec = spectral_decomposition(idx, p, options.mode);
    if (dec.degenerate) {
      use_expm = true;
      run.fell_back = true;
    }
  }
  const LiouvillianBlock gen = use_expm ? liouvillian_block(idx, p, options.mode) : LiouvillianBlock{};
  const CVec v0 = vectorize(block0);
  for (double t : times) {
    if (t == 0.0) {
      run.samples.push_back(block0);
    } else if (use_expm) {
      run.samples.push_back(devectorize(expm(gen.matrix, t) * std::span<const Complex>(v0), idx));
    } else {
      run.samples.push_back(propagate_block(dec, block0, t));
    }
  }
  return run;
}

Trajectory evolve_blocks(const BlockedDensity& rho0, const ModelParams& p, std::span<const double> times,
                         const EvolveOptions& options) {
  std::vector<const DensityBlock*> blocks;
  for (const auto& [idx, block] : rho0.blocks()) blocks.push_back(&block);
  std::vector<BlockRun> runs(blocks.size());

  unsigned workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, blocks.size())));

  if (workers <= 1) {
    for (std::size_t i = 0; i < blocks.size(); ++i) runs[i] = evolve_block(*blocks[i], p, times, options);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < blocks.size(); i = next++) {
            runs[i] = evolve_block(*blocks[i], p, times, options);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  Trajectory out;
  out.times.assign(times.begin(), times.end());
  out.states.resize(times.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (runs[i].fell_back) out.expm_fallbacks.push_back(blocks[i]->index);
    for (std::size_t s = 0; s < times.size(); ++s) out.states[s].set(std::move(runs[i].samples[s]));
  }
  return out;
}

Trajectory evolve_ode(const BlockedDensity& rho0, const ModelParams& p, std::span<const double> times,
                      const EvolveOptions& options) {
  if (options.mode != LiouvillianMode::Canonical) {
    throw Error(ErrorCode::MethodUnavailable, "the ode method integrates the canonical generator only");
  }
  if (options.n_max < 1 || options.n_max > kMaxTruncation || rho0.max_excitation() > options.n_max) {
    throw Error(ErrorCode::MethodUnavailable, "state does not fit the ode truncation");
  }
  const FullSuperoperator sup = build_full_superoperator(p, options.n_max);
  const Rk4Trajectory rk = rk4_evolve(assemble(rho0, options.n_max), sup, times, options.ode_dt);
  Trajectory out;
  out.times.assign(times.begin(), times.end());
  out.ode_dt = rk.dt;
  out.ode_halving_error = rk.halving_error;
  out.states.reserve(rk.states.size());
  for (const FullState& s : rk.states) out.states.push_back(disassemble(s));
  return out;
}

}  // namespace

BlockedDensity initial_dressed(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidExcitation, "dressed state needs n >= 1");
  BlockedDensity rho;
  rho.set({{n, n}, CMat{{0.5, 0.5}, {0.5, 0.5}}});
  return rho;
}

BlockedDensity initial_superposition(int n, double alpha) {
  if (n < 1) throw Error(ErrorCode::InvalidExcitation, "superposition needs n >= 1");
  if (!std::isfinite(alpha)) throw Error(ErrorCode::NonFinite, "alpha is not finite");
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  BlockedDensity rho;
  DensityBlock low = DensityBlock::zero({n, n});
  low.element(0, 0) = c * c;
  DensityBlock high = DensityBlock::zero({n + 1, n + 1});
  high.element(1, 1) = s * s;
  DensityBlock upper = DensityBlock::zero({n + 1, n});
  upper.element(1, 0) = c * s;
  DensityBlock lower = DensityBlock::zero({n, n + 1});
  lower.element(0, 1) = c * s;
  for (DensityBlock* b : {&low, &high, &upper, &lower}) rho.set(std::move(*b));
  return rho;
}

BlockedDensity initial_fock(int photons, int atom) {
  const int n = excitation_of({photons, atom});
  DensityBlock block = DensityBlock::zero({n, n});
  block.element(atom, atom) = 1.0;
  BlockedDensity rho;
  rho.set(std::move(block));
  return rho;
}

Trajectory evolve(const BlockedDensity& rho0, const ModelParams& p, std::span<const double> times,
                  const EvolveOptions& options) {
  p.validate();
  validate_times(times);
  if (options.method == EvolutionMethod::Ode) return evolve_ode(rho0, p, times, options);
  return evolve_blocks(rho0, p, times, options);
}

AtomState reduce_atom(const BlockedDensity& rho) {
  AtomState a;
  for (const auto& [idx, block] : rho.blocks()) {
    if (idx.n == idx.m) {
      if (idx.n >= 1) a.rho11 += block.element(1, 1);
      a.rho00 += block.element(0, 0);
    } else if (idx.n == idx.m + 1) {
      a.rho10 += block.element(1, 0);
    } else if (idx.m == idx.n + 1) {
      a.rho01 += block.element(0, 1);
    }
  }
  return a;
}

double population_inversion(const AtomState& a) { return (a.rho11 - a.rho00).real(); }

double purity(const AtomState& a) {
  return std::norm(a.rho11) + std::norm(a.rho00) + std::norm(a.rho01) + std::norm(a.rho10);
}

std::vector<TimeSample> time_series(const Trajectory& trajectory) {
  std::vector<TimeSample> out;
  out.reserve(trajectory.states.size());
  for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
    const AtomState a = reduce_atom(trajectory.states[i]);
    const Complex tr = trajectory.states[i].trace();
    out.push_back({trajectory.times[i], population_inversion(a), purity(a), tr.real(), tr.imag(),
                   a.rho11.real(), a.rho00.real(), a.rho01.real(), a.rho01.imag()});
  }
  return out;
}

std::vector<double> uniform_grid(double t_max, double dt) {
  if (!std::isfinite(t_max) || !std::isfinite(dt) || t_max < 0.0 || dt <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "grid needs t_max >= 0 and dt > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = static_cast<double>(i) * dt;
  return grid;
}

std::pair<Complex, Complex> closed_form_dressed(int n, const ModelParams& p, double t) {
  require_closed_domain(n, p);
  const BlockIndex idx{n, n};
  const auto lam = eigenvalues_closed(idx, p);
  const auto l = l_values(idx, p);
  const double gt = gamma_tilde(p);
  const double dg = p.gamma0 - p.gamma1;
  const double sn = std::sqrt(static_cast<double>(n));
  const Complex d12 = checked(l[0] - l[1]);

  Complex r11 = (2.0 - p.gamma1 * lam[2]) / checked(4.0 - lam[2] * gt);
  Complex r10 = kI * sn * dg / checked(gt * lam[2] - 4.0) - gt * n * std::exp(lam[2] * t) / (4.0 * checked(lam[2]));
  for (int j = 0; j < 2; ++j) {
    const double sign = j == 0 ? 1.0 : -1.0;  // (-1)^{j+1} for j = 1, 2
    const Complex e = std::exp(lam[j] * t);
    r11 += dg / d12 * sign * l[j] * l[j] * e / checked(8.0 + 2.0 * l[j] * gt);
    r10 += kI * sn * dg / d12 * sign * l[j] * e / checked(4.0 + l[j] * gt);
  }
  return {r11, r10};
}

std::pair<Complex, Complex> closed_form_superposition(int n, double alpha, const ModelParams& p,
                                                      double t) {
  require_closed_domain(n, p);
  const double gt = gamma_tilde(p);
  const double g0 = p.gamma0;
  const double g1 = p.gamma1;
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);

  // Population of the lower and upper diagonal blocks.
  auto diagonal_part = [&](int k, double rate, double sign) {
    const auto lam = eigenvalues_closed({k, k}, p);
    const auto l = l_values({k, k}, p);
    const Complex d21 = checked(l[1] - l[0]);
    Complex v = (4.0 + k * gt * g1) / (8.0 + k * gt * gt);
    v += sign * l[0] * (2.0 + l[0] * rate) * std::exp(lam[0] * t) / (checked(4.0 + l[0] * gt) * d21);
    v -= sign * l[1] * (2.0 + l[1] * rate) * std::exp(lam[1] * t) / (checked(4.0 + l[1] * gt) * d21);
    return v;
  };
  const Complex r11 = c * c * diagonal_part(n, g1, 1.0) + s * s * diagonal_part(n + 1, g0, -1.0);

  const BlockIndex cross{n, n + 1};
  const auto lam = eigenvalues_closed(cross, p);
  const auto l = l_values(cross, p);
  const Complex d21 = checked(l[1] - l[0]);
  const Complex d43 = checked(lam[3] - lam[2]);
  Complex r01 = (n * gt + g1 - 2.0 * l[0]) * std::exp(lam[0] * t) / (checked(4.0 + l[0] * gt) * d21);
  r01 -= (n * gt + g1 - 2.0 * l[1]) * std::exp(lam[1] * t) / (checked(4.0 + l[1] * gt) * d21);
  r01 += (n * gt + g0 + 2.0 * lam[3]) * std::exp(lam[2] * t) / (checked(4.0 - lam[3] * gt) * d43);
  r01 -= (n * gt + g0 + 2.0 * lam[2]) * std::exp(lam[3] * t) / (checked(4.0 - lam[2] * gt) * d43);
  return {r11, c * s * r01};
}

}  // namespace exciton
