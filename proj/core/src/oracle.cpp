#include "exciton/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "exciton/error.hpp"

namespace exciton {

namespace {

constexpr double kHalvingLimit = 1e-6;

void check_truncation(int n_max) {
  if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "truncation must be at least 1");
  if (n_max > kMaxTruncation) {
    throw Error(ErrorCode::TruncationTooLarge, "truncation exceeds " + std::to_string(kMaxTruncation));
  }
}

// Excitation number of full basis index 2k + j.
int excitation_at(std::size_t index) { return static_cast<int>(index / 2 + index % 2); }

// acc += s · (A ⊗ B), row-major vectorization.
void add_kron(CMat& acc, const CMat& a, const CMat& b, Complex s) {
  const std::size_t d = a.rows();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t l = 0; l < d; ++l) {
          const Complex bjl = b(j, l);
          if (bjl == Complex{}) continue;
          acc(i * d + j, k * d + l) += s * aik * bjl;
        }
    }
}

CMat conjugate(const CMat& m) { return m.adjoint().transpose(); }

void axpy(std::span<Complex> out, std::span<const Complex> x, Complex s, std::span<const Complex> y) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + s * y[i];
}

CVec flatten(const CMat& m) { return CVec(m.data().begin(), m.data().end()); }

// Integrates to each sample with a fixed step, returning the vectorized states.
std::vector<CVec> integrate(const CVec& v0, const FullSuperoperator& sup,
                            const std::vector<long long>& steps, double dt) {
  const std::size_t n = v0.size();
  CVec v = v0, k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::vector<CVec> out;
  out.reserve(steps.size());
  long long done = 0;
  for (long long target : steps) {
    for (; done < target; ++done) {
      sup.apply(v, k1);
      axpy(tmp, v, 0.5 * dt, k1);
      sup.apply(tmp, k2);
      axpy(tmp, v, 0.5 * dt, k2);
      sup.apply(tmp, k3);
      axpy(tmp, v, dt, k3);
      sup.apply(tmp, k4);
      for (std::size_t i = 0; i < n; ++i) v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out.push_back(v);
  }
  return out;
}

std::vector<long long> step_counts(std::span<const double> times, double dt) {
  std::vector<long long> steps;
  steps.reserve(times.size());
  for (double t : times) {
    const long long k = std::llround(t / dt);
    if (std::abs(static_cast<double>(k) * dt - t) > 1e-9 * std::max(1.0, t)) {
      throw Error(ErrorCode::InvalidArgument, "sample time is not on the step grid");
    }
    steps.push_back(k);
  }
  return steps;
}

}  // namespace

std::size_t full_dimension(int n_max) { return 2 * static_cast<std::size_t>(n_max + 1); }

std::size_t full_index(int photons, int atom) {
  if (photons < 0 || (atom != 0 && atom != 1)) {
    throw Error(ErrorCode::InvalidArgument, "invalid basis label");
  }
  return 2 * static_cast<std::size_t>(photons) + static_cast<std::size_t>(atom);
}

FullSuperoperator::FullSuperoperator(const ModelParams& params, int n_max, CMat matrix)
    : n_max_(n_max), params_(params), matrix_(std::move(matrix)) {
  const std::size_t dim = full_dimension(n_max) * full_dimension(n_max);
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "superoperator does not match truncation");
  }
  row_start_.reserve(dim + 1);
  row_start_.push_back(0);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      if (matrix_(r, c) == Complex{}) continue;
      col_.push_back(c);
      values_.push_back(matrix_(r, c));
    }
    row_start_.push_back(values_.size());
  }
}

void FullSuperoperator::apply(std::span<const Complex> v, std::span<Complex> out) const {
  if (v.size() != matrix_.cols() || out.size() != matrix_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "vector does not match superoperator");
  }
  for (std::size_t r = 0; r + 1 < row_start_.size(); ++r) {
    Complex s = 0.0;
    for (std::size_t i = row_start_[r]; i < row_start_[r + 1]; ++i) s += values_[i] * v[col_[i]];
    out[r] = s;
  }
}

CVec FullSuperoperator::apply(std::span<const Complex> v) const {
  CVec out(matrix_.rows());
  apply(v, out);
  return out;
}

FullSuperoperator build_full_superoperator(const ModelParams& p, int n_max) {
  p.validate();
  check_truncation(n_max);
  const std::size_t d = full_dimension(n_max);

  CMat a(d, d), sigma_minus(d, d), sigma_z(d, d);
  for (int k = 0; k <= n_max; ++k) {
    for (int j = 0; j <= 1; ++j) {
      const std::size_t idx = full_index(k, j);
      sigma_z(idx, idx) = j == 1 ? 1.0 : -1.0;
      if (k >= 1) a(full_index(k - 1, j), idx) = std::sqrt(static_cast<double>(k));
    }
    sigma_minus(full_index(k, 0), full_index(k, 1)) = 1.0;
  }
  const CMat a_dag = a.adjoint();
  const CMat sigma_plus = sigma_minus.adjoint();
  const CMat jump0 = a_dag * sigma_minus;
  const CMat jump1 = a * sigma_plus;
  const CMat h = p.delta * sigma_z + p.g * (a * sigma_plus + a_dag * sigma_minus);

  const CMat id = CMat::identity(d);
  CMat l(d * d, d * d);
  add_kron(l, h, id, -kI);
  add_kron(l, id, h.transpose(), kI);
  const std::pair<const CMat*, double> jumps[] = {{&jump0, p.gamma0}, {&jump1, p.gamma1}};
  for (const auto& [jump, rate] : jumps) {
    if (rate == 0.0) continue;
    const CMat jj = jump->adjoint() * *jump;
    add_kron(l, *jump, conjugate(*jump), rate);
    add_kron(l, jj, id, -0.5 * rate);
    add_kron(l, id, jj.transpose(), -0.5 * rate);
  }
  return FullSuperoperator(p, n_max, std::move(l));
}

CMat extract_sector(const FullSuperoperator& sup, BlockIndex index) {
  index.validate();
  if (index.n > sup.n_max() || index.m > sup.n_max()) {
    throw Error(ErrorCode::TruncationTooSmall, "sector lies outside the truncation");
  }
  const std::size_t d = full_dimension(sup.n_max());
  const auto comps = block_components(index);
  std::vector<std::size_t> pos;
  for (const auto& [j, k] : comps) pos.push_back(full_index(index.n - j, j) * d + full_index(index.m - k, k));
  CMat out(pos.size(), pos.size());
  for (std::size_t r = 0; r < pos.size(); ++r)
    for (std::size_t c = 0; c < pos.size(); ++c) out(r, c) = sup.matrix()(pos[r], pos[c]);
  return out;
}

double cross_sector_leakage(const FullSuperoperator& sup) {
  const std::size_t d = full_dimension(sup.n_max());
  const CMat& m = sup.matrix();
  double worst = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (excitation_at(r / d) == excitation_at(c / d) && excitation_at(r % d) == excitation_at(c % d)) continue;
      worst = std::max(worst, std::abs(m(r, c)));
    }
  return worst;
}

FullState assemble(const BlockedDensity& blocked, int n_max) {
  check_truncation(n_max);
  if (blocked.max_excitation() > n_max) {
    throw Error(ErrorCode::TruncationTooSmall, "state exceeds the photon truncation");
  }
  const std::size_t d = full_dimension(n_max);
  FullState out{n_max, CMat(d, d)};
  for (const auto& [idx, block] : blocked.blocks())
    for (const auto& [j, k] : block_components(idx))
      out.rho(full_index(idx.n - j, j), full_index(idx.m - k, k)) = block.element(j, k);
  return out;
}

BlockedDensity disassemble(const FullState& full) {
  check_truncation(full.n_max);
  const std::size_t d = full_dimension(full.n_max);
  if (full.rho.rows() != d || full.rho.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "state does not match truncation");
  }
  const std::size_t partial = full_index(full.n_max, 1);
  for (std::size_t i = 0; i < d; ++i) {
    if (std::abs(full.rho(partial, i)) > 1e-12 || std::abs(full.rho(i, partial)) > 1e-12) {
      throw Error(ErrorCode::TruncationTooSmall, "state has weight in the truncated sector");
    }
  }
  BlockedDensity out;
  for (int n = 0; n <= full.n_max; ++n)
    for (int m = 0; m <= full.n_max; ++m) {
      DensityBlock block = DensityBlock::zero({n, m});
      bool any = false;
      for (const auto& [j, k] : block_components(block.index)) {
        const Complex v = full.rho(full_index(n - j, j), full_index(m - k, k));
        block.element(j, k) = v;
        any = any || v != Complex{};
      }
      if (any) out.set(std::move(block));
    }
  return out;
}

double max_stable_step(const FullSuperoperator& sup) {
  const ModelParams& p = sup.params();
  return 0.01 / (p.g + p.gamma0 + p.gamma1 + std::abs(p.delta) + sup.matrix().norm_inf());
}

Rk4Trajectory rk4_evolve(const FullState& rho0, const FullSuperoperator& sup,
                         std::span<const double> times, double dt, bool estimate_error) {
  if (rho0.n_max != sup.n_max()) {
    throw Error(ErrorCode::DimensionMismatch, "state and superoperator truncations differ");
  }
  const std::size_t d = full_dimension(sup.n_max());
  if (rho0.rho.rows() != d || rho0.rho.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "state does not match truncation");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0 || (i > 0 && times[i] <= times[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "sample times must be finite, non-negative and increasing");
    }
  }
  if (!std::isfinite(dt)) throw Error(ErrorCode::NonFinite, "step is not finite");

  if (dt <= 0.0) {
    const double bound = max_stable_step(sup);
    double spacing = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double gap = i == 0 ? times[0] : times[i] - times[i - 1];
      if (gap > 0.0 && (spacing == 0.0 || gap < spacing)) spacing = gap;
    }
    dt = spacing == 0.0 ? bound : spacing / std::ceil(spacing / bound * (1.0 - 1e-12));
  }

  const std::vector<long long> steps = step_counts(times, dt);
  const CVec v0 = flatten(rho0.rho);
  const std::vector<CVec> coarse = integrate(v0, sup, steps, dt);

  Rk4Trajectory out;
  out.dt = dt;
  if (estimate_error) {
    std::vector<long long> fine_steps(steps);
    for (auto& s : fine_steps) s *= 2;
    const std::vector<CVec> fine = integrate(v0, sup, fine_steps, 0.5 * dt);
    double err = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) err = std::max(err, max_abs_diff(coarse[i], fine[i]));
    out.halving_error = err;
    if (err > kHalvingLimit) {
      throw Error(ErrorCode::StepTooLarge, "step-halving estimate exceeds 1e-6");
    }
  }
  out.states.reserve(coarse.size());
  for (const CVec& v : coarse) out.states.push_back({sup.n_max(), CMat(d, d, v)});
  return out;
}

double min_eigenvalue(const FullState& state) {
  const CMat herm = 0.5 * (state.rho + state.rho.adjoint());
  const std::vector<double> ev = hermitian_eigenvalues(herm);
  return ev.empty() ? 0.0 : *std::min_element(ev.begin(), ev.end());
}

}  // namespace exciton
