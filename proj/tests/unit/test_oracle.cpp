#include <cmath>
#include <numbers>

#include "exciton/dynamics.hpp"
#include "exciton/oracle.hpp"
#include "test_support.hpp"

namespace exciton {
namespace {

using testing::code_of;
using testing::random_rates;

// Exact sector propagator from the dressed basis: Σ_± e^{-iE± t}|φ±><φ±|.
CMat dressed_propagator(int n, const ModelParams& p, double t) {
  if (n == 0) return CMat{{std::exp(kI * p.delta * t)}};
  const auto [ep, em] = eigenenergies(n, p);
  const CVec plus = dressed_state(n, DressedBranch::Plus, p);
  const CVec minus = dressed_state(n, DressedBranch::Minus, p);
  CMat u(2, 2);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      u(r, c) = std::exp(-kI * ep * t) * plus[r] * std::conj(plus[c]) +
                std::exp(-kI * em * t) * minus[r] * std::conj(minus[c]);
  return u;
}

TEST(FullSuperoperator, Dimensions) {
  EXPECT_EQ(full_dimension(1), 4u);
  EXPECT_EQ(full_dimension(8), 18u);
  EXPECT_EQ(full_index(0, 0), 0u);
  EXPECT_EQ(full_index(3, 1), 7u);
  const FullSuperoperator sup = build_full_superoperator({}, 3);
  EXPECT_EQ(sup.matrix().rows(), 64u);
  EXPECT_EQ(sup.n_max(), 3);
  EXPECT_LT(sup.nonzeros(), 64u * 64u / 4u);
}

TEST(FullSuperoperator, TruncationLimits) {
  EXPECT_EQ(code_of([] { (void)build_full_superoperator({}, 13); }), ErrorCode::TruncationTooLarge);
  EXPECT_EQ(code_of([] { (void)build_full_superoperator({}, 0); }), ErrorCode::InvalidArgument);
  EXPECT_NO_THROW((void)build_full_superoperator({}, kMaxTruncation));
}

TEST(FullSuperoperator, UnitaryCaseIsAntiHermitian) {
  const CMat& l = build_full_superoperator({0.3, 1.2, 0.0, 0.0}, 3).matrix();
  EXPECT_LE(max_abs_diff(l + l.adjoint(), CMat(l.rows(), l.cols())), 1e-14);
  for (Complex v : testing::reference_eigenvalues(l)) EXPECT_NEAR(v.real(), 0.0, 1e-10);
}

TEST(FullSuperoperator, SectorMatchesCanonicalBlock) {
  const ModelParams p{0.0, 1.0, 0.3, 0.7};
  const FullSuperoperator sup = build_full_superoperator(p, 4);
  EXPECT_EQ(extract_sector(sup, {2, 2}), liouvillian_block({2, 2}, p, LiouvillianMode::Canonical).matrix);
  EXPECT_EQ(code_of([&] { (void)extract_sector(sup, {5, 1}); }), ErrorCode::TruncationTooSmall);
}

TEST(FullSuperoperator, SectorRestrictionSweep) {
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams p = random_rates(testing::uniform(-1.0, 1.0));
    const int n_max = 5;
    const FullSuperoperator sup = build_full_superoperator(p, n_max);
    for (int n = 0; n <= n_max - 1; ++n)
      for (int m = 0; m <= n_max - 1; ++m)
        EXPECT_LE(max_abs_diff(extract_sector(sup, {n, m}),
                               liouvillian_block({n, m}, p, LiouvillianMode::Canonical).matrix),
                  1e-13)
            << n << "," << m;
  }
}

TEST(FullSuperoperator, NoCrossSectorCoupling) {
  for (int trial = 0; trial < 10; ++trial)
    EXPECT_LE(cross_sector_leakage(build_full_superoperator(random_rates(testing::uniform(-1.0, 1.0)), 6)), 1e-14);
}

TEST(FullSuperoperator, TraceIsLeftNullVector) {
  const int n_max = 4;
  const std::size_t d = full_dimension(n_max);
  CVec tr(d * d);
  for (std::size_t a = 0; a < d; ++a) tr[a * d + a] = 1.0;
  for (int trial = 0; trial < 10; ++trial) {
    const FullSuperoperator sup = build_full_superoperator(random_rates(0.4), n_max);
    EXPECT_LE(norm2(row_times(tr, sup.matrix())), 1e-12);
  }
}

TEST(FullSuperoperator, SpectrumIsStable) {
  for (int trial = 0; trial < 5; ++trial) {
    const FullSuperoperator sup = build_full_superoperator(random_rates(testing::uniform(-1.0, 1.0)), 2);
    for (Complex v : testing::reference_eigenvalues(sup.matrix())) EXPECT_LE(v.real(), 1e-10);
  }
}

TEST(FullSuperoperator, SparseApplyMatchesDense) {
  const FullSuperoperator sup = build_full_superoperator({0.2, 1.0, 0.5, 0.1}, 3);
  CVec v(sup.matrix().cols());
  for (Complex& x : v) x = testing::random_complex();
  EXPECT_LE(max_abs_diff(sup.apply(v), sup.matrix() * std::span<const Complex>(v)), 1e-14);
  EXPECT_EQ(code_of([&] { (void)sup.apply(CVec(3)); }), ErrorCode::DimensionMismatch);
}

TEST(AssembleDisassemble, RoundTrip) {
  for (int trial = 0; trial < 20; ++trial) {
    const BlockedDensity rho = testing::random_state(3);
    const FullState full = assemble(rho, 5);
    EXPECT_NEAR(std::abs(full.rho.trace() - 1.0), 0.0, 1e-13);
    EXPECT_EQ(disassemble(full).max_abs_diff(rho), 0.0);
  }
}

TEST(AssembleDisassemble, DressedStateOccupiesOneSector) {
  const FullState full = assemble(initial_dressed(2), 4);
  const std::size_t lo = full_index(1, 1), hi = full_index(2, 0);
  for (std::size_t r = 0; r < full.rho.rows(); ++r)
    for (std::size_t c = 0; c < full.rho.cols(); ++c) {
      const bool inside = (r == lo || r == hi) && (c == lo || c == hi);
      EXPECT_EQ(full.rho(r, c), inside ? Complex(0.5) : Complex{});
    }
  const BlockedDensity back = disassemble(full);
  ASSERT_EQ(back.blocks().size(), 1u);
  EXPECT_EQ(back.blocks().begin()->first, (BlockIndex{2, 2}));
}

TEST(AssembleDisassemble, Errors) {
  EXPECT_EQ(code_of([] { (void)assemble(initial_dressed(5), 4); }), ErrorCode::TruncationTooSmall);
  FullState full = assemble(initial_fock(0, 0), 2);
  full.rho(full_index(2, 1), full_index(2, 1)) = 0.1;  // |N, 1> belongs to the partial sector N + 1
  EXPECT_EQ(code_of([&] { (void)disassemble(full); }), ErrorCode::TruncationTooSmall);
}

TEST(Rk4, ZeroGeneratorKeepsStateConstant) {
  const int n_max = 2;
  const std::size_t dim = full_dimension(n_max) * full_dimension(n_max);
  const FullSuperoperator zero({}, n_max, CMat(dim, dim));
  const FullState rho0 = assemble(testing::random_state(2), n_max);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const Rk4Trajectory tr = rk4_evolve(rho0, zero, grid, 0.1);
  for (const FullState& s : tr.states) EXPECT_EQ(s.rho, rho0.rho);
}

TEST(Rk4, UnitaryMatchesExactDressedEvolution) {
  const ModelParams p{0.3, 1.0, 0.0, 0.0};
  const int n_max = 4;
  const BlockedDensity rho0 = initial_superposition(2, 0.6);
  const std::vector<double> grid{0.0, 2.5, 10.0};
  const Rk4Trajectory tr = rk4_evolve(assemble(rho0, n_max), build_full_superoperator(p, n_max), grid, 0.005);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const BlockedDensity got = disassemble(tr.states[i]);
    for (const auto& [idx, block] : rho0.blocks()) {
      const CMat expected = dressed_propagator(idx.n, p, grid[i]) * block.matrix *
                            dressed_propagator(idx.m, p, grid[i]).adjoint();
      const DensityBlock* b = got.find(idx);
      ASSERT_NE(b, nullptr);
      EXPECT_LE(max_abs_diff(b->matrix, expected), 1e-7) << idx.n << "," << idx.m << " t=" << grid[i];
    }
  }
}

TEST(Rk4, DressedTrajectoryMatchesSpectral) {
  const ModelParams p{0.0, 1.0, 0.08, 0.0};
  const std::vector<double> grid = uniform_grid(20.0, 0.5);
  EvolveOptions spectral;
  spectral.mode = LiouvillianMode::Printed;
  const Trajectory ref = evolve(initial_dressed(2), p, grid, spectral);
  const int n_max = 4;
  const Rk4Trajectory tr = rk4_evolve(assemble(initial_dressed(2), n_max), build_full_superoperator(p, n_max), grid);
  EXPECT_LE(tr.dt, max_stable_step(build_full_superoperator(p, n_max)) * (1.0 + 1e-12));
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LE(disassemble(tr.states[i]).max_abs_diff(ref.states[i]), 1e-6);
}

TEST(Rk4, TraceHermiticityPositivity) {
  const int n_max = 4;
  for (int trial = 0; trial < 3; ++trial) {
    const FullSuperoperator sup = build_full_superoperator(random_rates(testing::uniform(-1.0, 1.0)), n_max);
    const std::vector<double> grid = uniform_grid(20.0, 1.0);
    const Rk4Trajectory tr = rk4_evolve(assemble(testing::random_state(3), n_max), sup, grid);
    EXPECT_GE(tr.halving_error, 0.0);
    EXPECT_LE(tr.halving_error, 1e-6);
    for (const FullState& s : tr.states) {
      EXPECT_LE(std::abs(s.rho.trace() - 1.0), 1e-8);
      EXPECT_LE(max_abs_diff(s.rho, s.rho.adjoint()), 1e-9);
      EXPECT_GE(min_eigenvalue(s), -1e-8);
    }
  }
}

TEST(Rk4, TruncationIsExactBelowTheCutoff) {
  const ModelParams p{0.2, 1.0, 0.4, 0.6};
  const BlockedDensity rho0 = testing::random_state(2);
  const std::vector<double> grid{0.0, 1.0, 2.0};
  const double dt = 0.002;
  const Rk4Trajectory small = rk4_evolve(assemble(rho0, 3), build_full_superoperator(p, 3), grid, dt, false);
  const Rk4Trajectory large = rk4_evolve(assemble(rho0, 5), build_full_superoperator(p, 5), grid, dt, false);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_LT(disassemble(small.states[i]).max_abs_diff(disassemble(large.states[i])), 1e-12);
}

TEST(Rk4, Errors) {
  const FullSuperoperator sup = build_full_superoperator({0.0, 1.0, 0.5, 0.5}, 3);
  const FullState rho0 = assemble(initial_dressed(2), 3);
  const std::vector<double> grid{0.0, 5.0};
  EXPECT_EQ(code_of([&] { (void)rk4_evolve(rho0, sup, grid, 1.0); }), ErrorCode::StepTooLarge);
  const std::vector<double> off_grid{0.0, 0.015};
  EXPECT_EQ(code_of([&] { (void)rk4_evolve(rho0, sup, off_grid, 0.01); }), ErrorCode::InvalidArgument);
  const std::vector<double> decreasing{1.0, 0.5};
  EXPECT_EQ(code_of([&] { (void)rk4_evolve(rho0, sup, decreasing); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { (void)rk4_evolve(assemble(initial_dressed(2), 4), sup, grid); }),
            ErrorCode::DimensionMismatch);
}

TEST(MinEigenvalue, PureAndMixedStates) {
  EXPECT_NEAR(min_eigenvalue(assemble(initial_dressed(1), 1)), 0.0, 1e-15);
  FullState s = assemble(initial_fock(0, 0), 1);
  s.rho(1, 1) = -0.25;
  EXPECT_NEAR(min_eigenvalue(s), -0.25, 1e-15);
}

}  // namespace
}  // namespace exciton
