#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "exciton/density.hpp"
#include "exciton/error.hpp"
#include "exciton/model.hpp"
#include "exciton/smallmat.hpp"

namespace exciton::testing {

inline std::mt19937& rng() {
  static std::mt19937 gen(12345);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

/// Code of the exciton::Error thrown by fn; records a failure if none is thrown.
template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exciton::Error";
  return ErrorCode::InvalidArgument;
}

inline Complex random_complex() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

inline CMat random_matrix(std::size_t rows, std::size_t cols) {
  CMat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = random_complex();
  return m;
}

inline ModelParams random_rates(double delta = 0.0) { return {delta, 1.0, uniform(0.0, 2.0), uniform(0.0, 2.0)}; }

inline Eigen::MatrixXcd to_eigen(const CMat& m) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  return out;
}

inline CMat from_eigen(const Eigen::MatrixXcd& m) {
  CMat out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = m(r, c);
  return out;
}

/// Eigenvalues by Eigen's QR-based solver, an oracle independent of eig_general.
inline CVec reference_eigenvalues(const CMat& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(to_eigen(m), false);
  const auto& v = solver.eigenvalues();
  return CVec(v.data(), v.data() + v.size());
}

/// Largest distance between two eigenvalue multisets under greedy matching.
inline double multiset_distance(CVec a, CVec b) {
  double worst = 0.0;
  for (Complex x : a) {
    auto best = b.begin();
    for (auto it = b.begin(); it != b.end(); ++it)
      if (std::abs(*it - x) < std::abs(*best - x)) best = it;
    worst = std::max(worst, std::abs(*best - x));
    b.erase(best);
  }
  return worst;
}

/// Random Hermitian, positive, unit-trace state spread over sectors 0..max_n.
inline BlockedDensity random_state(int max_n) {
  // ρ = A A† / Tr(A A†) on the union of sectors, then cut into blocks.
  std::vector<std::pair<int, int>> labels;  // (n, j)
  for (int n = 0; n <= max_n; ++n) {
    labels.emplace_back(n, 0);
    if (n >= 1) labels.emplace_back(n, 1);
  }
  const CMat a = random_matrix(labels.size(), labels.size());
  CMat rho = a * a.adjoint();
  rho *= 1.0 / rho.trace().real();
  BlockedDensity out;
  for (int n = 0; n <= max_n; ++n)
    for (int m = 0; m <= max_n; ++m) {
      DensityBlock b = DensityBlock::zero({n, m});
      for (std::size_t r = 0; r < labels.size(); ++r)
        for (std::size_t c = 0; c < labels.size(); ++c)
          if (labels[r].first == n && labels[c].first == m) b.element(labels[r].second, labels[c].second) = rho(r, c);
      out.set(std::move(b));
    }
  return out;
}

}  // namespace exciton::testing
