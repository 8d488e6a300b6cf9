#pragma once

// Dense complex linear algebra for the Liouvillian blocks (dimension <= 4),
// plus an arbitrary-dimension path used only by the full-space oracle.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace exciton {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

inline constexpr Complex kI{0.0, 1.0};

/// Row-major dense complex matrix. Entries supplied by callers must be finite.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols);
  CMat(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  CMat(std::initializer_list<std::initializer_list<Complex>> rows);

  static CMat identity(std::size_t n);
  static CMat diagonal(std::span<const Complex> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  CMat adjoint() const;
  CMat transpose() const;
  Complex trace() const;
  /// Frobenius norm.
  double norm() const;
  /// Maximum absolute column sum.
  double norm1() const;
  /// Maximum absolute row sum.
  double norm_inf() const;
  bool all_finite() const;

  CMat& operator+=(const CMat& other);
  CMat& operator-=(const CMat& other);
  CMat& operator*=(Complex s);

  friend CMat operator+(CMat a, const CMat& b) { return a += b; }
  friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
  friend CMat operator*(CMat a, Complex s) { return a *= s; }
  friend CMat operator*(Complex s, CMat a) { return a *= s; }
  friend CMat operator*(const CMat& a, const CMat& b);
  friend CVec operator*(const CMat& a, std::span<const Complex> x);
  friend bool operator==(const CMat&, const CMat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Row vector times matrix, l·M.
CVec row_times(std::span<const Complex> row, const CMat& m);
/// Unconjugated bilinear product Σ a_i b_i.
Complex dot(std::span<const Complex> a, std::span<const Complex> b);
double norm2(std::span<const Complex> v);
double max_abs_diff(const CMat& a, const CMat& b);
double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b);
/// Matrix with the given vectors as columns.
CMat from_columns(const std::vector<CVec>& columns);

/// Eigenvalue ordering: descending real part, then ascending imaginary part.
/// Real parts closer than ~1e-10 compare as equal.
bool eigenvalue_order(Complex a, Complex b);

/// Relative eigenvalue separation below which a pair counts as coalesced.
inline constexpr double kDegeneracyTolerance = 1e-8;
/// Eigenvalue condition number above which a system is treated as non-diagonalizable.
inline constexpr double kConditionLimit = 1e6;

struct EigSystem {
  CVec values;
  std::vector<CVec> right;  // column vectors
  std::vector<CVec> left;   // row vectors, left[i]·right[j] = δ_ij when diagonalizable
  bool degenerate = false;
  /// Largest eigenvalue condition number ‖l‖‖r‖/|l·r|.
  double condition = 1.0;
};

/// Eigendecomposition of a square matrix of dimension 1..4.
///
/// Roots of the characteristic polynomial are found by simultaneous
/// (Aberth) iteration, then polished with two-sided Rayleigh quotients on
/// the matrix itself. Right and left eigenvectors come from null spaces of
/// M - λI and its transpose. Eigenvalues are returned in eigenvalue_order.
/// `degenerate` is set when two eigenvalues are closer than
/// kDegeneracyTolerance·(1+‖M‖) or an eigenvalue condition number exceeds
/// kConditionLimit; eigenvectors are still returned, biorthonormalized
/// within each coalesced cluster where the null space allows it.
EigSystem eig_general(const CMat& m);

/// Monic characteristic polynomial det(λI - M), coefficients from λ^0 upward.
CVec characteristic_polynomial(const CMat& m);

/// All roots of a polynomial given by coefficients from λ^0 upward.
CVec polynomial_roots(std::span<const Complex> coeffs);

/// Upper bound on ‖M·t‖₁ accepted by expm.
inline constexpr double kExpmNormBound = 1e6;

/// exp(M·t) by scaling and squaring with a Taylor core. Throws Overflow when
/// ‖M·t‖₁ exceeds kExpmNormBound.
CMat expm(const CMat& m, double t);

/// Solves M·x = b with partial pivoting. Throws SingularMatrix when a pivot
/// falls below 1e-12·‖M‖.
CVec solve(const CMat& m, std::span<const Complex> b);

CMat inverse(const CMat& m);

// Arbitrary-dimension dense path (oracle only).

/// Eigenvalues of a Hermitian matrix, ascending.
std::vector<double> hermitian_eigenvalues(const CMat& m);
/// Eigenvalues of a general square matrix of any dimension.
CVec dense_eigenvalues(const CMat& m);

}  // namespace exciton
