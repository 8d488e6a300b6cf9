#include "exciton/smallmat.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "exciton/error.hpp"

namespace exciton {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::InvalidExcitation: return "InvalidExcitation";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::FallbackRequired: return "FallbackRequired";
    case ErrorCode::DegenerateBlock: return "DegenerateBlock";
    case ErrorCode::MethodUnavailable: return "MethodUnavailable";
    case ErrorCode::TruncationTooLarge: return "TruncationTooLarge";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
  }
  return "Unknown";
}

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_square(const CMat& m, const char* what) {
  if (!m.is_square()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " requires a square matrix");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// CMat

CMat::CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

CMat::CMat(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch, "entry count does not match rows*cols");
  }
  if (!all_finite()) throw Error(ErrorCode::NonFinite, "matrix entries must be finite");
}

CMat::CMat(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw Error(ErrorCode::NonFinite, "matrix entries must be finite");
}

CMat CMat::identity(std::size_t n) {
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMat CMat::diagonal(std::span<const Complex> values) {
  CMat m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

CMat CMat::adjoint() const {
  CMat r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

CMat CMat::transpose() const {
  CMat r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

Complex CMat::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double CMat::norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

double CMat::norm1() const {
  double best = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

double CMat::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

bool CMat::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), finite);
}

CMat& CMat::operator+=(const CMat& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw Error(ErrorCode::DimensionMismatch, "matrix sum shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CMat& CMat::operator-=(const CMat& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw Error(ErrorCode::DimensionMismatch, "matrix difference shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CMat& CMat::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

CMat operator*(const CMat& a, const CMat& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
  CMat r(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

CVec operator*(const CMat& a, std::span<const Complex> x) {
  if (a.cols_ != x.size()) throw Error(ErrorCode::DimensionMismatch, "matrix-vector shape mismatch");
  CVec y(a.rows_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

CVec row_times(std::span<const Complex> row, const CMat& m) {
  if (m.rows() != row.size()) throw Error(ErrorCode::DimensionMismatch, "row-matrix shape mismatch");
  CVec y(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] += row[i] * m(i, j);
  return y;
}

Complex dot(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "dot length mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

double max_abs_diff(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "comparison shape mismatch");
  }
  return max_abs_diff(a.data(), b.data());
}

double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "comparison length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

CMat from_columns(const std::vector<CVec>& columns) {
  if (columns.empty()) return {};
  CMat m(columns.front().size(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != m.rows()) throw Error(ErrorCode::DimensionMismatch, "ragged columns");
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = columns[j][i];
  }
  return m;
}

bool eigenvalue_order(Complex a, Complex b) {
  const double ra = std::round(a.real() * 1e10);
  const double rb = std::round(b.real() * 1e10);
  if (ra != rb) return ra > rb;
  return a.imag() < b.imag();
}

// ---------------------------------------------------------------------------
// Linear solves

namespace {

struct LuFactors {
  CMat lu;
  std::vector<std::size_t> perm;
};

LuFactors lu_factor(const CMat& m) {
  require_square(m, "LU factorization");
  const std::size_t n = m.rows();
  const double threshold = 1e-12 * m.norm();
  LuFactors f{m, std::vector<std::size_t>(n)};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  CMat& a = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (std::abs(a(p, k)) <= threshold || a(p, k) == Complex{}) {
      throw Error(ErrorCode::SingularMatrix, "pivot below 1e-12*|M|");
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(f.perm[k], f.perm[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex factor = a(i, k) / a(k, k);
      a(i, k) = factor;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= factor * a(k, j);
    }
  }
  return f;
}

CVec lu_solve(const LuFactors& f, std::span<const Complex> b) {
  const std::size_t n = f.lu.rows();
  CVec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
  return x;
}

}  // namespace

CVec solve(const CMat& m, std::span<const Complex> b) {
  if (b.size() != m.rows()) throw Error(ErrorCode::DimensionMismatch, "right-hand side length");
  return lu_solve(lu_factor(m), b);
}

CMat inverse(const CMat& m) {
  const auto f = lu_factor(m);
  const std::size_t n = m.rows();
  CMat inv(n, n);
  CVec e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), Complex{});
    e[j] = 1.0;
    const CVec col = lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Polynomials

CVec characteristic_polynomial(const CMat& m) {
  require_square(m, "characteristic polynomial");
  // Faddeev-LeVerrier: exact recurrence, adequate at dimension <= 4.
  const std::size_t n = m.rows();
  CVec c(n + 1);
  c[n] = 1.0;
  CMat mk(n, n);
  const CMat id = CMat::identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    mk = m * mk + c[n - k + 1] * id;
    c[n - k] = -(m * mk).trace() / static_cast<double>(k);
  }
  return c;
}

namespace {

// Value and derivative by Horner's rule.
std::pair<Complex, Complex> horner(std::span<const Complex> c, Complex z) {
  Complex p = c.back();
  Complex dp = 0.0;
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[i];
  }
  return {p, dp};
}

}  // namespace

CVec polynomial_roots(std::span<const Complex> coeffs) {
  std::size_t degree = coeffs.size();
  while (degree > 0 && coeffs[degree - 1] == Complex{}) --degree;
  if (degree <= 1) return {};
  --degree;
  CVec c(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(degree + 1));
  const Complex lead = c.back();
  for (auto& z : c) z /= lead;

  if (degree == 1) return {-c[0]};
  if (degree == 2) {
    const Complex b = c[1];
    const Complex disc = std::sqrt(b * b - 4.0 * c[0]);
    const Complex q = -0.5 * (std::abs(b + disc) >= std::abs(b - disc) ? b + disc : b - disc);
    if (q == Complex{}) return {0.0, 0.0};
    return {q, c[0] / q};
  }

  double radius = 0.0;
  for (std::size_t k = 1; k <= degree; ++k) {
    radius = std::max(radius, std::pow(std::abs(c[degree - k]), 1.0 / static_cast<double>(k)));
  }
  if (radius == 0.0) return CVec(degree, 0.0);

  CVec z(degree);
  for (std::size_t k = 0; k < degree; ++k) {
    const double angle = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(degree) + 0.4;
    z[k] = radius * std::polar(1.0, angle);
  }
  // Aberth-Ehrlich simultaneous iteration.
  for (int iter = 0; iter < 2000; ++iter) {
    double largest_step = 0.0;
    for (std::size_t k = 0; k < degree; ++k) {
      const auto [p, dp] = horner(c, z[k]);
      if (p == Complex{}) continue;
      Complex repulsion = 0.0;
      for (std::size_t j = 0; j < degree; ++j) {
        if (j != k && z[k] != z[j]) repulsion += 1.0 / (z[k] - z[j]);
      }
      const Complex ratio = p / dp;
      const Complex step = ratio / (1.0 - ratio * repulsion);
      if (!finite(step)) continue;
      z[k] -= step;
      largest_step = std::max(largest_step, std::abs(step) / (radius + std::abs(z[k])));
    }
    if (largest_step < 1e-17) break;
  }
  // Newton polish; keep a step only if it reduces |p|.
  for (auto& root : z) {
    for (int k = 0; k < 2; ++k) {
      const auto [p, dp] = horner(c, root);
      if (dp == Complex{}) break;
      const Complex candidate = root - p / dp;
      if (std::abs(horner(c, candidate).first) < std::abs(p)) root = candidate;
    }
  }
  return z;
}

// ---------------------------------------------------------------------------
// Eigensystems

namespace {

// Basis of the k-dimensional (numerical) null space of a, by Gaussian
// elimination with complete pivoting stopped after n-k pivots.
std::vector<CVec> null_space(CMat a, std::size_t k) {
  const std::size_t n = a.rows();
  std::size_t rank = n - k;
  std::vector<std::size_t> colp(n);
  std::iota(colp.begin(), colp.end(), std::size_t{0});
  for (std::size_t s = 0; s < rank; ++s) {
    std::size_t pi = s, pj = s;
    for (std::size_t i = s; i < n; ++i)
      for (std::size_t j = s; j < n; ++j)
        if (std::abs(a(i, j)) > std::abs(a(pi, pj))) {
          pi = i;
          pj = j;
        }
    if (a(pi, pj) == Complex{}) {
      rank = s;
      break;
    }
    for (std::size_t j = 0; j < n; ++j) std::swap(a(s, j), a(pi, j));
    for (std::size_t i = 0; i < n; ++i) std::swap(a(i, s), a(i, pj));
    std::swap(colp[s], colp[pj]);
    for (std::size_t i = s + 1; i < n; ++i) {
      const Complex f = a(i, s) / a(s, s);
      if (f == Complex{}) continue;
      for (std::size_t j = s; j < n; ++j) a(i, j) -= f * a(s, j);
    }
  }
  std::vector<CVec> basis;
  for (std::size_t free = rank; free < n && basis.size() < k; ++free) {
    CVec x(n);
    x[free] = 1.0;
    for (std::size_t s = rank; s-- > 0;) {
      Complex acc = 0.0;
      for (std::size_t j = s + 1; j < n; ++j) acc += a(s, j) * x[j];
      x[s] = -acc / a(s, s);
    }
    CVec v(n);
    for (std::size_t j = 0; j < n; ++j) v[colp[j]] = x[j];
    basis.push_back(std::move(v));
  }
  return basis;
}

CMat shifted(const CMat& m, Complex lambda) {
  CMat a = m;
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) -= lambda;
  return a;
}

// Unit norm, largest component real and positive.
void normalize_phase(CVec& v) {
  const double nrm = norm2(v);
  if (nrm == 0.0) return;
  std::size_t big = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[big]) * (1.0 + 1e-12)) big = i;
  const Complex phase = std::abs(v[big]) > 0 ? std::conj(v[big]) / std::abs(v[big]) : 1.0;
  for (auto& z : v) z *= phase / nrm;
}

}  // namespace

EigSystem eig_general(const CMat& m) {
  require_square(m, "eig_general");
  const std::size_t n = m.rows();
  if (n < 1 || n > 4) throw Error(ErrorCode::DimensionMismatch, "eig_general supports dimension 1..4");
  if (!m.all_finite()) throw Error(ErrorCode::NonFinite, "eig_general input must be finite");

  const double scale = m.norm();
  const double tol = kDegeneracyTolerance * (1.0 + scale);
  const CMat mt = m.transpose();

  CVec roots = polynomial_roots(characteristic_polynomial(m));
  roots.resize(n, 0.0);

  // Two-sided Rayleigh quotient polish on the matrix.
  CVec refined = roots;
  for (std::size_t i = 0; i < n; ++i) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) gap = std::min(gap, std::abs(roots[i] - roots[j]));
    const double max_shift = std::max(0.5 * gap, 1e-6 * (1.0 + scale));
    Complex lambda = roots[i];
    for (int iter = 0; iter < 3; ++iter) {
      const CVec r = null_space(shifted(m, lambda), 1).front();
      const CVec l = null_space(shifted(mt, lambda), 1).front();
      const Complex lr = dot(l, r);
      if (std::abs(lr) < norm2(l) * norm2(r) / kConditionLimit) break;
      const Complex next = dot(l, m * std::span<const Complex>(r)) / lr;
      if (!finite(next) || std::abs(next - roots[i]) > max_shift) break;
      const bool settled = std::abs(next - lambda) <= 1e-16 * (1.0 + scale);
      lambda = next;
      if (settled) break;
    }
    refined[i] = lambda;
  }
  std::sort(refined.begin(), refined.end(), eigenvalue_order);

  // Cluster coalesced eigenvalues (transitively).
  std::vector<std::size_t> cluster(n);
  std::iota(cluster.begin(), cluster.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(refined[i] - refined[j]) < tol) {
        const std::size_t from = cluster[j], to = cluster[i];
        for (auto& c : cluster)
          if (c == from) c = to;
      }

  EigSystem es;
  es.values = refined;
  es.right.resize(n);
  es.left.resize(n);
  std::vector<bool> done(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::vector<std::size_t> members;
    Complex mean = 0.0;
    for (std::size_t j = i; j < n; ++j)
      if (cluster[j] == cluster[i]) {
        members.push_back(j);
        mean += refined[j];
      }
    mean /= static_cast<double>(members.size());
    const std::size_t k = members.size();
    if (k > 1) es.degenerate = true;

    std::vector<CVec> rights = null_space(shifted(m, mean), k);
    std::vector<CVec> lefts = null_space(shifted(mt, mean), k);
    rights.resize(k, CVec(n));
    lefts.resize(k, CVec(n));
    for (auto& r : rights) normalize_phase(r);
    for (auto& l : lefts) normalize_phase(l);

    // Biorthonormalize inside the cluster: L <- G^{-1} L with G = L R.
    CMat gram(k, k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) gram(a, b) = dot(lefts[a], rights[b]);
    for (std::size_t a = 0; a < k; ++a) {
      const double kappa = 1.0 / std::max(std::abs(gram(a, a)), 1e-300);
      es.condition = std::max(es.condition, kappa);
    }
    try {
      const CMat ginv = inverse(gram);
      std::vector<CVec> scaled(k, CVec(n));
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
          for (std::size_t c = 0; c < n; ++c) scaled[a][c] += ginv(a, b) * lefts[b][c];
      lefts = std::move(scaled);
    } catch (const Error&) {
      es.degenerate = true;
      es.condition = std::numeric_limits<double>::infinity();
    }
    for (std::size_t a = 0; a < k; ++a) {
      es.right[members[a]] = std::move(rights[a]);
      es.left[members[a]] = std::move(lefts[a]);
      done[members[a]] = true;
    }
  }
  if (es.condition > kConditionLimit) es.degenerate = true;
  return es;
}

// ---------------------------------------------------------------------------
// Matrix exponential

CMat expm(const CMat& m, double t) {
  require_square(m, "expm");
  if (!std::isfinite(t)) throw Error(ErrorCode::NonFinite, "expm time must be finite");
  CMat a = m * Complex(t);
  const double nrm = a.norm1();
  if (!std::isfinite(nrm) || nrm > kExpmNormBound) {
    throw Error(ErrorCode::Overflow, "|M t|_1 exceeds the expm bound");
  }
  const std::size_t n = m.rows();
  int squarings = 0;
  if (nrm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.25)));
  a *= Complex(std::ldexp(1.0, -squarings));

  CMat result = CMat::identity(n);
  CMat term = CMat::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = term * a;
    term *= Complex(1.0 / k);
    result += term;
    if (term.norm1() <= 1e-18 * result.norm1()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  if (!result.all_finite()) throw Error(ErrorCode::Overflow, "expm produced non-finite entries");
  return result;
}

// ---------------------------------------------------------------------------
// Arbitrary-dimension path

namespace {

Eigen::MatrixXcd to_eigen(const CMat& m) {
  Eigen::MatrixXcd e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return e;
}

}  // namespace

std::vector<double> hermitian_eigenvalues(const CMat& m) {
  require_square(m, "hermitian_eigenvalues");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_eigen(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularMatrix, "Hermitian eigensolver did not converge");
  }
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

CVec dense_eigenvalues(const CMat& m) {
  require_square(m, "dense_eigenvalues");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(to_eigen(m), false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularMatrix, "complex eigensolver did not converge");
  }
  const auto& ev = solver.eigenvalues();
  CVec out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), eigenvalue_order);
  return out;
}

}  // namespace exciton
