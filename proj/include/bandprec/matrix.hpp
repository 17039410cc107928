#pragma once

// Dense linear-algebra kernel used by the estimator: a general row-major
// matrix, a symmetric matrix that keeps both triangles bit-identical,
// pivot-free Cholesky, SPD inversion, norms, and the two rank-1 inverse
// updates that let a sliding window inverse move by one index in O(q^2).

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace bandprec {

/// Dense row-major matrix of doubles. Used for data (n x p) and for
/// rectangular blocks.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dense symmetric p x p matrix. Every mutator writes both (i, j) and
/// (j, i), so the two triangles are always bit-identical.
class SymMatrix {
 public:
  SymMatrix() = default;
  /// Zero matrix of dimension p.
  explicit SymMatrix(std::size_t p);

  static SymMatrix identity(std::size_t p);
  static SymMatrix diagonal(std::span<const double> diag);
  static SymMatrix diagonal(std::initializer_list<double> diag) {
    return diagonal(std::span<const double>(diag.begin(), diag.size()));
  }
  /// Takes full row-major data; throws DimensionError unless it is exactly
  /// symmetric.
  static SymMatrix from_full(const Matrix& full);
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Mirrors the lower triangle (j <= i) of `full`; the upper part is ignored.
  static SymMatrix from_lower(const Matrix& full);

  std::size_t dim() const { return p_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * p_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * p_ + j] = v;
    data_[j * p_ + i] = v;
  }
  void add(std::size_t i, std::size_t j, double v);

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * p_, p_}; }
  std::span<const double> data() const { return data_; }

  /// Principal submatrix on the half-open index range [begin, end).
  SymMatrix principal(std::size_t begin, std::size_t end) const;
  /// Adds `block` (symmetric) at rows/cols [offset, offset + block.dim()).
  void add_block(std::size_t offset, const SymMatrix& block, double scale = 1.0);

  Matrix to_matrix() const;

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix& operator*=(double s);
  SymMatrix& operator/=(double s);

  bool operator==(const SymMatrix&) const = default;

 private:
  std::size_t p_ = 0;
  std::vector<double> data_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);

/// Lower-triangular factor L of an SPD matrix A = L L^T.
class CholeskyFactor {
 public:
  CholeskyFactor(std::size_t p, Matrix lower) : p_(p), lower_(std::move(lower)) {}

  std::size_t dim() const { return p_; }
  const Matrix& lower() const { return lower_; }

  /// Solves L y = b in place.
  void solve_lower(std::span<double> b) const;
  /// Solves L^T x = b in place.
  void solve_upper(std::span<double> b) const;
  /// A^{-1}, symmetrized.
  SymMatrix inverse() const;

 private:
  std::size_t p_;
  Matrix lower_;
};

/// Pivot-free Cholesky. Throws NotPositiveDefinite when a pivot falls to
/// 1e-14 * max diagonal entry or below.
CholeskyFactor cholesky(const SymMatrix& a);

SymMatrix invert_spd(const SymMatrix& a);

/// Largest |eigenvalue|. Power iteration on a^2 from a fixed start vector;
/// falls back to a dense symmetric eigensolver if the iteration does not
/// certify convergence within the iteration budget.
double spectral_norm(const SymMatrix& a);

/// Max absolute column sum.
double l1_operator_norm(const SymMatrix& a);

/// Ascending eigenvalues from a dense symmetric eigensolver.
std::vector<double> eigenvalues(const SymMatrix& a);
double min_eigenvalue(const SymMatrix& a);
double max_eigenvalue(const SymMatrix& a);

/// Given inv = M^{-1} for SPD M of size q >= 2, returns the inverse of M with
/// its first row and column removed: C~ - B~^T B~ / A~. Throws
/// DegenerateUpdate when A~ <= 1e-14.
SymMatrix inverse_delete_leading(const SymMatrix& inv);

/// Given inv = C^{-1}, returns the inverse of [[C, border], [border^T, corner]]
/// through the scalar Schur complement s = corner - border^T C^{-1} border.
/// Throws DegenerateUpdate when s <= 1e-14.
SymMatrix inverse_append_trailing(const SymMatrix& inv, std::span<const double> border,
                                  double corner);

double max_abs_diff(const SymMatrix& a, const SymMatrix& b);
double max_abs(const SymMatrix& a);

}  // namespace bandprec
