#include "bandprec/matrix.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>

#include "bandprec/errors.hpp"

namespace bandprec {

namespace {

constexpr double kPivotFloor = 1e-14;
constexpr int kPowerIterations = 400;
constexpr double kPowerResidualTol = 1e-11;

Eigen::MatrixXd to_eigen(const SymMatrix& a) {
  const auto p = static_cast<Eigen::Index>(a.dim());
  Eigen::MatrixXd m(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return m;
}

void multiply(const SymMatrix& a, std::span<const double> x, std::span<double> y) {
  const std::size_t p = a.dim();
  for (std::size_t i = 0; i < p; ++i) {
    const auto r = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < p; ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

// Fixed pseudo-random start so that structured matrices (Toeplitz,
// persymmetric) do not start orthogonal to their dominant eigenvector.
std::vector<double> power_start(std::size_t p) {
  std::mt19937_64 gen(0x9E3779B97F4A7C15ULL);
  std::vector<double> x(p);
  for (auto& v : x) v = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
  const double n = std::sqrt(dot(x, x));
  for (auto& v : x) v /= n;
  return x;
}

std::optional<double> power_norm(const SymMatrix& a) {
  const std::size_t p = a.dim();
  std::vector<double> x = power_start(p);
  std::vector<double> y(p), z(p);
  for (int it = 0; it < kPowerIterations; ++it) {
    multiply(a, x, y);
    multiply(a, y, z);
    const double lambda_sq = dot(y, y);
    if (!(lambda_sq > 0.0)) return std::nullopt;
    double res = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double d = z[i] - lambda_sq * x[i];
      res += d * d;
    }
    if (std::sqrt(res) <= kPowerResidualTol * lambda_sq) return std::sqrt(lambda_sq);
    const double zn = std::sqrt(dot(z, z));
    for (std::size_t i = 0; i < p; ++i) x[i] = z[i] / zn;
  }
  return std::nullopt;
}

}  // namespace

SymMatrix::SymMatrix(std::size_t p) : p_(p), data_(p * p, 0.0) {}

SymMatrix SymMatrix::identity(std::size_t p) {
  SymMatrix m(p);
  for (std::size_t i = 0; i < p; ++i) m.data_[i * p + i] = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.data_[i * m.p_ + i] = diag[i];
  return m;
}

SymMatrix SymMatrix::from_full(const Matrix& full) {
  if (full.rows() != full.cols()) {
    throw DimensionError("SymMatrix requires square data");
  }
  const std::size_t p = full.rows();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (full(i, j) != full(j, i)) {
        std::ostringstream os;
        os << "matrix is not symmetric at (" << i << ", " << j << ")";
        throw DimensionError(os.str());
      }
    }
  }
  SymMatrix m(p);
  std::copy(full.data().begin(), full.data().end(), m.data_.begin());
  return m;
}

SymMatrix SymMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t p = rows.size();
  Matrix full(p, p);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != p) throw DimensionError("SymMatrix rows must have length p");
    std::size_t j = 0;
    for (double v : r) full(i, j++) = v;
    ++i;
  }
  return from_full(full);
}

SymMatrix SymMatrix::from_lower(const Matrix& full) {
  if (full.rows() != full.cols()) {
    throw DimensionError("SymMatrix requires square data");
  }
  SymMatrix m(full.rows());
  for (std::size_t i = 0; i < m.p_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m.set(i, j, full(i, j));
  }
  return m;
}

void SymMatrix::add(std::size_t i, std::size_t j, double v) {
  data_[i * p_ + j] += v;
  if (i != j) data_[j * p_ + i] += v;
}

SymMatrix SymMatrix::principal(std::size_t begin, std::size_t end) const {
  const std::size_t q = end - begin;
  SymMatrix m(q);
  for (std::size_t i = 0; i < q; ++i) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((begin + i) * p_ + begin), q,
                m.data_.begin() + static_cast<std::ptrdiff_t>(i * q));
  }
  return m;
}

void SymMatrix::add_block(std::size_t offset, const SymMatrix& block, double scale) {
  const std::size_t q = block.dim();
  for (std::size_t i = 0; i < q; ++i) {
    double* dst = data_.data() + (offset + i) * p_ + offset;
    const double* src = block.data_.data() + i * q;
    for (std::size_t j = 0; j < q; ++j) dst[j] += scale * src[j];
  }
}

Matrix SymMatrix::to_matrix() const {
  Matrix m(p_, p_);
  std::copy(data_.begin(), data_.end(), m.data().begin());
  return m;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  if (other.p_ != p_) throw DimensionError("dimension mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  if (other.p_ != p_) throw DimensionError("dimension mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

SymMatrix& SymMatrix::operator/=(double s) {
  for (auto& v : data_) v /= s;
  return *this;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

void CholeskyFactor::solve_lower(std::span<double> b) const {
  for (std::size_t i = 0; i < p_; ++i) {
    double acc = b[i];
    const auto r = lower_.row(i);
    for (std::size_t k = 0; k < i; ++k) acc -= r[k] * b[k];
    b[i] = acc / r[i];
  }
}

void CholeskyFactor::solve_upper(std::span<double> b) const {
  for (std::size_t ii = p_; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t k = ii + 1; k < p_; ++k) acc -= lower_(k, ii) * b[k];
    b[ii] = acc / lower_(ii, ii);
  }
}

SymMatrix CholeskyFactor::inverse() const {
  // Linv is lower triangular; A^{-1} = Linv^T Linv.
  Matrix linv(p_, p_);
  for (std::size_t j = 0; j < p_; ++j) {
    linv(j, j) = 1.0 / lower_(j, j);
    for (std::size_t i = j + 1; i < p_; ++i) {
      double acc = 0.0;
      const auto r = lower_.row(i);
      for (std::size_t k = j; k < i; ++k) acc -= r[k] * linv(k, j);
      linv(i, j) = acc / r[i];
    }
  }
  SymMatrix inv(p_);
  for (std::size_t i = 0; i < p_; ++i) {
    for (std::size_t j = i; j < p_; ++j) {
      double acc = 0.0;
      for (std::size_t k = j; k < p_; ++k) acc += linv(k, i) * linv(k, j);
      inv.set(i, j, acc);
    }
  }
  return inv;
}

CholeskyFactor cholesky(const SymMatrix& a) {
  const std::size_t p = a.dim();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, a(i, i));
  const double floor = kPivotFloor * max_diag;

  Matrix l(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto lj = l.row(j);
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
    if (!(d > floor) || !(max_diag > 0.0)) {
      std::ostringstream os;
      os << "matrix is not numerically positive definite (pivot " << j << " = " << d << ")";
      throw NotPositiveDefinite(os.str());
    }
    const double ljj = std::sqrt(d);
    lj[j] = ljj;
    for (std::size_t i = j + 1; i < p; ++i) {
      const auto li = l.row(i);
      double acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= li[k] * lj[k];
      li[j] = acc / ljj;
    }
  }
  return {p, std::move(l)};
}

SymMatrix invert_spd(const SymMatrix& a) { return cholesky(a).inverse(); }

double spectral_norm(const SymMatrix& a) {
  if (a.dim() == 0 || max_abs(a) == 0.0) return 0.0;
  if (auto v = power_norm(a)) return *v;
  const auto ev = eigenvalues(a);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

double l1_operator_norm(const SymMatrix& a) {
  const std::size_t p = a.dim();
  std::vector<double> col(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < p; ++j) col[j] += std::abs(r[j]);
  }
  return col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
}

std::vector<double> eigenvalues(const SymMatrix& a) {
  if (a.dim() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(a), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double min_eigenvalue(const SymMatrix& a) { return eigenvalues(a).front(); }
double max_eigenvalue(const SymMatrix& a) { return eigenvalues(a).back(); }

SymMatrix inverse_delete_leading(const SymMatrix& inv) {
  const std::size_t q = inv.dim();
  if (q < 2) throw DimensionError("inverse_delete_leading requires q >= 2");
  const double lead = inv(0, 0);
  if (!(lead > kPivotFloor)) {
    std::ostringstream os;
    os << "rank-1 downdate pivot " << lead << " is not positive";
    throw DegenerateUpdate(os.str());
  }
  const auto b = inv.row(0);
  SymMatrix out(q - 1);
  for (std::size_t i = 0; i + 1 < q; ++i) {
    const double bi = b[i + 1] / lead;
    const auto r = inv.row(i + 1);
    for (std::size_t j = i; j + 1 < q; ++j) out.set(i, j, r[j + 1] - bi * b[j + 1]);
  }
  return out;
}

SymMatrix inverse_append_trailing(const SymMatrix& inv, std::span<const double> border,
                                  double corner) {
  const std::size_t q = inv.dim();
  if (border.size() != q) throw DimensionError("border length must equal inverse dimension");
  std::vector<double> u(q);
  multiply(inv, border, u);
  const double schur = corner - dot(border, u);
  if (!(schur > kPivotFloor)) {
    std::ostringstream os;
    os << "rank-1 update Schur complement " << schur << " is not positive";
    throw DegenerateUpdate(os.str());
  }
  SymMatrix out(q + 1);
  for (std::size_t i = 0; i < q; ++i) {
    const double ui = u[i] / schur;
    const auto r = inv.row(i);
    for (std::size_t j = i; j < q; ++j) out.set(i, j, r[j] + ui * u[j]);
    out.set(i, q, -ui);
  }
  out.set(q, q, 1.0 / schur);
  return out;
}

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("dimension mismatch in max_abs_diff");
  double m = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

double max_abs(const SymMatrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace bandprec
