#include "bandprec/model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "bandprec/errors.hpp"

namespace bandprec {

PrecisionModel build_omega(const ModelSpec& spec) {
  if (!(spec.alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (spec.p == 0) throw DimensionError("p must be >= 1");
  SymMatrix omega(spec.p);
  for (std::size_t i = 0; i < spec.p; ++i) {
    omega.set(i, i, 1.0);
    for (std::size_t j = i + 1; j < spec.p; ++j) {
      omega.set(i, j, spec.rho_amp * std::pow(static_cast<double>(j - i), -spec.alpha - 1.0));
    }
  }
  return make_model(std::move(omega), spec);
}

PrecisionModel make_model(SymMatrix omega, ModelSpec spec) {
  spec.p = omega.dim();
  CholeskyFactor chol = cholesky(omega);
  return {spec, std::move(omega), std::move(chol)};
}

MembershipReport validate_membership(const SymMatrix& omega, double alpha, double M, double M0) {
  const std::size_t p = omega.dim();
  MembershipReport r;
  const auto ev = eigenvalues(omega);
  if (!ev.empty()) {
    r.min_eig = ev.front();
    r.max_eig = ev.back();
  }
  r.implied_M0 = std::max(r.max_eig, r.min_eig > 0.0 ? 1.0 / r.min_eig
                                                     : std::numeric_limits<double>::infinity());

  // Per column: absolute mass at each distance, then suffix sums.
  r.tail_sums.assign(p, 0.0);
  std::vector<double> by_distance(p + 1);
  for (std::size_t j = 0; j < p; ++j) {
    std::fill(by_distance.begin(), by_distance.end(), 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      by_distance[i > j ? i - j : j - i] += std::abs(omega(i, j));
    }
    double tail = 0.0;
    for (std::size_t k = p; k-- > 1;) {
      tail += by_distance[k];
      r.tail_sums[k - 1] = std::max(r.tail_sums[k - 1], tail);
    }
  }

  bool tails_ok = true;
  for (std::size_t k = 1; k <= p; ++k) {
    const double kk = static_cast<double>(k);
    r.implied_M = std::max(r.implied_M, r.tail_sums[k - 1] * std::pow(kk, alpha));
    if (r.tail_sums[k - 1] > M * std::pow(kk, -alpha)) tails_ok = false;
  }
  const bool eig_ok = !ev.empty() && r.min_eig >= 1.0 / M0 && r.max_eig <= M0;
  r.member = tails_ok && eig_ok;
  return r;
}

Matrix sample(const PrecisionModel& model, std::size_t n, std::uint64_t seed) {
  const std::size_t p = model.dim();
  Matrix x(n, p);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = x.row(r);
    for (auto& v : row) v = normal(gen);
    model.chol_omega().solve_upper(row);
  }
  return x;
}

SymMatrix empirical_covariance(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n == 0) throw EmptyData("empirical covariance needs at least one observation");
  std::vector<double> mean(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < p; ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  Matrix acc(p, p);
  std::vector<double> c(p);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < p; ++j) c[j] = row[j] - mean[j];
    for (std::size_t i = 0; i < p; ++i) {
      const double ci = c[i];
      auto out = acc.row(i);
      for (std::size_t j = 0; j <= i; ++j) out[j] += ci * c[j];
    }
  }
  SymMatrix s = SymMatrix::from_lower(acc);
  s /= static_cast<double>(n);
  return s;
}

SymMatrix f11_matrix(std::size_t k, std::size_t p, double tau, double alpha,
                     std::span<const bool> theta) {
  if (2 * k > p) throw DimensionError("f11_matrix requires 2k <= p");
  if (theta.size() != k) throw DimensionError("theta must have length k");
  const double a = std::pow(static_cast<double>(k), -alpha - 1.0);
  SymMatrix omega = SymMatrix::identity(p);
  // 1-based index m maps to zero-based row m-1; partners m+1..2k map to m..2k-1.
  for (std::size_t m = 1; m <= k; ++m) {
    if (!theta[m - 1]) continue;
    for (std::size_t j = m + 1; j <= 2 * k; ++j) omega.add(m - 1, j - 1, tau * a);
  }
  return omega;
}

std::size_t f12_effective_dim(std::size_t p, std::size_t n) {
  const double cap = std::exp(static_cast<double>(n) / 2.0);
  if (cap >= static_cast<double>(p)) return p;
  return static_cast<std::size_t>(std::floor(cap));
}

SymMatrix f12_matrix(std::size_t m, std::size_t p, std::size_t n, double tau, double M0,
                     double rho) {
  const double bound = std::min({(M0 - 1.0) * (M0 - 1.0), (rho - 1.0) * (rho - 1.0), 1.0});
  if (!(tau > 0.0 && tau < bound)) {
    std::ostringstream os;
    os << "tau=" << tau << " outside (0, " << bound << ")";
    throw ParameterError(os.str());
  }
  if (n == 0) throw ParameterError("sample count must be >= 1");
  const std::size_t p1 = f12_effective_dim(p, n);
  if (m > p1) throw ParameterError("perturbed index m exceeds p1");
  SymMatrix omega = SymMatrix::identity(p);
  if (m >= 1) {
    const double bump = std::sqrt(tau * std::log(static_cast<double>(p1)) / static_cast<double>(n));
    omega.set(m - 1, m - 1, 1.0 / (1.0 + bump));
  }
  return omega;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

void write_matrix_csv(std::ostream& out, const Matrix& x) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrix& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_matrix_csv(out, x);
  if (!out) throw IoError("write failed for '" + path + "'");
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{}) {
        throw IoError("malformed number on CSV line " + std::to_string(rows + 1));
      }
      values.push_back(v);
      ++count;
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') throw IoError("unexpected character on CSV line " + std::to_string(rows + 1));
      ++p;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw IoError("ragged CSV: line " + std::to_string(rows + 1) + " has " +
                    std::to_string(count) + " fields, expected " + std::to_string(cols));
    }
    ++rows;
  }
  Matrix x(rows, cols);
  std::copy(values.begin(), values.end(), x.data().begin());
  return x;
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_matrix_csv(in);
}

}  // namespace bandprec
