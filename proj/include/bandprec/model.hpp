#pragma once

// Test-instance generation: the power-law decay precision family, the two
// adversarial families used in the lower-bound constructions, Gaussian
// sampling, and the covariance MLE.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bandprec/matrix.hpp"

namespace bandprec {

struct ModelSpec {
  double alpha = 0.5;
  double rho_amp = 0.6;
  std::size_t p = 1;
};

/// Precision matrix with unit diagonal and off-diagonal entries
/// rho_amp * |i-j|^(-alpha-1), plus its Cholesky factor.
class PrecisionModel {
 public:
  PrecisionModel(ModelSpec spec, SymMatrix omega, CholeskyFactor chol)
      : spec_(spec), omega_(std::move(omega)), chol_(std::move(chol)) {}

  const ModelSpec& spec() const { return spec_; }
  std::size_t dim() const { return omega_.dim(); }
  const SymMatrix& omega() const { return omega_; }
  const CholeskyFactor& chol_omega() const { return chol_; }
  /// Sigma = Omega^{-1}, recomputed on each call.
  SymMatrix sigma() const { return chol_.inverse(); }

 private:
  ModelSpec spec_;
  SymMatrix omega_;
  CholeskyFactor chol_;
};

/// Throws NotPositiveDefinite if (alpha, rho_amp) leave the SPD regime.
PrecisionModel build_omega(const ModelSpec& spec);

/// Wraps an arbitrary SPD precision matrix (e.g. identity or F11 instances).
PrecisionModel make_model(SymMatrix omega, ModelSpec spec = {});

struct MembershipReport {
  double min_eig = 0.0;
  double max_eig = 0.0;
  double implied_M0 = 0.0;
  /// tail_sums[k-1] = max_j sum_{|i-j| >= k} |omega_ij|, k = 1..p.
  std::vector<double> tail_sums;
  double implied_M = 0.0;
  bool member = false;
};

/// Checks the decay class: every tail sum <= M k^-alpha and every eigenvalue
/// in [1/M0, M0].
MembershipReport validate_membership(const SymMatrix& omega, double alpha, double M, double M0);

/// n rows drawn i.i.d. from N(0, Omega^{-1}) by solving L^T x = z for standard
/// normal z, where Omega = L L^T. Normals come from std::mt19937_64 seeded
/// with `seed` through std::normal_distribution, drawn row-major.
Matrix sample(const PrecisionModel& model, std::size_t n, std::uint64_t seed);

/// Mean-centered covariance with divisor n. Throws EmptyData for n = 0.
SymMatrix empirical_covariance(const Matrix& x);

/// Identity plus tau * k^(-alpha-1) * sum_m theta_m B(m, k). B(m, k) holds
/// ones on row/column m (1-based) against indices m+1..2k.
SymMatrix f11_matrix(std::size_t k, std::size_t p, double tau, double alpha,
                     std::span<const bool> theta);

/// min(p, floor(exp(n/2))).
std::size_t f12_effective_dim(std::size_t p, std::size_t n);

/// Diagonal matrix; entry m (1-based) is (1 + sqrt(tau log(p1) / n))^-1, all
/// others 1. m = 0 gives the identity. Requires 0 < tau < min{(M0-1)^2,
/// (rho-1)^2, 1}.
SymMatrix f12_matrix(std::size_t m, std::size_t p, std::size_t n, double tau, double M0,
                     double rho);

/// Headerless CSV, shortest round-trip decimals, LF line endings.
void write_matrix_csv(std::ostream& out, const Matrix& x);
void write_matrix_csv(const std::string& path, const Matrix& x);
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::string& path);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace bandprec
