#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "cohstate/states.hpp"

namespace cohstate {

// Double-Fock space spanned by Psi_{n l}, n, l <= K. Vectors are flattened
// with index n (K+1) + l; the first index carries H1, the second H2.

inline std::size_t df_index(std::size_t n, std::size_t l, std::size_t K) { return n * (K + 1) + l; }

/// z = (y - i x)/sqrt(2) and back.
Complex z_from_xy(double x, double y);
std::pair<double, double> xy_from_z(Complex z);

/// Single-mode <m|D(z)|n>, m, n <= K, from the associated Laguerre closed form.
Eigen::MatrixXcd displacement_matrix(Complex z, std::size_t K);

/// P(N > K) for N ~ Poisson(mean): the vacuum column's mass beyond K.
double poisson_tail(double mean, std::size_t K);

using SparseC = Eigen::SparseMatrix<Complex>;

struct DoubleFockOperator {
  std::string name;
  std::size_t K = 0;
  SparseC matrix;
  /// Truncation leakage estimate (0 for the ladder algebra).
  double leakage = 0.0;
  std::vector<std::string> warnings;

  std::size_t dim() const { return (K + 1) * (K + 1); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix * v; }
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix); }
};

struct OperatorSet {
  std::size_t K = 0;
  double omega = 1.0;
  DoubleFockOperator A1, A1dag, A2, A2dag, Q1, P1, Q2, P2, H1, H2, H;

  const DoubleFockOperator& get(const std::string& name) const;
};

/// Ladder operators, quadratures Q = (A + A^dag)/sqrt 2, P = (A - A^dag)/(i sqrt 2),
/// H_i = omega (A_i^dag A_i + 1/2) and H = H1 - H2. K >= 2.
OperatorSet build_operators(std::size_t K, double omega = 1.0);

/// U1(z) = D(z) on the first index; U2(z') = D(conj z') on the second, so that
/// U1(z) U2(z') Psi_00 has coefficients z^n conj(z')^l. TruncationUnsafe when the
/// Poisson leakage of the vacuum column exceeds leak_tol; a warning once |z|^2 > K/4.
DoubleFockOperator displacement(Complex z, int which, std::size_t K, double leak_tol = 1e-10);

struct ThermalVector {
  double beta = 1.0;
  double omega = 1.0;
  std::size_t K = 0;
  /// lambda_n = (1 - e^{-omega beta}) e^{-n omega beta}, n <= K.
  Eigen::VectorXd lambda;
  /// e^{-(K+1) omega beta}: the weight beyond the truncation.
  double tail_bound = 0.0;

  Eigen::VectorXcd vector() const;
  LabeledKet ket() const;
  double norm_squared() const;
};

ThermalVector thermal_vector(double beta, double omega, std::size_t K);

/// (J_beta, Delta_beta, S_beta = J Delta^{1/2}) on the truncation.
struct ModularTriple {
  double beta = 1.0;
  double omega = 1.0;
  std::size_t K = 0;
  ThermalVector phi;
  /// Delta entries lambda_n / lambda_l.
  Eigen::VectorXd delta;

  /// Conjugate, then swap (n, l) -> (l, n).
  Eigen::VectorXcd apply_J(const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd apply_Delta(const Eigen::VectorXcd& v, double power = 1.0) const;
  Eigen::VectorXcd apply_S(const Eigen::VectorXcd& v) const;

  // Validation residuals filled by modular_triple().
  double delta_vs_exp = 0.0;   // max relative |Delta - e^{-beta H}|
  double s_basis = 0.0;        // max |S Psi_{ji} - sqrt(lambda_j/lambda_i) Psi_{ij}|
  double j_squared = 0.0;      // max |J^2 v - v| over basis vectors
  double j_fixes_phi = 0.0;    // ||J Phi - Phi||
};

ModularTriple modular_triple(double beta, double omega, std::size_t K);

struct ModularInvolutionReport {
  std::vector<Complex> samples;
  /// ||S U1(z) Phi - U1(z)^* Phi||, the right side from the explicit expansion.
  std::vector<double> residuals;
  /// 1 - ||U1(z) Phi||^2 / ||Phi||^2: norm lost to the truncation.
  std::vector<double> leakage;
  double max_residual = 0.0;
  double max_leakage = 0.0;
  bool passed = false;
};

ModularInvolutionReport modular_involution_check(double beta, double omega, const std::vector<Complex>& samples,
                                                 std::size_t K, double tol, double leak_tol = 1e-6);

struct KMSReport {
  Complex F_t;              // F_{A,B}(t) on the truncation
  Complex F_continued;      // F_{A,B}(t + i beta), termwise continuation
  Complex G_truncated;      // <phi; alpha_t[B] A> on the truncation
  Complex G_exact;          // untruncated Gaussian-state value
  double continuation_residual = 0.0;  // |F(t + i beta) - G_exact|
  double truncation_consistency = 0.0; // |F(t + i beta) - G_truncated|
  double invariance_residual = 0.0;    // |<phi; alpha_t[A]> - <phi; A>|
};

/// A = U1(z_A), B = U1(z_B).
KMSReport kms_check(Complex zA, Complex zB, double beta, double omega, double t, std::size_t K);

/// Untruncated <phi_beta; D(w) D(zA)> = e^{(w conj(zA) - conj(w) zA)/2} e^{-|w + zA|^2 (nbar + 1/2)}.
Complex thermal_displacement_pair(Complex w, Complex zA, double beta, double omega);

/// U1(z) Phi_beta.
LabeledKet kms_cs(Complex z, double beta, double omega, std::size_t K);
/// sum_n lambda_n^{1/2} (A1^dag - conj z)^n |z; n> / sqrt(n!), |z; n> = U1(z) Psi_{0n},
/// built on a wider working truncation and cut back to K.
LabeledKet kms_cs_photon_added(Complex z, double beta, double omega, std::size_t K);

struct OverlapResult {
  Complex computed;
  Complex closed_form;
  double residual = 0.0;
};

/// <z; n | z'; m> against e^{-(|z|^2 + |z'|^2)/2} e^{conj(z) z'} delta_{nm}.
OverlapResult overlap_law(Complex z, std::size_t n, Complex zp, std::size_t m, std::size_t K);

/// Psi_{n l}(x, y) = (2 pi)^{-1/2} <l| U(x,y)^* |n>.
Complex wigner_eval(std::size_t n, std::size_t l, double x, double y);

/// Trapezoid <Psi_{n l} | Psi_{n' l'}> on [-L, L]^2 with spacing h.
Complex wigner_overlap(std::size_t n, std::size_t l, std::size_t n2, std::size_t l2, double L, double h);

struct IntertwiningRow {
  std::size_t n = 0;
  std::size_t l = 0;
  double residual_Q = 0.0;
  double residual_P = 0.0;
};

struct IntertwiningReport {
  double h = 0.0;
  std::vector<IntertwiningRow> rows;
  double max_residual = 0.0;
  bool passed = false;
};

/// Q1 = -i d/dx + y/2 and P1 = -i d/dy - x/2 by central differences with step h,
/// sampled on a grid of spacing `sample` over [-L, L]^2, against the ladder action
/// of Q and P on the first index. GridTooCoarse when h > 0.1.
IntertwiningReport intertwining_check(const std::vector<std::pair<std::size_t, std::size_t>>& levels, double h,
                                      double tol, double L = 4.0, double sample = 0.25);

struct BlockResolution {
  std::size_t block = 0;
  Eigen::MatrixXcd matrix;  // over (n, l), n, l <= block
  double deviation_from_identity = 0.0;
  /// KMS family only: deviation from I (x) diag(lambda).
  double deviation_from_thermal = 0.0;
};

/// (1/2pi) int_{|z| <= R} |z, beta><z, beta| dx dy projected on the block.
BlockResolution kms_block_resolution(double beta, double omega, std::size_t block, double R, std::size_t K);
/// (1/(2pi)^2) sum_l int |z, z'; l><z, z'; l| dx dy dx' dy' on the block (factorized in z, z').
BlockResolution vcs1_block_resolution(std::size_t block, double R);

/// ||P_inner [U1(z), U2(z')] P_inner|| with the inner block n, l <= K - 1.
double commutator_inner_norm(Complex z, Complex zp, std::size_t K);

/// Dense dump, row-major, re/im interleaved.
nlohmann::json to_json(const DoubleFockOperator& op);
std::string to_csv(const DoubleFockOperator& op);

}  // namespace cohstate
