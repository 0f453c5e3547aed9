#include "cohstate/landau.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cohstate/error.hpp"
#include "cohstate/quadrature.hpp"
#include "cohstate/special.hpp"

namespace cohstate {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kTwoPi = 6.28318530717958647692;

// <m|D(z)|n>
Complex displacement_element(std::size_t m, std::size_t n, Complex z) {
  const double x = std::norm(z);
  if (x == 0.0) return m == n ? 1.0 : 0.0;
  const bool up = m >= n;
  const std::size_t lo = up ? n : m;
  const std::size_t k = up ? m - n : n - m;
  const Complex w = up ? z : -std::conj(z);
  const double mag = std::exp(0.5 * (log_factorial(lo) - log_factorial(lo + k)) - 0.5 * x +
                              static_cast<double>(k) * 0.5 * std::log(x));
  return mag * std::polar(1.0, static_cast<double>(k) * std::arg(w)) * assoc_laguerre(lo, k, x);
}

SparseC kron_first(const Eigen::MatrixXcd& A, std::size_t K) {
  const std::size_t d = K + 1;
  std::vector<Eigen::Triplet<Complex>> t;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const Complex a = A(i, j);
      if (a == Complex(0.0)) continue;
      for (std::size_t l = 0; l < d; ++l) t.emplace_back(df_index(i, l, K), df_index(j, l, K), a);
    }
  }
  SparseC M(d * d, d * d);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SparseC kron_second(const Eigen::MatrixXcd& B, std::size_t K) {
  const std::size_t d = K + 1;
  std::vector<Eigen::Triplet<Complex>> t;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const Complex b = B(i, j);
      if (b == Complex(0.0)) continue;
      for (std::size_t n = 0; n < d; ++n) t.emplace_back(df_index(n, i, K), df_index(n, j, K), b);
    }
  }
  SparseC M(d * d, d * d);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

DoubleFockOperator named(std::string name, std::size_t K, SparseC m) {
  DoubleFockOperator op;
  op.name = std::move(name);
  op.K = K;
  op.matrix = std::move(m);
  op.matrix.makeCompressed();
  return op;
}

void require_beta(double beta, double omega) {
  if (!(beta > 0.0) || !(omega > 0.0) || !std::isfinite(beta * omega)) {
    throw Error(ErrorKind::ConfigInvalid, "beta and omega must be finite and > 0");
  }
}

// Coefficients U1(z) Phi_beta: entry (m, n) = D_mn(z) sqrt(lambda_n).
Eigen::VectorXcd kms_vector(const Eigen::MatrixXcd& D, const Eigen::VectorXd& lambda, std::size_t K) {
  Eigen::VectorXcd v((K + 1) * (K + 1));
  for (std::size_t m = 0; m <= K; ++m) {
    for (std::size_t n = 0; n <= K; ++n) v(df_index(m, n, K)) = D(m, n) * std::sqrt(lambda(n));
  }
  return v;
}

LabeledKet double_fock_ket(const Eigen::VectorXcd& v, std::size_t K, std::string family) {
  LabeledKet ket;
  ket.scheme = LabelScheme::DoubleFock;
  ket.family = std::move(family);
  ket.truncation = K;
  ket.generator = Generator::H1;
  for (std::size_t n = 0; n <= K; ++n) {
    for (std::size_t l = 0; l <= K; ++l) ket.labels.push_back({n, l});
  }
  ket.coeffs = v;
  return ket;
}

}  // namespace

Complex z_from_xy(double x, double y) { return Complex(y, -x) / kSqrt2; }

std::pair<double, double> xy_from_z(Complex z) { return {-kSqrt2 * z.imag(), kSqrt2 * z.real()}; }

Eigen::MatrixXcd displacement_matrix(Complex z, std::size_t K) {
  Eigen::MatrixXcd D(K + 1, K + 1);
  for (std::size_t m = 0; m <= K; ++m) {
    for (std::size_t n = 0; n <= K; ++n) D(m, n) = displacement_element(m, n, z);
  }
  return D;
}

double poisson_tail(double mean, std::size_t K) {
  if (mean <= 0.0) return 0.0;
  double sum = 0.0;
  const double lm = std::log(mean);
  for (std::size_t k = K + 1; k < K + 100000; ++k) {
    const double term = std::exp(static_cast<double>(k) * lm - mean - log_factorial(k));
    sum += term;
    if (static_cast<double>(k) > mean && term <= 1e-18 * sum) break;
    if (term == 0.0 && static_cast<double>(k) > mean) break;
  }
  return sum;
}

const DoubleFockOperator& OperatorSet::get(const std::string& name) const {
  for (const DoubleFockOperator* op : {&A1, &A1dag, &A2, &A2dag, &Q1, &P1, &Q2, &P2, &H1, &H2, &H}) {
    if (op->name == name) return *op;
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown operator '" + name + "'");
}

OperatorSet build_operators(std::size_t K, double omega) {
  if (K < 2) throw Error(ErrorKind::ConfigInvalid, "double-Fock truncation needs K >= 2");
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(K + 1, K + 1);
  for (std::size_t n = 1; n <= K; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXcd ad = a.adjoint();
  const Complex i(0.0, 1.0);
  OperatorSet s;
  s.K = K;
  s.omega = omega;
  s.A1 = named("A1", K, kron_first(a, K));
  s.A1dag = named("A1dag", K, kron_first(ad, K));
  s.A2 = named("A2", K, kron_second(a, K));
  s.A2dag = named("A2dag", K, kron_second(ad, K));
  s.Q1 = named("Q1", K, kron_first((a + ad) / kSqrt2, K));
  s.P1 = named("P1", K, kron_first((a - ad) / (i * kSqrt2), K));
  s.Q2 = named("Q2", K, kron_second((a + ad) / kSqrt2, K));
  s.P2 = named("P2", K, kron_second((a - ad) / (i * kSqrt2), K));
  Eigen::MatrixXcd num = Eigen::MatrixXcd::Zero(K + 1, K + 1);
  for (std::size_t n = 0; n <= K; ++n) num(n, n) = omega * (static_cast<double>(n) + 0.5);
  s.H1 = named("H1", K, kron_first(num, K));
  s.H2 = named("H2", K, kron_second(num, K));
  s.H = named("H", K, SparseC(s.H1.matrix - s.H2.matrix));
  return s;
}

DoubleFockOperator displacement(Complex z, int which, std::size_t K, double leak_tol) {
  if (which != 1 && which != 2) throw Error(ErrorKind::ConfigInvalid, "displacement acts on mode 1 or 2");
  DoubleFockOperator op;
  op.K = K;
  op.leakage = poisson_tail(std::norm(z), K);
  if (std::norm(z) > static_cast<double>(K) / 4.0) {
    op.warnings.push_back("|z|^2 = " + std::to_string(std::norm(z)) + " exceeds K/4");
  }
  if (op.leakage > leak_tol) {
    throw Error(ErrorKind::TruncationUnsafe, "vacuum leakage " + std::to_string(op.leakage) + " beyond K = " +
                                                 std::to_string(K));
  }
  if (which == 1) {
    op.name = "U1";
    op.matrix = kron_first(displacement_matrix(z, K), K);
  } else {
    op.name = "U2";
    op.matrix = kron_second(displacement_matrix(std::conj(z), K), K);
  }
  op.matrix.makeCompressed();
  return op;
}

// ---------------------------------------------------------------------------
// Thermal vector and modular structure

Eigen::VectorXcd ThermalVector::vector() const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero((K + 1) * (K + 1));
  for (std::size_t n = 0; n <= K; ++n) v(df_index(n, n, K)) = std::sqrt(lambda(n));
  return v;
}

LabeledKet ThermalVector::ket() const {
  LabeledKet k = double_fock_ket(vector(), K, "thermal");
  k.tail_bound = tail_bound;
  k.params = {{"beta", beta}, {"omega", omega}};
  return k;
}

double ThermalVector::norm_squared() const { return lambda.sum(); }

ThermalVector thermal_vector(double beta, double omega, std::size_t K) {
  require_beta(beta, omega);
  ThermalVector t;
  t.beta = beta;
  t.omega = omega;
  t.K = K;
  const double wb = omega * beta;
  const double head = -std::expm1(-wb);
  t.lambda.resize(K + 1);
  for (std::size_t n = 0; n <= K; ++n) t.lambda(n) = head * std::exp(-static_cast<double>(n) * wb);
  t.tail_bound = std::exp(-static_cast<double>(K + 1) * wb);
  return t;
}

Eigen::VectorXcd ModularTriple::apply_J(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out(v.size());
  for (std::size_t n = 0; n <= K; ++n) {
    for (std::size_t l = 0; l <= K; ++l) out(df_index(l, n, K)) = std::conj(v(df_index(n, l, K)));
  }
  return out;
}

Eigen::VectorXcd ModularTriple::apply_Delta(const Eigen::VectorXcd& v, double power) const {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = v(i) * (power == 1.0 ? delta(i) : std::pow(delta(i), power));
  return out;
}

Eigen::VectorXcd ModularTriple::apply_S(const Eigen::VectorXcd& v) const { return apply_J(apply_Delta(v, 0.5)); }

ModularTriple modular_triple(double beta, double omega, std::size_t K) {
  ModularTriple m;
  m.beta = beta;
  m.omega = omega;
  m.K = K;
  m.phi = thermal_vector(beta, omega, K);
  const std::size_t d = (K + 1) * (K + 1);
  m.delta.resize(d);
  for (std::size_t n = 0; n <= K; ++n) {
    for (std::size_t l = 0; l <= K; ++l) m.delta(df_index(n, l, K)) = m.phi.lambda(n) / m.phi.lambda(l);
  }
  // Delta against exp(-beta H) built from the operator set.
  const OperatorSet ops = build_operators(std::max<std::size_t>(K, 2), omega);
  for (std::size_t n = 0; n <= K; ++n) {
    for (std::size_t l = 0; l <= K; ++l) {
      const std::size_t i = df_index(n, l, K);
      const std::size_t io = df_index(n, l, ops.K);
      const double e = std::exp(-beta * ops.H.matrix.coeff(io, io).real());
      m.delta_vs_exp = std::max(m.delta_vs_exp, std::abs(m.delta(i) - e) / e);
    }
  }
  for (std::size_t j = 0; j <= K; ++j) {
    for (std::size_t i = 0; i <= K; ++i) {
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(d);
      e(df_index(j, i, K)) = 1.0;
      Eigen::VectorXcd want = Eigen::VectorXcd::Zero(d);
      want(df_index(i, j, K)) = std::sqrt(m.phi.lambda(j) / m.phi.lambda(i));
      m.s_basis = std::max(m.s_basis, (m.apply_S(e) - want).cwiseAbs().maxCoeff());
      m.j_squared = std::max(m.j_squared, (m.apply_J(m.apply_J(e)) - e).cwiseAbs().maxCoeff());
    }
  }
  const Eigen::VectorXcd phi = m.phi.vector();
  m.j_fixes_phi = (m.apply_J(phi) - phi).norm();
  return m;
}

ModularInvolutionReport modular_involution_check(double beta, double omega, const std::vector<Complex>& samples,
                                                 std::size_t K, double tol, double leak_tol) {
  const ModularTriple m = modular_triple(beta, omega, K);
  const double phi2 = m.phi.norm_squared();
  ModularInvolutionReport out;
  out.samples = samples;
  for (const Complex z : samples) {
    const Eigen::VectorXcd v = kms_vector(displacement_matrix(z, K), m.phi.lambda, K);
    const double leak = 1.0 - v.squaredNorm() / phi2;
    if (leak > leak_tol) {
      throw Error(ErrorKind::TruncationUnsafe, "U1(z) Phi leaks " + std::to_string(leak) + " at K = " +
                                                   std::to_string(K));
    }
    // U1(z)^* Phi = (2 pi)^{1/2} sum_{ij} lambda_j^{1/2} Psi_{ji}(x, y) Psi_{ij}, with
    // (2 pi)^{1/2} Psi_{ji}(x, y) = conj <j|D(z)|i>.
    Eigen::VectorXcd want(v.size());
    for (std::size_t i = 0; i <= K; ++i) {
      for (std::size_t j = 0; j <= K; ++j) {
        want(df_index(i, j, K)) = std::sqrt(m.phi.lambda(j)) * std::conj(displacement_element(j, i, z));
      }
    }
    const double r = (m.apply_S(v) - want).norm();
    out.residuals.push_back(r);
    out.leakage.push_back(std::max(leak, 0.0));
    out.max_residual = std::max(out.max_residual, r);
    out.max_leakage = std::max(out.max_leakage, std::max(leak, 0.0));
  }
  out.passed = out.max_residual <= tol;
  return out;
}

Complex thermal_displacement_pair(Complex w, Complex zA, double beta, double omega) {
  const double nbar = 1.0 / std::expm1(omega * beta);
  const Complex phase = std::exp(0.5 * (w * std::conj(zA) - std::conj(w) * zA));
  return phase * std::exp(-std::norm(w + zA) * (nbar + 0.5));
}

KMSReport kms_check(Complex zA, Complex zB, double beta, double omega, double t, std::size_t K) {
  const ThermalVector phi = thermal_vector(beta, omega, K);
  const Eigen::MatrixXcd A = displacement_matrix(zA, K);
  const Eigen::MatrixXcd B = displacement_matrix(zB, K);
  KMSReport r;
  r.F_t = r.F_continued = r.G_truncated = 0.0;
  Complex inv_t = 0.0, inv_0 = 0.0;
  for (std::size_t n = 0; n <= K; ++n) {
    for (std::size_t m = 0; m <= K; ++m) {
      const double dm = static_cast<double>(m) - static_cast<double>(n);
      const Complex ab = A(n, m) * B(m, n);
      r.F_t += phi.lambda(n) * ab * std::polar(1.0, omega * t * dm);
      // t -> t + i beta, exact on each term of the finite spectral sum.
      r.F_continued += phi.lambda(n) * ab * std::polar(std::exp(-omega * beta * dm), omega * t * dm);
      r.G_truncated += phi.lambda(m) * B(m, n) * A(n, m) * std::polar(1.0, omega * t * dm);
    }
    // alpha_t[A] has diagonal A_nn e^{0}.
    inv_t += phi.lambda(n) * A(n, n) * std::polar(1.0, omega * t * 0.0);
    inv_0 += phi.lambda(n) * A(n, n);
  }
  r.G_exact = thermal_displacement_pair(zB * std::polar(1.0, omega * t), zA, beta, omega);
  r.continuation_residual = std::abs(r.F_continued - r.G_exact);
  r.truncation_consistency = std::abs(r.F_continued - r.G_truncated);
  r.invariance_residual = std::abs(inv_t - inv_0);
  return r;
}

LabeledKet kms_cs(Complex z, double beta, double omega, std::size_t K) {
  const ThermalVector phi = thermal_vector(beta, omega, K);
  LabeledKet ket = double_fock_ket(kms_vector(displacement_matrix(z, K), phi.lambda, K), K, "kms-cs");
  // Mass of each displaced column beyond K, summed from the exact elements on a wider range.
  const std::size_t wide = K + 40 + static_cast<std::size_t>(4.0 * std::norm(z));
  const Eigen::MatrixXcd Dw = displacement_matrix(z, wide);
  double leak = 0.0;
  for (std::size_t n = 0; n <= K; ++n) leak += phi.lambda(n) * Dw.col(n).tail(wide - K).squaredNorm();
  ket.tail_bound = phi.tail_bound + leak;
  ket.params = {{"z_re", z.real()}, {"z_im", z.imag()}, {"beta", beta}, {"omega", omega}};
  return ket;
}

LabeledKet kms_cs_photon_added(Complex z, double beta, double omega, std::size_t K) {
  const ThermalVector phi = thermal_vector(beta, omega, K);
  // (A^dag - conj z) only raises, so levels <= K are exact on the K truncation.
  Eigen::VectorXcd coherent(K + 1);
  for (std::size_t k = 0; k <= K; ++k) coherent(k) = displacement_element(k, 0, z);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero((K + 1) * (K + 1));
  Eigen::VectorXcd cur = coherent;
  for (std::size_t n = 0; n <= K; ++n) {
    if (n > 0) {
      Eigen::VectorXcd next(K + 1);
      for (std::size_t k = 0; k <= K; ++k) {
        next(k) = -std::conj(z) * cur(k) + (k > 0 ? std::sqrt(static_cast<double>(k)) * cur(k - 1) : Complex(0.0));
      }
      cur = next;
    }
    const double w = std::sqrt(phi.lambda(n)) * std::exp(-0.5 * log_factorial(n));
    for (std::size_t m = 0; m <= K; ++m) v(df_index(m, n, K)) = w * cur(m);
  }
  LabeledKet ket = double_fock_ket(v, K, "kms-cs-photon-added");
  ket.params = {{"z_re", z.real()}, {"z_im", z.imag()}, {"beta", beta}, {"omega", omega}};
  return ket;
}

OverlapResult overlap_law(Complex z, std::size_t n, Complex zp, std::size_t m, std::size_t K) {
  if (n > K || m > K) throw Error(ErrorKind::ConfigInvalid, "second index beyond the truncation");
  if (std::max(poisson_tail(std::norm(z), K), poisson_tail(std::norm(zp), K)) > 1e-12) {
    throw Error(ErrorKind::TruncationUnsafe, "coherent column not contained in K = " + std::to_string(K));
  }
  // |z; n> = U1(z) Psi_{0n}: first index carries D(z)|0>, second index fixed at n.
  OverlapResult r;
  r.computed = 0.0;
  if (n == m) {
    for (std::size_t k = 0; k <= K; ++k) {
      r.computed += std::conj(displacement_element(k, 0, z)) * displacement_element(k, 0, zp);
    }
    r.closed_form = std::exp(-0.5 * (std::norm(z) + std::norm(zp)) + std::conj(z) * zp);
  } else {
    r.closed_form = 0.0;
  }
  r.residual = std::abs(r.computed - r.closed_form);
  return r;
}

// ---------------------------------------------------------------------------
// Wigner map

Complex wigner_eval(std::size_t n, std::size_t l, double x, double y) {
  return std::conj(displacement_element(n, l, z_from_xy(x, y))) / std::sqrt(kTwoPi);
}

Complex wigner_overlap(std::size_t n, std::size_t l, std::size_t n2, std::size_t l2, double L, double h) {
  const auto steps = static_cast<long>(std::llround(2.0 * L / h));
  Complex acc = 0.0;
  for (long i = 0; i <= steps; ++i) {
    const double x = -L + i * h;
    const double wx = (i == 0 || i == steps) ? 0.5 : 1.0;
    for (long j = 0; j <= steps; ++j) {
      const double y = -L + j * h;
      const double wy = (j == 0 || j == steps) ? 0.5 : 1.0;
      acc += wx * wy * std::conj(wigner_eval(n, l, x, y)) * wigner_eval(n2, l2, x, y);
    }
  }
  return acc * h * h;
}

IntertwiningReport intertwining_check(const std::vector<std::pair<std::size_t, std::size_t>>& levels, double h,
                                      double tol, double L, double sample) {
  if (!(h > 0.0) || h > 0.1) {
    throw Error(ErrorKind::GridTooCoarse, "finite-difference step h = " + std::to_string(h) + " exceeds 0.1");
  }
  IntertwiningReport out;
  out.h = h;
  const Complex i(0.0, 1.0);
  const auto steps = static_cast<long>(std::llround(2.0 * L / sample));
  for (const auto& [n, l] : levels) {
    IntertwiningRow row{n, l, 0.0, 0.0};
    const double sn = std::sqrt(static_cast<double>(n));
    const double sn1 = std::sqrt(static_cast<double>(n + 1));
    for (long a = 0; a <= steps; ++a) {
      const double x = -L + a * sample;
      for (long b = 0; b <= steps; ++b) {
        const double y = -L + b * sample;
        const Complex psi = wigner_eval(n, l, x, y);
        const Complex dx = (wigner_eval(n, l, x + h, y) - wigner_eval(n, l, x - h, y)) / (2.0 * h);
        const Complex dy = (wigner_eval(n, l, x, y + h) - wigner_eval(n, l, x, y - h)) / (2.0 * h);
        const Complex lower = n > 0 ? wigner_eval(n - 1, l, x, y) : Complex(0.0);
        const Complex upper = wigner_eval(n + 1, l, x, y);
        const Complex q_fd = -i * dx + 0.5 * y * psi;
        const Complex p_fd = -i * dy - 0.5 * x * psi;
        const Complex q_ladder = (sn * lower + sn1 * upper) / kSqrt2;
        const Complex p_ladder = -i * (sn * lower - sn1 * upper) / kSqrt2;
        row.residual_Q = std::max(row.residual_Q, std::abs(q_fd - q_ladder));
        row.residual_P = std::max(row.residual_P, std::abs(p_fd - p_ladder));
      }
    }
    out.max_residual = std::max({out.max_residual, row.residual_Q, row.residual_P});
    out.rows.push_back(row);
  }
  out.passed = out.max_residual <= tol;
  return out;
}

// ---------------------------------------------------------------------------
// Block resolutions

namespace {

struct DiskRule {
  std::vector<Complex> z;
  std::vector<double> w;  // weights for dx dy = 2 r dr dphi
};

DiskRule disk_rule(double R, std::size_t radial = 160, std::size_t angular = 64) {
  const QuadratureRule gl = gauss_legendre(radial, 0.0, R);
  DiskRule d;
  for (std::size_t a = 0; a < gl.size(); ++a) {
    const double r = gl.nodes[a];
    for (std::size_t b = 0; b < angular; ++b) {
      const double phi = kTwoPi * static_cast<double>(b) / static_cast<double>(angular);
      d.z.push_back(std::polar(r, phi));
      d.w.push_back(2.0 * r * gl.weights[a] * kTwoPi / static_cast<double>(angular));
    }
  }
  return d;
}

}  // namespace

BlockResolution kms_block_resolution(double beta, double omega, std::size_t block, double R, std::size_t K) {
  if (block > K) throw Error(ErrorKind::ConfigInvalid, "block exceeds the truncation");
  const ThermalVector phi = thermal_vector(beta, omega, K);
  const std::size_t d = (block + 1) * (block + 1);
  BlockResolution out;
  out.block = block;
  out.matrix = Eigen::MatrixXcd::Zero(d, d);
  const DiskRule rule = disk_rule(R);
  Eigen::VectorXcd c(d);
  for (std::size_t q = 0; q < rule.z.size(); ++q) {
    const Eigen::MatrixXcd D = displacement_matrix(rule.z[q], block);
    for (std::size_t n = 0; n <= block; ++n) {
      for (std::size_t l = 0; l <= block; ++l) c(df_index(n, l, block)) = D(n, l) * std::sqrt(phi.lambda(l));
    }
    out.matrix.noalias() += (rule.w[q] / kTwoPi) * c * c.adjoint();
  }
  Eigen::MatrixXcd thermal = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t n = 0; n <= block; ++n) {
    for (std::size_t l = 0; l <= block; ++l) thermal(df_index(n, l, block), df_index(n, l, block)) = phi.lambda(l);
  }
  out.deviation_from_identity = (out.matrix - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
  out.deviation_from_thermal = (out.matrix - thermal).cwiseAbs().maxCoeff();
  return out;
}

BlockResolution vcs1_block_resolution(std::size_t block, double R) {
  const DiskRule rule = disk_rule(R);
  // I_z(n, n') = int e^{-|z|^2} z^n conj(z)^{n'} / sqrt(n! n'!) dx dy, and the z'
  // factor is its diagonal; component l only touches second index l.
  Eigen::MatrixXcd Iz = Eigen::MatrixXcd::Zero(block + 1, block + 1);
  Eigen::VectorXcd p(block + 1);
  for (std::size_t q = 0; q < rule.z.size(); ++q) {
    const Complex z = rule.z[q];
    const double g = std::exp(-0.5 * std::norm(z));
    for (std::size_t n = 0; n <= block; ++n) {
      p(n) = g * std::pow(z, static_cast<int>(n)) * std::exp(-0.5 * log_factorial(n));
    }
    Iz.noalias() += rule.w[q] * p * p.adjoint();
  }
  const std::size_t d = (block + 1) * (block + 1);
  BlockResolution out;
  out.block = block;
  out.matrix = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t n = 0; n <= block; ++n) {
    for (std::size_t n2 = 0; n2 <= block; ++n2) {
      for (std::size_t l = 0; l <= block; ++l) {
        out.matrix(df_index(n, l, block), df_index(n2, l, block)) = Iz(n, n2) * Iz(l, l) / (kTwoPi * kTwoPi);
      }
    }
  }
  out.deviation_from_identity = (out.matrix - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
  return out;
}

double commutator_inner_norm(Complex z, Complex zp, std::size_t K) {
  const DoubleFockOperator U1 = displacement(z, 1, K, 1.0);
  const DoubleFockOperator U2 = displacement(zp, 2, K, 1.0);
  const SparseC C = U1.matrix * U2.matrix - U2.matrix * U1.matrix;
  double worst = 0.0;
  for (int k = 0; k < C.outerSize(); ++k) {
    for (SparseC::InnerIterator it(C, k); it; ++it) {
      const auto r = static_cast<std::size_t>(it.row()), c = static_cast<std::size_t>(it.col());
      if (r / (K + 1) < K && r % (K + 1) < K && c / (K + 1) < K && c % (K + 1) < K) {
        worst = std::max(worst, std::abs(it.value()));
      }
    }
  }
  return worst;
}

nlohmann::json to_json(const DoubleFockOperator& op) {
  const Eigen::MatrixXcd M = op.dense();
  std::vector<double> data;
  data.reserve(2 * M.size());
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      data.push_back(M(r, c).real());
      data.push_back(M(r, c).imag());
    }
  }
  return {{"name", op.name}, {"K", op.K}, {"rows", M.rows()}, {"cols", M.cols()},
          {"layout", "row-major, re/im interleaved"}, {"leakage", op.leakage}, {"data", data}};
}

std::string to_csv(const DoubleFockOperator& op) {
  const Eigen::MatrixXcd M = op.dense();
  std::ostringstream os;
  char buf[64];
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%s%.17g,%.17g", c ? "," : "", M(r, c).real() + 0.0, M(r, c).imag() + 0.0);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace cohstate
