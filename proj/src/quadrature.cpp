#include "cohstate/quadrature.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "cohstate/error.hpp"

namespace cohstate {

namespace {

// Newton polishing and weights run in long double; the double eigenvalues
// only seed the iteration.
using Real = long double;

Eigen::VectorXd jacobi_eigenvalues(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::QuadratureFailure, "Jacobi eigenvalue solve did not converge");
  }
  return solver.eigenvalues();
}

// L_n(x), L_{n-1}(x) with a running power-of-two scale so large nodes do
// not overflow. True value = mantissa * 2^scale.
struct ScaledPair {
  Real ln;
  Real lnm1;
  int scale;
};

ScaledPair laguerre_scaled(std::size_t n, Real x) {
  if (n == 0) return {1.0L, 0.0L, 0};
  Real prev = 1.0L;
  Real cur = 1.0L - x;
  int scale = 0;
  for (std::size_t k = 1; k < n; ++k) {
    const Real next = ((2.0L * k + 1.0L - x) * cur - k * prev) / (k + 1.0L);
    prev = cur;
    cur = next;
    if (std::abs(cur) > 0x1p400L) {
      cur = std::ldexp(cur, -400);
      prev = std::ldexp(prev, -400);
      scale += 400;
    }
  }
  return {cur, prev, scale};
}

struct LegendrePair {
  Real pn;
  Real dpn;
};

LegendrePair legendre_eval(std::size_t n, Real x) {
  Real p0 = 1.0L, p1 = x;
  for (std::size_t k = 1; k < n; ++k) {
    const Real p2 = ((2.0L * k + 1.0L) * x * p1 - k * p0) / (k + 1.0L);
    p0 = p1;
    p1 = p2;
  }
  if (n == 1) p0 = 1.0L;
  return {p1, n * (x * p1 - p0) / (x * x - 1.0L)};
}

}  // namespace

QuadratureRule gauss_laguerre(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::QuadratureFailure, "Gauss-Laguerre needs n >= 1");
  Eigen::VectorXd diag(n), sub(n > 1 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) diag(i) = 2.0 * i + 1.0;
  for (std::size_t i = 1; i < n; ++i) sub(i - 1) = static_cast<double>(i);
  const Eigen::VectorXd x0 = jacobi_eigenvalues(diag, sub);

  QuadratureRule rule;
  rule.family = QuadratureFamily::GaussLaguerre;
  rule.a = 0.0;
  rule.b = std::numeric_limits<double>::infinity();
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Real x = x0(i);
    for (int it = 0; it < 10; ++it) {
      const auto p = laguerre_scaled(n, x);
      const Real dp = n * (p.ln - p.lnm1) / x;
      const Real step = p.ln / dp;
      x -= step;
      if (std::abs(step) <= 1e-19L * x) break;
    }
    // w = x / ((n+1) L_{n+1}(x))^2
    const auto p = laguerre_scaled(n + 1, x);
    const Real denom = (n + 1.0L) * p.ln;
    rule.nodes[i] = static_cast<double>(x);
    rule.weights[i] = static_cast<double>(std::ldexp(x / (denom * denom), -2 * p.scale));
  }
  return rule;
}

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw Error(ErrorKind::QuadratureFailure, "Gauss-Legendre needs n >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(n > 1 ? n - 1 : 0);
  for (std::size_t k = 1; k < n; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  const Eigen::VectorXd x0 = jacobi_eigenvalues(diag, sub);

  QuadratureRule rule;
  rule.family = QuadratureFamily::GaussLegendre;
  rule.a = a;
  rule.b = b;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const Real half = 0.5L * (static_cast<Real>(b) - a);
  const Real mid = 0.5L * (static_cast<Real>(a) + b);
  for (std::size_t i = 0; i < n; ++i) {
    Real x = x0(i);
    for (int it = 0; it < 10; ++it) {
      const auto p = legendre_eval(n, x);
      const Real step = p.pn / p.dpn;
      x -= step;
      if (std::abs(step) <= 1e-20L) break;
    }
    const auto p = legendre_eval(n, x);
    rule.nodes[i] = static_cast<double>(mid + half * x);
    rule.weights[i] = static_cast<double>(half * 2.0L / ((1.0L - x * x) * p.dpn * p.dpn));
  }
  return rule;
}

std::string to_string(QuadratureFamily family) {
  return family == QuadratureFamily::GaussLaguerre ? "gauss-laguerre" : "gauss-legendre";
}

}  // namespace cohstate
