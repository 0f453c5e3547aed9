#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cohstate {

enum class QuadratureFamily { GaussLaguerre, GaussLegendre };

/// Nodes and weights; for Gauss-Laguerre the weight e^{-x} is folded into
/// the weights, so sum_i w_i f(x_i) ~ int_0^inf f(x) e^{-x} dx.
struct QuadratureRule {
  QuadratureFamily family = QuadratureFamily::GaussLaguerre;
  std::vector<double> nodes;
  std::vector<double> weights;
  double a = 0.0;
  double b = 0.0;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Golub-Welsch eigenvalues of the Jacobi matrix, Newton-polished.
QuadratureRule gauss_laguerre(std::size_t n);

/// Gauss-Legendre on [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0);

std::string to_string(QuadratureFamily family);

}  // namespace cohstate
