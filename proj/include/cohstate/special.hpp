#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace cohstate {

/// Laguerre polynomials L_0(x)..L_n(x) by the three-term recurrence
///   (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}.
/// Works for any field-like scalar (double, long double, rationals).
template <typename Scalar>
std::vector<Scalar> laguerre_table(std::size_t n, const Scalar& x) {
  std::vector<Scalar> out;
  out.reserve(n + 1);
  out.push_back(Scalar(1));
  if (n == 0) return out;
  out.push_back(Scalar(1) - x);
  for (std::size_t k = 1; k < n; ++k) {
    const Scalar kk(static_cast<long long>(k));
    Scalar next = (Scalar(static_cast<long long>(2 * k + 1)) - x) * out[k] - kk * out[k - 1];
    next /= Scalar(static_cast<long long>(k + 1));
    out.push_back(next);
  }
  return out;
}

template <typename Scalar>
Scalar laguerre(std::size_t n, const Scalar& x) {
  return laguerre_table(n, x).back();
}

/// Associated Laguerre L_n^{(alpha)}(x), integer alpha >= 0.
template <typename Scalar>
Scalar assoc_laguerre(std::size_t n, std::size_t alpha, const Scalar& x) {
  Scalar prev(1);
  if (n == 0) return prev;
  const Scalar a(static_cast<long long>(alpha));
  Scalar cur = Scalar(1) + a - x;
  for (std::size_t k = 1; k < n; ++k) {
    const Scalar kk(static_cast<long long>(k));
    Scalar next = (Scalar(static_cast<long long>(2 * k + 1)) + a - x) * cur - (kk + a) * prev;
    next /= Scalar(static_cast<long long>(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

inline double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace cohstate
