#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "cohstate/quadrature.hpp"
#include "cohstate/special.hpp"
#include "cohstate/spectrum.hpp"

namespace cohstate {

using Rational = boost::multiprecision::cpp_rational;

/// rho_n = eps_n! d(n).
double target_moment(const EnergySpectrum& spec, const DegeneracySequence& deg, std::size_t n);
double log_target_moment(const EnergySpectrum& spec, const DegeneracySequence& deg, std::size_t n);

/// f~(x) = sum_{n<=N} d_n L_n(x), density f(x) = e^{-x} f~(x).
struct LaguerreSeries {
  std::vector<Rational> coefficients;
  /// Double images of `coefficients`, filled by the constructors below.
  std::vector<double> approx;
  /// <L_n|L_l> = delta_nl verified in exact arithmetic for n, l <= N.
  bool orthonormality_exact = false;
  std::size_t orthonormality_checked_to = 0;

  std::size_t truncation() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }
  const std::vector<double>& values() const { return approx; }
  void refresh_values();
  /// Leading N+1 coefficients (N <= truncation()).
  LaguerreSeries truncated(std::size_t N) const;
};

/// d_n = sum_k C(n, n-k) (-1)^k rho_k / k!.
LaguerreSeries laguerre_coefficients(const std::vector<Rational>& targets);

/// Targets taken from the model. Integer-valued targets are used as is; any
/// other target throws PrecisionLoss unless `allow_rational_lifting`, which
/// takes the exact binary value of the double.
LaguerreSeries laguerre_coefficients(const EnergySpectrum& spec, const DegeneracySequence& deg,
                                     std::size_t N, bool allow_rational_lifting = false);

/// f~_N(x) in any field scalar (Rational gives the exact value).
template <typename Scalar>
Scalar laguerre_sum(const LaguerreSeries& series, const Scalar& x) {
  const auto L = laguerre_table<Scalar>(series.truncation(), x);
  Scalar acc(0);
  for (std::size_t n = 0; n < series.coefficients.size(); ++n) {
    acc += Scalar(series.coefficients[n]) * L[n];
  }
  return acc;
}

template <>
inline double laguerre_sum<double>(const LaguerreSeries& series, const double& x) {
  const auto L = laguerre_table<double>(series.truncation(), x);
  const auto& d = series.values();
  double acc = 0.0;
  for (std::size_t n = 0; n < d.size(); ++n) acc += d[n] * L[n];
  return acc;
}

struct DensityValue {
  double value = 0.0;
  /// Always set for Laguerre series: the value is that of the truncated sum.
  bool truncated_series = false;
};

DensityValue density_eval(const LaguerreSeries& series, double x);

/// Closed-form density c * x^p * e^{-x} ("gamma") or c on [0, L) ("uniform").
struct ClosedFormDensity {
  std::string family;
  double coefficient = 1.0;
  double power = 0.0;

  double operator()(double x) const;
};

struct RadialMeasure {
  std::string model_tag;
  double support_end = std::numeric_limits<double>::infinity();
  std::optional<ClosedFormDensity> density;
  std::optional<LaguerreSeries> laguerre;
  std::vector<std::pair<double, double>> atoms;
  bool nonpositive_somewhere = false;
  std::string note;

  bool finite_support() const { return std::isfinite(support_end); }
  double density_at(double x) const;
};

/// Known closed forms: linear, example1, example3, ratio, two-fermion.
/// example2 throws NoClosedForm.
RadialMeasure closed_form_measure(const std::string& model_tag);

/// Signed density from the Laguerre route, flagged when negative values are seen.
RadialMeasure laguerre_measure(const std::string& model_tag, LaguerreSeries series);

nlohmann::json to_json(const RadialMeasure& measure);
RadialMeasure measure_from_json(const nlohmann::json& j);

struct QuadratureOptions {
  std::size_t laguerre_nodes = 128;
  std::size_t legendre_nodes = 64;
  std::size_t max_nodes = 512;
};

struct MomentRow {
  std::size_t n = 0;
  double computed = 0.0;
  double target = 0.0;
  double relative_error = 0.0;
};

struct MomentReport {
  std::string model_tag;
  std::vector<MomentRow> rows;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  QuadratureFamily quadrature = QuadratureFamily::GaussLaguerre;
  std::size_t nodes = 0;
};

/// int J^n dnu for a single n with a given rule.
double measure_moment(const RadialMeasure& measure, std::size_t n, const QuadratureRule& rule);

/// Moments n <= n_max against eps_n! d(n). The node count doubles while the
/// rule disagrees with its refinement; QuadratureFailure when max_nodes is
/// reached without self-agreement.
MomentReport verify_moments(const RadialMeasure& measure, const EnergySpectrum& spec,
                            const DegeneracySequence& deg, std::size_t n_max,
                            const QuadratureOptions& quad, double tol);

/// Bump psi(x) = A exp(-s / (1 - u^2)), u = (2x - a - b)/(b - a), on [a, b] in [0, 1].
/// A is fixed so that max_{k <= 8} int |psi^(k)| = 1.
class TestFunction {
 public:
  static constexpr std::size_t kCertifiedOrder = 8;

  TestFunction(std::string name, double a, double b, double sharpness);

  static TestFunction standard();
  static TestFunction narrow();

  /// psi, psi', ..., psi^(k_max) at x.
  std::vector<double> derivatives(double x, std::size_t k_max) const;
  double operator()(double x) const { return derivatives(x, 0)[0]; }

  /// int_a^b |psi^(k)| for k <= k_max.
  std::vector<double> derivative_l1_norms(std::size_t k_max) const;
  /// Throws TestFunctionOutOfClass unless every norm up to kCertifiedOrder is <= 1.
  void certify() const;

  const std::string& name() const { return name_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double sharpness() const { return s_; }
  double scale() const { return scale_; }

 private:
  std::vector<double> raw_derivatives(double x, std::size_t k_max) const;

  std::string name_;
  double a_;
  double b_;
  double s_;
  double scale_ = 1.0;
};

struct WeakPairing {
  double value = 0.0;
  double quadrature_error = 0.0;
  /// sum_{M<n<=N} |d_n| 2^n / n!
  double analytic_bound = 0.0;
  /// sum_{M<n<=N} |d_n|/n! int |x^n (1 + d/dx)^n phi|, the sharper middle term.
  double integrated_bound = 0.0;
  bool within_bound = false;
};

/// I_NM = int_0^1 (f~_N - f~_M) phi dx for N >= M.
WeakPairing weak_pairing(const LaguerreSeries& series_N, const LaguerreSeries& series_M,
                         const TestFunction& phi);

/// sum_{n=M+1}^N |d_n| 2^n / n!.
double weak_pairing_bound(const LaguerreSeries& series, std::size_t M, std::size_t N);

}  // namespace cohstate
