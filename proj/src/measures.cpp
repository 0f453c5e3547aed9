#include "cohstate/measures.hpp"

#include <algorithm>
#include <cmath>

#include "cohstate/error.hpp"

namespace cohstate {

using boost::multiprecision::cpp_int;

double target_moment(const EnergySpectrum& spec, const DegeneracySequence& deg, std::size_t n) {
  return eps_factorial(spec, n) * static_cast<double>(deg.at(n));
}

double log_target_moment(const EnergySpectrum& spec, const DegeneracySequence& deg, std::size_t n) {
  return log_eps_factorial(spec, n) + std::log(static_cast<double>(deg.at(n)));
}

// ---------------------------------------------------------------------------
// Laguerre series

namespace {

cpp_int factorial(std::size_t n) {
  cpp_int f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

cpp_int binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  cpp_int c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return c;
}

Rational lift(double v) {
  int exp = 0;
  const double mant = std::frexp(v, &exp);
  // mant * 2^53 is an exact integer.
  const auto m = static_cast<long long>(std::ldexp(mant, 53));
  Rational r(m);
  exp -= 53;
  if (exp >= 0) {
    r *= Rational(cpp_int(1) << exp);
  } else {
    r /= Rational(cpp_int(1) << (-exp));
  }
  return r;
}

constexpr std::size_t kOrthonormalityCap = 20;

bool laguerre_orthonormal_exact(std::size_t N) {
  // Monomial coefficients c_{n,k} = C(n,k) (-1)^k / k!, <x^a, x^b> = (a+b)!.
  std::vector<std::vector<Rational>> c(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    for (std::size_t k = 0; k <= n; ++k) {
      Rational v(binomial(n, k), factorial(k));
      c[n].push_back(k % 2 ? Rational(-v) : v);
    }
  }
  std::vector<cpp_int> fact(2 * N + 1);
  for (std::size_t m = 0; m <= 2 * N; ++m) fact[m] = factorial(m);
  for (std::size_t n = 0; n <= N; ++n) {
    for (std::size_t l = n; l <= N; ++l) {
      Rational acc(0);
      for (std::size_t a = 0; a <= n; ++a) {
        for (std::size_t b = 0; b <= l; ++b) acc += c[n][a] * c[l][b] * Rational(fact[a + b]);
      }
      if (acc != Rational(n == l ? 1 : 0)) return false;
    }
  }
  return true;
}

}  // namespace

void LaguerreSeries::refresh_values() {
  approx.clear();
  approx.reserve(coefficients.size());
  for (const auto& d : coefficients) approx.push_back(d.convert_to<double>());
}

LaguerreSeries LaguerreSeries::truncated(std::size_t N) const {
  if (N > truncation()) {
    throw Error(ErrorKind::ConfigInvalid, "cannot extend a Laguerre series by truncation");
  }
  LaguerreSeries out = *this;
  out.coefficients.resize(N + 1);
  out.refresh_values();
  out.orthonormality_checked_to = std::min(orthonormality_checked_to, N);
  return out;
}

LaguerreSeries laguerre_coefficients(const std::vector<Rational>& targets) {
  if (targets.empty()) throw Error(ErrorKind::ConfigInvalid, "no moment targets");
  const std::size_t N = targets.size() - 1;
  LaguerreSeries out;
  out.coefficients.reserve(N + 1);
  std::vector<Rational> scaled(N + 1);
  for (std::size_t k = 0; k <= N; ++k) scaled[k] = targets[k] / Rational(factorial(k));
  for (std::size_t n = 0; n <= N; ++n) {
    Rational d(0);
    for (std::size_t k = 0; k <= n; ++k) {
      const Rational term = Rational(binomial(n, n - k)) * scaled[k];
      if (k % 2) {
        d -= term;
      } else {
        d += term;
      }
    }
    out.coefficients.push_back(d);
  }
  out.refresh_values();
  out.orthonormality_checked_to = std::min(N, kOrthonormalityCap);
  out.orthonormality_exact = laguerre_orthonormal_exact(out.orthonormality_checked_to);
  return out;
}

LaguerreSeries laguerre_coefficients(const EnergySpectrum& spec, const DegeneracySequence& deg,
                                     std::size_t N, bool allow_rational_lifting) {
  std::vector<Rational> targets;
  targets.reserve(N + 1);
  bool integer_levels = spec.eps(0) == 0.0;
  for (std::size_t k = 1; k <= N && integer_levels; ++k) {
    const double e = spec.eps(k);
    integer_levels = e == std::floor(e) && e < 0x1p53;
  }
  if (integer_levels) {
    (void)eps_factorial(spec, 0);  // ordering and shift checks
    (void)log_eps_factorials(spec, N);
    cpp_int fact = 1;
    for (std::size_t n = 0; n <= N; ++n) {
      if (n > 0) fact *= static_cast<long long>(spec.eps(n));
      targets.emplace_back(fact * deg.at(n));
    }
    return laguerre_coefficients(targets);
  }
  for (std::size_t n = 0; n <= N; ++n) {
    const double rho = target_moment(spec, deg, n);
    if (rho == std::floor(rho) && std::abs(rho) < 0x1p53) {
      targets.emplace_back(static_cast<long long>(rho));
    } else if (allow_rational_lifting) {
      targets.push_back(lift(rho));
    } else {
      throw Error(ErrorKind::PrecisionLoss, "rho_" + std::to_string(n) + " = " +
                                                std::to_string(rho) + " is not an exact integer");
    }
  }
  return laguerre_coefficients(targets);
}

DensityValue density_eval(const LaguerreSeries& series, double x) {
  return {std::exp(-x) * laguerre_sum<double>(series, x), true};
}

// ---------------------------------------------------------------------------
// Measures

double ClosedFormDensity::operator()(double x) const {
  if (family == "gamma") {
    if (power == 0.0) return coefficient * std::exp(-x);
    if (x <= 0.0) return 0.0;
    return coefficient * std::exp(power * std::log(x) - x);
  }
  if (family == "uniform") return coefficient;
  throw Error(ErrorKind::ConfigInvalid, "unknown density family '" + family + "'");
}

double RadialMeasure::density_at(double x) const {
  if (x < 0.0 || x >= support_end) return 0.0;
  if (density) return (*density)(x);
  if (laguerre) return density_eval(*laguerre, x).value;
  return 0.0;
}

RadialMeasure closed_form_measure(const std::string& tag) {
  RadialMeasure m;
  m.model_tag = tag;
  if (tag == "linear" || tag == "two-fermion") {
    m.density = ClosedFormDensity{"gamma", 1.0, 0.0};
    if (tag == "two-fermion") m.note = "per-branch measure; every branch shifts to eps_n = n";
  } else if (tag == "example1") {
    m.density = ClosedFormDensity{"gamma", 2.0, 0.0};
    m.atoms.emplace_back(0.0, -1.0);
    m.nonpositive_somewhere = true;
  } else if (tag == "example3") {
    m.density = ClosedFormDensity{"gamma", 0.5, 2.0};
    m.note = "N(J) dnu = J^2/2 dJ with N(J) = e^J; equals r^5 dr under J = r^2";
  } else if (tag == "ratio") {
    m.support_end = 1.0;
    m.density = ClosedFormDensity{"uniform", 1.0, 0.0};
    m.note = "eps_n = n/(n+1), eps_n! = 1/(n+1)";
  } else if (tag == "example2") {
    throw Error(ErrorKind::NoClosedForm, "example2 has no closed-form measure; use the Laguerre series");
  } else {
    throw Error(ErrorKind::NoClosedForm, "no closed-form measure for '" + tag + "'");
  }
  return m;
}

RadialMeasure laguerre_measure(const std::string& tag, LaguerreSeries series) {
  RadialMeasure m;
  m.model_tag = tag;
  m.note = "truncated Laguerre series at N = " + std::to_string(series.truncation());
  // Sign scan on a fixed grid; the series is a polynomial times e^{-x}.
  for (int i = 0; i <= 4000 && !m.nonpositive_somewhere; ++i) {
    const double x = 0.01 * i;
    if (laguerre_sum<double>(series, x) < 0.0) m.nonpositive_somewhere = true;
  }
  m.laguerre = std::move(series);
  return m;
}

namespace {

nlohmann::json encode_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode_real(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::ConfigInvalid, "bad real '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

nlohmann::json to_json(const RadialMeasure& m) {
  nlohmann::json j;
  j["model"] = m.model_tag;
  j["support"] = {0.0, encode_real(m.support_end)};
  if (m.density) {
    j["density"] = {{"family", m.density->family},
                    {"params", {{"coefficient", m.density->coefficient}, {"power", m.density->power}}}};
  } else if (m.laguerre) {
    nlohmann::json exact = nlohmann::json::array();
    for (const auto& d : m.laguerre->coefficients) exact.push_back(d.str());
    j["density"] = {{"laguerre", m.laguerre->values()}, {"laguerre_exact", exact}};
  }
  j["atoms"] = nlohmann::json::array();
  for (const auto& [x, w] : m.atoms) j["atoms"].push_back({x, w});
  j["nonpositive_somewhere"] = m.nonpositive_somewhere;
  if (!m.note.empty()) j["note"] = m.note;
  return j;
}

RadialMeasure measure_from_json(const nlohmann::json& j) {
  RadialMeasure m;
  try {
    m.model_tag = j.value("model", "");
    m.support_end = decode_real(j.at("support").at(1));
    const auto& dens = j.at("density");
    if (dens.contains("family")) {
      const auto& p = dens.at("params");
      m.density = ClosedFormDensity{dens.at("family").get<std::string>(), p.value("coefficient", 1.0),
                                    p.value("power", 0.0)};
    } else if (dens.contains("laguerre_exact") || dens.contains("laguerre")) {
      LaguerreSeries s;
      if (dens.contains("laguerre_exact")) {
        for (const auto& d : dens.at("laguerre_exact")) s.coefficients.emplace_back(d.get<std::string>());
      } else {
        for (const auto& d : dens.at("laguerre")) s.coefficients.push_back(lift(d.get<double>()));
      }
      s.refresh_values();
      m.laguerre = std::move(s);
    }
    for (const auto& a : j.value("atoms", nlohmann::json::array())) {
      m.atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    }
    m.nonpositive_somewhere = j.value("nonpositive_somewhere", false);
    m.note = j.value("note", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("measure JSON: ") + e.what());
  }
  return m;
}

double measure_moment(const RadialMeasure& m, std::size_t n, const QuadratureRule& rule) {
  const double dn = static_cast<double>(n);
  double acc = 0.0;
  if (rule.family == QuadratureFamily::GaussLaguerre) {
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double x = rule.nodes[i];
      double g = 0.0;  // density * e^{x}
      if (m.density && m.density->family == "gamma") {
        g = m.density->coefficient * std::exp((dn + m.density->power) * std::log(x));
      } else if (m.laguerre) {
        g = std::pow(x, dn) * laguerre_sum<double>(*m.laguerre, x);
      } else if (m.density) {
        throw Error(ErrorKind::QuadratureFailure,
                    "Gauss-Laguerre needs an e^{-x}-weighted density, got '" + m.density->family + "'");
      }
      acc += rule.weights[i] * g;
    }
  } else {
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double x = rule.nodes[i];
      acc += rule.weights[i] * std::pow(x, dn) * m.density_at(x);
    }
  }
  for (const auto& [x, w] : m.atoms) acc += w * (n == 0 ? 1.0 : std::pow(x, dn));
  return acc;
}

MomentReport verify_moments(const RadialMeasure& m, const EnergySpectrum& spec,
                            const DegeneracySequence& deg, std::size_t n_max,
                            const QuadratureOptions& quad, double tol) {
  MomentReport rep;
  rep.model_tag = m.model_tag;
  rep.tolerance = tol;
  const bool finite = m.finite_support();
  rep.quadrature = finite ? QuadratureFamily::GaussLegendre : QuadratureFamily::GaussLaguerre;
  auto make_rule = [&](std::size_t nodes) {
    return finite ? gauss_legendre(nodes, 0.0, m.support_end) : gauss_laguerre(nodes);
  };
  auto moments = [&](const QuadratureRule& rule) {
    std::vector<double> out;
    for (std::size_t n = 0; n <= n_max; ++n) out.push_back(measure_moment(m, n, rule));
    return out;
  };

  std::size_t nodes = finite ? quad.legendre_nodes : quad.laguerre_nodes;
  std::vector<double> coarse = moments(make_rule(nodes));
  for (;;) {
    if (2 * nodes > quad.max_nodes) {
      throw Error(ErrorKind::QuadratureFailure, "moments not stable at " + std::to_string(nodes) +
                                                    " nodes (max " + std::to_string(quad.max_nodes) + ")");
    }
    const std::vector<double> fine = moments(make_rule(2 * nodes));
    bool agree = true;
    for (std::size_t n = 0; n <= n_max; ++n) {
      const double scale = std::max(std::abs(fine[n]), 1.0);
      if (!(std::abs(fine[n] - coarse[n]) <= 0.1 * tol * scale)) agree = false;
    }
    if (agree) break;
    nodes *= 2;
    coarse = fine;
  }
  rep.nodes = nodes;
  rep.passed = true;
  for (std::size_t n = 0; n <= n_max; ++n) {
    MomentRow row;
    row.n = n;
    row.computed = coarse[n];
    row.target = target_moment(spec, deg, n);
    row.relative_error = std::abs(row.computed / row.target - 1.0);
    rep.max_relative_error = std::max(rep.max_relative_error, row.relative_error);
    if (!(row.relative_error <= tol)) rep.passed = false;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Test functions

namespace {

struct Panels {
  std::vector<double> x;
  std::vector<double> w;
};

Panels composite_legendre(double a, double b, std::size_t panels, std::size_t order) {
  const QuadratureRule ref = gauss_legendre(order, 0.0, 1.0);
  Panels out;
  const double h = (b - a) / panels;
  for (std::size_t p = 0; p < panels; ++p) {
    for (std::size_t i = 0; i < ref.size(); ++i) {
      out.x.push_back(a + h * (p + ref.nodes[i]));
      out.w.push_back(h * ref.weights[i]);
    }
  }
  return out;
}

double factorial_d(std::size_t n) { return std::exp(std::lgamma(n + 1.0)); }

}  // namespace

TestFunction::TestFunction(std::string name, double a, double b, double sharpness)
    : name_(std::move(name)), a_(a), b_(b), s_(sharpness) {
  if (!(a >= 0.0 && b <= 1.0 && a < b && sharpness > 0.0)) {
    throw Error(ErrorKind::TestFunctionOutOfClass, "bump must satisfy 0 <= a < b <= 1 and s > 0");
  }
  const auto norms = derivative_l1_norms(kCertifiedOrder);
  scale_ = 1.0 / *std::max_element(norms.begin(), norms.end());
}

TestFunction TestFunction::standard() { return {"standard", 0.0, 1.0, 1.0}; }

TestFunction TestFunction::narrow() { return {"narrow", 0.2, 0.7, 0.5}; }

std::vector<double> TestFunction::raw_derivatives(double x, std::size_t k_max) const {
  std::vector<double> out(k_max + 1, 0.0);
  const double alpha = 2.0 / (b_ - a_);
  const double u0 = alpha * x - (a_ + b_) / (b_ - a_);
  const double q0 = 1.0 - u0 * u0;
  if (!(q0 > 0.0)) return out;
  const double g0 = -s_ / q0;
  if (g0 < -700.0) return out;
  const double q1 = -2.0 * alpha * u0;
  const double q2 = -alpha * alpha;
  // Taylor coefficients of 1/q, then of g = -s/q, then of exp(g).
  std::vector<double> r(k_max + 1), g(k_max + 1), e(k_max + 1);
  r[0] = 1.0 / q0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    double acc = q1 * r[k - 1];
    if (k >= 2) acc += q2 * r[k - 2];
    r[k] = -acc / q0;
  }
  for (std::size_t k = 0; k <= k_max; ++k) g[k] = -s_ * r[k];
  e[0] = std::exp(g0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= k; ++j) acc += j * g[j] * e[k - j];
    e[k] = acc / k;
  }
  double fact = 1.0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (k > 0) fact *= k;
    out[k] = fact * e[k];
  }
  return out;
}

std::vector<double> TestFunction::derivatives(double x, std::size_t k_max) const {
  auto d = raw_derivatives(x, k_max);
  for (auto& v : d) v *= scale_;
  return d;
}

std::vector<double> TestFunction::derivative_l1_norms(std::size_t k_max) const {
  const Panels q = composite_legendre(a_, b_, 400, 12);
  std::vector<double> norms(k_max + 1, 0.0);
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    const auto d = derivatives(q.x[i], k_max);
    for (std::size_t k = 0; k <= k_max; ++k) norms[k] += q.w[i] * std::abs(d[k]);
  }
  return norms;
}

void TestFunction::certify() const {
  const auto norms = derivative_l1_norms(kCertifiedOrder);
  for (std::size_t k = 0; k < norms.size(); ++k) {
    if (norms[k] > 1.0 + 1e-9) {
      throw Error(ErrorKind::TestFunctionOutOfClass,
                  name_ + ": int |phi^(" + std::to_string(k) + ")| = " + std::to_string(norms[k]) + " > 1");
    }
  }
}

double weak_pairing_bound(const LaguerreSeries& series, std::size_t M, std::size_t N) {
  double acc = 0.0;
  for (std::size_t n = M + 1; n <= N && n <= series.truncation(); ++n) {
    acc += std::abs(series.values()[n]) * std::exp(n * std::log(2.0) - std::lgamma(n + 1.0));
  }
  return acc;
}

WeakPairing weak_pairing(const LaguerreSeries& series_N, const LaguerreSeries& series_M,
                         const TestFunction& phi) {
  const std::size_t N = series_N.truncation();
  const std::size_t M = series_M.truncation();
  if (N < M) throw Error(ErrorKind::ConfigInvalid, "weak_pairing needs N >= M");
  phi.certify();

  std::vector<double> diff(N + 1, 0.0);
  for (std::size_t n = 0; n <= N; ++n) {
    Rational d = series_N.coefficients[n];
    if (n <= M) d -= series_M.coefficients[n];
    diff[n] = d.convert_to<double>();
  }

  WeakPairing out;
  bool any = false;
  for (double d : diff) any = any || d != 0.0;
  if (!any) {
    out.within_bound = true;
    return out;
  }

  auto pairing = [&](std::size_t panels) {
    const Panels q = composite_legendre(phi.a(), phi.b(), panels, 16);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      const auto L = laguerre_table<double>(N, q.x[i]);
      double f = 0.0;
      for (std::size_t n = 0; n <= N; ++n) f += diff[n] * L[n];
      acc += q.w[i] * f * phi(q.x[i]);
    }
    return acc;
  };
  const double coarse = pairing(64);
  out.value = pairing(128);
  out.quadrature_error = std::abs(out.value - coarse);

  for (std::size_t n = 0; n <= N; ++n) {
    if (diff[n] != 0.0) out.analytic_bound += std::abs(diff[n]) * std::ldexp(1.0, static_cast<int>(n)) / factorial_d(n);
  }

  // sum |d_n|/n! int |x^n sum_k C(n,k) phi^(k)|
  const Panels q = composite_legendre(phi.a(), phi.b(), 256, 16);
  for (std::size_t n = 0; n <= N; ++n) {
    if (diff[n] == 0.0) continue;
    double integral = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      const auto d = phi.derivatives(q.x[i], n);
      double binom = 1.0;
      double s = 0.0;
      for (std::size_t k = 0; k <= n; ++k) {
        s += binom * d[k];
        binom = binom * (n - k) / (k + 1.0);
      }
      integral += q.w[i] * std::abs(std::pow(q.x[i], static_cast<double>(n)) * s);
    }
    out.integrated_bound += std::abs(diff[n]) / factorial_d(n) * integral;
  }
  out.within_bound = std::abs(out.value) <= out.analytic_bound + out.quadrature_error + 1e-12;
  return out;
}

}  // namespace cohstate
