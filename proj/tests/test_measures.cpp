#include <doctest.h>

#include <cmath>

#include "cohstate/error.hpp"
#include "cohstate/measures.hpp"

using namespace cohstate;

namespace {

const EnergySpectrum kLinear = EnergySpectrum::linear();

EnergySpectrum ratio_spectrum() {
  return EnergySpectrum::from_rule([](std::size_t n) { return n / (n + 1.0); }, "ratio");
}

}  // namespace

TEST_CASE("quadrature rules integrate polynomials") {
  const auto gl = gauss_laguerre(128);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i) s += gl.weights[i];
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  double m7 = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i) m7 += gl.weights[i] * std::pow(gl.nodes[i], 7);
  CHECK(m7 == doctest::Approx(5040.0).epsilon(1e-12));

  const auto leg = gauss_legendre(64, 0.0, 2.0);
  double c = 0.0;
  for (std::size_t i = 0; i < leg.size(); ++i) c += leg.weights[i] * std::pow(leg.nodes[i], 9);
  CHECK(c == doctest::Approx(std::pow(2.0, 10) / 10).epsilon(1e-13));

  const auto big = gauss_laguerre(512);
  double s2 = 0.0;
  for (double w : big.weights) s2 += w;
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("target moments") {
  CHECK(target_moment(kLinear, DegeneracySequence::example1(), 0) == 1.0);
  CHECK(target_moment(kLinear, DegeneracySequence::example1(), 3) == 12.0);
  CHECK(target_moment(kLinear, DegeneracySequence::example2(), 4) == 72.0);
  CHECK(target_moment(kLinear, DegeneracySequence::example2(), 5) == 360.0);
  CHECK(target_moment(kLinear, DegeneracySequence::example3(), 2) == 12.0);
}

TEST_CASE("example2 laguerre coefficients are exact") {
  const auto series = laguerre_coefficients(kLinear, DegeneracySequence::example2(), 16);
  CHECK(series.coefficients[0] == Rational(1));
  CHECK(series.coefficients[1] == Rational(0));
  for (std::size_t n = 2; n <= 16; ++n) {
    CHECK(series.coefficients[n] == Rational(boost::multiprecision::cpp_int(1) << (n - 2)));
  }
  CHECK(series.orthonormality_exact);
  CHECK(series.orthonormality_checked_to == 16);
}

TEST_CASE("laguerre coefficient precision policy") {
  const auto ratio = ratio_spectrum();
  const auto one = DegeneracySequence::constant_one();
  try {
    laguerre_coefficients(ratio, one, 4);
    FAIL("expected PrecisionLoss");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PrecisionLoss);
  }
  const auto lifted = laguerre_coefficients(ratio, one, 4, true);
  CHECK(lifted.coefficients.size() == 5);
}

TEST_CASE("density evaluation") {
  LaguerreSeries unit = laguerre_coefficients({Rational(1)});
  CHECK(density_eval(unit, 1.3).value == doctest::Approx(std::exp(-1.3)).epsilon(1e-15));

  const auto ex2 = laguerre_coefficients(kLinear, DegeneracySequence::example2(), 12);
  double sum_d = 0.0;
  for (double d : ex2.values()) sum_d += d;
  CHECK(density_eval(ex2, 0.0).value == sum_d);

  // f~_12(2) in exact arithmetic and the density e^{-2} f~_12(2).
  CHECK(laguerre_sum<Rational>(ex2, Rational(2)) == Rational(-90846934, 93555));
  const auto f2 = density_eval(ex2, 2.0);
  CHECK(f2.value == doctest::Approx(-131.41783489998246597).epsilon(1e-11));
  CHECK(f2.truncated_series);
}

TEST_CASE("laguerre orthonormality by gauss-laguerre") {
  const auto gl = gauss_laguerre(64);
  double worst = 0.0;
  for (std::size_t n = 0; n <= 12; ++n) {
    for (std::size_t l = 0; l <= 12; ++l) {
      double acc = 0.0;
      for (std::size_t i = 0; i < gl.size(); ++i) {
        acc += gl.weights[i] * laguerre(n, gl.nodes[i]) * laguerre(l, gl.nodes[i]);
      }
      worst = std::max(worst, std::abs(acc - (n == l ? 1.0 : 0.0)));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("closed form measures") {
  const auto ex1 = closed_form_measure("example1");
  REQUIRE(ex1.atoms.size() == 1);
  CHECK(ex1.atoms[0].first == 0.0);
  CHECK(ex1.atoms[0].second == -1.0);
  CHECK(ex1.density->coefficient == 2.0);
  CHECK(ex1.nonpositive_somewhere);
  CHECK(closed_form_measure("linear").density->coefficient == 1.0);
  try {
    closed_form_measure("example2");
    FAIL("expected NoClosedForm");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoClosedForm);
  }
}

TEST_CASE("moment verification") {
  const QuadratureOptions quad;
  const auto rule = gauss_laguerre(128);
  const auto ex1 = closed_form_measure("example1");
  CHECK(measure_moment(ex1, 0, rule) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(measure_moment(ex1, 5, rule) == doctest::Approx(240.0).epsilon(1e-8));
  CHECK(measure_moment(closed_form_measure("linear"), 7, rule) == doctest::Approx(5040.0).epsilon(1e-12));

  struct Case {
    const char* tag;
    EnergySpectrum spec;
    DegeneracySequence deg;
  };
  const Case cases[] = {
      {"linear", kLinear, DegeneracySequence::constant_one()},
      {"example1", kLinear, DegeneracySequence::example1()},
      {"example3", kLinear, DegeneracySequence::example3()},
      {"two-fermion", kLinear, DegeneracySequence::constant_one()},
      {"ratio", ratio_spectrum(), DegeneracySequence::constant_one()},
  };
  for (const auto& c : cases) {
    CAPTURE(c.tag);
    const auto rep = verify_moments(closed_form_measure(c.tag), c.spec, c.deg, 12, quad, 1e-8);
    CHECK(rep.passed);
    CHECK(rep.max_relative_error <= 1e-8);
  }
  const auto rat = verify_moments(closed_form_measure("ratio"), ratio_spectrum(),
                                  DegeneracySequence::constant_one(), 12, quad, 1e-8);
  CHECK(rat.quadrature == QuadratureFamily::GaussLegendre);
  CHECK(rat.nodes == 64);

  // Wrong model: the quadrature is stable but the moments miss.
  const auto wrong = verify_moments(closed_form_measure("linear"), kLinear,
                                    DegeneracySequence::example1(), 4, quad, 1e-8);
  CHECK_FALSE(wrong.passed);

  // Truncated Laguerre density reproduces its own moments exactly up to N.
  const auto ex2 = laguerre_measure("example2", laguerre_coefficients(kLinear, DegeneracySequence::example2(), 12));
  CHECK(ex2.nonpositive_somewhere);
  const auto rep2 = verify_moments(ex2, kLinear, DegeneracySequence::example2(), 12, quad, 1e-8);
  CHECK(rep2.passed);
}

TEST_CASE("measure json round trip") {
  const auto ex1 = closed_form_measure("example1");
  const auto j = to_json(ex1);
  CHECK(j["support"][1] == "inf");
  const auto back = measure_from_json(j);
  CHECK(back.density->coefficient == 2.0);
  CHECK(back.atoms == ex1.atoms);
  const auto ex2 = laguerre_measure("example2", laguerre_coefficients(kLinear, DegeneracySequence::example2(), 8));
  const auto back2 = measure_from_json(to_json(ex2));
  CHECK(back2.laguerre->coefficients == ex2.laguerre->coefficients);
}

TEST_CASE("test functions") {
  for (const auto& phi : {TestFunction::standard(), TestFunction::narrow()}) {
    CAPTURE(phi.name());
    CHECK_NOTHROW(phi.certify());
    const auto norms = phi.derivative_l1_norms(TestFunction::kCertifiedOrder);
    double mx = 0.0;
    for (double v : norms) mx = std::max(mx, v);
    CHECK(mx == doctest::Approx(1.0).epsilon(1e-12));
    // derivative check by central differences
    const double x = 0.5 * (phi.a() + phi.b()) + 0.07;
    const double h = 1e-4;
    const auto d = phi.derivatives(x, 2);
    CHECK(d[1] == doctest::Approx((phi(x + h) - phi(x - h)) / (2 * h)).epsilon(1e-6));
    CHECK(d[2] == doctest::Approx((phi(x + h) - 2 * phi(x) + phi(x - h)) / (h * h)).epsilon(1e-5));
    CHECK(phi(phi.a()) == 0.0);
    CHECK(phi(phi.b()) == 0.0);
  }
  CHECK_THROWS_AS(TestFunction("bad", 0.5, 1.5, 1.0), Error);
}

TEST_CASE("weak pairing") {
  const auto full = laguerre_coefficients(kLinear, DegeneracySequence::example2(), 24);
  CHECK(weak_pairing_bound(full, 8, 12) == doctest::Approx(0.28786489230933676).epsilon(1e-13));
  CHECK(weak_pairing_bound(full, 12, 16) == doctest::Approx(0.003720645413767107).epsilon(1e-13));
  CHECK(weak_pairing_bound(full, 20, 24) == doctest::Approx(2.6227438165085717e-08).epsilon(1e-12));
  CHECK(weak_pairing_bound(full, 20, 24) < 1e-3);

  const auto phi = TestFunction::standard();
  const auto same = weak_pairing(full.truncated(8), full.truncated(8), phi);
  CHECK(same.value == 0.0);
  CHECK(same.within_bound);

  for (const auto& f : {TestFunction::standard(), TestFunction::narrow()}) {
    const auto w = weak_pairing(full.truncated(12), full.truncated(8), f);
    CHECK(w.within_bound);
    CHECK(std::abs(w.value) <= w.integrated_bound + w.quadrature_error);
    CHECK(w.quadrature_error < 1e-12);
    CHECK(w.analytic_bound == doctest::Approx(0.28786489230933676).epsilon(1e-13));
  }
}
