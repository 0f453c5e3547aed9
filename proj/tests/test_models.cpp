#include <doctest.h>

#include <cmath>

#include "cohstate/error.hpp"
#include "cohstate/models.hpp"

using namespace cohstate;
using Complex = std::complex<double>;

TEST_CASE("two-fermion table in exact arithmetic") {
  // omega = 1, eps1 = 1/5, eps2 = 9/20, g1 = 1/10, g2 = 3/10
  const TwoFermionParams<Rational> p{Rational(1), Rational(1, 5), Rational(9, 20), Rational(1, 10), Rational(3, 10)};
  const auto t = two_fermion_spectrum(p);
  CHECK(t.row(0, 0).E0 == Rational(0));
  CHECK(t.row(1, 0).E0 == Rational(1, 5) - Rational(1, 100));
  CHECK(t.row(0, 1).E0 == Rational(9, 20) - Rational(9, 100));
  CHECK(t.row(1, 1).E0 == Rational(1, 5) + Rational(9, 20) - Rational(16, 100));
  CHECK(t.row(1, 0).g == Rational(1, 10));
  CHECK(t.row(0, 1).g == Rational(3, 10));
  for (std::size_t n : {0u, 3u, 7u}) {
    CHECK(t.energy(1, 1, n) - t.row(1, 1).E0 == Rational(static_cast<long long>(n)));
  }
}

TEST_CASE("two-fermion branches") {
  const auto m = two_fermion_build({2.0, 0.4, 0.9, 0.2, 0.3});
  REQUIRE(m.branches);
  for (const auto& b : m.branches->branches) {
    for (std::size_t n = 0; n < 10; ++n) CHECK(b.eps(n) == doctest::Approx(static_cast<double>(n)).epsilon(1e-15));
  }
  CHECK(m.branches->names == std::vector<std::string>{"00", "10", "01", "11"});
  CHECK(m.branches->branches[3].recorded_shift() == doctest::Approx(0.4 + 0.9 - 0.25 / 2.0));
}

TEST_CASE("degeneracy-free chain") {
  const auto ok = degeneracy_free_check({1.0, 0.2, 0.45, 0.1, 0.1});
  CHECK(ok.ok);
  REQUIRE(ok.merged);
  const double want[] = {0.0, 0.19, 0.44, 0.63, 1.0, 1.19, 1.44};
  for (std::size_t n = 0; n < 7; ++n) CHECK(ok.merged->eps(n) == doctest::Approx(want[n]).epsilon(1e-14));

  const auto bad = degeneracy_free_check({1.0, 0.3, 0.3, 0.0, 0.0});
  CHECK_FALSE(bad.ok);
  CHECK(bad.violated.find("eps1 - g1^2/omega < eps2 - g2^2/omega") == 0);
}

TEST_CASE("hermitian coupling") {
  SUBCASE("diagonal input") {
    Eigen::Matrix2cd g = Eigen::Matrix2cd::Zero();
    g(0, 0) = 0.7;
    g(1, 1) = -0.2;
    const auto d = hermitian_coupling_diagonalize(g);
    CHECK((d.V - Eigen::Matrix2cd::Identity()).norm() < 1e-15);
    CHECK(d.g_d(0) == doctest::Approx(0.7));
    CHECK(d.g_d(1) == doctest::Approx(-0.2));
  }
  SUBCASE("pauli x") {
    Eigen::Matrix2cd g;
    g << 0, 1, 1, 0;
    const auto d = hermitian_coupling_diagonalize(g);
    CHECK(d.g_d(0) == doctest::Approx(1.0));
    CHECK(d.g_d(1) == doctest::Approx(-1.0));
  }
  SUBCASE("general hermitian against the characteristic polynomial") {
    Eigen::Matrix2cd g;
    g << Complex(0.3, 0), Complex(0.2, -0.45), Complex(0.2, 0.45), Complex(-0.8, 0);
    const auto d = hermitian_coupling_diagonalize(g);
    const double tr = -0.5, det = 0.3 * -0.8 - (0.04 + 0.2025);
    const double disc = std::sqrt(tr * tr - 4 * det);
    CHECK(std::abs(d.g_d(0) - (tr + disc) / 2) < 1e-14);
    CHECK(std::abs(d.g_d(1) - (tr - disc) / 2) < 1e-14);
    const Eigen::Matrix2cd D = d.V * g * d.V.adjoint();
    CHECK((D - Eigen::Matrix2cd(d.g_d.cast<Complex>().asDiagonal())).norm() < 1e-12);
    CHECK((d.V * d.V.adjoint() - Eigen::Matrix2cd::Identity()).norm() < 1e-14);
  }
  SUBCASE("not hermitian") {
    Eigen::Matrix2cd g;
    g << 0, 1, 0, 0;
    try {
      hermitian_coupling_diagonalize(g);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotHermitian);
    }
  }
}

TEST_CASE("shifted annihilator commutator") {
  const std::size_t K = 12;
  const auto A = shifted_annihilator(0.37, K);
  const Eigen::MatrixXd C = A * A.transpose() - A.transpose() * A;
  // Exact on the inner block; the last row/column sees the truncation.
  CHECK((C.topLeftCorner(K, K) - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(std::abs(C(K, K) + static_cast<double>(K)) < 1e-13);
}

TEST_CASE("example builders") {
  SUBCASE("example1 model") {
    const auto m = example1_build(1.0);
    CHECK(m.degeneracy.at(0) == 1);
    CHECK(m.degeneracy.at(5) == 2);
    REQUIRE(m.measure);
    CHECK(m.measure->atoms.size() == 1);
    CHECK(m.measure->atoms[0].second == -1.0);
    CHECK(normalization(m.spectrum, m.degeneracy, 1.0, 1e-15).value == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(occupation_label(m, 3, 2) == "Phi_2 (x) Psi_1");
  }
  SUBCASE("example2 model") {
    const auto m = example2_build(2.0, 5.0);
    const std::uint64_t d[] = {1, 1, 2, 2, 3, 3};
    for (std::size_t n = 0; n < 6; ++n) CHECK(m.degeneracy.at(n) == d[n]);
    for (std::size_t n = 2; n < 30; ++n) CHECK(m.degeneracy.at(n) - m.degeneracy.at(n - 2) == 1);
    CHECK(target_moment(m.spectrum, m.degeneracy, 4) == 72.0);
    CHECK(target_moment(m.spectrum, m.degeneracy, 5) == 360.0);
    CHECK(m.diagnostics.at("omega_ratio") == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(m.spectrum.omega() == doctest::Approx(std::sqrt(2.0 / 2.0)));
    CHECK_FALSE(m.measure_closed_form);
    CHECK(occupation_label(m, 5, 3) == "n+=2 n-=1");
  }
  SUBCASE("example3 model") {
    const auto m = example3_build(1.0, 4.0, 0.1, 0.2);
    CHECK(m.degeneracy.at(0) == 1);
    CHECK(m.degeneracy.at(1) == 3);
    CHECK(m.degeneracy.at(2) == 6);
    for (std::size_t n = 0; n < 8; ++n) {
      CHECK(target_moment(m.spectrum, m.degeneracy, n) == doctest::Approx(std::tgamma(n + 3.0) / 2));
    }
    CHECK(m.warnings.empty());
    // omega = 2, Omega = 0.01
    CHECK(example3_exact_energy(m, 1, 0, 0) == doctest::Approx(std::sqrt(4.0001) + 0.01));
    CHECK(occupation_label(m, 2, 6) == "n+=2 n-=0 nz=0");
    const auto strong = example3_build(1.0, 1.0, 1.0, 1.0);
    CHECK_FALSE(strong.warnings.empty());
  }
  SUBCASE("build_model surface") {
    CHECK(build_model("example2", {{"m", 1.0}}).tag == "example2");
    CHECK_THROWS_AS(build_model("example2", {{"mass", 1.0}}), Error);
    CHECK_THROWS_AS(build_model("nope", {}), Error);
    CHECK_THROWS_AS(build_model("linear", {{"omega", -1.0}}), Error);
    const auto h = build_model("two-fermion-hermitian", {});
    CHECK(h.diagnostics.at("g1") > h.diagnostics.at("g2"));
    const auto card = model_card(build_model("example1", {}));
    CHECK(card["degeneracy_first"][1] == 2);
    CHECK(card["measure"]["atoms"][0][1] == -1.0);
  }
}
