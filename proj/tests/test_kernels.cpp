#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "cohstate/error.hpp"
#include "cohstate/kernels.hpp"

using namespace cohstate;

TEST_CASE("phase average") {
  CHECK(phase_average(3, 3) == 1);
  CHECK(phase_average(3, 5) == 0);
  CHECK(phase_average(5, 3) == phase_average(3, 5));
  const auto ratio = EnergySpectrum::from_rule([](std::size_t n) { return n / (n + 1.0); }, "ratio");
  for (std::size_t a = 0; a < 20; ++a) {
    for (std::size_t b = 0; b < 20; ++b) CHECK(phase_average(ratio.eps(a), ratio.eps(b)) == (a == b ? 1 : 0));
  }
  CHECK(phase_average(1.0, 1.0 + 1e-12, 1e-9) == 1);
  CHECK(std::abs(phase_average_finite(1.0, 2.0, 1e6)) < 1e-6);
  CHECK(phase_average_finite(2.0, 2.0, 10.0) == 1.0);
}

TEST_CASE("scalar kernel") {
  const auto lin = EnergySpectrum::linear();
  SUBCASE("diagonal is N(J) bit for bit") {
    for (double J : {0.0, 0.3, 1.0, 2.7, 9.0}) {
      const auto k = kernel_eval(lin, {J, 0.4}, {J, 0.4}, 1e-15);
      CHECK(k.value.real() == normalization(lin, DegeneracySequence::constant_one(), J, 1e-15).value);
      CHECK(k.value.imag() == 0.0);
      const auto kd = kernel_eval(lin, DegeneracySequence::example3(), {J, 0.4, 1.0}, {J, 0.4, 1.0}, 1e-15);
      CHECK(kd.value == k.value);
    }
  }
  SUBCASE("linear spectrum closed form") {
    const ActionAngle x{1.3, 0.2}, y{0.6, -0.9};
    const auto k = kernel_eval(lin, x, y, 1e-16);
    const Complex want = std::exp(std::sqrt(x.J * y.J) * std::polar(1.0, x.gamma - y.gamma));
    CHECK(std::abs(k.value - want) < 1e-14 * std::abs(want));
  }
  SUBCASE("hermitian symmetry") {
    const ActionAngle x{1.0, 0.2}, y{2.0, 1.1};
    CHECK(std::abs(kernel_eval(lin, x, y, 1e-15).value - std::conj(kernel_eval(lin, y, x, 1e-15).value)) < 1e-14);
    const auto deg = DegeneracySequence::example1();
    const ActionAngle xt{1.0, 0.2, 0.5}, yt{2.0, 1.1, 2.0};
    CHECK(std::abs(kernel_eval(lin, deg, xt, yt, 1e-15).value - std::conj(kernel_eval(lin, deg, yt, xt, 1e-15).value)) <
          1e-14);
  }
  SUBCASE("kernel equals the overlap of unnormalized states") {
    const auto a = gk_state(lin, 1.4, 0.3, 1e-16, Normalization::Unnormalized);
    const auto b = gk_state(lin, 0.8, 1.2, 1e-16, Normalization::Unnormalized);
    CHECK(std::abs(inner_product(a, b) - kernel_eval(lin, {1.4, 0.3}, {0.8, 1.2}, 1e-16).value) < 1e-14);
  }
  SUBCASE("outside the radius") {
    const auto ratio = EnergySpectrum::from_rule([](std::size_t n) { return n / (n + 1.0); }, "ratio");
    CHECK_THROWS_AS(kernel_eval(ratio, {2.0, 0}, {2.0, 0}, 1e-12), Error);
  }
}

TEST_CASE("gram matrices are positive semidefinite") {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> J(0.0, 4.0), g(0.0, 2 * M_PI);
  const auto lin = EnergySpectrum::linear();
  const auto ratio = EnergySpectrum::from_rule([](std::size_t n) { return n / (n + 1.0); }, "ratio");
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<ActionAngle> pts, small;
    for (int i = 0; i < 12; ++i) {
      pts.push_back({J(rng), g(rng)});
      small.push_back({pts.back().J / 5.0, pts.back().gamma});
    }
    for (const auto& [spec, p] : {std::pair{lin, pts}, std::pair{ratio, small}}) {
      const Eigen::MatrixXcd G = gram_matrix(spec, p, 1e-15);
      CHECK((G - G.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
  }
}

TEST_CASE("matrix kernel") {
  const auto model = two_fermion_build({1.0, 0.2, 0.45, 0.1, 0.1});
  const std::vector<double> J{0.5, 1.0, 2.0, 5.0}, g{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> Jp{1.5, 0.2, 2.5, 3.0}, gp{0.0, 1.0, -1.0, 2.0};
  const auto Kxx = matrix_kernel(*model.branches, J, g, J, g, 1e-15);
  for (int j = 0; j < 4; ++j) {
    CHECK(Kxx(j, j).real() > 0.0);
    CHECK(std::abs(Kxx(j, j) - 1.0) < 1e-13);
  }
  const auto Kxy = matrix_kernel(*model.branches, J, g, Jp, gp, 1e-15);
  const auto Kyx = matrix_kernel(*model.branches, Jp, gp, J, g, 1e-15);
  CHECK((Kxy - Kyx.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4; ++k) {
      if (j != k) CHECK(Kxy(j, k) == Complex(0.0, 0.0));
    }
  }
  // Diagonal entries are normalized scalar kernels of eps_n = n.
  const auto lin = EnergySpectrum::linear();
  const Complex k11 = kernel_eval(lin, {J[1], g[1]}, {Jp[1], gp[1]}, 1e-15).value / std::exp(0.5 * (J[1] + Jp[1]));
  CHECK(std::abs(Kxy(1, 1) - k11) < 1e-13);
}

TEST_CASE("resolution of identity") {
  const QuadratureOptions quad;
  SUBCASE("example1 model") {
    const auto r = resolution_check(example1_build(1.0), 12, quad, 1e-8);
    CHECK(r.passed());
    CHECK(r.rows.size() == 13);
    CHECK(r.off_diagonal_residual == 0.0);
  }
  SUBCASE("example3 model") {
    const auto r = resolution_check(example3_build(1.0, 1.0, 0.01, 0.01), 10, quad, 1e-8);
    CHECK(r.passed());
    for (const auto& row : r.rows) CHECK(std::abs(row.ratio - 1.0) <= 1e-8);
  }
  SUBCASE("two-fermion branches") {
    const auto r = resolution_check(two_fermion_build({1.0, 0.2, 0.45, 0.1, 0.1}), 10, quad, 1e-8);
    CHECK(r.passed());
    CHECK(r.rows.size() == 44);
  }
  SUBCASE("linear and ratio") {
    CHECK(resolution_check(linear_build(), 10, quad, 1e-8).passed());
    CHECK(resolution_check(ratio_build(), 10, quad, 1e-8).passed());
  }
  SUBCASE("example2 model is weak-sense only") {
    const auto r = resolution_check(example2_build(1.0, 1.0), 10, quad, 1e-8);
    CHECK(r.status == ResolutionStatus::WeakSenseOnly);
    CHECK(to_json(r)["status"] == "weak-sense-only");
  }
  SUBCASE("wrong measure fails") {
    auto m = example1_build(1.0);
    m.measure = closed_form_measure("linear");
    CHECK(resolution_check(m, 6, quad, 1e-8).status == ResolutionStatus::Fail);
  }
  SUBCASE("no measure") {
    auto m = linear_build();
    m.measure.reset();
    try {
      resolution_check(m, 4, quad, 1e-8);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoMeasure);
    }
  }
  SUBCASE("agrees with verify_moments") {
    const auto m = example3_build(1.0, 1.0, 0.0, 0.0);
    const auto r = resolution_check(m, 8, quad, 1e-8);
    const auto v = verify_moments(*m.measure, m.spectrum, m.degeneracy, 8, quad, 1e-8);
    for (std::size_t n = 0; n <= 8; ++n) CHECK(r.rows[n].moment == v.rows[n].computed);
  }
}

TEST_CASE("kernel idempotency") {
  const QuadratureOptions quad;
  const auto lin = EnergySpectrum::linear();
  SUBCASE("canonical diagonal point") {
    const auto r = kernel_idempotency(lin, DegeneracySequence::constant_one(), closed_form_measure("linear"),
                                      {{1.0, 0.0}}, quad, 1e-10);
    CHECK(r.passed);
  }
  SUBCASE("sample sets") {
    const std::vector<ActionAngle> pts{{0.5, 0.1, 0.0}, {1.0, 2.0, 1.0}, {3.0, -0.7, 2.5}};
    CHECK(kernel_idempotency(lin, DegeneracySequence::constant_one(), closed_form_measure("linear"), pts, quad, 1e-10)
              .passed);
    CHECK(kernel_idempotency(lin, DegeneracySequence::example1(), closed_form_measure("example1"), pts, quad, 1e-10)
              .passed);
    CHECK(kernel_idempotency(lin, DegeneracySequence::example3(), closed_form_measure("example3"), pts, quad, 1e-10)
              .passed);
  }
  SUBCASE("a wrong measure is caught") {
    const auto r = kernel_idempotency(lin, DegeneracySequence::example1(), closed_form_measure("linear"),
                                      {{1.0, 0.0}, {2.0, 1.0}}, quad, 1e-10);
    CHECK_FALSE(r.passed);
  }
  SUBCASE("non-integer spectrum") {
    const auto ratio = EnergySpectrum::from_rule([](std::size_t n) { return n / (n + 1.0); }, "ratio");
    CHECK_THROWS_AS(kernel_idempotency(ratio, DegeneracySequence::constant_one(), closed_form_measure("ratio"),
                                       {{0.5, 0.0}}, quad, 1e-10),
                    Error);
  }
  SUBCASE("two-level probe in exact arithmetic") {
    // Levels {0, 1}, measure e^{-J}dJ: moments 0!, 1!. With J J' = 4 and equal angles
    // K = 1 + 2 and the reduced double sum is 1*m0/rho0 + 2*m1/rho1.
    const Rational m0(1), m1(1), rho0(1), rho1(1), root(2);
    const Rational K = Rational(1) + root;
    const Rational reduced = m0 / rho0 + root * m1 / rho1;
    CHECK(K == reduced);
    const auto two = EnergySpectrum::from_list({0.0, 1.0});
    const auto r = kernel_idempotency(two, DegeneracySequence::constant_one(), closed_form_measure("linear"),
                                      {{1.0, 0.3}, {4.0, 0.3}}, quad, 1e-15);
    CHECK(r.max_level == 1);
    CHECK(r.max_residual < 1e-15);
  }
}
