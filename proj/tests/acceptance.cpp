// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cohstate/error.hpp"
#include "cohstate/kernels.hpp"
#include "cohstate/landau.hpp"
#include "cohstate/measures.hpp"
#include "cohstate/models.hpp"
#include "cohstate/states.hpp"

using namespace cohstate;

namespace {

constexpr double kTol = 1e-15;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double max_diff(const LabeledKet& a, const LabeledKet& b) {
  if (a.labels != b.labels) return INFINITY;
  return (a.coeffs - b.coeffs).cwiseAbs().maxCoeff();
}

Outcome c1() {
  Outcome o;
  double worst = 0;
  for (double J : {0.1, 1.0, 5.0}) {
    const double N = normalization(EnergySpectrum::linear(), DegeneracySequence::example1(), J, 1e-16).value;
    worst = std::max(worst, std::abs(N - std::exp(J)) / std::exp(J));
  }
  o.require(worst <= 1e-12, "relative error " + fmt(worst));
  o.detail = o.ok ? "max relative error " + fmt(worst) : o.detail;
  return o;
}

Outcome c2() {
  Outcome o;
  const auto rep = verify_moments(closed_form_measure("example1"), EnergySpectrum::linear(),
                                  DegeneracySequence::example1(), 12, QuadratureOptions{}, 1e-8);
  double worst = 0;
  for (const auto& r : rep.rows) {
    const double want = r.n == 0 ? 1.0 : 2.0 * std::tgamma(r.n + 1.0);
    worst = std::max(worst, std::abs(r.computed - want) / want);
  }
  o.require(rep.passed && rep.rows.size() == 13, "moment report failed");
  o.require(worst <= 1e-8, "relative error " + fmt(worst));
  if (o.ok) o.detail = "n <= 12, max relative error " + fmt(worst) + ", " + std::to_string(rep.nodes) + " nodes";
  return o;
}

Outcome c3() {
  Outcome o;
  const auto s = laguerre_coefficients(EnergySpectrum::linear(), DegeneracySequence::example2(), 16);
  o.require(s.coefficients[1] == Rational(0), "d_1 != 0");
  for (std::size_t n = 2; n <= 16; ++n) {
    o.require(s.coefficients[n] == Rational(boost::multiprecision::cpp_int(1) << (n - 2)),
              "d_" + std::to_string(n) + " != 2^(n-2)");
  }
  if (o.ok) o.detail = "exact rational d_1 = 0, d_n = 2^(n-2) for n <= 16";
  return o;
}

Outcome c4() {
  Outcome o;
  const auto full = laguerre_coefficients(EnergySpectrum::linear(), DegeneracySequence::example2(), 16);
  std::string d;
  for (auto [M, N] : {std::pair<std::size_t, std::size_t>{8, 12}, {12, 16}}) {
    double bound = 0;
    for (std::size_t n = M + 1; n <= N; ++n) bound += std::pow(2.0, 2.0 * n - 2.0) / std::tgamma(n + 1.0);
    for (const auto& phi : {TestFunction::standard(), TestFunction::narrow()}) {
      const auto w = weak_pairing(full.truncated(N), full.truncated(M), phi);
      o.require(std::abs(w.value) <= bound, "|I| = " + fmt(std::abs(w.value)) + " > " + fmt(bound));
      o.require(w.within_bound, "pairing outside its bound");
      d += " |I_" + std::to_string(N) + "," + std::to_string(M) + "|=" + fmt(std::abs(w.value)) + "<=" + fmt(bound);
    }
  }
  if (o.ok) o.detail = d.substr(1);
  return o;
}

Outcome c5() {
  Outcome o;
  const auto lin = EnergySpectrum::linear(1.3);
  const double w = lin.omega();
  const auto tf = two_fermion_build({1.0, 0.2, 0.45, 0.1, 0.1});
  double worst = 0;
  for (double t : {0.1, 1.0, 10.0}) {
    worst = std::max(worst, max_diff(evolve(gk_state(lin, 2.0, 0.3, kTol), lin, t),
                                     gk_state(lin, 2.0, 0.3 + w * t, kTol)));
    for (const auto& deg :
         {DegeneracySequence::example1(), DegeneracySequence::example2(), DegeneracySequence::example3()}) {
      worst = std::max(worst, max_diff(evolve(degenerate_state(lin, deg, 1.5, 0.2, 0.6, kTol), lin, t),
                                       degenerate_state(lin, deg, 1.5, 0.2 + w * t, 0.6, kTol)));
    }
    for (std::size_t j = 0; j < tf.branches->size(); ++j) {
      const double wj = tf.branches->branches[j].omega();
      worst = std::max(worst, max_diff(evolve(branch_vcs(*tf.branches, j, 1.0 + j, 0.4, kTol).ket, *tf.branches, t),
                                       branch_vcs(*tf.branches, j, 1.0 + j, 0.4 + wj * t, kTol).ket));
    }
    worst = std::max(worst, max_diff(evolve(bcs(lin, 1.2, 0.1, 0.8, 0.4, kTol), lin, t),
                                     bcs(lin, 1.2, 0.1 + w * t, 0.8, 0.4 + w * t, kTol)));
  }
  o.require(worst <= 1e-14, "max coefficient difference " + fmt(worst));
  if (o.ok) o.detail = "gk, degenerate x3, branch x4, bcs; max difference " + fmt(worst);
  return o;
}

Outcome c6() {
  Outcome o;
  double worst_excess = 0;
  std::size_t checks = 0;
  auto check = [&](const std::string& who, double J, const EnergyValue& e, double want) {
    const double err = std::abs(e.value - want);
    const double allow = e.tail_estimate + 1e-13 * std::max(1.0, std::abs(want));
    ++checks;
    worst_excess = std::max(worst_excess, err - e.tail_estimate);
    o.require(err <= allow, who + " J=" + fmt(J) + " error " + fmt(err));
  };
  const std::map<std::string, double> none;
  for (const char* tag : {"linear", "ratio", "example1", "example2", "example3", "two-fermion", "two-fermion-hermitian"}) {
    const ModelDescriptor m = build_model(tag, none);
    for (double J : {0.5, 1.0, 2.0, 5.0}) {
      if (m.branches) {
        for (std::size_t j = 0; j < m.branches->size(); ++j) {
          const auto ket = branch_vcs(*m.branches, j, J, 0.2, kTol).ket;
          check(std::string(tag) + "/" + m.branches->names[j], J, energy_expectation(ket, *m.branches),
                m.branches->branches[j].omega() * J);
        }
        continue;
      }
      // The ratio spectrum converges only for J < 1; the probed radius is an estimate.
      if (J >= 0.99 * radius_of_convergence(m.spectrum, m.degeneracy).radius) continue;
      const auto ket = degenerate_state(m.spectrum, m.degeneracy, J, 0.2, 0.7, kTol);
      check(tag, J, energy_expectation(ket, m.spectrum), m.spectrum.omega() * J);
    }
  }
  const auto lin = EnergySpectrum::linear();
  for (double J : {0.5, 1.0, 2.0, 5.0}) check("bcs", J, energy_expectation(bcs(lin, J, 0.1, 0.5, 0.3, kTol), lin), J - 0.5);
  if (o.ok) o.detail = std::to_string(checks) + " checks, worst error beyond tail estimate " + fmt(worst_excess);
  return o;
}

Outcome c7() {
  Outcome o;
  const QuadratureOptions quad;
  double worst = 0;
  for (const auto& m : {example1_build(1.0), example3_build(1.0, 1.0, 0.01, 0.01),
                        two_fermion_build({1.0, 0.2, 0.45, 0.1, 0.1})}) {
    const auto r = resolution_check(m, 10, quad, 1e-8);
    o.require(r.passed(), m.tag + " " + to_string(r.status));
    worst = std::max(worst, r.max_ratio_error);
  }
  const auto ex2 = resolution_check(example2_build(1.0, 1.0), 10, quad, 1e-8);
  o.require(ex2.status == ResolutionStatus::WeakSenseOnly, "example2 status " + to_string(ex2.status));
  if (o.ok) o.detail = "max |r_n - 1| = " + fmt(worst) + "; example2 " + to_string(ex2.status);
  return o;
}

Outcome c8() {
  Outcome o;
  // omega = 3/2, eps1 = 1/5, eps2 = 9/20, g1 = 1/10, g2 = 1/4
  const Rational w(3, 2), e1(1, 5), e2(9, 20), g1(1, 10), g2(1, 4);
  const auto t = two_fermion_spectrum(TwoFermionParams<Rational>{w, e1, e2, g1, g2});
  o.require(t.row(0, 0).E0 == Rational(0), "E0^00");
  o.require(t.row(1, 0).E0 == e1 - g1 * g1 / w, "E0^10");
  o.require(t.row(0, 1).E0 == e2 - g2 * g2 / w, "E0^01");
  o.require(t.row(1, 1).E0 == e1 + e2 - (g1 + g2) * (g1 + g2) / w, "E0^11");
  o.require(t.row(1, 1).E0 == Rational(3, 5) + Rational(1, 20) - Rational(49, 600), "E0^11 literal");
  const auto m = two_fermion_build({1.0, 0.2, 0.45, 0.1, 0.1});
  double worst = 0;
  std::vector<LabeledKet> kets;
  for (std::size_t j = 0; j < 4; ++j) kets.push_back(branch_vcs(*m.branches, j, 0.5 + j, 0.3 * j, kTol).ket);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(inner_product(kets[j], kets[k]) - (j == k ? 1.0 : 0.0)));
  }
  o.require(worst <= 1e-12, "branch orthogonality " + fmt(worst));
  if (o.ok) o.detail = "four rational E0 rows exact; branch Gram deviation " + fmt(worst);
  return o;
}

Outcome c9() {
  Outcome o;
  const auto m = modular_triple(1.0, 1.0, 30);
  o.require(m.delta_vs_exp <= 1e-13, "Delta vs exp(-beta H) " + fmt(m.delta_vs_exp));
  o.require(m.s_basis <= 1e-12, "S basis " + fmt(m.s_basis));
  std::vector<Complex> zs;
  for (double r : {0.0, 0.25, 0.5}) {
    for (int k = 0; k < 8; ++k) zs.push_back(std::polar(r, 2 * M_PI * k / 8.0));
  }
  const auto inv = modular_involution_check(1.0, 1.0, zs, 30, 1e-8);
  o.require(inv.passed, "involution residual " + fmt(inv.max_residual));
  const auto kms = kms_check(0.3, Complex(0, 0.2), 1.0, 1.0, 0.7, 30);
  o.require(kms.continuation_residual <= 1e-6, "KMS residual " + fmt(kms.continuation_residual));
  double prev = INFINITY;
  std::string sweep;
  for (std::size_t K : {10, 20, 30}) {
    const double r = kms_check(0.3, Complex(0, 0.2), 1.0, 1.0, 0.7, K).continuation_residual;
    o.require(r < prev, "KMS residual not decreasing at K = " + std::to_string(K));
    sweep += " " + fmt(r);
    prev = r;
  }
  if (o.ok) {
    o.detail = "Delta rel " + fmt(m.delta_vs_exp) + ", S " + fmt(m.s_basis) + ", involution " +
               fmt(inv.max_residual) + ", KMS(K=10,20,30)" + sweep;
  }
  return o;
}

Outcome c10() {
  Outcome o;
  const std::vector<Complex> zs{0.0, 1.0, Complex(0, 1), Complex(-0.6, 0.8), Complex(0.3, -0.4), std::polar(0.7, 2.5)};
  double worst = 0;
  for (const Complex z : zs) {
    for (const Complex zp : zs) {
      for (std::size_t n = 0; n <= 4; ++n) {
        for (std::size_t mm = 0; mm <= 4; ++mm) worst = std::max(worst, overlap_law(z, n, zp, mm, 40).residual);
      }
    }
  }
  o.require(worst <= 1e-10, "overlap residual " + fmt(worst));
  if (o.ok) o.detail = "max residual " + fmt(worst);
  return o;
}

Outcome c11() {
  Outcome o;
  const auto a = kms_cs(0.4, 1.0, 1.0, 30);
  const auto b = kms_cs_photon_added(0.4, 1.0, 1.0, 30);
  const double d = (a.coeffs - b.coeffs).norm();
  o.require(d <= 1e-8, "route difference " + fmt(d));
  if (o.ok) o.detail = "route difference " + fmt(d);
  return o;
}

Outcome c12() {
  Outcome o;
  const auto r = intertwining_check({{0, 0}, {1, 0}, {1, 1}}, 0.01, 1e-3);
  o.require(r.passed, "residual " + fmt(r.max_residual));
  if (o.ok) o.detail = "max residual " + fmt(r.max_residual);
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all{
      {1, "example1 normalization", 1, c1},         {2, "example1 moments", 1, c2},
      {3, "laguerre coefficients", 1, c3},          {4, "weak pairing bound", 5, c4},
      {5, "temporal stability", 1, c5},             {6, "action identity", 1, c6},
      {7, "resolution of identity", 5, c7},         {8, "two-fermion table", 1, c8},
      {9, "modular and KMS suite", 30, c9},         {10, "overlap law", 5, c10},
      {11, "KMS coherent state routes", 5, c11},    {12, "wigner intertwining", 10, c12},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.require(false, "runtime " + fmt(secs) + " s over " + fmt(c.budget_s) + " s");
    std::printf("%s %2d %-28s %.3fs  %s\n", o.ok ? "PASS" : "FAIL", c.id, c.title, secs, o.detail.c_str());
    failures += o.ok ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failures, all.size());
  return failures == 0 ? 0 : 1;
}
