#include "cohstate/models.hpp"

#include <cmath>
#include <complex>
#include <cstdio>

#include <Eigen/Eigenvalues>

#include "cohstate/error.hpp"

namespace cohstate {

Eigen::MatrixXd shifted_annihilator(double shift, std::size_t K) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(K + 1, K + 1);
  for (std::size_t n = 1; n <= K; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  a.diagonal().array() += shift;
  return a;
}

BranchSet two_fermion_branches(const SpectralTable<double>& table) {
  BranchSet set;
  for (const auto& r : table.rows) {
    // E_n - E_0 = omega n in every sector.
    set.branches.push_back(shift_to_zero(EnergySpectrum::affine(r.E0 / table.omega, 1.0, table.omega)));
    set.names.push_back(std::to_string(r.k) + std::to_string(r.l));
  }
  return set;
}

DegeneracyFreeResult degeneracy_free_check(const TwoFermionParams<double>& p) {
  DegeneracyFreeResult out;
  const double w = p.omega;
  const double E1 = p.eps1 - p.g1 * p.g1 / w;
  const double E2 = p.eps2 - p.g2 * p.g2 / w;
  const double E3 = p.eps1 + p.eps2 - (p.g1 * p.g1 + p.g2 * p.g2) / w;
  out.chain = {0.0, E1, E2, E3, w};
  const char* names[] = {"0", "eps1 - g1^2/omega", "eps2 - g2^2/omega",
                         "eps1 + eps2 - (g1^2 + g2^2)/omega", "omega"};
  out.ok = true;
  for (std::size_t i = 0; i + 1 < out.chain.size(); ++i) {
    if (!(out.chain[i] < out.chain[i + 1])) {
      out.ok = false;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s < %s fails (%.17g >= %.17g)", names[i], names[i + 1],
                    out.chain[i], out.chain[i + 1]);
      out.violated = buf;
      break;
    }
  }
  if (out.ok) {
    const std::array<double, 4> offset{0.0, E1 / w, E2 / w, E3 / w};
    out.merged = EnergySpectrum::from_rule(
        [offset](std::size_t n) { return static_cast<double>(n / 4) + offset[n % 4]; }, "two-fermion-merged", w);
  }
  return out;
}

HermitianDiagonalization hermitian_coupling_diagonalize(const Eigen::Matrix2cd& g) {
  const double scale = std::max(1.0, g.norm());
  if ((g - g.adjoint()).norm() > 1e-14 * scale) {
    throw Error(ErrorKind::NotHermitian, "coupling matrix differs from its adjoint");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(g);
  // g = U diag(ascending) U^dagger; reorder descending and fix phases so the
  // largest component of each eigenvector is real positive.
  Eigen::Matrix2cd U;
  Eigen::Vector2d vals;
  for (int c = 0; c < 2; ++c) {
    Eigen::Vector2cd v = solver.eigenvectors().col(1 - c);
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v *= std::conj(v(big)) / std::abs(v(big));
    U.col(c) = v;
    vals(c) = solver.eigenvalues()(1 - c);
  }
  HermitianDiagonalization out;
  out.V = U.adjoint();
  out.g_d = vals;
  out.caveat =
      "the rotation d = Vc keeps eps1 c1+c1 + eps2 c2+c2 diagonal only when eps1 = eps2";
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::ConfigInvalid, std::string(name) + " must be finite and > 0");
  }
}

ModelDescriptor two_fermion_from_table(const SpectralTable<double>& table, const TwoFermionParams<double>& p) {
  ModelDescriptor d;
  d.table = table;
  d.spectrum = EnergySpectrum::linear(p.omega);
  d.degeneracy = DegeneracySequence::constant_one();
  d.branches = two_fermion_branches(table);
  d.measure = closed_form_measure("two-fermion");
  d.spectrum_law = "E_n^{kl} = omega n + E_0^{kl}; each sector shifts to eps_n = n";
  d.degeneracy_law = "four one-dimensional sectors per n";
  const auto check = degeneracy_free_check(p);
  d.diagnostics["degeneracy_free"] = check.ok ? 1.0 : 0.0;
  if (!check.ok) d.warnings.push_back("merged spectrum is degenerate: " + check.violated);
  for (const auto& c : branch_collisions(*d.branches, 8)) {
    d.warnings.push_back("cross-branch coincidence eps_{" + std::to_string(c.branch_a) + "," +
                         std::to_string(c.level_a) + "} = eps_{" + std::to_string(c.branch_b) + "," +
                         std::to_string(c.level_b) + "} = " + fmt(c.value));
  }
  return d;
}

}  // namespace

ModelDescriptor linear_build(double omega) {
  require_positive(omega, "omega");
  ModelDescriptor d;
  d.kind = ModelKind::Linear;
  d.tag = "linear";
  d.parameters = {{"omega", omega}};
  d.spectrum = EnergySpectrum::linear(omega);
  d.measure = closed_form_measure("linear");
  d.spectrum_law = "eps_n = n";
  d.degeneracy_law = "d(n) = 1";
  return d;
}

ModelDescriptor ratio_build(double omega) {
  require_positive(omega, "omega");
  ModelDescriptor d;
  d.kind = ModelKind::Ratio;
  d.tag = "ratio";
  d.parameters = {{"omega", omega}};
  d.spectrum = EnergySpectrum::from_rule([](std::size_t n) { return n / (n + 1.0); }, "ratio", omega);
  d.measure = closed_form_measure("ratio");
  d.spectrum_law = "eps_n = n/(n+1), L = 1";
  d.degeneracy_law = "d(n) = 1";
  return d;
}

ModelDescriptor example1_build(double omega) {
  require_positive(omega, "omega");
  ModelDescriptor d;
  d.kind = ModelKind::BosonFermion;
  d.tag = "example1";
  d.parameters = {{"omega", omega}};
  d.spectrum = EnergySpectrum::linear(omega);
  d.degeneracy = DegeneracySequence::example1();
  d.measure = closed_form_measure("example1");
  d.spectrum_law = "H = omega (a+a + c+c), eps_n = n";
  d.degeneracy_law = "d(0) = 1, d(n >= 1) = 2; phi_{n,j} = Phi_{n-f} (x) Psi_f with f = j - 1";
  return d;
}

ModelDescriptor example2_build(double m, double k, std::size_t laguerre_order) {
  require_positive(m, "m");
  require_positive(k, "k");
  const double b = 3.0 * k / 5.0;
  const double wp = std::sqrt((k + b) / m);
  const double wm = std::sqrt((k - b) / m);
  ModelDescriptor d;
  d.kind = ModelKind::PlanarOscillator;
  d.tag = "example2";
  d.parameters = {{"m", m}, {"k", k}, {"b", b}};
  d.spectrum = EnergySpectrum::linear(wm);
  d.degeneracy = DegeneracySequence::example2();
  d.measure = laguerre_measure("example2", laguerre_coefficients(d.spectrum, d.degeneracy, laguerre_order));
  d.measure_closed_form = false;
  d.spectrum_law = "E = omega_- (2 n_+ + n_-), eps_n = n";
  d.degeneracy_law = "d(2n) = d(2n+1) = n + 1";
  d.diagnostics = {{"omega_plus", wp}, {"omega_minus", wm}, {"omega_ratio", wp / wm}};
  return d;
}

ModelDescriptor example3_build(double m, double k, double e, double B) {
  require_positive(m, "m");
  require_positive(k, "k");
  const double w = std::sqrt(k / m);
  const double Omega = e * B / (2.0 * m);
  const double wt = std::sqrt(w * w + Omega * Omega);
  ModelDescriptor d;
  d.kind = ModelKind::ChargedOscillator3D;
  d.tag = "example3";
  d.parameters = {{"m", m}, {"k", k}, {"e", e}, {"B", B}};
  d.spectrum = EnergySpectrum::linear(w);
  d.degeneracy = DegeneracySequence::example3();
  d.measure = closed_form_measure("example3");
  d.spectrum_law = "H ~ omega (N_+ + N_- + N_z) for Omega << omega, eps_n = n";
  d.degeneracy_law = "d(n) = (n+1)(n+2)/2";
  d.diagnostics = {{"omega", w}, {"Omega", Omega}, {"omega_tilde", wt}, {"Omega_over_omega", std::abs(Omega) / w}};
  if (std::abs(Omega) / w > 0.1) {
    d.warnings.push_back("Omega/omega = " + fmt(std::abs(Omega) / w) +
                         " is not small; collapsed spectrum applied anyway");
  }
  return d;
}

ModelDescriptor two_fermion_build(const TwoFermionParams<double>& p) {
  require_positive(p.omega, "omega");
  ModelDescriptor d = two_fermion_from_table(two_fermion_spectrum(p), p);
  d.kind = ModelKind::BosonTwoFermion;
  d.tag = "two-fermion";
  d.parameters = {{"omega", p.omega}, {"eps1", p.eps1}, {"eps2", p.eps2}, {"g1", p.g1}, {"g2", p.g2}};
  return d;
}

ModelDescriptor two_fermion_hermitian_build(double omega, double eps, const Eigen::Matrix2cd& g) {
  require_positive(omega, "omega");
  const auto diag = hermitian_coupling_diagonalize(g);
  const TwoFermionParams<double> p{omega, eps, eps, diag.g_d(0), diag.g_d(1)};
  ModelDescriptor d = two_fermion_from_table(two_fermion_spectrum(p), p);
  d.kind = ModelKind::TwoFermionHermitian;
  d.tag = "two-fermion-hermitian";
  d.parameters = {{"omega", omega},       {"eps", eps},
                  {"g11", g(0, 0).real()}, {"g22", g(1, 1).real()},
                  {"g12_re", g(0, 1).real()}, {"g12_im", g(0, 1).imag()}};
  d.diagnostics["g1"] = diag.g_d(0);
  d.diagnostics["g2"] = diag.g_d(1);
  d.warnings.push_back(diag.caveat);
  return d;
}

ModelDescriptor build_model(const std::string& tag, const std::map<std::string, double>& params) {
  auto take = [&](std::initializer_list<std::pair<const char*, double>> allowed) {
    std::map<std::string, double> out;
    for (const auto& [k, v] : allowed) out[k] = v;
    for (const auto& [k, v] : params) {
      if (!out.count(k)) throw Error(ErrorKind::ConfigInvalid, "model '" + tag + "' has no parameter '" + k + "'");
      out[k] = v;
    }
    return out;
  };
  if (tag == "linear") return linear_build(take({{"omega", 1.0}})["omega"]);
  if (tag == "ratio") return ratio_build(take({{"omega", 1.0}})["omega"]);
  if (tag == "example1") return example1_build(take({{"omega", 1.0}})["omega"]);
  if (tag == "example2") {
    auto p = take({{"m", 1.0}, {"k", 1.0}, {"laguerre_order", 16.0}});
    return example2_build(p["m"], p["k"], static_cast<std::size_t>(p["laguerre_order"]));
  }
  if (tag == "example3") {
    auto p = take({{"m", 1.0}, {"k", 1.0}, {"e", 0.0}, {"B", 0.0}});
    return example3_build(p["m"], p["k"], p["e"], p["B"]);
  }
  if (tag == "two-fermion") {
    auto p = take({{"omega", 1.0}, {"eps1", 0.2}, {"eps2", 0.45}, {"g1", 0.1}, {"g2", 0.1}});
    return two_fermion_build({p["omega"], p["eps1"], p["eps2"], p["g1"], p["g2"]});
  }
  if (tag == "two-fermion-hermitian") {
    auto p = take({{"omega", 1.0}, {"eps", 0.3}, {"g11", 0.1}, {"g22", 0.05}, {"g12_re", 0.02}, {"g12_im", 0.0}});
    Eigen::Matrix2cd g;
    g << std::complex<double>(p["g11"], 0.0), std::complex<double>(p["g12_re"], p["g12_im"]), std::complex<double>(p["g12_re"], -p["g12_im"]),
        std::complex<double>(p["g22"], 0.0);
    return two_fermion_hermitian_build(p["omega"], p["eps"], g);
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown model '" + tag + "'");
}

double example3_exact_energy(const ModelDescriptor& model, std::size_t n_plus, std::size_t n_minus,
                             std::size_t n_z) {
  if (model.kind != ModelKind::ChargedOscillator3D) {
    throw Error(ErrorKind::ConfigInvalid, "exact three-frequency spectrum belongs to example3");
  }
  const double w = model.diagnostics.at("omega");
  const double O = model.diagnostics.at("Omega");
  const double wt = model.diagnostics.at("omega_tilde");
  return n_plus * (wt + O) + n_minus * (wt - O) + n_z * w;
}

std::string occupation_label(const ModelDescriptor& model, std::size_t n, std::size_t j) {
  const std::uint64_t d = model.degeneracy.at(n);
  if (j < 1 || j > d) {
    throw Error(ErrorKind::ConfigInvalid, "j = " + std::to_string(j) + " outside 1.." + std::to_string(d));
  }
  switch (model.kind) {
    case ModelKind::BosonFermion: {
      const std::size_t f = j - 1;
      return "Phi_" + std::to_string(n - f) + " (x) Psi_" + std::to_string(f);
    }
    case ModelKind::PlanarOscillator: {
      const std::size_t np = j - 1;
      return "n+=" + std::to_string(np) + " n-=" + std::to_string(n - 2 * np);
    }
    case ModelKind::ChargedOscillator3D: {
      std::size_t idx = 0;
      for (std::size_t np = 0; np <= n; ++np) {
        for (std::size_t nm = 0; nm + np <= n; ++nm) {
          if (++idx == j) {
            return "n+=" + std::to_string(np) + " n-=" + std::to_string(nm) + " nz=" + std::to_string(n - np - nm);
          }
        }
      }
      break;
    }
    default: break;
  }
  return "|" + std::to_string(n) + "," + std::to_string(j) + ">";
}

nlohmann::json model_card(const ModelDescriptor& model) {
  nlohmann::json j;
  j["tag"] = model.tag;
  j["parameters"] = model.parameters;
  j["omega"] = model.spectrum.omega();
  j["spectrum_law"] = model.spectrum_law;
  j["degeneracy_law"] = model.degeneracy_law;
  std::vector<double> eps;
  std::vector<std::uint64_t> deg;
  for (std::size_t n = 0; n < 8; ++n) {
    eps.push_back(model.spectrum.eps(n));
    deg.push_back(model.degeneracy.at(n));
  }
  j["eps_first"] = eps;
  j["degeneracy_first"] = deg;
  const auto r = radius_of_convergence(model.spectrum, model.degeneracy);
  j["radius"] = std::isinf(r.radius) ? nlohmann::json("inf") : nlohmann::json(r.radius);
  if (model.measure) {
    j["measure"] = to_json(*model.measure);
    j["measure_closed_form"] = model.measure_closed_form;
  } else {
    j["measure"] = nullptr;
  }
  if (model.table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : model.table->rows) {
      rows.push_back({{"k", row.k}, {"l", row.l}, {"E0", row.E0}, {"g", row.g}, {"eps", row.eps},
                      {"fermion_state", row.fermion_state}});
    }
    j["table"] = rows;
  }
  if (model.branches) j["branches"] = model.branches->names;
  j["diagnostics"] = model.diagnostics;
  j["warnings"] = model.warnings;
  return j;
}

}  // namespace cohstate
