#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cohstate/measures.hpp"
#include "cohstate/spectrum.hpp"

namespace cohstate {

// ---------------------------------------------------------------------------
// Boson coupled to two fermion modes

template <typename Scalar>
struct TwoFermionParams {
  Scalar omega;
  Scalar eps1;
  Scalar eps2;
  Scalar g1;
  Scalar g2;
};

/// One sector (k, l) of the boson-two-fermion Hamiltonian: k fermions in mode 1,
/// l in mode 2. E_n = omega n + E0, shift operator A = a + g/omega.
template <typename Scalar>
struct SpectralRow {
  int k = 0;
  int l = 0;
  Scalar E0{};
  Scalar g{};
  Scalar eps{};
  std::string fermion_state;
};

template <typename Scalar>
struct SpectralTable {
  Scalar omega{};
  std::array<SpectralRow<Scalar>, 4> rows;

  const SpectralRow<Scalar>& row(int k, int l) const {
    for (const auto& r : rows) {
      if (r.k == k && r.l == l) return r;
    }
    return rows[0];
  }
  Scalar energy(int k, int l, std::size_t n) const {
    return omega * Scalar(static_cast<long long>(n)) + row(k, l).E0;
  }
};

/// Rows in order (0,0), (1,0), (0,1), (1,1). g_kl = k g1 + l g2 and
/// eps_kl = k eps1 + l eps2, so row (1,0) carries (eps1, g1).
template <typename Scalar>
SpectralTable<Scalar> two_fermion_spectrum(const TwoFermionParams<Scalar>& p) {
  SpectralTable<Scalar> t;
  t.omega = p.omega;
  const std::array<std::array<int, 2>, 4> order{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};
  const std::array<const char*, 4> names{"Psi00", "c1+ Psi00", "c2+ Psi00", "c1+ c2+ Psi00"};
  for (std::size_t i = 0; i < 4; ++i) {
    const int k = order[i][0];
    const int l = order[i][1];
    SpectralRow<Scalar> r;
    r.k = k;
    r.l = l;
    r.g = Scalar(k) * p.g1 + Scalar(l) * p.g2;
    r.eps = Scalar(k) * p.eps1 + Scalar(l) * p.eps2;
    r.E0 = r.eps - r.g * r.g / p.omega;
    r.fermion_state = names[i];
    t.rows[i] = r;
  }
  return t;
}

/// a + shift on the K+1 dimensional Fock truncation.
Eigen::MatrixXd shifted_annihilator(double shift, std::size_t K);

/// One branch per sector; each branch spectrum is eps_n = n (omega from the table).
BranchSet two_fermion_branches(const SpectralTable<double>& table);

struct DegeneracyFreeResult {
  bool ok = false;
  /// (0, E1, E2, E3, omega) of the inequality chain.
  std::array<double, 5> chain{};
  std::string violated;
  /// eps_{4m+r} = m + E_r/omega; only meaningful when ok.
  std::optional<EnergySpectrum> merged;
};

/// 0 < eps1 - g1^2/w < eps2 - g2^2/w < eps1 + eps2 - (g1^2 + g2^2)/w < w.
DegeneracyFreeResult degeneracy_free_check(const TwoFermionParams<double>& p);

struct HermitianDiagonalization {
  Eigen::Matrix2cd V;
  /// Descending eigenvalues (g1, g2).
  Eigen::Vector2d g_d;
  /// The two-fermion reduction only carries over when eps1 = eps2.
  std::string caveat;
};

/// V g V^{-1} = diag(g1, g2). NotHermitian when g != g^dagger.
HermitianDiagonalization hermitian_coupling_diagonalize(const Eigen::Matrix2cd& g);

// ---------------------------------------------------------------------------
// Model descriptors

enum class ModelKind {
  Linear,
  BosonTwoFermion,
  TwoFermionHermitian,
  BosonFermion,
  PlanarOscillator,
  ChargedOscillator3D,
  Ratio,
};

struct ModelDescriptor {
  ModelKind kind = ModelKind::Linear;
  std::string tag;
  std::map<std::string, double> parameters;
  EnergySpectrum spectrum = EnergySpectrum::linear();
  DegeneracySequence degeneracy = DegeneracySequence::constant_one();
  std::optional<RadialMeasure> measure;
  /// false: the measure is a truncated Laguerre series valid only weakly.
  bool measure_closed_form = true;
  std::optional<BranchSet> branches;
  std::optional<SpectralTable<double>> table;
  std::string spectrum_law;
  std::string degeneracy_law;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
};

ModelDescriptor linear_build(double omega = 1.0);
/// eps_n = n/(n+1); finite support [0, 1) with uniform measure.
ModelDescriptor ratio_build(double omega = 1.0);
/// H = omega (a+a + c+c): d(0) = 1, d(n >= 1) = 2.
ModelDescriptor example1_build(double omega = 1.0);
/// Planar oscillator with b = 3k/5; omega = omega_- and d(n) = floor(n/2) + 1.
ModelDescriptor example2_build(double m, double k, std::size_t laguerre_order = 16);
/// Charged 3D oscillator in the Omega << omega limit; d(n) = (n+1)(n+2)/2.
ModelDescriptor example3_build(double m, double k, double e, double B);
ModelDescriptor two_fermion_build(const TwoFermionParams<double>& p);
/// eps1 = eps2 = eps and hermitian coupling g; reduced through g_d.
ModelDescriptor two_fermion_hermitian_build(double omega, double eps, const Eigen::Matrix2cd& g);

/// Builds from a tag and a flat parameter map (CLI surface).
ModelDescriptor build_model(const std::string& tag, const std::map<std::string, double>& params);

/// Unapproximated example3 level n+(w~ + Omega) + n-(w~ - Omega) + nz w.
double example3_exact_energy(const ModelDescriptor& model, std::size_t n_plus, std::size_t n_minus,
                             std::size_t n_z);

/// Physical occupation behind degenerate label (n, j), j = 1..d(n).
std::string occupation_label(const ModelDescriptor& model, std::size_t n, std::size_t j);

nlohmann::json model_card(const ModelDescriptor& model);

}  // namespace cohstate
