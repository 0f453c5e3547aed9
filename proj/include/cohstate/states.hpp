#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cohstate/spectrum.hpp"

namespace cohstate {

using Complex = std::complex<double>;

/// Single: |n>. Degenerate: |n, j>, j = 1..d(n). Branch: (k, j) = level k of
/// branch j. DoubleFock: |Psi_{n l}> with j holding l.
enum class LabelScheme { Single, Degenerate, Branch, DoubleFock };

/// Which Hamiltonian moves the ket in time: H1 acts on n, H2 on l, H1 - H2 on both.
enum class Generator { H1, H2, HDiff };

struct Label {
  std::size_t n = 0;
  std::size_t j = 0;
  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label&, const Label&) = default;
};

struct LabeledKet {
  LabelScheme scheme = LabelScheme::Single;
  std::string family;
  std::vector<Label> labels;
  Eigen::VectorXcd coeffs;
  std::size_t truncation = 0;
  /// Certified bound on the squared norm outside the truncation.
  double tail_bound = 0.0;
  std::map<std::string, double> params;
  Generator generator = Generator::H1;
  std::string spectrum_fingerprint;
  bool normalized = true;

  /// Accumulated in extended precision; degenerate kets carry thousands of terms.
  double norm_squared() const;
  /// Index of a label or -1.
  std::ptrdiff_t find(const Label& label) const;
};

enum class Normalization { Normalized, Unnormalized };

/// z = sqrt(J) e^{-i gamma}.
std::pair<double, double> action_angle(Complex z);
Complex complex_label(double J, double gamma);

/// N(J)^{-1/2} J^{n/2} e^{-i eps_n gamma} / sqrt(eps_n!). Unnormalized drops N(J)^{-1/2}.
LabeledKet gk_state(const EnergySpectrum& spec, double J, double gamma, double tol,
                    Normalization norm = Normalization::Normalized);

/// Labels (n, j), coefficient J^{n/2} e^{-i eps_n gamma} e^{-i j theta} / sqrt(eps_n! d(n) N(J)).
LabeledKet degenerate_state(const EnergySpectrum& spec, const DegeneracySequence& deg, double J,
                            double gamma, double theta, double tol);

struct VCSBundle {
  std::size_t branch = 0;
  LabeledKet ket;
  /// diag(J_1..J_N), diag(gamma_1..gamma_N); entries other than `branch` are
  /// carried for reference only.
  std::vector<double> J_diag;
  std::vector<double> gamma_diag;
};

/// One-hot vector coherent state supported on branch j.
VCSBundle branch_vcs(const BranchSet& branches, std::size_t j, double J_j, double gamma_j, double tol);
VCSBundle branch_vcs(const BranchSet& branches, std::size_t j, const std::vector<double>& J_diag,
                     const std::vector<double>& gamma_diag, double tol);

/// l-th component (non-normalized; sum over l of the squared norms is 1).
LabeledKet vcs1(const EnergySpectrum& spec, double J, double gamma, double Jp, double gammap,
                std::size_t ell, double tol);
/// n-th component of the dual family.
LabeledKet vcs2(const EnergySpectrum& spec, double J, double gamma, double Jp, double gammap,
                std::size_t n, double tol);
/// Normalized double-index state for H = H1 - H2.
LabeledKet bcs(const EnergySpectrum& spec, double J, double gamma, double Jp, double gammap, double tol);

LabeledKet vcs1_z(const EnergySpectrum& spec, Complex z, Complex zp, std::size_t ell, double tol);
LabeledKet vcs2_z(const EnergySpectrum& spec, Complex z, Complex zp, std::size_t n, double tol);
LabeledKet bcs_z(const EnergySpectrum& spec, Complex z, Complex zp, double tol);

/// Multiplies each coefficient by e^{-i omega E t} for the ket's generator.
/// `spec` may be the unshifted original; its eps_0 then contributes the global
/// phase e^{-i omega eps_0 t}. SpectrumMismatch if the ket was built elsewhere.
LabeledKet evolve(const LabeledKet& ket, const EnergySpectrum& spec, double t);
LabeledKet evolve(const LabeledKet& ket, const BranchSet& branches, double t);

struct EnergyValue {
  double value = 0.0;
  /// Bound on the energy carried by the truncated tail and the last kept level.
  double tail_estimate = 0.0;
};

/// sum omega eps |c|^2 for the ket's generator. For an unshifted `spec` the
/// ground energy omega eps_0 is added (only for H1/H2 generators).
EnergyValue energy_expectation(const LabeledKet& ket, const EnergySpectrum& spec);
/// Sum over the components of a vcs1/vcs2 family.
EnergyValue energy_expectation(const std::vector<LabeledKet>& components, const EnergySpectrum& spec);
EnergyValue energy_expectation(const LabeledKet& ket, const BranchSet& branches);

/// <a|b> over matching labels.
Complex inner_product(const LabeledKet& a, const LabeledKet& b);

nlohmann::json to_json(const LabeledKet& ket);
LabeledKet ket_from_json(const nlohmann::json& j);
/// Columns: n,j,re,im,mod2.
std::string to_csv(const LabeledKet& ket);

std::string to_string(LabelScheme scheme);
std::string to_string(Generator generator);

}  // namespace cohstate
