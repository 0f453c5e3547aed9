#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace cohstate {

enum class SpectrumFamily { Linear, Affine, ModelDerived, ExplicitList };

/// A dimensionless level sequence eps_n with energy scale omega, E_n = omega * eps_n.
///
/// Spectra are lazy rules so infinite spectra are first class; explicit lists
/// are finite spectra. `recorded_shift()` is the energy omega*eps_0 removed by
/// shift_to_zero, kept so evolution can restore the global phase.
class EnergySpectrum {
 public:
  using Rule = std::function<double(std::size_t)>;

  static EnergySpectrum linear(double omega = 1.0);
  static EnergySpectrum affine(double offset, double slope, double omega = 1.0);
  static EnergySpectrum from_list(std::vector<double> levels, double omega = 1.0);
  static EnergySpectrum from_rule(Rule rule, std::string tag, double omega = 1.0);

  double omega() const noexcept { return omega_; }
  double recorded_shift() const noexcept { return shift_; }
  SpectrumFamily family() const noexcept { return family_; }
  const std::string& tag() const noexcept { return tag_; }

  /// nullopt for infinite spectra.
  std::optional<std::size_t> level_count() const noexcept { return count_; }
  bool has_level(std::size_t n) const noexcept { return !count_ || n < *count_; }

  double eps(std::size_t n) const;
  double energy(std::size_t n) const { return omega_ * eps(n); }

  bool is_shifted() const { return eps(0) == 0.0; }

  /// O(K) check of eps_0 < eps_1 < ... < eps_K; throws NonMonotoneSpectrum.
  void check_strictly_increasing(std::size_t up_to) const;

  /// Identity used to detect kets evolved with a foreign spectrum.
  std::string fingerprint() const;

  friend EnergySpectrum shift_to_zero(const EnergySpectrum& spec);

 private:
  EnergySpectrum(Rule rule, SpectrumFamily family, std::string tag, double omega,
                 std::optional<std::size_t> count);

  Rule rule_;
  SpectrumFamily family_;
  std::string tag_;
  double omega_;
  double shift_ = 0.0;
  std::optional<std::size_t> count_;
};

enum class DegeneracyFamily { ConstantOne, Example1, Example2, Example3, ExplicitList, Rule };

/// n -> d(n) >= 1.
class DegeneracySequence {
 public:
  using Rule = std::function<std::uint64_t(std::size_t)>;

  static DegeneracySequence constant_one();
  /// d(0) = 1, d(n >= 1) = 2 (boson + fermion).
  static DegeneracySequence example1();
  /// d(n) = floor(n/2) + 1 (planar oscillator with omega+ = 2 omega-).
  static DegeneracySequence example2();
  /// d(n) = (n+1)(n+2)/2 (isotropic 3D oscillator levels).
  static DegeneracySequence example3();
  static DegeneracySequence from_list(std::vector<std::uint64_t> values);
  static DegeneracySequence from_rule(Rule rule, std::string tag);

  std::uint64_t at(std::size_t n) const;
  std::uint64_t operator()(std::size_t n) const { return at(n); }

  DegeneracyFamily family() const noexcept { return family_; }
  const std::string& tag() const noexcept { return tag_; }

 private:
  DegeneracySequence(Rule rule, DegeneracyFamily family, std::string tag,
                     std::optional<std::size_t> count);

  Rule rule_;
  DegeneracyFamily family_;
  std::string tag_;
  std::optional<std::size_t> count_;
};

/// Partial sum of a positive series together with the depth K (last index
/// included) and a certified bound on the neglected tail sum_{n>K}.
struct SeriesValue {
  double value = 0.0;
  std::size_t depth = 0;
  double tail_bound = 0.0;

  double relative_tail() const { return value > 0.0 ? tail_bound / value : 0.0; }
};

/// log(eps_1 eps_2 ... eps_n) for every n <= K, with ordering validated.
std::vector<double> log_eps_factorials(const EnergySpectrum& spec, std::size_t up_to);

double log_eps_factorial(const EnergySpectrum& spec, std::size_t n);

/// eps_1 eps_2 ... eps_n (1 for n = 0). The product is exact while its
/// magnitude stays below `log_space_threshold`, then continues in log space.
double eps_factorial(const EnergySpectrum& spec, std::size_t n,
                     double log_space_threshold = 1e150);

EnergySpectrum shift_to_zero(const EnergySpectrum& spec);

enum class ConvergenceStatus { Stabilized, Growing };

struct RadiusEstimate {
  /// Radius of the normalization series sum J^n d(n)/rho_n = sum J^n/eps_n!.
  double radius = std::numeric_limits<double>::infinity();
  /// Radius of sum J^n/rho_n, i.e. lim eps_n d(n)/d(n-1).
  double component_radius = std::numeric_limits<double>::infinity();
  ConvergenceStatus status = ConvergenceStatus::Growing;
  std::size_t probe_depth = 0;
};

RadiusEstimate radius_of_convergence(const EnergySpectrum& spec, const DegeneracySequence& deg,
                                     std::size_t probe_depth = 1024);

/// Log-space terms log(J^n / eps_n!) for n <= K with K chosen adaptively so
/// that the ratio-test tail bound is below `rel_tol` times the partial sum.
struct SeriesTerms {
  std::vector<double> log_terms;
  SeriesValue sum;
};

SeriesTerms normalization_terms(const EnergySpectrum& spec, double J, double rel_tol,
                                std::size_t max_depth = 20000);

/// N(J) = sum_n J^n d(n) / rho_n with rho_n = eps_n! d(n).
SeriesValue normalization(const EnergySpectrum& spec, const DegeneracySequence& deg, double J,
                          double rel_tol, std::size_t max_depth = 20000);

/// N branches of a vector coherent state, one spectrum eps_{jk} per branch.
struct BranchSet {
  std::vector<EnergySpectrum> branches;
  std::vector<std::string> names;

  std::size_t size() const { return branches.size(); }
  /// eps_{j0} = 0 and strict increase in k within each branch, up to k = up_to.
  void validate(std::size_t up_to) const;
  /// diag(eps_{1k}, ..., eps_{Nk}) as a vector.
  std::vector<double> epsilon_diag(std::size_t k) const;
  /// L_j = lim_k eps_{jk}.
  std::vector<double> radii() const;
};

/// eps_{jk} = eps_{j'l} with k != l, j != j'.
struct BranchCollision {
  std::size_t branch_a = 0;
  std::size_t level_a = 0;
  std::size_t branch_b = 0;
  std::size_t level_b = 0;
  double value = 0.0;
};

/// Cross-branch coincidences up to level K; reported, never rejected.
std::vector<BranchCollision> branch_collisions(const BranchSet& set, std::size_t up_to,
                                               double tol = 1e-12);

}  // namespace cohstate
