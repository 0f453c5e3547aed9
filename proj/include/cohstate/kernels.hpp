#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cohstate/measures.hpp"
#include "cohstate/models.hpp"
#include "cohstate/spectrum.hpp"
#include "cohstate/states.hpp"

namespace cohstate {

/// Point (J, gamma[, theta]) of the label space.
struct ActionAngle {
  double J = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
};

/// Frequency-matching rule standing in for the gamma measure: the limit of
/// (1/2T) int_{-T}^{T} e^{i(a-b)g} dg. Exact comparison unless freq_tol > 0.
int phase_average(double eps_a, double eps_b, double freq_tol = 0.0);

/// The finite-T average sin(dT)/(dT), d = eps_a - eps_b. Diagnostic only.
double phase_average_finite(double eps_a, double eps_b, double T);

struct KernelValue {
  Complex value;
  ActionAngle x;
  ActionAngle y;
  std::size_t truncation = 0;
  /// Bound on |K - value| from the dropped tail.
  double tail_bound = 0.0;
};

/// K(x, y) = sum (J J')^{n/2} e^{i eps_n (gamma - gamma')} / eps_n!.
/// Shares its series with normalization(), so K(x, x) is N(J) bit for bit.
KernelValue kernel_eval(const EnergySpectrum& spec, const ActionAngle& x, const ActionAngle& y, double tol);

/// Degenerate kernel sum_{n,j} (J J')^{n/2} e^{i eps_n (g - g')} e^{i j (th - th')} / rho_n.
KernelValue kernel_eval(const EnergySpectrum& spec, const DegeneracySequence& deg, const ActionAngle& x,
                        const ActionAngle& y, double tol);

/// Entry (j, k) = <J, gamma; j | J', gamma'; k> over normalized branch states.
Eigen::MatrixXcd matrix_kernel(const BranchSet& branches, const std::vector<double>& J,
                               const std::vector<double>& gamma, const std::vector<double>& Jp,
                               const std::vector<double>& gammap, double tol);

/// [K(x_i, x_j)] for the scalar kernel.
Eigen::MatrixXcd gram_matrix(const EnergySpectrum& spec, const std::vector<ActionAngle>& points, double tol);

enum class ResolutionStatus { Pass, Fail, WeakSenseOnly };

struct ResolutionRow {
  std::string branch;  // empty for single-spectrum models
  std::size_t n = 0;
  double moment = 0.0;
  double target = 0.0;
  double ratio = 0.0;
};

struct ResolutionReport {
  std::string model_tag;
  std::vector<ResolutionRow> rows;
  double max_ratio_error = 0.0;
  /// Largest phase/theta average over distinct labels (0 for strictly increasing spectra).
  double off_diagonal_residual = 0.0;
  double tolerance = 0.0;
  ResolutionStatus status = ResolutionStatus::Fail;
  QuadratureFamily quadrature = QuadratureFamily::GaussLaguerre;
  std::size_t nodes = 0;
  std::string note;

  bool passed() const { return status == ResolutionStatus::Pass; }
};

/// r_n = int J^n dnu / (eps_n! d(n)) for n <= n_max. Off-diagonal matrix
/// elements vanish through phase_average and the theta average. Truncated
/// Laguerre measures report WeakSenseOnly; models without a measure throw NoMeasure.
ResolutionReport resolution_check(const ModelDescriptor& model, std::size_t n_max,
                                  const QuadratureOptions& quad, double tol);

struct IdempotencyReport {
  double max_residual = 0.0;
  std::vector<double> residuals;  // per (x, y) pair, row-major over the sample set
  std::size_t max_level = 0;
  bool passed = false;
};

/// K(x, y) against int K(x, z) K(z, y) dmu(gamma_z) dnu(J_z): the gamma part is
/// phase_average, the J part uses quadrature moments of `measure`. Integer
/// spectra only (ConfigInvalid otherwise).
IdempotencyReport kernel_idempotency(const EnergySpectrum& spec, const DegeneracySequence& deg,
                                     const RadialMeasure& measure, const std::vector<ActionAngle>& points,
                                     const QuadratureOptions& quad, double tol);

std::string to_string(ResolutionStatus status);
nlohmann::json to_json(const ResolutionReport& report);

}  // namespace cohstate
