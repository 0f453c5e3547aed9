#include "cohstate/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "cohstate/error.hpp"

namespace cohstate {

int phase_average(double eps_a, double eps_b, double freq_tol) {
  return std::abs(eps_a - eps_b) <= freq_tol ? 1 : 0;
}

double phase_average_finite(double eps_a, double eps_b, double T) {
  const double x = (eps_a - eps_b) * T;
  return x == 0.0 ? 1.0 : std::sin(x) / x;
}

namespace {

void require_label(const ActionAngle& p) {
  if (!(p.J >= 0.0) || !std::isfinite(p.J)) {
    throw Error(ErrorKind::OutsideConvergenceDomain, "J must be finite and >= 0");
  }
}

// Mean of e^{i j dth} over j = 1..d; exactly 1 when dth = 0.
Complex theta_factor(std::uint64_t d, double dth) {
  if (dth == 0.0) return 1.0;
  Complex s = 0.0;
  for (std::uint64_t j = 1; j <= d; ++j) s += std::polar(1.0, static_cast<double>(j) * dth);
  return s / static_cast<double>(d);
}

KernelValue kernel_impl(const EnergySpectrum& spec, const DegeneracySequence* deg, const ActionAngle& x,
                        const ActionAngle& y, double tol) {
  require_label(x);
  require_label(y);
  // sqrt(J*J) == J exactly, so the diagonal walks the normalization series.
  const double Jeff = std::sqrt(x.J * y.J);
  const SeriesTerms t = normalization_terms(spec, Jeff, tol);
  const double dg = x.gamma - y.gamma;
  const double dth = x.theta - y.theta;
  KernelValue out;
  out.x = x;
  out.y = y;
  out.value = deg ? theta_factor(deg->at(0), dth) : Complex(1.0);
  for (std::size_t n = 1; n < t.log_terms.size(); ++n) {
    Complex term = std::exp(t.log_terms[n]) * std::polar(1.0, spec.eps(n) * dg);
    if (deg) term *= theta_factor(deg->at(n), dth);
    out.value += term;
  }
  out.truncation = t.log_terms.size() - 1;
  out.tail_bound = t.sum.tail_bound;
  return out;
}

}  // namespace

KernelValue kernel_eval(const EnergySpectrum& spec, const ActionAngle& x, const ActionAngle& y, double tol) {
  return kernel_impl(spec, nullptr, x, y, tol);
}

KernelValue kernel_eval(const EnergySpectrum& spec, const DegeneracySequence& deg, const ActionAngle& x,
                        const ActionAngle& y, double tol) {
  return kernel_impl(spec, &deg, x, y, tol);
}

Eigen::MatrixXcd matrix_kernel(const BranchSet& branches, const std::vector<double>& J,
                               const std::vector<double>& gamma, const std::vector<double>& Jp,
                               const std::vector<double>& gammap, double tol) {
  const std::size_t N = branches.size();
  std::vector<LabeledKet> left, right;
  for (std::size_t j = 0; j < N; ++j) {
    left.push_back(branch_vcs(branches, j, J, gamma, tol).ket);
    right.push_back(branch_vcs(branches, j, Jp, gammap, tol).ket);
  }
  Eigen::MatrixXcd K(N, N);
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t k = 0; k < N; ++k) {
      if (j != k) {
        K(j, k) = inner_product(left[j], right[k]);  // disjoint labels: exactly 0
        continue;
      }
      // Summed as one series so the two truncations do not cut each other short.
      const EnergySpectrum& spec = branches.branches[j];
      const double nl = normalization_terms(spec, J[j], tol).sum.value;
      const double nr = normalization_terms(spec, Jp[j], tol).sum.value;
      K(j, j) = kernel_eval(spec, {J[j], gamma[j]}, {Jp[j], gammap[j]}, tol).value / std::sqrt(nl * nr);
    }
  }
  return K;
}

Eigen::MatrixXcd gram_matrix(const EnergySpectrum& spec, const std::vector<ActionAngle>& points, double tol) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXcd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = kernel_eval(spec, points[i], points[j], tol).value;
  }
  return G;
}

// ---------------------------------------------------------------------------

namespace {

double off_diagonal(const EnergySpectrum& spec, std::size_t n_max) {
  double worst = 0.0;
  for (std::size_t a = 0; a <= n_max && spec.has_level(a); ++a) {
    for (std::size_t b = 0; b <= n_max && spec.has_level(b); ++b) {
      if (a != b) worst = std::max(worst, static_cast<double>(phase_average(spec.eps(a), spec.eps(b))));
    }
  }
  // Degenerate labels j != j' are integer Fourier modes: the theta average is exactly 0.
  return worst;
}

void append(ResolutionReport& out, const MomentReport& rep, const std::string& branch) {
  for (const auto& r : rep.rows) {
    const double ratio = r.computed / r.target;
    out.rows.push_back({branch, r.n, r.computed, r.target, ratio});
    out.max_ratio_error = std::max(out.max_ratio_error, std::abs(ratio - 1.0));
  }
  out.quadrature = rep.quadrature;
  out.nodes = std::max(out.nodes, rep.nodes);
}

}  // namespace

ResolutionReport resolution_check(const ModelDescriptor& model, std::size_t n_max, const QuadratureOptions& quad,
                                  double tol) {
  if (!model.measure) {
    throw Error(ErrorKind::NoMeasure, "model '" + model.tag + "' carries no measure");
  }
  ResolutionReport out;
  out.model_tag = model.tag;
  out.tolerance = tol;
  bool moments_ok = true;
  if (model.branches) {
    for (std::size_t b = 0; b < model.branches->size(); ++b) {
      const EnergySpectrum& spec = model.branches->branches[b];
      const auto rep = verify_moments(*model.measure, spec, DegeneracySequence::constant_one(), n_max, quad, tol);
      append(out, rep, model.branches->names[b]);
      moments_ok = moments_ok && rep.passed;
      out.off_diagonal_residual = std::max(out.off_diagonal_residual, off_diagonal(spec, n_max));
    }
    out.note = "per-branch reduction; distinct branches are orthogonal sectors";
  } else {
    const auto rep = verify_moments(*model.measure, model.spectrum, model.degeneracy, n_max, quad, tol);
    append(out, rep, "");
    moments_ok = rep.passed;
    out.off_diagonal_residual = off_diagonal(model.spectrum, n_max);
  }
  if (!model.measure_closed_form) {
    out.status = ResolutionStatus::WeakSenseOnly;
    out.note = "truncated Laguerre series (N = " +
               std::to_string(model.measure->laguerre ? model.measure->laguerre->truncation() : 0) +
               "); the identity holds only weakly, ratios are informational";
    return out;
  }
  out.status = moments_ok && out.max_ratio_error <= tol && out.off_diagonal_residual <= tol ? ResolutionStatus::Pass
                                                                                          : ResolutionStatus::Fail;
  return out;
}

IdempotencyReport kernel_idempotency(const EnergySpectrum& spec, const DegeneracySequence& deg,
                                     const RadialMeasure& measure, const std::vector<ActionAngle>& points,
                                     const QuadratureOptions& quad, double tol) {
  IdempotencyReport out;
  const std::size_t P = points.size();
  std::vector<KernelValue> K;
  K.reserve(P * P);
  for (const auto& x : points) {
    for (const auto& y : points) {
      K.push_back(kernel_eval(spec, deg, x, y, tol));
      out.max_level = std::max(out.max_level, K.back().truncation);
    }
  }
  for (std::size_t n = 0; n <= out.max_level; ++n) {
    const double e = spec.eps(n);
    if (e != std::floor(e)) {
      throw Error(ErrorKind::ConfigInvalid, "kernel idempotency needs an integer spectrum; eps_" +
                                                std::to_string(n) + " = " + std::to_string(e));
    }
  }
  const QuadratureRule rule = measure.finite_support() ? gauss_legendre(quad.legendre_nodes, 0.0, measure.support_end)
                                                       : gauss_laguerre(quad.laguerre_nodes);
  std::vector<double> ratio(out.max_level + 1);
  for (std::size_t n = 0; n <= out.max_level; ++n) {
    ratio[n] = measure_moment(measure, n, rule) / target_moment(spec, deg, n);
  }

  for (std::size_t i = 0; i < P; ++i) {
    for (std::size_t j = 0; j < P; ++j) {
      const ActionAngle& x = points[i];
      const ActionAngle& y = points[j];
      const std::size_t L = K[i * P + j].truncation;
      // int dmu(gamma_z): e^{-i eps_n g_z} e^{+i eps_m g_z} averages to phase_average(eps_n, eps_m).
      Complex reduced = 0.0;
      for (std::size_t n = 0; n <= L; ++n) {
        for (std::size_t m = 0; m <= L; ++m) {
          if (!phase_average(spec.eps(n), spec.eps(m))) continue;
          const double lx = n == 0 ? 0.0 : 0.5 * n * std::log(x.J) - 0.5 * log_eps_factorial(spec, n);
          const double ly = m == 0 ? 0.0 : 0.5 * m * std::log(y.J) - 0.5 * log_eps_factorial(spec, m);
          Complex term = std::exp(lx + ly) * std::polar(1.0, spec.eps(n) * x.gamma - spec.eps(m) * y.gamma);
          term *= theta_factor(deg.at(n), x.theta - y.theta) * ratio[n];
          reduced += term;
        }
      }
      const double scale = std::sqrt(K[i * P + i].value.real() * K[j * P + j].value.real());
      const double r = std::abs(K[i * P + j].value - reduced) / scale;
      out.residuals.push_back(r);
      out.max_residual = std::max(out.max_residual, r);
    }
  }
  out.passed = out.max_residual <= tol;
  return out;
}

std::string to_string(ResolutionStatus s) {
  switch (s) {
    case ResolutionStatus::Pass: return "pass";
    case ResolutionStatus::Fail: return "fail";
    case ResolutionStatus::WeakSenseOnly: return "weak-sense-only";
  }
  return "?";
}

nlohmann::json to_json(const ResolutionReport& r) {
  nlohmann::json j;
  j["model"] = r.model_tag;
  j["status"] = to_string(r.status);
  j["tolerance"] = r.tolerance;
  j["max_ratio_error"] = r.max_ratio_error;
  j["off_diagonal_residual"] = r.off_diagonal_residual;
  j["quadrature"] = {{"family", to_string(r.quadrature)}, {"nodes", r.nodes}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json e = {{"n", row.n}, {"moment", row.moment}, {"target", row.target}, {"ratio", row.ratio}};
    if (!row.branch.empty()) e["branch"] = row.branch;
    rows.push_back(e);
  }
  j["rows"] = rows;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace cohstate
