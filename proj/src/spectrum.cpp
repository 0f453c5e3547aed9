#include "cohstate/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "cohstate/error.hpp"

namespace cohstate {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr double kMaxLog = 709.0;  // log(DBL_MAX) ~ 709.78

}  // namespace

EnergySpectrum::EnergySpectrum(Rule rule, SpectrumFamily family, std::string tag, double omega,
                               std::optional<std::size_t> count)
    : rule_(std::move(rule)), family_(family), tag_(std::move(tag)), omega_(omega), count_(count) {
  if (!(omega_ > 0.0) || !std::isfinite(omega_)) {
    throw Error(ErrorKind::ConfigInvalid, "energy scale omega must be finite and > 0");
  }
}

EnergySpectrum EnergySpectrum::linear(double omega) {
  return {[](std::size_t n) { return static_cast<double>(n); }, SpectrumFamily::Linear, "linear",
          omega, std::nullopt};
}

EnergySpectrum EnergySpectrum::affine(double offset, double slope, double omega) {
  if (!(slope > 0.0)) {
    throw Error(ErrorKind::NonMonotoneSpectrum, "affine spectrum needs a positive slope");
  }
  return {[offset, slope](std::size_t n) { return offset + slope * static_cast<double>(n); },
          SpectrumFamily::Affine, "affine(" + format_double(offset) + "," + format_double(slope) + ")",
          omega, std::nullopt};
}

EnergySpectrum EnergySpectrum::from_list(std::vector<double> levels, double omega) {
  if (levels.empty()) throw Error(ErrorKind::ConfigInvalid, "explicit spectrum is empty");
  const std::size_t count = levels.size();
  std::string tag = "list(";
  for (std::size_t i = 0; i < std::min<std::size_t>(count, 8); ++i) {
    tag += (i ? "," : "") + format_double(levels[i]);
  }
  tag += count > 8 ? ",...)" : ")";
  return {[values = std::move(levels)](std::size_t n) { return values.at(n); },
          SpectrumFamily::ExplicitList, std::move(tag), omega, count};
}

EnergySpectrum EnergySpectrum::from_rule(Rule rule, std::string tag, double omega) {
  return {std::move(rule), SpectrumFamily::ModelDerived, std::move(tag), omega, std::nullopt};
}

double EnergySpectrum::eps(std::size_t n) const {
  if (!has_level(n)) {
    throw Error(ErrorKind::ConfigInvalid,
                "level " + std::to_string(n) + " requested from a finite spectrum of " +
                    std::to_string(*count_) + " levels");
  }
  const double e = rule_(n);
  if (!std::isfinite(e)) {
    throw Error(ErrorKind::NonMonotoneSpectrum, "level " + std::to_string(n) + " is not finite");
  }
  return e;
}

void EnergySpectrum::check_strictly_increasing(std::size_t up_to) const {
  if (count_) up_to = std::min(up_to, *count_ - 1);
  double prev = eps(0);
  for (std::size_t n = 1; n <= up_to; ++n) {
    const double cur = eps(n);
    if (!(cur > prev)) {
      throw Error(ErrorKind::NonMonotoneSpectrum,
                  "eps_" + std::to_string(n) + " = " + format_double(cur) + " is not above eps_" +
                      std::to_string(n - 1) + " = " + format_double(prev));
    }
    prev = cur;
  }
}

std::string EnergySpectrum::fingerprint() const {
  std::string out = tag_ + "|omega=" + format_double(omega_) + "|shift=" + format_double(shift_) + "|eps=";
  const std::size_t probe = count_ ? std::min<std::size_t>(*count_, 6) : 6;
  for (std::size_t n = 0; n < probe; ++n) out += (n ? "," : "") + format_double(eps(n));
  return out;
}

EnergySpectrum shift_to_zero(const EnergySpectrum& spec) {
  const double e0 = spec.eps(0);
  if (e0 == 0.0) return spec;
  EnergySpectrum out = spec;
  out.rule_ = [inner = spec.rule_, e0](std::size_t n) { return inner(n) - e0; };
  out.shift_ = spec.shift_ + spec.omega_ * e0;
  out.tag_ = spec.tag_ + "-shifted";
  return out;
}

// ---------------------------------------------------------------------------

DegeneracySequence::DegeneracySequence(Rule rule, DegeneracyFamily family, std::string tag,
                                       std::optional<std::size_t> count)
    : rule_(std::move(rule)), family_(family), tag_(std::move(tag)), count_(count) {}

DegeneracySequence DegeneracySequence::constant_one() {
  return {[](std::size_t) -> std::uint64_t { return 1; }, DegeneracyFamily::ConstantOne, "constant",
          std::nullopt};
}

DegeneracySequence DegeneracySequence::example1() {
  return {[](std::size_t n) -> std::uint64_t { return n == 0 ? 1 : 2; }, DegeneracyFamily::Example1,
          "example1", std::nullopt};
}

DegeneracySequence DegeneracySequence::example2() {
  return {[](std::size_t n) -> std::uint64_t { return n / 2 + 1; }, DegeneracyFamily::Example2,
          "example2", std::nullopt};
}

DegeneracySequence DegeneracySequence::example3() {
  return {[](std::size_t n) -> std::uint64_t { return (n + 1) * (n + 2) / 2; },
          DegeneracyFamily::Example3, "example3", std::nullopt};
}

DegeneracySequence DegeneracySequence::from_list(std::vector<std::uint64_t> values) {
  if (values.empty()) throw Error(ErrorKind::ConfigInvalid, "explicit degeneracy list is empty");
  for (auto v : values) {
    if (v == 0) throw Error(ErrorKind::ConfigInvalid, "degeneracies must be >= 1");
  }
  const std::size_t count = values.size();
  return {[v = std::move(values)](std::size_t n) { return v.at(n); }, DegeneracyFamily::ExplicitList,
          "list", count};
}

DegeneracySequence DegeneracySequence::from_rule(Rule rule, std::string tag) {
  return {std::move(rule), DegeneracyFamily::Rule, std::move(tag), std::nullopt};
}

std::uint64_t DegeneracySequence::at(std::size_t n) const {
  if (count_ && n >= *count_) {
    throw Error(ErrorKind::ConfigInvalid, "degeneracy requested beyond explicit list at n = " +
                                              std::to_string(n));
  }
  const std::uint64_t d = rule_(n);
  if (d == 0) throw Error(ErrorKind::ConfigInvalid, "d(" + std::to_string(n) + ") = 0");
  return d;
}

// ---------------------------------------------------------------------------

std::vector<double> log_eps_factorials(const EnergySpectrum& spec, std::size_t up_to) {
  if (spec.eps(0) != 0.0) {
    throw Error(ErrorKind::UnshiftedSpectrum, "eps_0 = " + format_double(spec.eps(0)) +
                                                  "; apply shift_to_zero first");
  }
  std::vector<double> out(up_to + 1, 0.0);
  double prev = 0.0;
  for (std::size_t n = 1; n <= up_to; ++n) {
    const double e = spec.eps(n);
    if (!(e > prev)) {
      throw Error(ErrorKind::NonMonotoneSpectrum,
                  "eps_" + std::to_string(n) + " = " + format_double(e) + " is not above eps_" +
                      std::to_string(n - 1));
    }
    out[n] = out[n - 1] + std::log(e);
    prev = e;
  }
  return out;
}

double log_eps_factorial(const EnergySpectrum& spec, std::size_t n) {
  return log_eps_factorials(spec, n).back();
}

double eps_factorial(const EnergySpectrum& spec, std::size_t n, double log_space_threshold) {
  if (spec.eps(0) != 0.0) {
    throw Error(ErrorKind::UnshiftedSpectrum, "eps_0 = " + format_double(spec.eps(0)));
  }
  double product = 1.0;
  double log_product = 0.0;
  bool in_log = false;
  double prev = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double e = spec.eps(k);
    if (!(e > prev)) {
      throw Error(ErrorKind::NonMonotoneSpectrum, "eps_" + std::to_string(k) + " = " +
                                                      format_double(e) + " is not above eps_" +
                                                      std::to_string(k - 1));
    }
    prev = e;
    if (!in_log) {
      product *= e;
      if (std::abs(product) > log_space_threshold || std::abs(product) < 1.0 / log_space_threshold) {
        in_log = true;
        log_product = std::log(product);
      }
    } else {
      log_product += std::log(e);
    }
  }
  if (!in_log) return product;
  if (log_product > kMaxLog) {
    throw Error(ErrorKind::Overflow, "eps_" + std::to_string(n) + "! exceeds double range (log = " +
                                         format_double(log_product) + ")");
  }
  return std::exp(log_product);
}

// ---------------------------------------------------------------------------

namespace {

// Limit of a ratio sequence sampled at three geometric depths.
std::pair<double, ConvergenceStatus> extrapolate(double r1, double r2, double r3) {
  const double d1 = r2 - r1;
  const double d2 = r3 - r2;
  if (std::abs(d2) <= 1e-9 * std::max(1.0, std::abs(r3))) return {r3, ConvergenceStatus::Stabilized};
  if (d2 > 0.0 && d1 > 0.0 && d2 >= 0.9 * d1) {
    return {std::numeric_limits<double>::infinity(), ConvergenceStatus::Growing};
  }
  if (d1 != 0.0) {
    const double ratio = d2 / d1;
    if (ratio > 0.0 && ratio < 0.9) return {r3 + d2 * ratio / (1.0 - ratio), ConvergenceStatus::Stabilized};
  }
  return {r3, ConvergenceStatus::Stabilized};
}

}  // namespace

RadiusEstimate radius_of_convergence(const EnergySpectrum& spec, const DegeneracySequence& deg,
                                     std::size_t probe_depth) {
  RadiusEstimate out;
  if (spec.level_count()) {
    // Finite spectra give polynomials: entire.
    out.status = ConvergenceStatus::Stabilized;
    out.probe_depth = *spec.level_count() - 1;
    return out;
  }
  probe_depth = std::max<std::size_t>(probe_depth, 8);
  const std::size_t n3 = probe_depth - 1;
  const std::size_t n2 = n3 / 2;
  const std::size_t n1 = n2 / 2;
  auto norm_ratio = [&](std::size_t n) { return spec.eps(n + 1); };
  auto comp_ratio = [&](std::size_t n) {
    return spec.eps(n + 1) * static_cast<double>(deg.at(n + 1)) / static_cast<double>(deg.at(n));
  };
  const auto [L, status] = extrapolate(norm_ratio(n1), norm_ratio(n2), norm_ratio(n3));
  const auto [Lc, status_c] = extrapolate(comp_ratio(n1), comp_ratio(n2), comp_ratio(n3));
  (void)status_c;
  out.radius = L;
  out.component_radius = Lc;
  out.status = status;
  out.probe_depth = probe_depth;
  return out;
}

SeriesTerms normalization_terms(const EnergySpectrum& spec, double J, double rel_tol,
                                std::size_t max_depth) {
  if (!(J >= 0.0) || !std::isfinite(J)) {
    throw Error(ErrorKind::OutsideConvergenceDomain, "J must be finite and >= 0");
  }
  if (spec.eps(0) != 0.0) {
    throw Error(ErrorKind::UnshiftedSpectrum, "eps_0 = " + format_double(spec.eps(0)));
  }
  SeriesTerms out;
  out.log_terms.push_back(0.0);
  out.sum = {1.0, 0, 0.0};
  if (J == 0.0) return out;

  const double log_J = std::log(J);
  double log_fact = 0.0;
  double prev = 0.0;
  double sum = 1.0;
  const std::optional<std::size_t> count = spec.level_count();
  for (std::size_t n = 1; n <= max_depth; ++n) {
    if (count && n >= *count) {
      out.sum = {sum, n - 1, 0.0};
      return out;
    }
    const double e = spec.eps(n);
    if (!(e > prev)) {
      throw Error(ErrorKind::NonMonotoneSpectrum, "eps_" + std::to_string(n) + " = " +
                                                      format_double(e) + " is not above eps_" +
                                                      std::to_string(n - 1));
    }
    prev = e;
    log_fact += std::log(e);
    const double log_t = static_cast<double>(n) * log_J - log_fact;
    if (log_t > kMaxLog) {
      const RadiusEstimate r = radius_of_convergence(spec, DegeneracySequence::constant_one());
      if (J >= r.radius) {
        throw Error(ErrorKind::OutsideConvergenceDomain,
                    "J = " + format_double(J) + " >= L = " + format_double(r.radius));
      }
      throw Error(ErrorKind::Overflow, "series term exceeds double range at n = " + std::to_string(n));
    }
    out.log_terms.push_back(log_t);
    sum += std::exp(log_t);

    // Tail after n: t_{n+1} / (1 - J/eps_{n+2}), valid because J/eps_k decreases.
    if (count && n + 1 >= *count) {
      out.sum = {sum, n, 0.0};
      return out;
    }
    const double e1 = spec.eps(n + 1);
    const bool have_e2 = !count || n + 2 < *count;
    const double q = have_e2 ? J / spec.eps(n + 2) : 0.0;
    if (J < e1 && q < 1.0) {
      const double t_next = std::exp(log_t + log_J - std::log(e1));
      const double tail = t_next / (1.0 - q);
      if (tail <= rel_tol * sum) {
        out.sum = {sum, n, tail};
        return out;
      }
    }
  }
  const RadiusEstimate r = radius_of_convergence(spec, DegeneracySequence::constant_one());
  if (J >= r.radius) {
    throw Error(ErrorKind::OutsideConvergenceDomain,
                "J = " + format_double(J) + " >= L = " + format_double(r.radius));
  }
  throw Error(ErrorKind::NonConvergent, "tail not certified below tolerance within depth " +
                                            std::to_string(max_depth));
}

SeriesValue normalization(const EnergySpectrum& spec, const DegeneracySequence& deg, double J,
                          double rel_tol, std::size_t max_depth) {
  // d(n) / rho_n = 1 / eps_n!, so the degeneracy cancels termwise; it is still
  // validated over the summed range.
  SeriesTerms terms = normalization_terms(spec, J, rel_tol, max_depth);
  for (std::size_t n = 0; n <= terms.sum.depth; ++n) (void)deg.at(n);
  return terms.sum;
}

// ---------------------------------------------------------------------------

void BranchSet::validate(std::size_t up_to) const {
  if (branches.empty()) throw Error(ErrorKind::ConfigInvalid, "branch set is empty");
  for (std::size_t j = 0; j < branches.size(); ++j) {
    if (branches[j].eps(0) != 0.0) {
      throw Error(ErrorKind::UnshiftedSpectrum, "branch " + std::to_string(j) + " has eps_0 = " +
                                                    format_double(branches[j].eps(0)));
    }
    branches[j].check_strictly_increasing(up_to);
  }
}

std::vector<double> BranchSet::epsilon_diag(std::size_t k) const {
  std::vector<double> out;
  out.reserve(branches.size());
  for (const auto& b : branches) out.push_back(b.eps(k));
  return out;
}

std::vector<double> BranchSet::radii() const {
  std::vector<double> out;
  for (const auto& b : branches) {
    out.push_back(radius_of_convergence(b, DegeneracySequence::constant_one()).radius);
  }
  return out;
}

std::vector<BranchCollision> branch_collisions(const BranchSet& set, std::size_t up_to, double tol) {
  std::vector<BranchCollision> out;
  for (std::size_t a = 0; a < set.size(); ++a) {
    for (std::size_t b = a + 1; b < set.size(); ++b) {
      for (std::size_t k = 0; k <= up_to && set.branches[a].has_level(k); ++k) {
        const double ea = set.branches[a].eps(k);
        for (std::size_t l = 0; l <= up_to && set.branches[b].has_level(l); ++l) {
          if (k == l) continue;
          const double eb = set.branches[b].eps(l);
          if (std::abs(ea - eb) <= tol * std::max(1.0, std::abs(ea))) out.push_back({a, k, b, l, ea});
        }
      }
    }
  }
  return out;
}

}  // namespace cohstate
