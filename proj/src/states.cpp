#include "cohstate/states.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cohstate/error.hpp"

namespace cohstate {

namespace {

struct Profile {
  std::vector<double> log_terms;  // log(J^n / eps_n!)
  double sum = 1.0;
  double tail = 0.0;  // relative tail, i.e. bound on the missing squared norm
};

Profile profile(const EnergySpectrum& spec, double J, double tol) {
  if (!spec.is_shifted()) {
    throw Error(ErrorKind::UnshiftedSpectrum, "states need eps_0 = 0; apply shift_to_zero first");
  }
  SeriesTerms t = normalization_terms(spec, J, tol);
  return {std::move(t.log_terms), t.sum.value, t.sum.relative_tail()};
}

// log(J^l / eps_l!) for arbitrary l, outside the adaptive depth.
double log_term(const EnergySpectrum& spec, double J, std::size_t l) {
  if (l == 0) return 0.0;
  if (J == 0.0) return -std::numeric_limits<double>::infinity();
  return l * std::log(J) - log_eps_factorial(spec, l);
}

void require_parameter(double J, const char* name) {
  if (!(J >= 0.0) || !std::isfinite(J)) {
    throw Error(ErrorKind::OutsideConvergenceDomain, std::string(name) + " must be finite and >= 0");
  }
}

std::size_t max_index(const LabeledKet& ket, bool second) {
  std::size_t m = 0;
  for (const auto& l : ket.labels) m = std::max(m, second ? l.j : l.n);
  return m;
}

double param(const LabeledKet& ket, const std::string& key) {
  auto it = ket.params.find(key);
  return it == ket.params.end() ? 0.0 : it->second;
}

LabeledKet double_fock(const EnergySpectrum& spec, const std::string& family, double J, double gamma,
                       double Jp, double gammap, std::size_t n_lo, std::size_t n_hi, std::size_t l_lo,
                       std::size_t l_hi, const Profile& p, const Profile& q) {
  LabeledKet ket;
  ket.scheme = LabelScheme::DoubleFock;
  ket.family = family;
  ket.spectrum_fingerprint = spec.fingerprint();
  const double log_norm = 0.5 * (std::log(p.sum) + std::log(q.sum));
  std::vector<Complex> c;
  for (std::size_t n = n_lo; n <= n_hi; ++n) {
    const double ln = n < p.log_terms.size() ? p.log_terms[n] : log_term(spec, J, n);
    const double en = spec.eps(n);
    for (std::size_t l = l_lo; l <= l_hi; ++l) {
      const double ll = l < q.log_terms.size() ? q.log_terms[l] : log_term(spec, Jp, l);
      const double el = spec.eps(l);
      const double mod = std::exp(0.5 * (ln + ll) - log_norm);
      ket.labels.push_back({n, l});
      c.push_back(std::polar(mod, -(en * gamma - el * gammap)));
    }
  }
  ket.coeffs = Eigen::Map<Eigen::VectorXcd>(c.data(), static_cast<Eigen::Index>(c.size()));
  ket.params = {{"J", J}, {"gamma", gamma}, {"Jp", Jp}, {"gammap", gammap}};
  return ket;
}

}  // namespace

std::ptrdiff_t LabeledKet::find(const Label& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

double LabeledKet::norm_squared() const {
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) acc += std::norm(coeffs(i));
  return static_cast<double>(acc);
}

std::pair<double, double> action_angle(Complex z) { return {std::norm(z), -std::arg(z)}; }

Complex complex_label(double J, double gamma) { return std::polar(std::sqrt(J), -gamma); }

LabeledKet gk_state(const EnergySpectrum& spec, double J, double gamma, double tol, Normalization norm) {
  require_parameter(J, "J");
  const Profile p = profile(spec, J, tol);
  LabeledKet ket;
  ket.scheme = LabelScheme::Single;
  ket.family = "gk";
  ket.spectrum_fingerprint = spec.fingerprint();
  ket.truncation = p.log_terms.size() - 1;
  ket.normalized = norm == Normalization::Normalized;
  const double log_norm = ket.normalized ? std::log(p.sum) : 0.0;
  ket.coeffs.resize(static_cast<Eigen::Index>(p.log_terms.size()));
  for (std::size_t n = 0; n < p.log_terms.size(); ++n) {
    ket.labels.push_back({n, 0});
    ket.coeffs(static_cast<Eigen::Index>(n)) =
        std::polar(std::exp(0.5 * (p.log_terms[n] - log_norm)), -spec.eps(n) * gamma);
  }
  ket.tail_bound = ket.normalized ? p.tail : p.tail * p.sum;
  ket.params = {{"J", J}, {"gamma", gamma}};
  return ket;
}

LabeledKet degenerate_state(const EnergySpectrum& spec, const DegeneracySequence& deg, double J,
                            double gamma, double theta, double tol) {
  require_parameter(J, "J");
  const Profile p = profile(spec, J, tol);
  LabeledKet ket;
  ket.scheme = LabelScheme::Degenerate;
  ket.family = "degenerate";
  ket.spectrum_fingerprint = spec.fingerprint();
  ket.truncation = p.log_terms.size() - 1;
  const double log_norm = std::log(p.sum);
  std::vector<Complex> c;
  for (std::size_t n = 0; n < p.log_terms.size(); ++n) {
    const std::uint64_t d = deg.at(n);
    const double mod = std::exp(0.5 * (p.log_terms[n] - log_norm - std::log(static_cast<double>(d))));
    const double en = spec.eps(n);
    for (std::uint64_t j = 1; j <= d; ++j) {
      ket.labels.push_back({n, static_cast<std::size_t>(j)});
      c.push_back(std::polar(mod, -en * gamma - static_cast<double>(j) * theta));
    }
  }
  ket.coeffs = Eigen::Map<Eigen::VectorXcd>(c.data(), static_cast<Eigen::Index>(c.size()));
  ket.tail_bound = p.tail;
  ket.params = {{"J", J}, {"gamma", gamma}, {"theta", theta}};
  return ket;
}

VCSBundle branch_vcs(const BranchSet& branches, std::size_t j, double J_j, double gamma_j, double tol) {
  std::vector<double> Jd(branches.size(), 0.0), gd(branches.size(), 0.0);
  if (j < branches.size()) {
    Jd[j] = J_j;
    gd[j] = gamma_j;
  }
  return branch_vcs(branches, j, Jd, gd, tol);
}

VCSBundle branch_vcs(const BranchSet& branches, std::size_t j, const std::vector<double>& J_diag,
                     const std::vector<double>& gamma_diag, double tol) {
  if (j >= branches.size()) {
    throw Error(ErrorKind::BranchOutOfRange,
                "branch " + std::to_string(j) + " of " + std::to_string(branches.size()));
  }
  if (J_diag.size() != branches.size() || gamma_diag.size() != branches.size()) {
    throw Error(ErrorKind::ConfigInvalid, "diagonal parameter bundles must have one entry per branch");
  }
  const EnergySpectrum& spec = branches.branches[j];
  LabeledKet base = gk_state(spec, J_diag[j], gamma_diag[j], tol);
  base.scheme = LabelScheme::Branch;
  base.family = "branch-vcs";
  for (auto& l : base.labels) l.j = j;
  base.params["branch"] = static_cast<double>(j);
  VCSBundle out;
  out.branch = j;
  out.ket = std::move(base);
  out.J_diag = J_diag;
  out.gamma_diag = gamma_diag;
  return out;
}

LabeledKet vcs1(const EnergySpectrum& spec, double J, double gamma, double Jp, double gammap,
                std::size_t ell, double tol) {
  require_parameter(J, "J");
  require_parameter(Jp, "J'");
  const Profile p = profile(spec, J, tol);
  const Profile q = profile(spec, Jp, tol);
  LabeledKet ket = double_fock(spec, "vcs1", J, gamma, Jp, gammap, 0, p.log_terms.size() - 1, ell, ell, p, q);
  ket.truncation = p.log_terms.size() - 1;
  const double ll = ell < q.log_terms.size() ? q.log_terms[ell] : log_term(spec, Jp, ell);
  ket.tail_bound = std::exp(ll) / q.sum * p.tail;
  ket.normalized = false;
  ket.generator = Generator::H1;
  ket.params["ell"] = static_cast<double>(ell);
  return ket;
}

LabeledKet vcs2(const EnergySpectrum& spec, double J, double gamma, double Jp, double gammap,
                std::size_t n, double tol) {
  require_parameter(J, "J");
  require_parameter(Jp, "J'");
  const Profile p = profile(spec, J, tol);
  const Profile q = profile(spec, Jp, tol);
  LabeledKet ket = double_fock(spec, "vcs2", J, gamma, Jp, gammap, n, n, 0, q.log_terms.size() - 1, p, q);
  ket.truncation = q.log_terms.size() - 1;
  const double ln = n < p.log_terms.size() ? p.log_terms[n] : log_term(spec, J, n);
  ket.tail_bound = std::exp(ln) / p.sum * q.tail;
  ket.normalized = false;
  ket.generator = Generator::H2;
  ket.params["n"] = static_cast<double>(n);
  return ket;
}

LabeledKet bcs(const EnergySpectrum& spec, double J, double gamma, double Jp, double gammap, double tol) {
  require_parameter(J, "J");
  require_parameter(Jp, "J'");
  const Profile p = profile(spec, J, tol);
  const Profile q = profile(spec, Jp, tol);
  LabeledKet ket = double_fock(spec, "bcs", J, gamma, Jp, gammap, 0, p.log_terms.size() - 1, 0,
                               q.log_terms.size() - 1, p, q);
  ket.truncation = std::max(p.log_terms.size(), q.log_terms.size()) - 1;
  ket.tail_bound = p.tail + q.tail;
  ket.generator = Generator::HDiff;
  return ket;
}

LabeledKet vcs1_z(const EnergySpectrum& spec, Complex z, Complex zp, std::size_t ell, double tol) {
  const auto [J, g] = action_angle(z);
  const auto [Jp, gp] = action_angle(zp);
  return vcs1(spec, J, g, Jp, gp, ell, tol);
}

LabeledKet vcs2_z(const EnergySpectrum& spec, Complex z, Complex zp, std::size_t n, double tol) {
  const auto [J, g] = action_angle(z);
  const auto [Jp, gp] = action_angle(zp);
  return vcs2(spec, J, g, Jp, gp, n, tol);
}

LabeledKet bcs_z(const EnergySpectrum& spec, Complex z, Complex zp, double tol) {
  const auto [J, g] = action_angle(z);
  const auto [Jp, gp] = action_angle(zp);
  return bcs(spec, J, g, Jp, gp, tol);
}

namespace {

LabeledKet apply_phases(const LabeledKet& ket, const EnergySpectrum& spec, double t, double global_energy) {
  LabeledKet out = ket;
  const double w = spec.omega();
  for (std::size_t i = 0; i < ket.labels.size(); ++i) {
    const Label& l = ket.labels[i];
    double e = 0.0;
    switch (ket.generator) {
      case Generator::H1: e = w * spec.eps(l.n) + global_energy; break;
      case Generator::H2: e = w * spec.eps(l.j) + global_energy; break;
      case Generator::HDiff: e = w * (spec.eps(l.n) - spec.eps(l.j)); break;
    }
    out.coeffs(static_cast<Eigen::Index>(i)) *= std::polar(1.0, -e * t);
  }
  switch (ket.generator) {
    case Generator::H1: out.params["gamma"] = param(ket, "gamma") + w * t; break;
    case Generator::H2: out.params["gammap"] = param(ket, "gammap") - w * t; break;
    case Generator::HDiff:
      out.params["gamma"] = param(ket, "gamma") + w * t;
      out.params["gammap"] = param(ket, "gammap") + w * t;
      break;
  }
  out.params["t"] = param(ket, "t") + t;
  return out;
}

}  // namespace

LabeledKet evolve(const LabeledKet& ket, const EnergySpectrum& spec, double t) {
  if (ket.scheme == LabelScheme::Branch) {
    throw Error(ErrorKind::SpectrumMismatch, "branch kets evolve with their BranchSet");
  }
  const EnergySpectrum shifted = shift_to_zero(spec);
  if (shifted.fingerprint() != ket.spectrum_fingerprint) {
    throw Error(ErrorKind::SpectrumMismatch,
                "ket built from [" + ket.spectrum_fingerprint + "], evolving with [" + shifted.fingerprint() + "]");
  }
  const double global = shifted.recorded_shift() - spec.recorded_shift();
  return apply_phases(ket, shifted, t, global);
}

LabeledKet evolve(const LabeledKet& ket, const BranchSet& branches, double t) {
  if (ket.scheme != LabelScheme::Branch || ket.labels.empty()) {
    throw Error(ErrorKind::SpectrumMismatch, "not a branch ket");
  }
  const std::size_t j = ket.labels.front().j;
  if (j >= branches.size()) throw Error(ErrorKind::BranchOutOfRange, "branch " + std::to_string(j));
  const EnergySpectrum& spec = branches.branches[j];
  if (spec.fingerprint() != ket.spectrum_fingerprint) {
    throw Error(ErrorKind::SpectrumMismatch, "branch " + std::to_string(j) + " spectrum differs");
  }
  return apply_phases(ket, spec, t, 0.0);
}

namespace {

EnergyValue energy_of(const LabeledKet& ket, const EnergySpectrum& shifted, double ground) {
  EnergyValue out;
  const double w = shifted.omega();
  const std::size_t Kn = max_index(ket, false);
  const std::size_t Kl = max_index(ket, true);
  double edge_n = 0.0, edge_l = 0.0, norm2 = 0.0;
  for (std::size_t i = 0; i < ket.labels.size(); ++i) {
    const Label& l = ket.labels[i];
    const double m2 = std::norm(ket.coeffs(static_cast<Eigen::Index>(i)));
    norm2 += m2;
    switch (ket.generator) {
      case Generator::H1: out.value += w * shifted.eps(l.n) * m2; break;
      case Generator::H2: out.value += w * shifted.eps(l.j) * m2; break;
      case Generator::HDiff: out.value += w * (shifted.eps(l.n) - shifted.eps(l.j)) * m2; break;
    }
    if (l.n == Kn) edge_n += m2;
    if (l.j == Kl) edge_l += m2;
  }
  // sum_{n>K} eps_n t_n = J sum_{n>=K} t_n: the truncated energy misses at most
  // omega J (|c_K|^2 + tail).
  const double J = param(ket, "J");
  const double Jp = param(ket, "Jp");
  switch (ket.generator) {
    case Generator::H1:
      out.tail_estimate = w * J * (edge_n + ket.tail_bound);
      out.value += ground * norm2;
      break;
    case Generator::H2:
      out.tail_estimate = w * Jp * (edge_l + ket.tail_bound);
      out.value += ground * norm2;
      break;
    case Generator::HDiff:
      out.tail_estimate = w * (J * (edge_n + ket.tail_bound) + Jp * (edge_l + ket.tail_bound));
      break;
  }
  return out;
}

}  // namespace

EnergyValue energy_expectation(const LabeledKet& ket, const EnergySpectrum& spec) {
  const EnergySpectrum shifted = shift_to_zero(spec);
  if (shifted.fingerprint() != ket.spectrum_fingerprint && ket.scheme != LabelScheme::Branch) {
    throw Error(ErrorKind::SpectrumMismatch, "energy requested with a different spectrum");
  }
  return energy_of(ket, shifted, shifted.recorded_shift() - spec.recorded_shift());
}

EnergyValue energy_expectation(const std::vector<LabeledKet>& components, const EnergySpectrum& spec) {
  EnergyValue out;
  for (const auto& k : components) {
    const EnergyValue e = energy_expectation(k, spec);
    out.value += e.value;
    out.tail_estimate += e.tail_estimate;
  }
  return out;
}

EnergyValue energy_expectation(const LabeledKet& ket, const BranchSet& branches) {
  if (ket.scheme != LabelScheme::Branch || ket.labels.empty()) {
    throw Error(ErrorKind::SpectrumMismatch, "not a branch ket");
  }
  const std::size_t j = ket.labels.front().j;
  if (j >= branches.size()) throw Error(ErrorKind::BranchOutOfRange, "branch " + std::to_string(j));
  return energy_of(ket, branches.branches[j], 0.0);
}

Complex inner_product(const LabeledKet& a, const LabeledKet& b) {
  if (a.scheme != b.scheme) {
    throw Error(ErrorKind::ConfigInvalid, "inner product between different label schemes");
  }
  std::map<Label, Eigen::Index> index;
  for (std::size_t i = 0; i < b.labels.size(); ++i) index[b.labels[i]] = static_cast<Eigen::Index>(i);
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    auto it = index.find(a.labels[i]);
    if (it != index.end()) acc += std::conj(a.coeffs(static_cast<Eigen::Index>(i))) * b.coeffs(it->second);
  }
  return acc;
}

std::string to_string(LabelScheme scheme) {
  switch (scheme) {
    case LabelScheme::Single: return "single";
    case LabelScheme::Degenerate: return "degenerate";
    case LabelScheme::Branch: return "branch";
    case LabelScheme::DoubleFock: return "double-fock";
  }
  return "?";
}

std::string to_string(Generator g) {
  switch (g) {
    case Generator::H1: return "H1";
    case Generator::H2: return "H2";
    case Generator::HDiff: return "H1-H2";
  }
  return "?";
}

nlohmann::json to_json(const LabeledKet& ket) {
  nlohmann::json j;
  j["scheme"] = to_string(ket.scheme);
  j["family"] = ket.family;
  nlohmann::json labels = nlohmann::json::array();
  std::vector<double> re, im;
  for (std::size_t i = 0; i < ket.labels.size(); ++i) {
    labels.push_back({ket.labels[i].n, ket.labels[i].j});
    re.push_back(ket.coeffs(static_cast<Eigen::Index>(i)).real());
    im.push_back(ket.coeffs(static_cast<Eigen::Index>(i)).imag());
  }
  j["labels"] = labels;
  j["re"] = re;
  j["im"] = im;
  j["truncation"] = ket.truncation;
  j["tail_bound"] = ket.tail_bound;
  j["params"] = ket.params;
  j["generator"] = to_string(ket.generator);
  j["spectrum"] = ket.spectrum_fingerprint;
  j["normalized"] = ket.normalized;
  return j;
}

LabeledKet ket_from_json(const nlohmann::json& j) {
  LabeledKet ket;
  try {
    const auto scheme = j.at("scheme").get<std::string>();
    if (scheme == "single") {
      ket.scheme = LabelScheme::Single;
    } else if (scheme == "degenerate") {
      ket.scheme = LabelScheme::Degenerate;
    } else if (scheme == "branch") {
      ket.scheme = LabelScheme::Branch;
    } else if (scheme == "double-fock") {
      ket.scheme = LabelScheme::DoubleFock;
    } else {
      throw Error(ErrorKind::ConfigInvalid, "unknown label scheme '" + scheme + "'");
    }
    const auto gen = j.value("generator", std::string("H1"));
    ket.generator = gen == "H2" ? Generator::H2 : gen == "H1-H2" ? Generator::HDiff : Generator::H1;
    ket.family = j.value("family", "");
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    const auto& labels = j.at("labels");
    if (re.size() != im.size() || re.size() != labels.size()) {
      throw Error(ErrorKind::ConfigInvalid, "ket arrays differ in length");
    }
    ket.coeffs.resize(static_cast<Eigen::Index>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i) {
      ket.labels.push_back({labels[i].at(0).get<std::size_t>(), labels[i].at(1).get<std::size_t>()});
      ket.coeffs(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
    }
    ket.truncation = j.value("truncation", std::size_t{0});
    ket.tail_bound = j.value("tail_bound", 0.0);
    ket.params = j.value("params", std::map<std::string, double>{});
    ket.spectrum_fingerprint = j.value("spectrum", "");
    ket.normalized = j.value("normalized", true);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("ket JSON: ") + e.what());
  }
  return ket;
}

std::string to_csv(const LabeledKet& ket) {
  std::ostringstream os;
  os << "n,j,re,im,mod2\n";
  char buf[128];
  for (std::size_t i = 0; i < ket.labels.size(); ++i) {
    const Complex c = ket.coeffs(static_cast<Eigen::Index>(i));
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g\n", ket.labels[i].n, ket.labels[i].j,
                  c.real() + 0.0, c.imag() + 0.0, std::norm(c));
    os << buf;
  }
  return os.str();
}

}  // namespace cohstate
