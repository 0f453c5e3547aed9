#include "cohstate/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "cohstate/error.hpp"
#include "cohstate/kernels.hpp"
#include "cohstate/landau.hpp"
#include "cohstate/measures.hpp"
#include "cohstate/models.hpp"
#include "cohstate/states.hpp"

namespace cohstate::cli {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); }

const std::vector<std::string> kOutputKeys{"out_dir", "name", "format", "threads"};
const std::vector<std::string> kModelKeys{"model", "params", "spectrum", "degeneracy", "omega", "tol"};

std::vector<std::string> join(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// ---------------------------------------------------------------------------
// Typed config access

double num(const json& c, const std::string& k, double def) {
  if (!c.contains(k)) return def;
  if (!c[k].is_number()) bad("'" + k + "' must be a number");
  return c[k].get<double>();
}

std::size_t count(const json& c, const std::string& k, std::size_t def) {
  if (!c.contains(k)) return def;
  if (!c[k].is_number_integer() || c[k].get<long long>() < 0) bad("'" + k + "' must be a non-negative integer");
  return c[k].get<std::size_t>();
}

std::string str(const json& c, const std::string& k, const std::string& def) {
  if (!c.contains(k)) return def;
  if (!c[k].is_string()) bad("'" + k + "' must be a string");
  return c[k].get<std::string>();
}

Complex cplx(const json& v, const std::string& k) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  bad("'" + k + "' must be a number or [re, im]");
}

Complex cplx(const json& c, const std::string& k, Complex def) { return c.contains(k) ? cplx(c[k], k) : def; }

std::vector<double> nums(const json& c, const std::string& k, std::vector<double> def) {
  if (!c.contains(k)) return def;
  if (!c[k].is_array()) bad("'" + k + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : c[k]) {
    if (!v.is_number()) bad("'" + k + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

json bounded(double v, double bound) { return {{"value", v}, {"bound", bound}}; }
json diagnostic(double v) { return {{"value", v}, {"bound", "diagnostic only"}}; }
json cjson(Complex z) { return json::array({z.real(), z.imag()}); }

// ---------------------------------------------------------------------------
// Model / spectrum selection

struct Setup {
  std::optional<ModelDescriptor> model;
  EnergySpectrum spec = EnergySpectrum::linear();
  DegeneracySequence deg = DegeneracySequence::constant_one();
  std::optional<BranchSet> branches;
  std::string label = "linear";
  std::vector<std::string> warnings;
};

std::map<std::string, double> params_of(const json& c) {
  std::map<std::string, double> p;
  if (!c.contains("params")) return p;
  if (!c["params"].is_object()) bad("'params' must be an object of numbers");
  for (const auto& [k, v] : c["params"].items()) {
    if (!v.is_number()) bad("params." + k + " must be a number");
    p[k] = v.get<double>();
  }
  return p;
}

DegeneracySequence degeneracy_of(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "one") return DegeneracySequence::constant_one();
    if (s == "example1") return DegeneracySequence::example1();
    if (s == "example2") return DegeneracySequence::example2();
    if (s == "example3") return DegeneracySequence::example3();
    bad("unknown degeneracy '" + s + "' (one, example1, example2, example3 or a list)");
  }
  if (!v.is_array() || v.empty()) bad("'degeneracy' must be a name or a non-empty list of integers >= 1");
  std::vector<std::uint64_t> d;
  for (const auto& x : v) {
    if (!x.is_number_integer() || x.get<long long>() < 1) bad("degeneracies must be integers >= 1");
    d.push_back(x.get<std::uint64_t>());
  }
  return DegeneracySequence::from_list(d);
}

Setup setup_of(const json& c) {
  Setup s;
  if (c.contains("model") && (c.contains("spectrum") || c.contains("degeneracy") || c.contains("omega"))) {
    bad("'model' excludes 'spectrum', 'degeneracy' and 'omega' (use params.omega)");
  }
  if (c.contains("params") && !c.contains("model")) bad("'params' needs 'model'");
  if (c.contains("model") || !c.contains("spectrum")) {
    const std::string tag = str(c, "model", "linear");
    s.model = build_model(tag, params_of(c));
    s.spec = s.model->spectrum;
    s.deg = s.model->degeneracy;
    s.branches = s.model->branches;
    s.label = tag;
    s.warnings = s.model->warnings;
    return s;
  }
  const double omega = num(c, "omega", 1.0);
  if (!(omega > 0.0)) bad("'omega' must be > 0");
  const json& sp = c["spectrum"];
  if (sp.is_string()) {
    if (sp.get<std::string>() != "linear") bad("'spectrum' must be \"linear\" or a list of levels");
    s.spec = EnergySpectrum::linear(omega);
  } else if (sp.is_array() && sp.size() >= 2) {
    std::vector<double> levels;
    for (const auto& x : sp) {
      if (!x.is_number()) bad("spectrum levels must be numbers");
      levels.push_back(x.get<double>());
    }
    s.spec = EnergySpectrum::from_list(levels, omega);
    s.spec.check_strictly_increasing(levels.size() - 1);
    if (!s.spec.is_shifted()) {
      s.spec = shift_to_zero(s.spec);
      s.warnings.push_back("spectrum shifted so that eps_0 = 0");
    }
  } else {
    bad("'spectrum' must be \"linear\" or a list of at least two levels");
  }
  if (c.contains("degeneracy")) s.deg = degeneracy_of(c["degeneracy"]);
  s.label = "spectrum";
  return s;
}

bool integer_spectrum(const EnergySpectrum& spec, std::size_t upto) {
  for (std::size_t n = 0; n <= upto && spec.has_level(n); ++n) {
    if (spec.eps(n) != std::floor(spec.eps(n))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Output

struct Output {
  std::filesystem::path dir;
  std::string name;
  bool json_files = true;
  bool csv_files = true;
  std::vector<std::string> written;

  void write(const std::string& suffix, const std::string& text) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (name + suffix);
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::ConfigInvalid, "cannot write " + path.string());
    f << text;
    written.push_back(path.string());
  }
};

Output output_of(const std::string& command, const json& c, const std::string& label) {
  Output o;
  std::string dir = str(c, "out_dir", "");
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? env : ".";
  }
  o.dir = dir;
  o.name = str(c, "name", label.empty() ? command : command + "-" + label);
  const std::string fmt = str(c, "format", "both");
  if (fmt != "json" && fmt != "csv" && fmt != "both") bad("'format' must be json, csv or both");
  o.json_files = fmt != "csv";
  o.csv_files = fmt != "json";
  return o;
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) s += (s.empty() ? "" : ",") + c;
  return s + "\n";
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);
  return buf;
}

std::string g4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Human table from the "checks" array of a report.
std::string render(const json& report) {
  std::ostringstream os;
  os << report["operation"].get<std::string>() << ": " << report["status"].get<std::string>() << "\n";
  if (report["results"].contains("checks")) {
    for (const auto& ch : report["results"]["checks"]) {
      os << "  " << std::left;
      char line[256];
      std::snprintf(line, sizeof line, "%-34s %-16s", ch["name"].get<std::string>().c_str(),
                    ch["status"].get<std::string>().c_str());
      os << line;
      if (ch.contains("residual") && ch["residual"].is_number()) os << " residual " << g4(ch["residual"].get<double>());
      if (ch.contains("tolerance")) os << " tol " << g4(ch["tolerance"].get<double>());
      if (ch.contains("error")) os << " " << ch["error"].get<std::string>();
      os << "\n";
    }
  }
  return os.str();
}

json check(const std::string& name, double residual, double tol) {
  return {{"name", name}, {"residual", residual}, {"tolerance", tol}, {"status", residual <= tol ? "pass" : "fail"}};
}

json failed_check(const std::string& name, const std::exception& e) {
  return {{"name", name}, {"status", "fail"}, {"error", e.what()}};
}

std::string overall(const json& checks) {
  for (const auto& c : checks) {
    if (c["status"] == "fail") return "fail";
  }
  return "pass";
}

// ---------------------------------------------------------------------------
// state

double double_fock_energy(const LabeledKet& k, double omega) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < k.coeffs.size(); ++i) {
    const auto& l = k.labels[static_cast<std::size_t>(i)];
    e += omega * (static_cast<double>(l.n) - static_cast<double>(l.j)) * std::norm(k.coeffs(i));
  }
  return e;
}

json cmd_state(const json& c, Output& out, json& prov) {
  const double tol = num(c, "tol", 1e-15);
  json res;
  LabeledKet ket;
  std::string family = str(c, "family", "");
  const bool landau_family = family == "kms-cs" || family == "thermal";
  Setup s = landau_family ? Setup{} : setup_of(c);
  if (family.empty()) {
    family = s.branches ? "branch" : s.deg.family() != DegeneracyFamily::ConstantOne ? "degenerate" : "gk";
  }
  double J = num(c, "J", 1.0), gamma = num(c, "gamma", 0.0);
  if (c.contains("z")) {
    if (c.contains("J") || c.contains("gamma")) bad("'z' excludes 'J' and 'gamma'");
    std::tie(J, gamma) = action_angle(cplx(c, "z", 0.0));
  }
  const double theta = num(c, "theta", 0.0), Jp = num(c, "Jp", 0.0), gammap = num(c, "gammap", 0.0);
  std::optional<EnergyValue> energy;
  std::optional<double> target;
  const double omega = s.spec.omega();
  if (family == "gk") {
    ket = gk_state(s.spec, J, gamma, tol);
    energy = energy_expectation(ket, s.spec);
    target = omega * J;
  } else if (family == "degenerate") {
    ket = degenerate_state(s.spec, s.deg, J, gamma, theta, tol);
    energy = energy_expectation(ket, s.spec);
    target = omega * J;
  } else if (family == "branch") {
    if (!s.branches) bad("family 'branch' needs a branch model (two-fermion, two-fermion-hermitian)");
    const std::size_t b = count(c, "branch", 0);
    ket = branch_vcs(*s.branches, b, J, gamma, tol).ket;
    energy = energy_expectation(ket, *s.branches);
    if (b < s.branches->size()) target = s.branches->branches[b].omega() * J;
  } else if (family == "vcs1" || family == "vcs2") {
    const std::size_t idx = count(c, family == "vcs1" ? "ell" : "n", 0);
    ket = family == "vcs1" ? vcs1(s.spec, J, gamma, Jp, gammap, idx, tol) : vcs2(s.spec, J, gamma, Jp, gammap, idx, tol);
    res["energy_note"] = "single component; the family sum carries the action identity";
    res["energy"] = diagnostic(energy_expectation(ket, s.spec).value);
  } else if (family == "bcs") {
    ket = bcs(s.spec, J, gamma, Jp, gammap, tol);
    energy = energy_expectation(ket, s.spec);
    target = omega * (J - Jp);
  } else if (landau_family) {
    for (const char* k : {"model", "params", "spectrum", "degeneracy"}) {
      if (c.contains(k)) bad(std::string("'") + k + "' does not apply to family " + family);
    }
    const double beta = num(c, "beta", 1.0), w = num(c, "omega", 1.0);
    const std::size_t K = count(c, "K", 30);
    ket = family == "kms-cs" ? kms_cs(cplx(c, "z", 0.0), beta, w, K) : thermal_vector(beta, w, K).ket();
    res["energy"] = diagnostic(double_fock_energy(ket, w));
    res["energy_note"] = "expectation of H1 - H2 on the truncation";
  } else {
    bad("unknown family '" + family + "' (gk, degenerate, branch, vcs1, vcs2, bcs, kms-cs, thermal)");
  }
  const double n2 = ket.norm_squared();
  res["family"] = family;
  res["labels"] = ket.labels.size();
  res["norm_squared"] = bounded(n2, ket.tail_bound);
  if (energy) {
    res["energy"] = bounded(energy->value, energy->tail_estimate);
    if (target) res["action_target"] = *target;
  }
  json checks = json::array();
  if (family != "vcs1" && family != "vcs2") {
    checks.push_back(check("normalization", std::abs(n2 - 1.0), ket.tail_bound + 1e-13));
  }
  if (energy && target) {
    checks.push_back(check("action identity", std::abs(energy->value - *target),
                           energy->tail_estimate + 1e-13 * std::max(1.0, std::abs(*target))));
  }
  res["checks"] = checks;
  if (!s.warnings.empty()) res["warnings"] = s.warnings;
  prov["truncation"] = ket.truncation;
  prov["tail_bound"] = ket.tail_bound;
  prov["series_tolerance"] = tol;
  if (out.json_files) out.write(".ket.json", to_json(ket).dump(2) + "\n");
  if (out.csv_files) out.write(".csv", to_csv(ket));
  return res;
}

// ---------------------------------------------------------------------------
// verify

json moments_json(const MomentReport& r) {
  json rows = json::array();
  for (const auto& m : r.rows) {
    rows.push_back({{"n", m.n}, {"computed", m.computed}, {"target", m.target}, {"relative_error", m.relative_error}});
  }
  return {{"max_relative_error", r.max_relative_error}, {"tolerance", r.tolerance}, {"nodes", r.nodes},
          {"quadrature", to_string(r.quadrature)}, {"rows", rows}};
}

LabeledKet family_state(const Setup& s, std::size_t branch, double J, double gamma, double theta, double tol) {
  if (s.branches) return branch_vcs(*s.branches, branch, J, gamma, tol).ket;
  if (s.deg.family() != DegeneracyFamily::ConstantOne) return degenerate_state(s.spec, s.deg, J, gamma, theta, tol);
  return gk_state(s.spec, J, gamma, tol);
}

json cmd_verify(const json& c, Output& out, json& prov) {
  const Setup s = setup_of(c);
  const std::string suite = str(c, "suite", "all");
  static const std::set<std::string> suites{"resolution", "moments", "temporal", "action", "normalization",
                                            "idempotency", "all"};
  if (!suites.count(suite)) bad("unknown suite '" + suite + "'");
  const double tol = num(c, "tol", 1e-8);
  const std::size_t n_max = count(c, "n_max", 10);
  QuadratureOptions quad;
  quad.laguerre_nodes = count(c, "laguerre_nodes", quad.laguerre_nodes);
  const auto Js = nums(c, "J_values", {0.5, 1.0, 2.0, 5.0});
  const auto ts = nums(c, "t_values", {0.1, 1.0, 10.0});
  const double series_tol = 1e-15;
  const bool all = suite == "all";
  const bool has_measure = s.model && s.model->measure;
  json checks = json::array();
  json res;
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigInvalid) throw;
      checks.push_back(failed_check(name, e));
    }
  };
  auto skip = [&](const std::string& name, const std::string& why) {
    checks.push_back({{"name", name}, {"status", "skipped"}, {"reason", why}});
  };
  const std::size_t nb = s.branches ? s.branches->size() : 1;

  if (suite == "resolution" || (all && has_measure)) {
    guarded("resolution", [&] {
      ModelDescriptor m = s.model ? *s.model : linear_build();
      if (!s.model) {
        m.spectrum = s.spec;
        m.degeneracy = s.deg;
        m.measure.reset();
      }
      const auto r = resolution_check(m, n_max, quad, tol);
      res["resolution"] = to_json(r);
      json ch = {{"name", "resolution"}, {"residual", r.max_ratio_error}, {"tolerance", tol},
                 {"status", to_string(r.status)}};
      checks.push_back(ch);
      prov["quadrature"] = {{"family", to_string(r.quadrature)}, {"nodes", r.nodes}};
    });
  }
  if (suite == "moments" || (all && has_measure && !s.branches)) {
    guarded("moments", [&] {
      if (!has_measure) throw Error(ErrorKind::NoMeasure, "selection carries no measure");
      const auto r = verify_moments(*s.model->measure, s.spec, s.deg, n_max, quad, tol);
      res["moments"] = moments_json(r);
      json ch = check("moments", r.max_relative_error, tol);
      if (!s.model->measure_closed_form) ch["status"] = "weak-sense-only";
      checks.push_back(ch);
    });
  }
  if (suite == "temporal" || all) {
    guarded("temporal", [&] {
      const double ttol = num(c, "temporal_tol", 1e-14);
      const double J = num(c, "J", 1.5), gamma = num(c, "gamma", 0.2), theta = num(c, "theta", 0.6);
      double worst = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        const double w = s.branches ? s.branches->branches[b].omega() : s.spec.omega();
        const LabeledKet k = family_state(s, b, J, gamma, theta, series_tol);
        for (double t : ts) {
          const LabeledKet ev = s.branches ? evolve(k, *s.branches, t) : evolve(k, s.spec, t);
          const LabeledKet moved = family_state(s, b, J, gamma + w * t, theta, series_tol);
          if (ev.labels != moved.labels) throw Error(ErrorKind::SpectrumMismatch, "label sets differ");
          worst = std::max(worst, (ev.coeffs - moved.coeffs).cwiseAbs().maxCoeff());
        }
      }
      checks.push_back(check("temporal stability", worst, ttol));
    });
  }
  if (suite == "action" || suite == "normalization" || all) {
    const bool do_action = suite != "normalization";
    const bool do_norm = suite != "action";
    guarded("action", [&] {
      const double radius = s.branches ? INFINITY : radius_of_convergence(s.spec, s.deg).radius;
      double worst_a = 0.0, allow_a = INFINITY, worst_n = 0.0, allow_n = INFINITY;
      json skipped = json::array();
      for (double J : Js) {
        if (J >= 0.99 * radius) {
          skipped.push_back(J);
          continue;
        }
        for (std::size_t b = 0; b < nb; ++b) {
          const LabeledKet k = family_state(s, b, J, 0.2, 0.7, series_tol);
          const double w = s.branches ? s.branches->branches[b].omega() : s.spec.omega();
          const EnergyValue e = s.branches ? energy_expectation(k, *s.branches) : energy_expectation(k, s.spec);
          const double ea = std::abs(e.value - w * J);
          // Report the worst margin: residual minus its own allowance.
          const double aa = e.tail_estimate + 1e-13 * std::max(1.0, w * J);
          if (ea - aa > worst_a - allow_a || allow_a == INFINITY) worst_a = ea, allow_a = aa;
          const double en = std::abs(k.norm_squared() - 1.0);
          const double an = k.tail_bound + 1e-13;
          if (en - an > worst_n - allow_n || allow_n == INFINITY) worst_n = en, allow_n = an;
        }
      }
      if (allow_a == INFINITY) allow_a = 0.0;
      if (allow_n == INFINITY) allow_n = 0.0;
      if (do_action) checks.push_back(check("action identity", worst_a, allow_a));
      if (do_norm) checks.push_back(check("normalization", worst_n, allow_n));
      if (!skipped.empty()) res["outside_radius"] = skipped;
    });
  }
  if (suite == "idempotency" || all) {
    const bool applicable = has_measure && !s.branches && integer_spectrum(s.spec, 64);
    if (!applicable && all) {
      skip("kernel idempotency", "needs a single integer spectrum with a measure");
    } else {
      guarded("kernel idempotency", [&] {
        if (!has_measure) throw Error(ErrorKind::NoMeasure, "selection carries no measure");
        const auto seed = static_cast<std::uint64_t>(count(c, "seed", 20261016));
        const std::size_t samples = count(c, "samples", 3);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uJ(0.0, 3.0), ua(0.0, 2 * M_PI);
        std::vector<ActionAngle> pts;
        for (std::size_t i = 0; i < samples; ++i) {
          const double J = uJ(rng), g = ua(rng), th = ua(rng);
          pts.push_back({J, g, th});
        }
        const auto r = kernel_idempotency(s.spec, s.deg, *s.model->measure, pts, quad, tol);
        json ch = check("kernel idempotency", r.max_residual, tol);
        if (!s.model->measure_closed_form) ch["status"] = "weak-sense-only";
        checks.push_back(ch);
        prov["seed"] = seed;
        prov["idempotency_levels"] = r.max_level;
      });
    }
  }
  res["checks"] = checks;
  if (!s.warnings.empty()) res["warnings"] = s.warnings;
  prov["n_max"] = n_max;
  prov["series_tolerance"] = series_tol;
  if (out.csv_files) {
    std::string csv = "check,status,residual,tolerance\n";
    for (const auto& ch : checks) {
      csv += csv_line({ch["name"].get<std::string>(), ch["status"].get<std::string>(),
                       ch.contains("residual") ? g17(ch["residual"].get<double>()) : "",
                       ch.contains("tolerance") ? g17(ch["tolerance"].get<double>()) : ""});
    }
    out.write(".checks.csv", csv);
  }
  return res;
}

// ---------------------------------------------------------------------------
// landau

DoubleFockOperator dump_operator(const std::string& name, const json& c, std::size_t K, double omega) {
  if (name == "U1") return displacement(cplx(c, "zA", 0.3), 1, K);
  if (name == "U2") return displacement(cplx(c, "zB", Complex(0, 0.2)), 2, K);
  return build_operators(K, omega).get(name);
}

json cmd_landau(const json& c, Output& out, json& prov) {
  const double beta = num(c, "beta", 1.0), omega = num(c, "omega", 1.0);
  if (!(beta > 0.0) || !(omega > 0.0)) bad("'beta' and 'omega' must be > 0");
  const std::size_t K = count(c, "K", 30);
  if (K < 2) bad("'K' must be >= 2");
  const double tol = num(c, "tol", 1e-8), kms_tol = num(c, "kms_tol", 1e-6);
  std::vector<Complex> zs;
  if (c.contains("z_samples")) {
    if (!c["z_samples"].is_array()) bad("'z_samples' must be an array");
    for (const auto& v : c["z_samples"]) zs.push_back(cplx(v, "z_samples"));
  } else {
    zs = {0.0, 0.25, Complex(0, 0.5), std::polar(0.5, 2.0)};
  }
  const Complex zA = cplx(c, "zA", 0.3), zB = cplx(c, "zB", Complex(0, 0.2));
  const double t = num(c, "t", 0.7);
  std::vector<std::size_t> sweep;
  for (double k : nums(c, "K_sweep", {10, 20, 30})) {
    if (k < 2 || k != std::floor(k)) bad("'K_sweep' entries must be integers >= 2");
    sweep.push_back(static_cast<std::size_t>(k));
  }
  const std::size_t block = count(c, "block", 4);
  const double R = num(c, "R", 6.0);
  json checks = json::array();
  json res;

  const ModularTriple m = modular_triple(beta, omega, K);
  checks.push_back(check("Delta = exp(-beta H)", m.delta_vs_exp, 1e-12));
  checks.push_back(check("S on basis vectors", m.s_basis, 1e-12));
  checks.push_back(check("J^2 = I", m.j_squared, 0.0));
  checks.push_back(check("J Phi = Phi", m.j_fixes_phi, 0.0));
  res["thermal_norm_squared"] = bounded(m.phi.norm_squared(), m.phi.tail_bound);

  try {
    const auto inv = modular_involution_check(beta, omega, zs, K, tol);
    json rows = json::array();
    for (std::size_t i = 0; i < zs.size(); ++i) {
      rows.push_back({{"z", cjson(zs[i])}, {"residual", inv.residuals[i]}, {"leakage", diagnostic(inv.leakage[i])}});
    }
    res["modular_involution"] = rows;
    checks.push_back(check("modular involution", inv.max_residual, tol));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TruncationUnsafe) throw;
    json ch = failed_check("modular involution", e);
    ch["offending"] = {{"K", K}, {"z_samples", c.contains("z_samples") ? c["z_samples"] : json("default")}};
    checks.push_back(ch);
  }

  // K sweep: independent workers, single-threaded assembly.
  const std::size_t threads = std::max<std::size_t>(1, count(c, "threads", 4));
  std::vector<KMSReport> kms(sweep.size());
  for (std::size_t start = 0; start < sweep.size(); start += threads) {
    std::vector<std::future<KMSReport>> jobs;
    for (std::size_t i = start; i < std::min(sweep.size(), start + threads); ++i) {
      jobs.push_back(std::async(std::launch::async, kms_check, zA, zB, beta, omega, t, sweep[i]));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) kms[start + i] = jobs[i].get();
  }
  const KMSReport main_kms = kms_check(zA, zB, beta, omega, t, K);
  json table = json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    table.push_back({{"K", sweep[i]}, {"residual", kms[i].continuation_residual},
                     {"truncation_consistency", kms[i].truncation_consistency}});
    if (i > 0 && sweep[i] > sweep[i - 1] && kms[i].continuation_residual > kms[i - 1].continuation_residual) {
      monotone = false;
    }
  }
  res["kms"] = {{"F_t", cjson(main_kms.F_t)}, {"F_continued", cjson(main_kms.F_continued)},
                {"G_exact", cjson(main_kms.G_exact)}, {"table", table}};
  checks.push_back(check("KMS continuation", main_kms.continuation_residual, kms_tol));
  checks.push_back(check("KMS truncated consistency", main_kms.truncation_consistency, 1e-12));
  checks.push_back(check("time invariance", main_kms.invariance_residual, 1e-10));
  checks.push_back({{"name", "KMS residual decreasing in K"}, {"status", monotone ? "pass" : "fail"}});

  const auto blk = kms_block_resolution(beta, omega, block, R, K);
  res["kms_cs_block"] = {{"block", block}, {"R", R}, {"deviation_from_thermal", blk.deviation_from_thermal},
                         {"deviation_from_identity", diagnostic(blk.deviation_from_identity)},
                         {"note", "the family resolves I (x) diag(lambda), not the identity"}};
  checks.push_back(check("KMS-CS block resolution (thermal)", blk.deviation_from_thermal, 1e-4));

  prov["truncation"] = K;
  prov["K_sweep"] = sweep;
  prov["threads"] = threads;
  prov["thermal_tail_bound"] = m.phi.tail_bound;
  prov["block_quadrature"] = {{"radial", "gauss-legendre"}, {"radial_nodes", 160}, {"angular_points", 64}, {"R", R}};
  res["checks"] = checks;

  if (out.csv_files) {
    std::string d = "n,l,delta,exp_reference\n";
    for (std::size_t n = 0; n <= K; ++n) {
      for (std::size_t l = 0; l <= K; ++l) {
        d += csv_line({std::to_string(n), std::to_string(l), g17(m.delta(df_index(n, l, K))),
                       g17(std::exp(-beta * omega * (static_cast<double>(l) - static_cast<double>(n))))});
      }
    }
    out.write(".delta.csv", d);
    std::string k = "K,F_re,F_im,G_exact_re,G_exact_im,residual,truncation_consistency\n";
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      k += csv_line({std::to_string(sweep[i]), g17(kms[i].F_continued.real()), g17(kms[i].F_continued.imag()),
                     g17(kms[i].G_exact.real()), g17(kms[i].G_exact.imag()), g17(kms[i].continuation_residual),
                     g17(kms[i].truncation_consistency)});
    }
    out.write(".kms.csv", k);
  }
  if (c.contains("dump")) {
    if (!c["dump"].is_array()) bad("'dump' must be an array of operator names");
    for (const auto& v : c["dump"]) {
      if (!v.is_string()) bad("'dump' must be an array of operator names");
      const std::string name = v.get<std::string>();
      DoubleFockOperator op;
      try {
        op = dump_operator(name, c, K, omega);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigInvalid) bad("unknown operator '" + name + "' in 'dump'");
        throw;
      }
      if (out.json_files) out.write("." + name + ".json", to_json(op).dump() + "\n");
      if (out.csv_files) out.write("." + name + ".csv", to_csv(op));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// measure

json cmd_measure(const json& c, Output& out, json& prov) {
  const Setup s = setup_of(c);
  if (!s.model || !s.model->measure) throw Error(ErrorKind::NoMeasure, "selection carries no measure");
  const RadialMeasure& mu = *s.model->measure;
  const double tol = num(c, "tol", 1e-8);
  const std::size_t n_max = count(c, "n_max", 10);
  QuadratureOptions quad;
  quad.laguerre_nodes = count(c, "laguerre_nodes", quad.laguerre_nodes);
  std::vector<double> grid = nums(c, "grid", {});
  if (grid.empty()) {
    const double end = std::isfinite(mu.support_end) ? mu.support_end : 10.0;
    for (int i = 0; i <= 40; ++i) grid.push_back(end * i / 40.0 * (std::isfinite(mu.support_end) ? 0.999 : 1.0));
  }
  json res;
  res["measure"] = to_json(mu);
  json checks = json::array();
  if (s.branches) {
    for (std::size_t b = 0; b < s.branches->size(); ++b) {
      const auto r = verify_moments(mu, s.branches->branches[b], DegeneracySequence::constant_one(), n_max, quad, tol);
      res["moments_" + s.branches->names[b]] = moments_json(r);
      checks.push_back(check("moments " + s.branches->names[b], r.max_relative_error, tol));
    }
  } else {
    const auto r = verify_moments(mu, s.spec, s.deg, n_max, quad, tol);
    res["moments"] = moments_json(r);
    json ch = check("moments", r.max_relative_error, tol);
    if (!s.model->measure_closed_form) ch["status"] = "weak-sense-only";
    checks.push_back(ch);
    prov["quadrature"] = {{"family", to_string(r.quadrature)}, {"nodes", r.nodes}};
  }
  res["checks"] = checks;
  std::string csv = "x,density\n";
  json dens = json::array();
  for (double x : grid) {
    const double v = mu.density_at(x);
    dens.push_back({{"x", x}, {"density", v}});
    csv += csv_line({g17(x), g17(v)});
  }
  res["density"] = {{"samples", dens},
                    {"bound", mu.laguerre ? "diagnostic only (truncated Laguerre series)" : "closed form"}};
  if (!mu.atoms.empty()) res["density"]["atoms_excluded"] = true;
  prov["n_max"] = n_max;
  if (out.csv_files) out.write(".density.csv", csv);
  return res;
}

json cmd_model_card(const json& c, Output& out, json&) {
  const Setup s = setup_of(c);
  json card = model_card(*s.model);
  if (out.json_files) out.write(".card.json", card.dump(2) + "\n");
  return {{"card", card}, {"checks", json::array()}};
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& allowed_keys(const std::string& command) {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"state", join({kModelKeys, kOutputKeys,
                      {"family", "J", "gamma", "theta", "Jp", "gammap", "branch", "ell", "n", "z", "beta", "K"}})},
      {"verify", join({kModelKeys, kOutputKeys,
                       {"suite", "n_max", "J_values", "t_values", "temporal_tol", "seed", "samples", "laguerre_nodes",
                        "J", "gamma", "theta"}})},
      {"landau", join({kOutputKeys, {"beta", "omega", "tol", "K", "z_samples", "zA", "zB", "t", "K_sweep", "block",
                                     "R", "kms_tol", "dump"}})},
      {"measure", join({kModelKeys, kOutputKeys, {"n_max", "grid", "laguerre_nodes"}})},
      {"model-card", join({{"model", "params"}, kOutputKeys})},
  };
  const auto it = keys.find(command);
  if (it == keys.end()) bad("unknown command '" + command + "'");
  return it->second;
}

json merge_config(const std::string& command, const json& file, const json& overrides) {
  const auto& allowed = allowed_keys(command);
  json merged = json::object();
  for (const json* src : {&file, &overrides}) {
    if (src->is_null()) continue;
    if (!src->is_object()) bad("config must be a JSON object");
    for (const auto& [k, v] : src->items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        bad("unknown key '" + k + "' for '" + command + "'");
      }
      if (k == "params" && merged.contains("params") && v.is_object()) {
        for (const auto& [pk, pv] : v.items()) merged["params"][pk] = pv;
      } else {
        merged[k] = v;
      }
    }
  }
  return merged;
}

CommandResult run_command(const std::string& command, const json& config) {
  const json c = merge_config(command, config, json());
  const auto t0 = std::chrono::steady_clock::now();
  std::string label = c.contains("model") && c["model"].is_string() ? c["model"].get<std::string>() : "";
  if (command == "landau") label = "";
  Output out = output_of(command, c, label);
  json prov = {{"tool", "cohstate"}, {"version", kVersion}};
  json results;
  if (command == "state") results = cmd_state(c, out, prov);
  else if (command == "verify") results = cmd_verify(c, out, prov);
  else if (command == "landau") results = cmd_landau(c, out, prov);
  else if (command == "measure") results = cmd_measure(c, out, prov);
  else results = cmd_model_card(c, out, prov);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  CommandResult r;
  const std::string status = overall(results["checks"]);
  r.report = {{"operation", command}, {"config", c}, {"results", results}, {"status", status},
              {"provenance", prov}, {"timing", {{"wall_seconds", secs}}}};
  r.exit_code = status == "pass" ? kPass : kNumericFailure;
  out.write(".report.json", r.report.dump(2) + "\n");
  r.artifacts = out.written;
  r.summary = render(r.report);
  return r;
}

}  // namespace cohstate::cli
