#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cohstate/cli.hpp"
#include "cohstate/error.hpp"

namespace cohstate::cli {

using nlohmann::json;

namespace {

enum class Kind { Num, Int, Str, Cplx, NumList, IntList, CplxList, StrList, Spectrum, Degeneracy };

struct Flag {
  const char* flag;
  const char* key;
  Kind kind;
  const char* help;
};

const std::vector<Flag> kFlags{
    {"--model", "model", Kind::Str, "model tag"},
    {"--spectrum", "spectrum", Kind::Spectrum, "\"linear\" or comma-separated levels"},
    {"--degeneracy", "degeneracy", Kind::Degeneracy, "one|example1|example2|example3 or comma-separated d(n)"},
    {"--omega", "omega", Kind::Num, "energy scale"},
    {"--tol", "tol", Kind::Num, "tolerance"},
    {"--out", "out_dir", Kind::Str, "output directory"},
    {"--name", "name", Kind::Str, "output file stem"},
    {"--format", "format", Kind::Str, "json|csv|both"},
    {"--threads", "threads", Kind::Int, "worker threads"},
    {"--family", "family", Kind::Str, "gk|degenerate|branch|vcs1|vcs2|bcs|kms-cs|thermal"},
    {"--J", "J", Kind::Num, "action label"},
    {"--gamma", "gamma", Kind::Num, "angle label"},
    {"--theta", "theta", Kind::Num, "degeneracy angle"},
    {"--Jp", "Jp", Kind::Num, "second action label"},
    {"--gammap", "gammap", Kind::Num, "second angle label"},
    {"--branch", "branch", Kind::Int, "branch index"},
    {"--ell", "ell", Kind::Int, "vcs1 component"},
    {"--n", "n", Kind::Int, "vcs2 component"},
    {"--z", "z", Kind::Cplx, "complex label re,im"},
    {"--beta", "beta", Kind::Num, "inverse temperature"},
    {"--K", "K", Kind::Int, "Fock truncation"},
    {"--suite", "suite", Kind::Str, "resolution|moments|temporal|action|normalization|idempotency|all"},
    {"--n-max", "n_max", Kind::Int, "highest moment / level"},
    {"--J-values", "J_values", Kind::NumList, "comma-separated J"},
    {"--t-values", "t_values", Kind::NumList, "comma-separated t"},
    {"--temporal-tol", "temporal_tol", Kind::Num, "temporal stability tolerance"},
    {"--seed", "seed", Kind::Int, "sample seed"},
    {"--samples", "samples", Kind::Int, "sample count"},
    {"--laguerre-nodes", "laguerre_nodes", Kind::Int, "Gauss-Laguerre nodes"},
    {"--z-samples", "z_samples", Kind::CplxList, "re,im;re,im;..."},
    {"--zA", "zA", Kind::Cplx, "KMS displacement A"},
    {"--zB", "zB", Kind::Cplx, "KMS displacement B"},
    {"--t", "t", Kind::Num, "time"},
    {"--K-sweep", "K_sweep", Kind::IntList, "comma-separated truncations"},
    {"--block", "block", Kind::Int, "resolution block size"},
    {"--R", "R", Kind::Num, "disk radius"},
    {"--kms-tol", "kms_tol", Kind::Num, "KMS continuation tolerance"},
    {"--dump", "dump", Kind::StrList, "operators to dump"},
    {"--grid", "grid", Kind::NumList, "density sample points"},
};

[[noreturn]] void bad(const std::string& m) { throw Error(ErrorKind::ConfigInvalid, m); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double to_num(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    bad(flag + ": '" + s + "' is not a number");
  }
  if (used != s.size()) bad(flag + ": '" + s + "' is not a number");
  return v;
}

long long to_int(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    bad(flag + ": '" + s + "' is not an integer");
  }
  if (used != s.size()) bad(flag + ": '" + s + "' is not an integer");
  return v;
}

json to_cplx(const std::string& s, const std::string& flag) {
  const auto p = split(s, ',');
  if (p.size() == 1) return json::array({to_num(p[0], flag), 0.0});
  if (p.size() == 2) return json::array({to_num(p[0], flag), to_num(p[1], flag)});
  bad(flag + ": expected re or re,im");
}

json convert(const Flag& f, const std::string& s) {
  json out = json::array();
  switch (f.kind) {
    case Kind::Num: return to_num(s, f.flag);
    case Kind::Int: return to_int(s, f.flag);
    case Kind::Str: return s;
    case Kind::Cplx: return to_cplx(s, f.flag);
    case Kind::NumList:
      for (const auto& p : split(s, ',')) out.push_back(to_num(p, f.flag));
      return out;
    case Kind::IntList:
      for (const auto& p : split(s, ',')) out.push_back(to_int(p, f.flag));
      return out;
    case Kind::CplxList:
      for (const auto& p : split(s, ';')) out.push_back(to_cplx(p, f.flag));
      return out;
    case Kind::StrList:
      for (const auto& p : split(s, ',')) out.push_back(p);
      return out;
    case Kind::Spectrum:
      if (s == "linear") return s;
      for (const auto& p : split(s, ',')) out.push_back(to_num(p, f.flag));
      return out;
    case Kind::Degeneracy:
      if (!s.empty() && std::isalpha(static_cast<unsigned char>(s[0]))) return s;
      for (const auto& p : split(s, ',')) out.push_back(to_int(p, f.flag));
      return out;
  }
  return s;
}

struct Bound {
  const Flag* flag;
  CLI::Option* opt;
  std::string value;
};

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"Coherent-state construction and verification"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"state", "build a coherent state; writes ket JSON and |c|^2 CSV"},
      {"verify", "run a verification suite; exit 0 iff every check passes"},
      {"landau", "modular, KMS and coherent-state checks on the double-Fock space"},
      {"measure", "radial measure, its moments and density samples"},
      {"model-card", "model card JSON"},
  };
  std::map<std::string, std::string> config_path;
  std::map<std::string, std::vector<std::string>> params;
  std::map<std::string, bool> print_json;
  std::map<std::string, std::vector<std::unique_ptr<Bound>>> bound;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path[name], "JSON config file; flags override it");
    sub->add_flag("--print-json", print_json[name], "print the JSON report instead of the table");
    const auto& allowed = allowed_keys(name);
    if (std::find(allowed.begin(), allowed.end(), "params") != allowed.end()) {
      sub->add_option("--param", params[name], "model parameter key=value (repeatable)");
    }
    for (const Flag& f : kFlags) {
      if (std::find(allowed.begin(), allowed.end(), f.key) == allowed.end()) continue;
      auto b = std::make_unique<Bound>();
      b->flag = &f;
      b->opt = sub->add_option(f.flag, b->value, f.help);
      bound[name].push_back(std::move(b));
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    json file = json::object();
    if (!config_path[name].empty()) {
      std::ifstream in(config_path[name]);
      if (!in) bad("cannot read config '" + config_path[name] + "'");
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
      }
    }
    json overrides = json::object();
    for (const auto& b : bound[name]) {
      if (b->opt->count() > 0) overrides[b->flag->key] = convert(*b->flag, b->value);
    }
    for (const auto& kv : params[name]) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) bad("--param expects key=value, got '" + kv + "'");
      overrides["params"][kv.substr(0, eq)] = to_num(kv.substr(eq + 1), "--param");
    }
    const json config = merge_config(name, file, overrides);
    const CommandResult r = run_command(name, config);
    if (print_json[name]) {
      std::cout << r.report.dump(2) << "\n";
    } else {
      std::cout << r.summary;
      for (const auto& a : r.artifacts) std::cout << "  wrote " << a << "\n";
    }
    return r.exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigInvalid ? kConfigError : kNumericFailure;
  } catch (const json::exception& e) {
    std::cerr << "error: ConfigInvalid: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace cohstate::cli
