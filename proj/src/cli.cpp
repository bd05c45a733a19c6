#include "pvilab/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "pvilab/errors.hpp"
#include "pvilab/isomonodromy.hpp"
#include "pvilab/pic_lattice.hpp"
#include "pvilab/stability.hpp"

namespace pvilab {

namespace {

const std::vector<std::string> kCommands{"verify-surface", "stability", "monodromy", "continue", "pvi", "report"};

// failures during computation carry the name of the check that was running
struct StageFailure : Error {
  std::string stage;
  StageFailure(std::string s, const std::string& what) : Error(what), stage(std::move(s)) {}
};

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const StageFailure&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure(name, e.what());
  }
}

double param_double(const Json& p, const std::string& key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number()) throw SchemaError("params." + key + ": expected a number");
  return p.at(key).get<double>();
}

int param_int(const Json& p, const std::string& key, int fallback, int lo) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number_integer()) throw SchemaError("params." + key + ": expected an integer");
  const int v = p.at(key).get<int>();
  if (v < lo) throw SchemaError("params." + key + ": must be at least " + std::to_string(lo));
  return v;
}

std::string param_string(const Json& p, const std::string& key, const std::string& fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_string()) throw SchemaError("params." + key + ": expected a string");
  return p.at(key).get<std::string>();
}

void check_tolerances(const Json& p) {
  for (const auto& [key, v] : p.items())
    if (key.find("tol") != std::string::npos) {
      if (!v.is_number() || !(v.get<double>() > 0.0)) throw SchemaError("params." + key + ": tolerance must be > 0");
    }
}

std::array<cplx, 4> four_complex(const Json& p, const std::string& key) {
  auto v = complex_list_from_json(p.at(key), "params." + key);
  if (v.size() != 4) throw SchemaError("params." + key + ": expected 4 entries");
  return {v[0], v[1], v[2], v[3]};
}

ExponentData exponents_from(const Json& p) {
  if (!p.contains("lambda")) throw SchemaError("params: missing \"lambda\"");
  const std::array<cplx, 4> t = p.contains("t") ? four_complex(p, "t") : std::array<cplx, 4>{0.0, 1.0, 2.0, 3.0};
  try {
    return ExponentData::make(t, four_complex(p, "lambda"));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(std::string("params: ") + e.what());
  }
}

Rational rational_from(const Json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_string()) return Rational(v.get<std::string>());
  } catch (const std::exception&) {
  }
  throw SchemaError(where + ": expected an integer or a rational string such as \"3/100\"");
}

Weight weight_from(const Json& p) {
  if (!p.contains("alpha_prime")) return Weight::standard();
  const Json& a = p.at("alpha_prime");
  if (!a.is_array() || a.size() != 8) throw SchemaError("params.alpha_prime: expected 8 entries");
  std::array<Rational, 8> ap;
  for (int k = 0; k < 8; ++k) ap[k] = rational_from(a[k], "params.alpha_prime");
  Integer gamma = 1000;
  if (p.contains("gamma")) {
    const Rational g = rational_from(p.at("gamma"), "params.gamma");
    if (denominator(g) != 1) throw SchemaError("params.gamma: expected an integer");
    gamma = numerator(g);
  }
  try {
    return Weight::make(ap, param_int(p, "beta1", 1, 1), param_int(p, "beta2", 1, 1), gamma);
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(std::string("params: ") + e.what());
  }
}

SurfacePoint random_point(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> re(-0.5, 3.5), im(0.3, 1.5), w(-1.0, 1.0);
  const cplx q(re(rng), im(rng));
  return SurfacePoint{q, {cplx(w(rng), w(rng)), 1.0}};
}

// connection from "connection" (conn-v1), "point", or a seeded random chart point
PhiConnection connection_from(const Json& p, const ExponentData& exp, std::uint64_t seed, Json& echo) {
  if (p.contains("connection")) {
    PhiConnection c = conn_from_json(p.at("connection"));
    echo["source"] = "connection";
    return c;
  }
  const SurfacePoint s = p.contains("point") ? point_from_json(p.at("point")) : random_point(seed);
  echo["source"] = p.contains("point") ? "point" : "seeded random point";
  echo["point"] = point_json(s);
  return stage("from_surface_point", [&] { return from_surface_point(s, exp); });
}

ReportCheck check(const std::string& name, double value, double threshold, const std::string& detail = "",
                  bool blocking = true) {
  return ReportCheck{name, value <= threshold, value, threshold, blocking, detail};
}

ReportCheck flag(const std::string& name, bool ok, const std::string& detail, bool blocking = true) {
  return ReportCheck{name, ok, ok ? 0.0 : 1.0, 0.0, blocking, detail};
}

void echo_lambda(const ExponentData& exp, Report& r) {
  const SpecialKind k = is_special(exp);
  r.results["lambda_class"] = to_string(k);
  r.checks.push_back(flag("lambda generic", k == SpecialKind::generic, to_string(k), false));
}

// ---- commands ----

void cmd_verify_surface(const ExperimentConfig& cfg, Report& r) {
  std::array<bool, 4> coincident{};
  if (cfg.params.contains("coincident")) {
    const Json& c = cfg.params.at("coincident");
    if (!c.is_array() || c.size() != 4) throw SchemaError("params.coincident: expected 4 booleans");
    for (int i = 0; i < 4; ++i) {
      if (!c[i].is_boolean()) throw SchemaError("params.coincident: expected 4 booleans");
      coincident[i] = c[i].get<bool>();
    }
  }
  const std::string expected = param_string(cfg.params, "expected_dynkin", "D4(1)");
  const auto lat = lattice::build_okamoto_surface(coincident);
  const auto pair = lattice::anti_canonical(lat);
  const auto rep = lattice::verify_op_pair(pair);
  const auto dyn = lattice::dynkin_type(pair);
  for (const auto& c : rep.checks) r.checks.push_back(flag("op_pair: " + c.name, c.passed, c.detail));
  r.checks.push_back(flag("dynkin", dyn.label == expected, dyn.label + " (expected " + expected + ")"));
  r.results["dynkin"] = dyn.label;
  r.results["lattice"] = lattice_json(lat);
  r.results["op_pair"] = op_pair_json(rep);
  Json extras = Json::array();
  for (const auto& e : pair.extra_curves) {
    extras.push_back(Json{{"name", e.name}, {"self_intersection", static_cast<long long>(e.self_intersection)}});
  }
  r.results["extra_curves"] = extras;
}

void cmd_stability(const ExperimentConfig& cfg, Report& r, std::uint64_t seed) {
  const ExponentData exp = exponents_from(cfg.params);
  const Weight w = weight_from(cfg.params);
  echo_lambda(exp, r);
  Json src;
  const PhiConnection conn = connection_from(cfg.params, exp, seed, src);
  r.results["connection_source"] = src;
  const auto a = stage("alpha-stability", [&] { return is_alpha_stable(conn, w); });
  const auto f = stage("phi-stability", [&] { return is_phi_stable(conn, w); });
  r.results["alpha_verdict"] = to_string(a.verdict);
  r.results["phi_verdict"] = to_string(f.verdict);
  r.results["pardeg_E"] = to_string(a.pardeg_e);
  r.results["mu_E"] = to_string(f.mu_e);
  if (a.witness) r.results["alpha_witness"] = a.witness->description;
  if (f.witness) r.results["phi_witness"] = f.witness->description;
  r.checks.push_back(flag("alpha-stable", a.stable(), to_string(a.verdict)));
  r.checks.push_back(flag("phi-stable", f.stable(), to_string(f.verdict)));
  r.checks.push_back(flag("verdicts agree", a.verdict == f.verdict, to_string(a.verdict) + " / " + to_string(f.verdict)));
}

void cmd_monodromy(const ExperimentConfig& cfg, Report& r, std::uint64_t seed, double tol) {
  const ExponentData exp = exponents_from(cfg.params);
  echo_lambda(exp, r);
  Json src;
  const PhiConnection conn = connection_from(cfg.params, exp, seed, src);
  r.results["connection_source"] = src;
  r.results["connection"] = conn_json(conn);
  MonodromyOptions opts;
  opts.estimate_error = cfg.params.value("estimate_error", false);
  const auto sys = stage("fuchsian system", [&] { return to_fuchsian_system(conn); });
  const auto rep = stage("monodromy", [&] { return monodromy(sys, opts); });
  const auto cls = classify_rep(rep, exp);
  const RepRecord rec = make_rep_record(rep, cls);
  r.results["rep"] = rep_json(rec);
  const double relation_tol = param_double(cfg.params, "relation_tol", 1e-8);
  for (int i = 0; i < 4; ++i) {
    const cplx expect = 2.0 * std::cos(2.0 * std::numbers::pi * exp.lambda[i]);
    r.checks.push_back(check("trace M" + std::to_string(i + 1), std::abs(rec.traces[i] - expect), tol));
  }
  for (int i = 0; i < 4; ++i) {
    const cplx expect = std::exp(cplx(0, -2.0 * std::numbers::pi) * (exp.lambda_plus(i) + exp.lambda_minus(i)));
    r.checks.push_back(check("det M" + std::to_string(i + 1), std::abs(rep.matrices[i].determinant() - expect), relation_tol));
  }
  r.checks.push_back(check("product relation", rec.relation_residual, relation_tol));
  r.checks.push_back(flag("classification", cls.verdict == RepClass::smooth_locus, to_string(cls.verdict) + ": " + cls.detail, false));
}

void cmd_continue(const ExperimentConfig& cfg, Report& r, std::uint64_t seed, double tol) {
  const ExponentData exp = exponents_from(cfg.params);
  echo_lambda(exp, r);
  Json src;
  const PhiConnection conn = connection_from(cfg.params, exp, seed, src);
  r.results["connection_source"] = src;
  std::vector<cplx> path;
  if (cfg.params.contains("t3_path")) {
    path = complex_list_from_json(cfg.params.at("t3_path"), "params.t3_path");
    if (path.empty()) throw SchemaError("params.t3_path: expected at least one waypoint");
  } else {
    path = {exp.t[2], exp.t[2] + cplx(0.0, 0.25)};
  }
  ContinuationOptions opts;
  opts.steps = param_int(cfg.params, "steps", 50, 1);
  opts.drift_tol = tol;
  opts.pvi_tol = param_double(cfg.params, "pvi_tol", 1e-4);
  const auto res = stage("continuation", [&] { return isomonodromic_continue(conn, path, opts); });
  r.results["continuation"] = continuation_json(res);
  r.checks.push_back(check("trace drift", res.max_drift, tol, std::to_string(res.steps.size() - 1) + " steps"));
  r.checks.push_back(ReportCheck{"pvi cross-check", res.pvi.passed, res.pvi.max_residual, opts.pvi_tol, false, res.pvi.note});
  if (cfg.params.contains("drift_csv")) {
    const std::string file = param_string(cfg.params, "drift_csv", "");
    std::ofstream os(file);
    Json tmp{{"results", r.results}};
    os << drift_series_csv(tmp);
    if (!os) throw StageFailure("write drift csv", "cannot write " + file);
  }
}

void cmd_pvi(const ExperimentConfig& cfg, Report& r, double tol) {
  const Json& p = cfg.params;
  if (!p.contains("lambda")) throw SchemaError("params: missing \"lambda\"");
  PviState s;
  s.lambda = four_complex(p, "lambda");
  for (const char* key : {"x0", "y0", "t0"})
    if (!p.contains(key)) throw SchemaError(std::string("params: missing \"") + key + "\"");
  s.x = complex_from_json(p.at("x0"), "params.x0");
  s.y = complex_from_json(p.at("y0"), "params.y0");
  s.t = complex_from_json(p.at("t0"), "params.t0");
  std::vector<cplx> path = p.contains("t_path") ? complex_list_from_json(p.at("t_path"), "params.t_path")
                                                : std::vector<cplx>{s.t, s.t + cplx(0.0, 0.2)};
  PviOptions opts;
  opts.samples_per_segment = param_int(p, "samples_per_segment", 200, 8);
  opts.blowup_threshold = param_double(p, "blowup_threshold", 1e8);
  const auto tr = stage("integrate_pvi", [&] { return integrate_pvi(s, path, opts); });
  r.checks.push_back(check("analytic residual", tr.max_analytic_residual(), tol));
  r.checks.push_back(check("finite-difference residual", tr.max_fd_residual(), tol));
  Json events = Json::array();
  for (const auto& e : tr.events)
    events.push_back(Json{{"t", complex_json(e.t)}, {"x", complex_json(e.x)}, {"y", complex_json(e.y)},
                          {"order_estimate", e.order_estimate}, {"segment", e.segment}});
  r.results["samples"] = tr.samples.size();
  r.results["completed"] = tr.completed;
  r.results["events"] = events;
  r.results["final"] = Json{{"t", complex_json(tr.samples.back().t)}, {"x", complex_json(tr.samples.back().x)},
                            {"y", complex_json(tr.samples.back().y)}};
  if (p.contains("csv")) {
    const std::string file = param_string(p, "csv", "");
    std::ofstream os(file);
    os << trajectory_csv(tr);
    if (!os) throw StageFailure("write trajectory csv", "cannot write " + file);
    r.results["csv"] = file;
  }
}

void cmd_report(const ExperimentConfig& cfg, Report& r) {
  const Json& p = cfg.params;
  Json list = Json::array();
  if (p.contains("reports")) {
    if (!p.at("reports").is_array()) throw SchemaError("params.reports: expected an array of paths");
    for (const auto& f : p.at("reports")) {
      if (!f.is_string()) throw SchemaError("params.reports: expected an array of paths");
      const std::string file = f.get<std::string>();
      std::ifstream is(file);
      if (!is) throw SchemaError("params.reports: cannot read " + file);
      Json j;
      try {
        j = Json::parse(is);
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(file + ": " + e.what());
      }
      const Report sub = parse_report(j);
      r.checks.push_back(flag(file, sub.all_passed(), sub.command));
      list.push_back(Json{{"path", file}, {"command", sub.command}, {"all_passed", sub.all_passed()},
                          {"checks", sub.checks.size()}});
    }
  }
  r.results["reports"] = list;
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("config: expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    (void)v;
    if (key != "command" && key != "params" && key != "output" && key != "seed" && key != "tol")
      throw SchemaError("config: unknown key \"" + key + "\"");
  }
  ExperimentConfig c;
  if (j.contains("command")) {
    if (!j.at("command").is_string()) throw SchemaError("config.command: expected a string");
    c.command = j.at("command").get<std::string>();
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw SchemaError("config.params: expected an object");
    c.params = j.at("params");
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw SchemaError("config.output: expected a string");
    c.output = j.at("output").get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw SchemaError("config.seed: expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("tol")) {
    if (!j.at("tol").is_number()) throw SchemaError("config.tol: expected a number");
    c.tol = j.at("tol").get<double>();
  }
  return c;
}

RunResult execute(const ExperimentConfig& cfg) {
  RunResult out;
  Report r;
  r.command = cfg.command;
  r.seed = cfg.seed.value_or(0);
  r.input = Json{{"command", cfg.command}, {"params", cfg.params}, {"seed", r.seed}};
  if (cfg.tol) r.input["tol"] = *cfg.tol;
  try {
    if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end())
      throw SchemaError("unknown command \"" + cfg.command + "\"");
    if (cfg.tol && !(*cfg.tol > 0.0)) throw SchemaError("tol: tolerance must be > 0");
    check_tolerances(cfg.params);
    const double tol = cfg.tol.value_or(param_double(cfg.params, "tol", 1e-6));
    if (cfg.command == "verify-surface") cmd_verify_surface(cfg, r);
    else if (cfg.command == "stability") cmd_stability(cfg, r, r.seed);
    else if (cfg.command == "monodromy") cmd_monodromy(cfg, r, r.seed, tol);
    else if (cfg.command == "continue") cmd_continue(cfg, r, r.seed, tol);
    else if (cfg.command == "pvi") cmd_pvi(cfg, r, tol);
    else cmd_report(cfg, r);
  } catch (const SchemaError& e) {
    out.exit_code = kExitUsage;
    out.diagnostics = std::string("schema error: ") + e.what();
    return out;
  } catch (const nlohmann::json::exception& e) {
    out.exit_code = kExitUsage;
    out.diagnostics = std::string("schema error: ") + e.what();
    return out;
  } catch (const StageFailure& e) {
    r.checks.push_back(ReportCheck{e.stage, false, 1.0, 0.0, true, e.what()});
  } catch (const Error& e) {
    r.checks.push_back(ReportCheck{cfg.command, false, 1.0, 0.0, true, e.what()});
  }
  out.report = emit_report(r);
  out.exit_code = r.all_passed() ? kExitOk : kExitNumerical;
  if (out.exit_code != kExitOk) {
    std::ostringstream os;
    for (const auto& c : r.checks)
      if (c.blocking && !c.passed) os << "failed check: " << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    out.diagnostics = os.str();
  }
  return out;
}

int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  RunResult res = execute(cfg);
  if (!res.diagnostics.empty()) err << res.diagnostics << (res.diagnostics.back() == '\n' ? "" : "\n");
  if (res.report.is_null()) return res.exit_code;
  const std::string text = res.report.dump(2) + "\n";
  if (cfg.output.empty()) {
    out << text;
  } else {
    std::ofstream os(cfg.output, std::ios::binary);
    os << text;
    if (!os) {
      err << "cannot write report to " << cfg.output << "\n";
      return kExitUsage;
    }
  }
  return res.exit_code;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pvilab: parabolic connections, monodromy and isomonodromic deformation"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_path, "report path (default: stdout)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--tol", tol, "check tolerance");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw SchemaError("cannot read config " + config_path);
      Json j;
      try {
        j = Json::parse(is);
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(config_path + ": " + e.what());
      }
      cfg = config_from_json(j);
      if (!cfg.command.empty() && cfg.command != command)
        throw SchemaError("config command \"" + cfg.command + "\" does not match subcommand \"" + command + "\"");
    }
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitUsage;
  }
  cfg.command = command;
  if (!out_path.empty()) cfg.output = out_path;
  if (seed) cfg.seed = seed;
  if (tol) cfg.tol = tol;
  return run(cfg, out, err);
}

}  // namespace pvilab
