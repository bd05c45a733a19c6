#include "pvilab/json_io.hpp"

#include <openssl/evp.h>

#include <iomanip>
#include <sstream>

#include "pvilab/errors.hpp"

namespace pvilab {

Json complex_json(cplx z) { return Json::array({z.real(), z.imag()}); }

cplx complex_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("re")) {
    const double im = j.contains("im") ? j.at("im").get<double>() : 0.0;
    return {j.at("re").get<double>(), im};
  }
  throw SchemaError(where + ": expected a number or [re, im]");
}

std::vector<cplx> complex_list_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array");
  std::vector<cplx> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(complex_from_json(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

namespace {

Json int_json(const Integer& v) {
  if (v >= std::numeric_limits<long long>::min() && v <= std::numeric_limits<long long>::max())
    return static_cast<long long>(v);
  return v.str();
}

Json poly_json(const Poly<cplx>& p) {
  Json a = Json::array();
  for (const auto& c : p.coeffs()) a.push_back(complex_json(c));
  return a;
}

Poly<cplx> poly_from_json(const Json& j, const std::string& where) {
  return Poly<cplx>(complex_list_from_json(j, where));
}

std::array<cplx, 4> four(const Json& j, const std::string& where) {
  auto v = complex_list_from_json(j, where);
  if (v.size() != 4) throw SchemaError(where + ": expected 4 entries");
  return {v[0], v[1], v[2], v[3]};
}

const Json& need(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

void expect_schema(const Json& j, const std::string& schema) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != schema)
    throw SchemaError("expected schema \"" + schema + "\"");
}

Json matrix_json(const Eigen::Matrix2cd& m) {
  Json re = Json::array(), im = Json::array();
  for (int r = 0; r < 2; ++r) {
    re.push_back(Json::array({m(r, 0).real(), m(r, 1).real()}));
    im.push_back(Json::array({m(r, 0).imag(), m(r, 1).imag()}));
  }
  return Json{{"re", re}, {"im", im}};
}

Eigen::Matrix2cd matrix_from_json(const Json& j) {
  const Json& re = need(j, "re", "matrix");
  const Json& im = need(j, "im", "matrix");
  Eigen::Matrix2cd m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m(r, c) = cplx(re.at(r).at(c).get<double>(), im.at(r).at(c).get<double>());
  return m;
}

}  // namespace

Json lattice_json(const lattice::SurfaceLattice& lat) {
  Json gram = Json::array();
  for (const auto& row : lat.gram()) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(int_json(v));
    gram.push_back(r);
  }
  return Json{{"labels", lat.labels()}, {"gram", gram}};
}

Json op_pair_json(const lattice::OpPairReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return Json{{"ok", r.ok}, {"checks", checks}};
}

Json point_json(const SurfacePoint& s) {
  return Json{{"q", complex_json(s.q)}, {"iota", Json::array({complex_json(s.iota[0]), complex_json(s.iota[1])})}};
}

SurfacePoint point_from_json(const Json& j) {
  SurfacePoint s;
  s.q = complex_from_json(need(j, "q", "point"), "point.q");
  auto iota = complex_list_from_json(need(j, "iota", "point"), "point.iota");
  if (iota.size() != 2) throw SchemaError("point.iota: expected 2 entries");
  s.iota = {iota[0], iota[1]};
  return s;
}

Json conn_json(const PhiConnection& c) {
  Json t = Json::array(), l = Json::array(), lines = Json::array();
  for (int i = 0; i < 4; ++i) {
    t.push_back(complex_json(c.exponents.t[i]));
    l.push_back(complex_json(c.exponents.lambda[i]));
    lines.push_back(Json::array({complex_json(c.lines[i][0]), complex_json(c.lines[i][1])}));
  }
  return Json{{"schema", kConnSchema},
              {"t", t},
              {"lambda", l},
              {"phi", Json{{"phi1", complex_json(c.phi1)}, {"phi2", complex_json(c.phi2)}, {"phi3", poly_json(c.phi3)}}},
              {"omega",
               Json{{"omega1", poly_json(c.omega1)},
                    {"omega2", poly_json(c.omega2)},
                    {"omega3", poly_json(c.omega3)},
                    {"omega4", poly_json(c.omega4)}}},
              {"lines", lines}};
}

PhiConnection conn_from_json(const Json& j) {
  expect_schema(j, kConnSchema);
  PhiConnection c;
  try {
    c.exponents = ExponentData::make(four(need(j, "t", "conn"), "conn.t"), four(need(j, "lambda", "conn"), "conn.lambda"));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(std::string("conn: ") + e.what());
  }
  const Json& phi = need(j, "phi", "conn");
  c.phi1 = complex_from_json(need(phi, "phi1", "conn.phi"), "conn.phi.phi1");
  c.phi2 = complex_from_json(need(phi, "phi2", "conn.phi"), "conn.phi.phi2");
  c.phi3 = poly_from_json(need(phi, "phi3", "conn.phi"), "conn.phi.phi3");
  const Json& om = need(j, "omega", "conn");
  c.omega1 = poly_from_json(need(om, "omega1", "conn.omega"), "conn.omega.omega1");
  c.omega2 = poly_from_json(need(om, "omega2", "conn.omega"), "conn.omega.omega2");
  c.omega3 = poly_from_json(need(om, "omega3", "conn.omega"), "conn.omega.omega3");
  c.omega4 = poly_from_json(need(om, "omega4", "conn.omega"), "conn.omega.omega4");
  const Json& lines = need(j, "lines", "conn");
  if (!lines.is_array() || lines.size() != 4) throw SchemaError("conn.lines: expected 4 entries");
  for (int i = 0; i < 4; ++i) {
    auto v = complex_list_from_json(lines[i], "conn.lines");
    if (v.size() != 2) throw SchemaError("conn.lines: expected pairs");
    c.lines[i] = {v[0], v[1]};
  }
  return c;
}

bool RepRecord::operator==(const RepRecord& o) const {
  return rep.matrices == o.rep.matrices && rep.basepoint == o.rep.basepoint && rep.order == o.rep.order &&
         rep.error_estimate == o.rep.error_estimate && traces == o.traces && x == o.x && y == o.y && z == o.z &&
         relation_residual == o.relation_residual && verdict == o.verdict;
}

RepRecord make_rep_record(const MonodromyRep& rep, const RepClassification& cls) {
  RepRecord r;
  r.rep = rep;
  for (int i = 0; i < 4; ++i) r.traces[i] = rep.matrices[i].trace();
  const TraceData td = rh_invariants(rep);
  r.x = td.x;
  r.y = td.y;
  r.z = td.z;
  r.relation_residual = rep.relation_residual();
  r.verdict = to_string(cls.verdict);
  return r;
}

Json rep_json(const RepRecord& r) {
  Json mats = Json::array(), traces = Json::array();
  for (int i = 0; i < 4; ++i) {
    mats.push_back(matrix_json(r.rep.matrices[i]));
    traces.push_back(complex_json(r.traces[i]));
  }
  return Json{{"schema", kRepSchema},
              {"basepoint", complex_json(r.rep.basepoint)},
              {"order", r.rep.order},
              {"matrices", mats},
              {"traces", traces},
              {"pair_traces", Json{{"x", complex_json(r.x)}, {"y", complex_json(r.y)}, {"z", complex_json(r.z)}}},
              {"residuals",
               Json{{"relation", r.relation_residual}, {"error_estimate", r.rep.error_estimate}}},
              {"verdict", r.verdict}};
}

RepRecord rep_from_json(const Json& j) {
  expect_schema(j, kRepSchema);
  RepRecord r;
  r.rep.basepoint = complex_from_json(need(j, "basepoint", "rep"), "rep.basepoint");
  r.rep.order = need(j, "order", "rep").get<std::array<int, 4>>();
  const Json& mats = need(j, "matrices", "rep");
  if (!mats.is_array() || mats.size() != 4) throw SchemaError("rep.matrices: expected 4 entries");
  for (int i = 0; i < 4; ++i) r.rep.matrices[i] = matrix_from_json(mats[i]);
  r.traces = four(need(j, "traces", "rep"), "rep.traces");
  const Json& pt = need(j, "pair_traces", "rep");
  r.x = complex_from_json(need(pt, "x", "rep.pair_traces"), "x");
  r.y = complex_from_json(need(pt, "y", "rep.pair_traces"), "y");
  r.z = complex_from_json(need(pt, "z", "rep.pair_traces"), "z");
  const Json& res = need(j, "residuals", "rep");
  r.relation_residual = need(res, "relation", "rep.residuals").get<double>();
  r.rep.error_estimate = need(res, "error_estimate", "rep.residuals").get<double>();
  r.verdict = need(j, "verdict", "rep").get<std::string>();
  return r;
}

bool Report::all_passed() const {
  for (const auto& c : checks)
    if (c.blocking && !c.passed) return false;
  return true;
}

bool Report::operator==(const Report& o) const {
  return command == o.command && seed == o.seed && input == o.input && checks == o.checks && results == o.results;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
  return os.str();
}

Json emit_report(const Report& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back(Json{{"name", c.name},
                          {"passed", c.passed},
                          {"value", c.value},
                          {"threshold", c.threshold},
                          {"blocking", c.blocking},
                          {"detail", c.detail}});
  return Json{{"schema", kReportSchema},
              {"tool_version", kToolVersion},
              {"command", r.command},
              {"seed", r.seed},
              {"config_hash", sha256_hex(r.input.dump())},
              {"input", r.input},
              {"all_passed", r.all_passed()},
              {"checks", checks},
              {"results", r.results}};
}

Report parse_report(const Json& j) {
  expect_schema(j, kReportSchema);
  Report r;
  try {
    r.command = need(j, "command", "report").get<std::string>();
    r.seed = need(j, "seed", "report").get<std::uint64_t>();
    r.input = need(j, "input", "report");
    for (const auto& c : need(j, "checks", "report")) {
      ReportCheck rc;
      rc.name = need(c, "name", "check").get<std::string>();
      rc.passed = need(c, "passed", "check").get<bool>();
      rc.value = need(c, "value", "check").get<double>();
      rc.threshold = need(c, "threshold", "check").get<double>();
      rc.blocking = need(c, "blocking", "check").get<bool>();
      rc.detail = need(c, "detail", "check").get<std::string>();
      r.checks.push_back(rc);
    }
    r.results = need(j, "results", "report");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("report: ") + e.what());
  }
  if (j.contains("config_hash") && j.at("config_hash") != sha256_hex(r.input.dump()))
    throw SchemaError("report: config_hash does not match the input echo");
  return r;
}

Json continuation_json(const ContinuationResult& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps)
    steps.push_back(Json{{"t3", complex_json(s.t3)},
                         {"point", point_json(s.point)},
                         {"drift", s.drift},
                         {"z_drift", s.z_drift},
                         {"newton_iterations", s.newton_iterations},
                         {"events", s.events}});
  return Json{{"schema", "continuation-v1"},
              {"target",
               Json{{"x", complex_json(r.target.x)}, {"y", complex_json(r.target.y)}, {"z", complex_json(r.target.z)}}},
              {"max_drift", r.max_drift},
              {"steps", steps},
              {"pvi_cross_check",
               Json{{"performed", r.pvi.performed},
                    {"points", r.pvi.points},
                    {"max_residual", r.pvi.max_residual},
                    {"passed", r.pvi.passed},
                    {"note", r.pvi.note}}}};
}

std::string drift_series_csv(const Json& report) {
  const Json* cont = &report;
  if (report.contains("results") && report.at("results").contains("continuation"))
    cont = &report.at("results").at("continuation");
  const Json& steps = need(*cont, "steps", "continuation");
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# drift-series-v1\nstep,t3_re,t3_im,drift,z_drift,newton_iterations,events\n";
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const Json& s = steps[k];
    const cplx t3 = complex_from_json(s.at("t3"), "t3");
    std::string ev;
    for (const auto& e : s.at("events")) ev += (ev.empty() ? "" : ";") + e.get<std::string>();
    os << k << ',' << t3.real() << ',' << t3.imag() << ',' << s.at("drift").get<double>() << ','
       << s.at("z_drift").get<double>() << ',' << s.at("newton_iterations").get<int>() << ',' << ev << '\n';
  }
  return os.str();
}

}  // namespace pvilab
