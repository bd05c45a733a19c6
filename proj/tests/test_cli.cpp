#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "pvilab/cli.hpp"
#include "pvilab/errors.hpp"

using namespace pvilab;

namespace {

const Json kLambda = Json::array({0.11, 0.12, 0.13, 0.15});

ExperimentConfig make(const std::string& cmd, Json params = Json::object()) {
  ExperimentConfig c;
  c.command = cmd;
  c.params = std::move(params);
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pvilab_test_" + name)).string();
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "pvilab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  return code;
}

const ReportCheck* find_check(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("verify-surface with the default config") {
  const auto res = execute(make("verify-surface"));
  CHECK(res.exit_code == kExitOk);
  CHECK(res.report.at("results").at("dynkin") == "D4(1)");
  CHECK(res.report.dump(2).find("\"dynkin\": \"D4(1)\"") != std::string::npos);
  CHECK(res.report.at("schema") == "report-v1");
}

TEST_CASE("monodromy report reproduces the diagonal-oracle-validated traces") {
  const auto res = execute(make("monodromy", Json{{"lambda", kLambda}}));
  CHECK(res.exit_code == kExitOk);
  const Json& traces = res.report.at("results").at("rep").at("traces");
  for (int i = 0; i < 4; ++i) {
    const cplx tr = complex_from_json(traces[i], "trace");
    CHECK(std::abs(tr - 2.0 * std::cos(2.0 * std::numbers::pi * kLambda[i].get<double>())) < 1e-6);
  }
  CHECK(res.report.at("results").at("lambda_class") == "generic");
}

TEST_CASE("exit code 0 for every command on valid input") {
  CHECK(execute(make("stability", Json{{"lambda", kLambda}})).exit_code == kExitOk);
  CHECK(execute(make("continue", Json{{"lambda", kLambda}, {"steps", 10}})).exit_code == kExitOk);
  CHECK(execute(make("pvi", Json{{"lambda", kLambda}, {"x0", 0.3}, {"y0", Json::array({0.2, -0.3})}, {"t0", Json::array({0.5, 0.5})}}))
            .exit_code == kExitOk);
  CHECK(execute(make("report")).exit_code == kExitOk);
}

TEST_CASE("exit code 1 names the failing check") {
  SUBCASE("tolerance too tight") {
    auto cfg = make("monodromy", Json{{"lambda", kLambda}});
    cfg.tol = 1e-300;
    const auto res = execute(cfg);
    CHECK(res.exit_code == kExitNumerical);
    CHECK(res.diagnostics.find("failed check: trace M1") != std::string::npos);
  }
  SUBCASE("unstable connection") {
    std::mt19937_64 rng(61);
    const auto e = ExponentData::make({0.0, 1.0, 2.0, 3.0}, {0.11, 0.12, 0.13, 0.15});
    auto c = from_surface_point(testing::random_chart_point(rng), e);
    c.omega3 = Poly<cplx>{};
    const auto res = execute(make("stability", Json{{"lambda", kLambda}, {"connection", conn_json(c)}}));
    CHECK(res.exit_code == kExitNumerical);
    CHECK(res.diagnostics.find("alpha-stable") != std::string::npos);
  }
  SUBCASE("numerical stage failure") {
    const auto res = execute(make("continue", Json{{"lambda", kLambda}, {"t3_path", Json::array({2.0, 4.0})}}));
    CHECK(res.exit_code == kExitNumerical);
    CHECK(res.diagnostics.find("continuation") != std::string::npos);
  }
  SUBCASE("pvi path through a fixed singularity") {
    const auto res = execute(make("pvi", Json{{"lambda", kLambda}, {"x0", 0.3}, {"y0", 0.1}, {"t0", -0.5}, {"t_path", Json::array({-0.5, 0.5})}}));
    CHECK(res.exit_code == kExitNumerical);
  }
}

TEST_CASE("exit code 2 for schema and usage errors") {
  CHECK(execute(make("monodromy")).exit_code == kExitUsage);
  CHECK(execute(make("frobnicate")).exit_code == kExitUsage);
  CHECK(execute(make("monodromy", Json{{"lambda", Json::array({0.1, 0.2})}})).exit_code == kExitUsage);
  CHECK(execute(make("monodromy", Json{{"lambda", kLambda}, {"t", Json::array({0, 1, 1, 3})}})).exit_code == kExitUsage);
  CHECK(execute(make("monodromy", Json{{"lambda", kLambda}, {"relation_tol", -1.0}})).exit_code == kExitUsage);
  CHECK(execute(make("monodromy", Json{{"lambda", kLambda}, {"point", Json{{"q", 0.5}}}})).exit_code == kExitUsage);
  CHECK(execute(make("stability", Json{{"lambda", kLambda}, {"alpha_prime", Json::array({"1/2", "1/3"})}})).exit_code == kExitUsage);
  CHECK(execute(make("continue", Json{{"lambda", kLambda}, {"steps", 0}})).exit_code == kExitUsage);
  CHECK(execute(make("pvi", Json{{"lambda", kLambda}})).exit_code == kExitUsage);
  CHECK(execute(make("report", Json{{"reports", Json::array({"/nonexistent/report.json"})}})).exit_code == kExitUsage);
  auto cfg = make("monodromy", Json{{"lambda", kLambda}});
  cfg.tol = 0.0;
  CHECK(execute(cfg).exit_code == kExitUsage);
  CHECK_THROWS_AS(config_from_json(Json{{"comand", "pvi"}}), SchemaError);
  CHECK_THROWS_AS(config_from_json(Json::array()), SchemaError);
  CHECK_THROWS_AS(config_from_json(Json{{"seed", -3}}), SchemaError);
}

TEST_CASE("command-line entry point") {
  const std::string cfg = temp_path("cfg.json"), bad = temp_path("bad.json"), out = temp_path("out.json");
  std::ofstream(cfg) << R"({"command": "monodromy", "params": {"lambda": [0.11, 0.12, 0.13, 0.15]}})";
  std::ofstream(bad) << "{ not json";
  CHECK(cli({"verify-surface"}) == kExitOk);
  CHECK(cli({"monodromy", "--config", cfg, "--out", out}) == kExitOk);
  CHECK(std::filesystem::exists(out));
  CHECK(cli({"monodromy", "--config", cfg, "--tol", "1e-300"}) == kExitNumerical);
  CHECK(cli({"monodromy"}) == kExitUsage);
  CHECK(cli({"pvi", "--config", cfg}) == kExitUsage);
  CHECK(cli({"monodromy", "--config", bad}) == kExitUsage);
  CHECK(cli({"monodromy", "--config", "/nonexistent.json"}) == kExitUsage);
  CHECK(cli({"monodromy", "--bogus"}) == kExitUsage);
  CHECK(cli({"monodromy", "--seed", "abc"}) == kExitUsage);
  CHECK(cli({}) == kExitUsage);
  CHECK(cli({"--help"}) == kExitOk);
  CHECK(cli({"verify-surface", "--out", "/nonexistent-dir/x.json"}) == kExitUsage);

  std::ofstream(temp_path("list.json")) << Json{{"params", {{"reports", {out}}}}}.dump();
  CHECK(cli({"report", "--config", temp_path("list.json")}) == kExitOk);
}

TEST_CASE("identical runs give byte-identical reports") {
  auto cfg = make("continue", Json{{"lambda", kLambda}, {"steps", 8}});
  cfg.seed = 17;
  const auto a = execute(cfg), b = execute(cfg);
  CHECK(a.report.dump(2) == b.report.dump(2));
  cfg.seed = 18;
  CHECK(execute(cfg).report.at("config_hash") != a.report.at("config_hash"));
}

TEST_CASE("empty results give a valid report with no checks") {
  const Json j = emit_report(Report{});
  CHECK(j.at("checks").is_array());
  CHECK(j.at("checks").empty());
  CHECK(j.at("all_passed") == true);
  CHECK(Json::parse(j.dump()) == j);
  CHECK(parse_report(j) == Report{});
}

TEST_CASE("reports round-trip for every command") {
  const std::vector<ExperimentConfig> cfgs{
      make("verify-surface", Json{{"coincident", {false, true, false, false}}}),
      make("stability", Json{{"lambda", kLambda}}),
      make("monodromy", Json{{"lambda", kLambda}}),
      make("continue", Json{{"lambda", kLambda}, {"steps", 6}}),
      make("pvi", Json{{"lambda", kLambda}, {"x0", 0.3}, {"y0", 0.2}, {"t0", Json::array({0.5, 0.5})}, {"samples_per_segment", 20}}),
      make("report")};
  for (const auto& cfg : cfgs) {
    const auto res = execute(cfg);
    const Json text = Json::parse(res.report.dump(2));
    const Report r = parse_report(text);
    CHECK(emit_report(r) == res.report);
    CHECK(emit_report(parse_report(emit_report(r))).dump() == res.report.dump());
  }
}

TEST_CASE("tampered input echo is detected") {
  Json j = execute(make("verify-surface")).report;
  j["input"]["params"]["x"] = 1;
  CHECK_THROWS_AS(parse_report(j), SchemaError);
}

TEST_CASE("conn-v1 and rep-v1 round trips") {
  std::mt19937_64 rng(62);
  const auto e = testing::random_generic_exponents(rng);
  const auto c = from_surface_point(testing::random_chart_point(rng), e);
  const PhiConnection back = conn_from_json(Json::parse(conn_json(c).dump()));
  CHECK(back.omega2 == c.omega2);
  CHECK(back.omega4 == c.omega4);
  CHECK(back.exponents.t == c.exponents.t);
  CHECK(back.lines == c.lines);
  CHECK(conn_json(back) == conn_json(c));

  const auto rep = monodromy(to_fuchsian_system(c));
  const RepRecord rec = make_rep_record(rep, classify_rep(rep, e));
  const RepRecord rback = rep_from_json(Json::parse(rep_json(rec).dump()));
  CHECK(rback == rec);
  CHECK_THROWS_AS(rep_from_json(conn_json(c)), SchemaError);
  CHECK_THROWS_AS(conn_from_json(Json{{"schema", "conn-v1"}}), SchemaError);
}

TEST_CASE("continuation report exposes the drift series as CSV") {
  const auto res = execute(make("continue", Json{{"lambda", kLambda}, {"steps", 5}}));
  const std::string csv = drift_series_csv(res.report);
  CHECK(csv.rfind("# drift-series-v1\nstep,t3_re,t3_im,drift", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 6);
  const Json& steps = res.report.at("results").at("continuation").at("steps");
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    std::getline(is, line);
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    CHECK(std::stod(f[3]) == steps[k].at("drift").get<double>());
  }
}
