#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pvilab/isomonodromy.hpp"
#include "pvilab/parabolic_conn.hpp"
#include "pvilab/pic_lattice.hpp"
#include "pvilab/rh_numeric.hpp"

namespace pvilab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kConnSchema = "conn-v1";
inline constexpr const char* kRepSchema = "rep-v1";
inline constexpr const char* kReportSchema = "report-v1";

// complex numbers are [re, im]; a bare number is read as real
Json complex_json(cplx z);
cplx complex_from_json(const Json& j, const std::string& where);
std::vector<cplx> complex_list_from_json(const Json& j, const std::string& where);

Json lattice_json(const lattice::SurfaceLattice& lat);
Json op_pair_json(const lattice::OpPairReport& r);

Json point_json(const SurfacePoint& s);
SurfacePoint point_from_json(const Json& j);

Json conn_json(const PhiConnection& c);
PhiConnection conn_from_json(const Json& j);

struct RepRecord {
  MonodromyRep rep;
  std::array<cplx, 4> traces{};
  cplx x, y, z;
  double relation_residual = 0.0;
  std::string verdict;
  bool operator==(const RepRecord& o) const;
};
RepRecord make_rep_record(const MonodromyRep& rep, const RepClassification& cls);
Json rep_json(const RepRecord& r);
RepRecord rep_from_json(const Json& j);

struct ReportCheck {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double threshold = 0.0;
  bool blocking = true;
  std::string detail;
  bool operator==(const ReportCheck&) const = default;
};

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  Json input = Json::object();
  std::vector<ReportCheck> checks;
  Json results = Json::object();
  bool all_passed() const;
  bool operator==(const Report& o) const;
};

std::string sha256_hex(const std::string& data);
Json emit_report(const Report& r);
Report parse_report(const Json& j);

Json continuation_json(const ContinuationResult& r);
// per-step drift series of a continuation report as CSV
std::string drift_series_csv(const Json& report);

}  // namespace pvilab
