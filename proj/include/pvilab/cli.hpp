#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "pvilab/json_io.hpp"

namespace pvilab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

struct ExperimentConfig {
  std::string command;
  Json params = Json::object();
  std::string output;  // empty: report goes to the output stream
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

// reads {"command", "params", "output", "seed", "tol"}; throws SchemaError
ExperimentConfig config_from_json(const Json& j);

struct RunResult {
  int exit_code = kExitOk;
  Json report;  // null when the config was rejected before dispatch
  std::string diagnostics;
};

RunResult execute(const ExperimentConfig& cfg);

// executes and writes the report; diagnostics go to err
int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pvilab
