#pragma once

// Command orchestration and report emission.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "avint/spectrum.hpp"

namespace avint {

inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitParse = 2, kExitResonance = 3, kExitVerification = 4 };

struct RunConfig {
  int order = 4;
  std::optional<double> delta_max;
  // Flow relative tolerance; absolute tolerance is 1e-2 of it.
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<std::vector<double>> points;
  double T = 50.0;
  double dt = 0.5;
  bool with_runtime = false;
};

struct CommandResult {
  nlohmann::ordered_json report;
  int exit_code = kExitOk;
};

const std::vector<std::string>& known_commands();

// Throws ResonanceError, ModelError and friends; run_guarded maps them to
// exit codes and a diagnostic report instead.
CommandResult run_command(const std::string& command, const ModelSpec& spec, const RunConfig& cfg);
CommandResult run_guarded(const std::string& command, const ModelSpec& spec, const RunConfig& cfg);

// "x1,x2,...;x1,x2,..." -> points.
std::vector<std::vector<double>> parse_points(const std::string& text);

// JSON with every floating value printed with 17 significant digits and
// non-finite values as null. Object member order is preserved.
std::string serialize_report(const nlohmann::ordered_json& report);
// Empty path writes to stdout.
void emit_report(const nlohmann::ordered_json& report, const std::string& path);

}  // namespace avint
