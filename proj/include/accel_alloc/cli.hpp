#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "accel_alloc/config.hpp"
#include "accel_alloc/search_space.hpp"

namespace accel_alloc::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInfeasible = 2;

struct RunManifest {
  std::string model_path;
  std::string builtin;
  std::string dataflow = "dla";  // dla | eye | shi | mix
  std::string scenario = "lp";
  std::string objective = "latency";
  std::string aggregation = "sum";
  std::string constraint = "unconstrained";
  std::string method = "reinforce";
  std::int64_t epochs = 5000;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out;
  int level_count = 0;  // 0 keeps the configured table

  /// Throws std::invalid_argument on an inconsistent combination.
  void validate() const;
};

/// Resolves the config file: explicit path, then ACCEL_ALLOC_CONFIG, then
/// the compiled-in default config.
AppConfig resolve_config(const std::string& explicit_path);

ModelDesc resolve_model(const RunManifest& manifest);
SearchProblem make_problem(const RunManifest& manifest, const AppConfig& config);

struct SweepRow {
  int pe_level = 0;
  int buf_level = 0;
  double latency = 0.0;
  double energy = 0.0;
  double area = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Every (pe level, buffer level) pair for one layer, PE level outermost.
std::vector<SweepRow> sweep_layer(const LayerShape& layer, Dataflow df, const ActionLevels& levels,
                                  const HwConstants& hw);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> sweep_from_csv(const std::string& text);

struct ReportRow {
  std::string method;
  std::string model;
  std::string dataflow;
  std::string scenario;
  std::string objective;
  std::string constraint;
  double best_value = kInf;
  bool feasible = false;
  std::int64_t evaluations = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

std::string report_to_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> report_from_csv(const std::string& text);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace accel_alloc::cli
