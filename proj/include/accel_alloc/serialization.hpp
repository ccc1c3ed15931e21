#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "accel_alloc/search_space.hpp"

namespace accel_alloc {

/// Run metadata written next to a SearchResult so result files are
/// self-describing for reporting.
struct RunInfo {
  std::string model;
  std::string dataflow;  // dla | eye | shi | mix
  std::string scenario;  // ls | lp
  std::string objective;
  std::string aggregation;
  std::string constraint;
  std::optional<std::uint64_t> seed;
};

/// Design entries: {"pe", "k", "dataflow"} plus {"pe_level", "buf_level"}
/// when the matching coarse genome is known.
nlohmann::json design_to_json(const Design& design, const std::optional<Genome>& genome = {});

/// Accepts value-space entries ("pe"/"k") or level entries
/// ("pe_level"/"buf_level", requires `levels`). A missing "dataflow" falls
/// back to `default_dataflow`.
Design design_from_json(const nlohmann::json& entries, const ActionLevels* levels,
                        Dataflow default_dataflow);

nlohmann::json result_to_json(const SearchResult& result, const RunInfo& info);
SearchResult result_from_json(const nlohmann::json& doc, RunInfo* info = nullptr);

/// Shortest round-trip decimal; "inf" for infinity.
std::string format_number(double value);
double parse_number(const std::string& text);

std::string trace_to_csv(const std::vector<TracePoint>& trace);
std::vector<TracePoint> trace_from_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace accel_alloc
