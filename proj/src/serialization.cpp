#include "accel_alloc/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace accel_alloc {

namespace {

using nlohmann::json;

json number_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

double number_or_inf(const json& value) { return value.is_null() ? kInf : value.get<double>(); }

json trace_point_json(const TracePoint& p) {
  return {{"epoch", p.epoch}, {"value", number_or_null(p.best_value)}};
}

}  // namespace

json design_to_json(const Design& design, const std::optional<Genome>& genome) {
  json entries = json::array();
  for (std::size_t i = 0; i < design.size(); ++i) {
    json e = {{"pe", design[i].pe},
              {"k", design[i].k},
              {"dataflow", std::string(to_string(design[i].dataflow))}};
    if (genome && i < genome->size()) {
      e["pe_level"] = (*genome)[i].pe_level;
      e["buf_level"] = (*genome)[i].buf_level;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

Design design_from_json(const json& entries, const ActionLevels* levels,
                        Dataflow default_dataflow) {
  if (!entries.is_array()) throw std::invalid_argument("design must be a JSON array");
  Design design;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string where = "design entry " + std::to_string(i) + ": ";
    if (!e.is_object()) throw std::invalid_argument(where + "not an object");
    DesignPoint p;
    p.dataflow = e.contains("dataflow") ? parse_dataflow(e.at("dataflow").get<std::string>())
                                        : default_dataflow;
    if (e.contains("pe") && e.contains("k")) {
      p.pe = e.at("pe").get<std::int64_t>();
      p.k = e.at("k").get<std::int64_t>();
    } else if (e.contains("pe_level") && e.contains("buf_level")) {
      if (levels == nullptr) throw std::invalid_argument(where + "level indices need action levels");
      const Gene g{e.at("pe_level").get<int>(), e.at("buf_level").get<int>(), p.dataflow};
      p = decode({g}, *levels).front();
    } else {
      throw std::invalid_argument(where + "needs pe/k or pe_level/buf_level");
    }
    if (p.pe < 1 || p.k < 1) throw std::invalid_argument(where + "pe and k must be >= 1");
    design.push_back(p);
  }
  return design;
}

json result_to_json(const SearchResult& result, const RunInfo& info) {
  json doc;
  doc["method"] = result.method;
  doc["model"] = info.model;
  doc["dataflow"] = info.dataflow;
  doc["scenario"] = info.scenario;
  doc["objective"] = info.objective;
  doc["aggregation"] = info.aggregation;
  doc["constraint"] = info.constraint;
  doc["seed"] = info.seed ? json(*info.seed) : json(nullptr);
  doc["feasible"] = result.feasible;
  doc["best_value"] = number_or_null(result.best_value);
  doc["evaluations"] = result.evaluations;
  doc["design"] = result.best_design ? design_to_json(*result.best_design, result.best_genome)
                                     : json(nullptr);
  doc["first_feasible"] =
      result.first_feasible ? trace_point_json(*result.first_feasible) : json(nullptr);
  return doc;
}

SearchResult result_from_json(const json& doc, RunInfo* info) {
  if (!doc.is_object()) throw std::invalid_argument("result JSON must be an object");
  SearchResult r;
  try {
    r.method = doc.at("method").get<std::string>();
    r.feasible = doc.at("feasible").get<bool>();
    r.best_value = number_or_inf(doc.at("best_value"));
    r.evaluations = doc.at("evaluations").get<std::int64_t>();
    const json& design = doc.at("design");
    if (!design.is_null()) {
      r.best_design = design_from_json(design, nullptr, Dataflow::DLA);
      if (!design.empty() && design.front().contains("pe_level")) {
        Genome g;
        for (std::size_t i = 0; i < design.size(); ++i)
          g.push_back({design[i].at("pe_level").get<int>(), design[i].at("buf_level").get<int>(),
                       (*r.best_design)[i].dataflow});
        r.best_genome = std::move(g);
      }
    }
    if (const auto& ff = doc.at("first_feasible"); !ff.is_null())
      r.first_feasible = TracePoint{ff.at("epoch").get<std::int64_t>(), number_or_inf(ff.at("value"))};
    if (info != nullptr) {
      info->model = doc.at("model").get<std::string>();
      info->dataflow = doc.at("dataflow").get<std::string>();
      info->scenario = doc.at("scenario").get<std::string>();
      info->objective = doc.at("objective").get<std::string>();
      info->aggregation = doc.at("aggregation").get<std::string>();
      info->constraint = doc.at("constraint").get<std::string>();
      const auto& seed = doc.at("seed");
      info->seed = seed.is_null() ? std::nullopt : std::optional(seed.get<std::uint64_t>());
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed result JSON: ") + e.what());
  }
  if (r.feasible != r.best_design.has_value())
    throw std::invalid_argument("malformed result JSON: feasible flag disagrees with design");
  return r;
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

double parse_number(const std::string& text) {
  if (text == "inf") return kInf;
  if (text == "-inf") return -kInf;
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("bad number '" + text + "'");
  return value;
}

std::string trace_to_csv(const std::vector<TracePoint>& trace) {
  std::string out = "epoch,best_value\n";
  for (const auto& p : trace) out += std::to_string(p.epoch) + "," + format_number(p.best_value) + "\n";
  return out;
}

std::vector<TracePoint> trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "epoch,best_value")
    throw std::invalid_argument("trace CSV must start with header epoch,best_value");
  std::vector<TracePoint> trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("bad trace row '" + line + "'");
    trace.push_back({std::stoll(line.substr(0, comma)), parse_number(line.substr(comma + 1))});
  }
  return trace;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace accel_alloc
