#include "accel_alloc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace accel_alloc {

namespace detail {
extern const char* const kDefaultConfigJson;
}

namespace {

using nlohmann::json;

double read_positive(const json& doc, const char* field, double fallback) {
  const auto it = doc.find(field);
  if (it == doc.end()) return fallback;
  if (!it->is_number()) throw std::invalid_argument(std::string("config: ") + field + " must be a number");
  return it->get<double>();
}

std::vector<std::int64_t> read_levels(const json& levels, const char* field,
                                      const std::vector<std::int64_t>& fallback) {
  const auto it = levels.find(field);
  if (it == levels.end()) return fallback;
  if (!it->is_array()) throw std::invalid_argument(std::string("config: levels.") + field + " must be an array");
  std::vector<std::int64_t> out;
  for (const auto& v : *it) {
    if (!v.is_number_integer())
      throw std::invalid_argument(std::string("config: levels.") + field + " must hold integers");
    out.push_back(v.get<std::int64_t>());
  }
  return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

double parse_limit(const std::string& token, std::string_view whole) {
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || !(value > 0.0))
    throw std::invalid_argument("bad constraint '" + std::string(whole) +
                                "': limits must be positive numbers");
  return value;
}

}  // namespace

AppConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config JSON must be an object");

  static const char* const kKnown[] = {"bandwidth", "e_mac", "e_l1",  "e_l2",   "e_dram",
                                       "e_leak",    "a_pe",  "a_buf", "a_l2",   "levels",
                                       "presets"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown))
      throw std::invalid_argument("config: unknown field '" + key + "'");
  }

  AppConfig cfg;
  HwConstants& hw = cfg.hw;
  hw.bandwidth = read_positive(doc, "bandwidth", hw.bandwidth);
  hw.e_mac = read_positive(doc, "e_mac", hw.e_mac);
  hw.e_l1 = read_positive(doc, "e_l1", hw.e_l1);
  hw.e_l2 = read_positive(doc, "e_l2", hw.e_l2);
  hw.e_dram = read_positive(doc, "e_dram", hw.e_dram);
  hw.e_leak = read_positive(doc, "e_leak", hw.e_leak);
  hw.a_pe = read_positive(doc, "a_pe", hw.a_pe);
  hw.a_buf = read_positive(doc, "a_buf", hw.a_buf);
  hw.a_l2 = read_positive(doc, "a_l2", hw.a_l2);
  hw.validate();

  if (const auto it = doc.find("levels"); it != doc.end()) {
    if (!it->is_object()) throw std::invalid_argument("config: levels must be an object");
    cfg.levels.pe_values = read_levels(*it, "pe_values", cfg.levels.pe_values);
    cfg.levels.buf_values = read_levels(*it, "buf_values", cfg.levels.buf_values);
  }
  cfg.levels.validate();

  if (const auto it = doc.find("presets"); it != doc.end()) {
    if (!it->is_object()) throw std::invalid_argument("config: presets must be an object");
    for (const auto& [name, value] : it->items()) {
      if (!value.is_string())
        throw std::invalid_argument("config: preset '" + name + "' must be a constraint string");
      const auto text = value.get<std::string>();
      parse_constraint(text, Deployment::LP);  // reject bad presets at load time
      cfg.presets[name] = text;
    }
  }
  return cfg;
}

AppConfig default_config() { return parse_config(detail::kDefaultConfigJson); }

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

ConstraintSpec parse_constraint(std::string_view text, Deployment deployment,
                                const std::map<std::string, std::string>& presets) {
  if (text == "unconstrained" || text == "none") return ConstraintSpec::unconstrained(deployment);
  if (const auto it = presets.find(std::string(text)); it != presets.end())
    return parse_constraint(it->second, deployment);

  const auto parts = split(text, ':');
  if (parts[0] == "area" && parts.size() == 2)
    return ConstraintSpec::area(parse_limit(parts[1], text), deployment);
  if (parts[0] == "power" && parts.size() == 2)
    return ConstraintSpec::power(parse_limit(parts[1], text), deployment);
  if (parts[0] == "counts" && parts.size() == 3)
    return ConstraintSpec::counts(parse_limit(parts[1], text), parse_limit(parts[2], text),
                                  deployment);
  throw std::invalid_argument("bad constraint '" + std::string(text) +
                              "' (expected area:X, power:X, counts:PE:BUF, unconstrained or a "
                              "preset name)");
}

}  // namespace accel_alloc
