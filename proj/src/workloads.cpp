#include "accel_alloc/workloads.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace accel_alloc {

namespace detail {
extern const char* const kMobileNetV2LikeJson;
}

namespace {

using nlohmann::json;

std::string layer_prefix(std::size_t index) { return "layer " + std::to_string(index) + ": "; }

std::int64_t read_dim(const json& entry, const char* field, std::size_t index,
                      std::optional<std::int64_t> fallback = std::nullopt) {
  const auto it = entry.find(field);
  if (it == entry.end()) {
    if (fallback) return *fallback;
    throw std::invalid_argument(layer_prefix(index) + "missing field " + field);
  }
  if (!it->is_number_integer())
    throw std::invalid_argument(layer_prefix(index) + field + " must be an integer");
  const auto value = it->get<std::int64_t>();
  if (value < 1) throw std::invalid_argument(layer_prefix(index) + field + " must be >= 1");
  return value;
}

LayerShape parse_layer(const json& entry, std::size_t index) {
  if (!entry.is_object()) throw std::invalid_argument(layer_prefix(index) + "not an object");
  const auto kind_it = entry.find("kind");
  if (kind_it == entry.end() || !kind_it->is_string())
    throw std::invalid_argument(layer_prefix(index) + "missing field kind");
  const auto kind_name = kind_it->get<std::string>();

  if (kind_name == "GEMM") {
    return gemm_to_layer(read_dim(entry, "M", index), read_dim(entry, "N", index),
                         read_dim(entry, "K", index));
  }
  if (kind_name != "CONV" && kind_name != "DWCONV")
    throw std::invalid_argument(layer_prefix(index) + "unknown kind '" + kind_name + "'");

  LayerShape layer;
  layer.kind = parse_layer_kind(kind_name);
  layer.K = read_dim(entry, "K", index);
  layer.C = read_dim(entry, "C", index);
  layer.Y = read_dim(entry, "Y", index);
  layer.X = read_dim(entry, "X", index);
  layer.R = read_dim(entry, "R", index);
  layer.S = read_dim(entry, "S", index);
  layer.stride = read_dim(entry, "stride", index, 1);
  try {
    validate(layer);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(layer_prefix(index) + e.what());
  }
  return layer;
}

// Line and column (1-based) of a byte offset.
std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

ModelDesc toy2() {
  return ModelDesc{"toy2",
                   {
                       {LayerKind::CONV, 4, 3, 6, 6, 3, 3, 1},
                       {LayerKind::DWCONV, 3, 3, 6, 6, 3, 3, 1},
                   }};
}

ModelDesc toy3() {
  return ModelDesc{"toy3",
                   {
                       {LayerKind::CONV, 8, 4, 8, 8, 3, 3, 1},
                       {LayerKind::DWCONV, 8, 8, 10, 10, 3, 3, 2},
                       gemm_to_layer(16, 10, 8),
                   }};
}

}  // namespace

LayerShape gemm_to_layer(std::int64_t M, std::int64_t N, std::int64_t K) {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  return LayerShape{.kind = LayerKind::GEMM, .K = N, .C = K, .Y = M, .X = 1, .R = 1, .S = 1,
                    .stride = 1};
}

ModelDesc parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    throw std::invalid_argument("model JSON parse error at line " + std::to_string(line) +
                                ", column " + std::to_string(column) + ": " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("model JSON must be an object");

  ModelDesc model;
  model.name = "unnamed";
  if (const auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw std::invalid_argument("field name must be a string");
    model.name = it->get<std::string>();
  }
  const auto layers = doc.find("layers");
  if (layers == doc.end() || !layers->is_array())
    throw std::invalid_argument("field layers must be an array");
  if (layers->empty()) throw std::invalid_argument("model must have at least one layer");
  for (std::size_t i = 0; i < layers->size(); ++i) model.layers.push_back(parse_layer((*layers)[i], i));
  return model;
}

ModelDesc load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

std::string serialize_model(const ModelDesc& model) {
  json layers = json::array();
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& l = model.layers[i];
    if (l.kind == LayerKind::GEMM) {
      if (l.X != 1 || l.R != 1 || l.S != 1 || l.stride != 1)
        throw std::invalid_argument(layer_prefix(i) + "GEMM layer is not in mapped form");
      layers.push_back({{"kind", "GEMM"}, {"M", l.Y}, {"N", l.K}, {"K", l.C}});
      continue;
    }
    layers.push_back({{"kind", std::string(to_string(l.kind))},
                      {"K", l.K},
                      {"C", l.C},
                      {"Y", l.Y},
                      {"X", l.X},
                      {"R", l.R},
                      {"S", l.S},
                      {"stride", l.stride}});
  }
  json doc;
  doc["name"] = model.name;
  doc["layers"] = std::move(layers);
  return doc.dump(2);
}

ModelDesc builtin(std::string_view name) {
  if (name == "toy2") return toy2();
  if (name == "toy3") return toy3();
  if (name == "mobilenet_v2_like") return parse_model(detail::kMobileNetV2LikeJson);
  std::string message = "unknown builtin model '" + std::string(name) + "'; available:";
  for (const auto& n : builtin_names()) message += " " + n;
  throw std::invalid_argument(message);
}

std::vector<std::string> builtin_names() { return {"toy2", "toy3", "mobilenet_v2_like"}; }

}  // namespace accel_alloc
