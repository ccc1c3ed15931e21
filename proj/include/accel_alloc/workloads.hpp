#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "accel_alloc/cost_model.hpp"

namespace accel_alloc {

/// A DNN model as an ordered list of layers; order is the search step order.
struct ModelDesc {
  std::string name;
  std::vector<LayerShape> layers;

  friend bool operator==(const ModelDesc&, const ModelDesc&) = default;
};

/// Matrix multiply (M x K) * (K x N) mapped onto a convolution-shaped layer
/// with the same MAC count.
LayerShape gemm_to_layer(std::int64_t M, std::int64_t N, std::int64_t K);

/// Parses and validates a model JSON document. Throws std::invalid_argument
/// with the line/column on malformed JSON and the layer index + field on bad
/// dimensions.
ModelDesc parse_model(std::string_view text);
ModelDesc load_model(const std::string& path);

/// Inverse of parse_model. GEMM-mapped layers are written back as M/N/K
/// entries, so the output re-parses to an identical ModelDesc.
std::string serialize_model(const ModelDesc& model);

/// Built-in fixtures: "toy2", "toy3", "mobilenet_v2_like".
ModelDesc builtin(std::string_view name);
std::vector<std::string> builtin_names();

}  // namespace accel_alloc
