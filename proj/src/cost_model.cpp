#include "accel_alloc/cost_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace accel_alloc {

namespace {

std::int64_t ceil_div(std::int64_t num, std::int64_t den) { return (num + den - 1) / den; }

void require_positive(std::int64_t value, const char* name) {
  if (value < 1) throw std::invalid_argument(std::string(name) + " must be >= 1");
}

void check_inputs(std::int64_t pe, std::int64_t k, const LayerShape& layer) {
  validate(layer);
  require_positive(pe, "PE count");
  require_positive(k, "tile value k");
}

// Weight, input and output footprints in elements.
struct Footprint {
  std::int64_t weights;
  std::int64_t inputs;
  std::int64_t outputs;
};

Footprint footprint(const LayerShape& layer) {
  const auto [yp, xp] = output_dims(layer);
  const bool dw = layer.kind == LayerKind::DWCONV;
  return Footprint{
      .weights = (dw ? 1 : layer.K) * layer.C * layer.R * layer.S,
      .inputs = layer.C * layer.Y * layer.X,
      .outputs = (dw ? layer.C : layer.K) * yp * xp,
  };
}

std::int64_t temporal_extent(Dataflow df, const LayerShape& layer) {
  const auto [yp, xp] = output_dims(layer);
  switch (df) {
    case Dataflow::DLA:
      return layer.kind == LayerKind::DWCONV ? 1 : layer.K;
    case Dataflow::EYE:
      return yp;
    case Dataflow::SHI:
      return yp * xp;
  }
  throw std::logic_error("unhandled dataflow");
}

}  // namespace

std::string_view to_string(Dataflow df) {
  switch (df) {
    case Dataflow::DLA:
      return "dla";
    case Dataflow::EYE:
      return "eye";
    case Dataflow::SHI:
      return "shi";
  }
  return "?";
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::CONV:
      return "CONV";
    case LayerKind::DWCONV:
      return "DWCONV";
    case LayerKind::GEMM:
      return "GEMM";
  }
  return "?";
}

Dataflow parse_dataflow(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dla") return Dataflow::DLA;
  if (lower == "eye") return Dataflow::EYE;
  if (lower == "shi") return Dataflow::SHI;
  throw std::invalid_argument("unknown dataflow '" + std::string(name) +
                              "' (expected dla, eye or shi)");
}

LayerKind parse_layer_kind(std::string_view name) {
  if (name == "CONV") return LayerKind::CONV;
  if (name == "DWCONV") return LayerKind::DWCONV;
  if (name == "GEMM") return LayerKind::GEMM;
  throw std::invalid_argument("unknown layer kind '" + std::string(name) + "'");
}

void validate(const LayerShape& layer) {
  require_positive(layer.K, "K");
  require_positive(layer.C, "C");
  require_positive(layer.Y, "Y");
  require_positive(layer.X, "X");
  require_positive(layer.R, "R");
  require_positive(layer.S, "S");
  require_positive(layer.stride, "stride");
  if (layer.R > layer.Y) throw std::invalid_argument("R must be <= Y");
  if (layer.S > layer.X) throw std::invalid_argument("S must be <= X");
  if (layer.kind == LayerKind::DWCONV && layer.K != layer.C)
    throw std::invalid_argument("K must equal C for DWCONV");
}

void HwConstants::validate() const {
  const std::pair<double, const char*> fields[] = {
      {bandwidth, "bandwidth"}, {e_mac, "e_mac"},   {e_l1, "e_l1"},
      {e_l2, "e_l2"},           {e_dram, "e_dram"}, {e_leak, "e_leak"},
      {a_pe, "a_pe"},           {a_buf, "a_buf"},   {a_l2, "a_l2"},
  };
  for (const auto& [value, name] : fields) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument(std::string(name) + " must be a positive finite number");
  }
}

std::pair<std::int64_t, std::int64_t> output_dims(const LayerShape& layer) {
  if (layer.R > layer.Y) throw std::invalid_argument("R must be <= Y");
  if (layer.S > layer.X) throw std::invalid_argument("S must be <= X");
  require_positive(layer.stride, "stride");
  return {(layer.Y - layer.R) / layer.stride + 1, (layer.X - layer.S) / layer.stride + 1};
}

std::int64_t macs(const LayerShape& layer) {
  validate(layer);
  const auto [yp, xp] = output_dims(layer);
  const std::int64_t per_channel = yp * xp * layer.R * layer.S;
  return layer.kind == LayerKind::DWCONV ? layer.C * per_channel
                                         : layer.K * layer.C * per_channel;
}

std::int64_t buffer_elements(Dataflow /*df*/, std::int64_t k, const LayerShape& layer) {
  require_positive(k, "tile value k");
  const std::int64_t window = layer.R * layer.S;
  return window * k + window + k;
}

std::pair<std::int64_t, std::int64_t> parallel_dims(Dataflow df, const LayerShape& layer) {
  const auto [yp, xp] = output_dims(layer);
  switch (df) {
    case Dataflow::DLA:
      if (layer.kind == LayerKind::DWCONV) return {layer.C, 1};
      return {layer.K, layer.C};
    case Dataflow::EYE:
      return {yp, layer.R};
    case Dataflow::SHI:
      return {yp, xp};
  }
  throw std::logic_error("unhandled dataflow");
}

std::int64_t spatial_lanes(Dataflow df, std::int64_t pe, const LayerShape& layer) {
  require_positive(pe, "PE count");
  const auto [d1, d2] = parallel_dims(df, layer);
  return std::min(pe, d1 * d2);
}

std::int64_t refetch_factor(Dataflow df, std::int64_t pe, std::int64_t k,
                            const LayerShape& layer) {
  require_positive(pe, "PE count");
  require_positive(k, "tile value k");
  const std::int64_t extent = temporal_extent(df, layer);
  return ceil_div(extent, k * std::min(pe, extent));
}

std::int64_t dram_traffic(Dataflow df, std::int64_t pe, std::int64_t k,
                          const LayerShape& layer) {
  const Footprint fp = footprint(layer);
  const std::int64_t base = fp.weights + fp.inputs + fp.outputs;
  const std::int64_t passes = refetch_factor(df, pe, k, layer);
  const std::int64_t refetched = df == Dataflow::DLA ? fp.inputs : fp.weights;
  return base + (passes - 1) * refetched;
}

double latency(Dataflow df, std::int64_t pe, std::int64_t k, const LayerShape& layer,
               const HwConstants& hw) {
  check_inputs(pe, k, layer);
  const auto compute = ceil_div(macs(layer), spatial_lanes(df, pe, layer));
  const double memory =
      std::ceil(static_cast<double>(dram_traffic(df, pe, k, layer)) / hw.bandwidth);
  return std::max(static_cast<double>(compute), memory);
}

double energy(Dataflow df, std::int64_t pe, std::int64_t k, const LayerShape& layer,
              const HwConstants& hw) {
  check_inputs(pe, k, layer);
  const auto ops = static_cast<double>(macs(layer));
  const auto traffic = static_cast<double>(dram_traffic(df, pe, k, layer));
  const double cycles = latency(df, pe, k, layer, hw);
  return hw.e_mac * ops + hw.e_l1 * 3.0 * ops + hw.e_l2 * 2.0 * traffic +
         hw.e_dram * traffic + hw.e_leak * static_cast<double>(pe) * cycles;
}

double area(Dataflow df, std::int64_t pe, std::int64_t k, const LayerShape& layer,
            const HwConstants& hw) {
  check_inputs(pe, k, layer);
  const auto p = static_cast<double>(pe);
  const auto l1 = static_cast<double>(buffer_elements(df, k, layer));
  const double l2 = 2.0 * p * l1;
  return p * hw.a_pe + p * l1 * hw.a_buf + l2 * hw.a_l2;
}

HwMetrics evaluate(Dataflow df, std::int64_t pe, std::int64_t k, const LayerShape& layer,
                   const HwConstants& hw) {
  check_inputs(pe, k, layer);
  HwMetrics m;
  m.latency = latency(df, pe, k, layer, hw);
  m.energy = energy(df, pe, k, layer, hw);
  m.area = area(df, pe, k, layer, hw);
  m.power = m.energy / m.latency;
  return m;
}

}  // namespace accel_alloc
