#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace accel_alloc {

/// Dataflow style of the spatial accelerator.
///   DLA: output/input channels (K, C) in parallel, K tiled temporally.
///   EYE: output rows and filter rows (Y', R) in parallel, Y' tiled.
///   SHI: output rows and columns (Y', X') in parallel, Y'X' tiled.
enum class Dataflow { DLA = 0, EYE = 1, SHI = 2 };

inline constexpr int kNumDataflows = 3;

enum class LayerKind { CONV, DWCONV, GEMM };

std::string_view to_string(Dataflow df);
std::string_view to_string(LayerKind kind);
Dataflow parse_dataflow(std::string_view name);
LayerKind parse_layer_kind(std::string_view name);

/// One DNN layer. Y and X are the (already padded) input spatial sizes.
struct LayerShape {
  LayerKind kind = LayerKind::CONV;
  std::int64_t K = 1;
  std::int64_t C = 1;
  std::int64_t Y = 1;
  std::int64_t X = 1;
  std::int64_t R = 1;
  std::int64_t S = 1;
  std::int64_t stride = 1;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const LayerShape& layer);

/// Analytical model constants. Units are abstract; defaults are not meant to
/// be physically calibrated.
struct HwConstants {
  double bandwidth = 16.0;  // elements per cycle
  double e_mac = 1.0;
  double e_l1 = 1.0;
  double e_l2 = 6.0;
  double e_dram = 200.0;
  double e_leak = 0.01;  // per PE per cycle
  double a_pe = 100.0;
  double a_buf = 1.0;
  double a_l2 = 0.5;

  void validate() const;
  friend bool operator==(const HwConstants&, const HwConstants&) = default;
};

struct HwMetrics {
  double latency = 0.0;  // cycles
  double energy = 0.0;
  double area = 0.0;
  double power = 0.0;  // energy per cycle
};

std::pair<std::int64_t, std::int64_t> output_dims(const LayerShape& layer);
std::int64_t macs(const LayerShape& layer);

/// Per-PE L1 elements: k weight tiles, one input patch and k outputs.
std::int64_t buffer_elements(Dataflow df, std::int64_t k, const LayerShape& layer);

/// Extents of the two spatially mapped dimensions for a style.
std::pair<std::int64_t, std::int64_t> parallel_dims(Dataflow df, const LayerShape& layer);
std::int64_t spatial_lanes(Dataflow df, std::int64_t pe, const LayerShape& layer);

/// Number of passes over the temporally tiled dimension.
std::int64_t refetch_factor(Dataflow df, std::int64_t pe, std::int64_t k,
                            const LayerShape& layer);
std::int64_t dram_traffic(Dataflow df, std::int64_t pe, std::int64_t k,
                          const LayerShape& layer);

double latency(Dataflow df, std::int64_t pe, std::int64_t k, const LayerShape& layer,
               const HwConstants& hw);
double energy(Dataflow df, std::int64_t pe, std::int64_t k, const LayerShape& layer,
              const HwConstants& hw);
double area(Dataflow df, std::int64_t pe, std::int64_t k, const LayerShape& layer,
            const HwConstants& hw);

/// Full metric bundle; pure. Throws std::invalid_argument on a bad layer or
/// on pe < 1 / k < 1.
HwMetrics evaluate(Dataflow df, std::int64_t pe, std::int64_t k, const LayerShape& layer,
                   const HwConstants& hw);

}  // namespace accel_alloc
