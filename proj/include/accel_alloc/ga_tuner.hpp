#pragma once

#include <cstdint>
#include <vector>

#include "accel_alloc/rng.hpp"
#include "accel_alloc/search_space.hpp"

namespace accel_alloc {

/// Value-space genome: per-layer (pe, k) with the dataflow fixed by stage 1.
using FineGenome = Design;

/// Inclusive upper bounds of the fine space; the lower bound is 1.
struct FineBounds {
  std::int64_t max_pe = 64;
  std::int64_t max_k = 12;
};

FineBounds fine_bounds(const ActionLevels& levels);

/// `size` copies of the seed. Throws std::invalid_argument when the seed is
/// infeasible for `problem` (stage 2 needs a feasible start).
std::vector<FineGenome> init_population(const SearchProblem& problem, const FineGenome& seed,
                                        int size = 20);

/// Each PE and k gene moves with probability `rate` to a uniform draw from
/// [v - step, v + step] without v, clamped to the bounds.
FineGenome local_mutate(FineGenome genome, const FineBounds& bounds, double rate, int step,
                        Rng& rng);

/// With probability `rate`, swaps the (pe, k) pairs of two distinct layers
/// of the same genome.
FineGenome local_crossover(FineGenome genome, double rate, Rng& rng);

struct GaTunerConfig {
  int population = 20;
  std::int64_t generations = 2000;
  double crossover = 0.2;
  double mutation = 0.05;
  int step = 4;
  std::uint64_t seed = 0;
};

/// Stage-2 local fine-tuning from a feasible seed design (one entry per
/// layer). Each generation clones the current population, applies local
/// crossover then local mutation to the clones, and keeps the best half of
/// parents plus children; infeasible genomes cost +inf. The best genome is
/// never modified, so the result is never worse than the seed.
SearchResult evolve(const SearchProblem& problem, const FineGenome& seed,
                    const GaTunerConfig& cfg);

}  // namespace accel_alloc
