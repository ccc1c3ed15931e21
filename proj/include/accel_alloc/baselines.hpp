#pragma once

#include <cstdint>

#include "accel_alloc/search_space.hpp"

namespace accel_alloc {

/// Shared settings for the reference optimizers. `eps` is the exact number
/// of genome evaluations each method may spend.
struct BaselineConfig {
  std::int64_t eps = 5000;
  int grid_stride = 1;
  double sa_initial_temperature = 10.0;
  double sa_final_temperature = 0.1;
  int sa_restart_after = 100;
  int ga_population = 100;
  double ga_mutation = 0.05;
  double ga_crossover = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Level indices {0, s, 2s, ...} per PE/buffer gene (all dataflows in MIX),
/// enumerated lexicographically until the space or the budget runs out.
SearchResult grid_search(const SearchProblem& problem, const BaselineConfig& cfg);

SearchResult random_search(const SearchProblem& problem, const BaselineConfig& cfg);

/// Metropolis acceptance: 1 for delta <= 0, else exp(-delta / T).
double sa_acceptance(double delta, double temperature);

/// Temperature at step i of n, decaying exponentially from t0 to t_end.
double sa_temperature(std::int64_t step, std::int64_t steps, double t0, double t_end);

/// One gene moves by +-1 level per step. Moving between infeasible states is
/// always accepted; moving from feasible to infeasible never is. A walk that
/// stays infeasible for `sa_restart_after` steps restarts at a random genome.
SearchResult simulated_annealing(const SearchProblem& problem, const BaselineConfig& cfg);

/// Generational GA: random initial population, elitism of one, binary
/// tournament selection, single-point crossover, per-gene reset mutation.
/// Runs ceil(eps / population) generations, the first being the initial
/// population.
SearchResult genetic_global(const SearchProblem& problem, const BaselineConfig& cfg);

std::int64_t ga_generations(std::int64_t eps, int population);

}  // namespace accel_alloc
