#include "accel_alloc/ga_tuner.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace accel_alloc {

namespace {

std::int64_t mutate_value(std::int64_t value, std::int64_t upper, int step, Rng& rng) {
  std::int64_t offset = rng.uniform_int(-step, step - 1);
  if (offset >= 0) ++offset;  // skip zero
  return std::clamp<std::int64_t>(value + offset, 1, upper);
}

// Slot view of a full design: LS keeps the single shared point.
FineGenome to_slots(const SearchProblem& problem, const FineGenome& design) {
  if (design.size() != problem.model().layers.size())
    throw std::invalid_argument("seed length " + std::to_string(design.size()) +
                                " does not match model layer count " +
                                std::to_string(problem.model().layers.size()));
  if (problem.slots() == design.size()) return design;
  for (const auto& p : design)
    if (!(p == design.front()))
      throw std::invalid_argument("LS seed must use one shared design point");
  return FineGenome{design.front()};
}

double fitness(const GenomeCost& cost) { return cost.feasible ? cost.value : kInf; }

}  // namespace

FineBounds fine_bounds(const ActionLevels& levels) { return {levels.max_pe(), levels.max_buf()}; }

std::vector<FineGenome> init_population(const SearchProblem& problem, const FineGenome& seed,
                                        int size) {
  if (size < 1) throw std::invalid_argument("population size must be >= 1");
  if (!problem.cost(to_slots(problem, seed)).feasible)
    throw std::invalid_argument("stage-2 seed violates the constraint");
  return std::vector<FineGenome>(static_cast<std::size_t>(size), seed);
}

FineGenome local_mutate(FineGenome genome, const FineBounds& bounds, double rate, int step,
                        Rng& rng) {
  if (step < 1) throw std::invalid_argument("mutation step must be >= 1");
  for (auto& point : genome) {
    if (rng.bernoulli(rate)) point.pe = mutate_value(point.pe, bounds.max_pe, step, rng);
    if (rng.bernoulli(rate)) point.k = mutate_value(point.k, bounds.max_k, step, rng);
  }
  return genome;
}

FineGenome local_crossover(FineGenome genome, double rate, Rng& rng) {
  const auto n = static_cast<std::int64_t>(genome.size());
  if (n < 2 || !rng.bernoulli(rate)) return genome;
  const auto a = rng.uniform_int(0, n - 1);
  auto b = rng.uniform_int(0, n - 2);
  if (b >= a) ++b;
  std::swap(genome[a].pe, genome[b].pe);
  std::swap(genome[a].k, genome[b].k);
  return genome;
}

SearchResult evolve(const SearchProblem& problem, const FineGenome& seed,
                    const GaTunerConfig& cfg) {
  if (cfg.generations < 0) throw std::invalid_argument("generations must be >= 0");
  const FineBounds bounds = fine_bounds(problem.levels());
  std::vector<FineGenome> population = init_population(problem, seed, cfg.population);
  for (auto& g : population) g = to_slots(problem, g);

  Rng rng(cfg.seed);
  Incumbent incumbent(problem);
  std::int64_t evaluations = 0;
  std::vector<double> scores;
  for (const auto& g : population) {
    const GenomeCost cost = problem.cost(g);
    ++evaluations;
    incumbent.offer(g, cost, 0);
    scores.push_back(fitness(cost));
  }

  std::vector<TracePoint> trace;
  trace.reserve(static_cast<std::size_t>(cfg.generations));
  const std::size_t size = population.size();
  for (std::int64_t gen = 1; gen <= cfg.generations; ++gen) {
    // Parents first so that stable ordering favors them on ties.
    std::vector<FineGenome> pool = population;
    std::vector<double> pool_scores = scores;
    for (std::size_t i = 0; i < size; ++i) {
      FineGenome child = local_crossover(population[i], cfg.crossover, rng);
      child = local_mutate(std::move(child), bounds, cfg.mutation, cfg.step, rng);
      const GenomeCost cost = problem.cost(child);
      ++evaluations;
      incumbent.offer(child, cost, gen);
      pool.push_back(std::move(child));
      pool_scores.push_back(fitness(cost));
    }

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pool_scores[a] < pool_scores[b]; });
    for (std::size_t i = 0; i < size; ++i) {
      population[i] = pool[order[i]];
      scores[i] = pool_scores[order[i]];
    }
    trace.push_back({gen, incumbent.best_value()});
  }
  return incumbent.finish("ga_tuner", std::move(trace), evaluations);
}

}  // namespace accel_alloc
