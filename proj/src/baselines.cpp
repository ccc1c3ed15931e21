#include "accel_alloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "accel_alloc/rng.hpp"

namespace accel_alloc {

namespace {

// Flat gene view of a slot genome: (pe, buf) per slot, plus dataflow in MIX.
int genes_per_slot(const SearchProblem& problem) { return problem.mix() ? 3 : 2; }

std::vector<int> gene_radix(const SearchProblem& problem) {
  std::vector<int> radix;
  for (std::size_t s = 0; s < problem.slots(); ++s) {
    radix.push_back(problem.level_count());
    radix.push_back(problem.level_count());
    if (problem.mix()) radix.push_back(kNumDataflows);
  }
  return radix;
}

std::vector<int> flatten(const SearchProblem& problem, const Genome& genome) {
  std::vector<int> genes;
  for (const auto& g : genome) {
    genes.push_back(g.pe_level);
    genes.push_back(g.buf_level);
    if (problem.mix()) genes.push_back(static_cast<int>(g.dataflow));
  }
  return genes;
}

Genome unflatten(const SearchProblem& problem, const std::vector<int>& genes) {
  const int width = genes_per_slot(problem);
  Genome genome(problem.slots());
  for (std::size_t s = 0; s < genome.size(); ++s) {
    const std::size_t at = s * width;
    genome[s] = Gene{genes[at], genes[at + 1],
                     problem.dataflow_at(problem.mix() ? genes[at + 2] : 0)};
  }
  return genome;
}

double fitness(const GenomeCost& cost) { return cost.feasible ? cost.value : kInf; }

// Counts evaluations and feeds the incumbent.
class Evaluator {
 public:
  Evaluator(const SearchProblem& problem, std::int64_t budget)
      : problem_(problem), incumbent_(problem), budget_(budget) {}

  bool exhausted() const { return evaluations_ >= budget_; }
  std::int64_t evaluations() const { return evaluations_; }
  Incumbent& incumbent() { return incumbent_; }

  GenomeCost operator()(const Genome& genome) {
    const GenomeCost cost = problem_.cost(genome);
    ++evaluations_;
    incumbent_.offer(genome, cost, evaluations_);
    return cost;
  }

 private:
  const SearchProblem& problem_;
  Incumbent incumbent_;
  std::int64_t budget_;
  std::int64_t evaluations_ = 0;
};

}  // namespace

void BaselineConfig::validate() const {
  if (eps < 1) throw std::invalid_argument("eps must be >= 1");
  if (grid_stride < 1) throw std::invalid_argument("grid stride must be >= 1");
  if (!(sa_initial_temperature > 0.0) || !(sa_final_temperature > 0.0))
    throw std::invalid_argument("SA temperatures must be > 0");
  if (sa_restart_after < 1) throw std::invalid_argument("SA restart window must be >= 1");
  if (ga_population < 1) throw std::invalid_argument("GA population must be >= 1");
  if (ga_mutation < 0.0 || ga_mutation > 1.0 || ga_crossover < 0.0 || ga_crossover > 1.0)
    throw std::invalid_argument("GA rates must be in [0, 1]");
}

SearchResult grid_search(const SearchProblem& problem, const BaselineConfig& cfg) {
  cfg.validate();
  const std::vector<int> radix = gene_radix(problem);
  // Allowed values per gene; dataflow genes are never strided.
  std::vector<std::vector<int>> values(radix.size());
  const int width = genes_per_slot(problem);
  for (std::size_t i = 0; i < radix.size(); ++i) {
    const bool dataflow_gene = problem.mix() && static_cast<int>(i % width) == 2;
    const int stride = dataflow_gene ? 1 : cfg.grid_stride;
    for (int v = 0; v < radix[i]; v += stride) values[i].push_back(v);
  }

  Evaluator eval(problem, cfg.eps);
  std::vector<TracePoint> trace;
  std::vector<std::size_t> digits(radix.size(), 0);
  std::vector<int> genes(radix.size());
  bool done = false;
  while (!done && !eval.exhausted()) {
    for (std::size_t i = 0; i < genes.size(); ++i) genes[i] = values[i][digits[i]];
    eval(unflatten(problem, genes));
    trace.push_back({eval.evaluations(), eval.incumbent().best_value()});

    done = true;
    for (std::size_t pos = digits.size(); pos-- > 0;) {
      if (++digits[pos] < values[pos].size()) {
        done = false;
        break;
      }
      digits[pos] = 0;
    }
  }
  return eval.incumbent().finish("grid", std::move(trace), eval.evaluations());
}

SearchResult random_search(const SearchProblem& problem, const BaselineConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Evaluator eval(problem, cfg.eps);
  std::vector<TracePoint> trace;
  while (!eval.exhausted()) {
    eval(problem.random_genome(rng));
    trace.push_back({eval.evaluations(), eval.incumbent().best_value()});
  }
  return eval.incumbent().finish("random", std::move(trace), eval.evaluations());
}

double sa_acceptance(double delta, double temperature) {
  if (delta <= 0.0) return 1.0;
  return std::exp(-delta / temperature);
}

double sa_temperature(std::int64_t step, std::int64_t steps, double t0, double t_end) {
  if (steps <= 1) return t0;
  const double fraction = double(step) / double(steps - 1);
  return t0 * std::pow(t_end / t0, fraction);
}

SearchResult simulated_annealing(const SearchProblem& problem, const BaselineConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Evaluator eval(problem, cfg.eps);
  std::vector<TracePoint> trace;
  const std::vector<int> radix = gene_radix(problem);

  Genome current = problem.random_genome(rng);
  double current_score = fitness(eval(current));
  trace.push_back({eval.evaluations(), eval.incumbent().best_value()});
  int infeasible_streak = std::isinf(current_score) ? 1 : 0;

  while (!eval.exhausted()) {
    if (std::isinf(current_score) && infeasible_streak >= cfg.sa_restart_after) {
      current = problem.random_genome(rng);
      current_score = fitness(eval(current));
      trace.push_back({eval.evaluations(), eval.incumbent().best_value()});
      infeasible_streak = std::isinf(current_score) ? 1 : 0;
      continue;
    }
    const double temperature = sa_temperature(eval.evaluations(), cfg.eps,
                                              cfg.sa_initial_temperature, cfg.sa_final_temperature);

    std::vector<int> genes = flatten(problem, current);
    const auto gene = static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(genes.size()) - 1));
    if (radix[gene] > 1) {
      int move = rng.bernoulli(0.5) ? 1 : -1;
      if (genes[gene] + move < 0 || genes[gene] + move >= radix[gene]) move = -move;
      genes[gene] += move;
    }
    Genome candidate = unflatten(problem, genes);
    const double candidate_score = fitness(eval(candidate));
    trace.push_back({eval.evaluations(), eval.incumbent().best_value()});

    bool accept = false;
    if (std::isinf(current_score)) {
      accept = true;
    } else if (!std::isinf(candidate_score)) {
      const double p = sa_acceptance(candidate_score - current_score, temperature);
      accept = p >= 1.0 || rng.uniform() < p;
    }
    if (accept) {
      current = std::move(candidate);
      current_score = candidate_score;
    }
    infeasible_streak = std::isinf(current_score) ? infeasible_streak + 1 : 0;
  }
  return eval.incumbent().finish("sa", std::move(trace), eval.evaluations());
}

std::int64_t ga_generations(std::int64_t eps, int population) {
  return (eps + population - 1) / population;
}

SearchResult genetic_global(const SearchProblem& problem, const BaselineConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Evaluator eval(problem, cfg.eps);
  std::vector<TracePoint> trace;
  const std::vector<int> radix = gene_radix(problem);
  const std::int64_t generations = ga_generations(cfg.eps, cfg.ga_population);

  std::vector<std::vector<int>> population;
  std::vector<double> scores;
  for (int i = 0; i < cfg.ga_population && !eval.exhausted(); ++i) {
    const Genome g = problem.random_genome(rng);
    scores.push_back(fitness(eval(g)));
    population.push_back(flatten(problem, g));
  }
  trace.push_back({eval.evaluations(), eval.incumbent().best_value()});

  auto tournament = [&]() -> const std::vector<int>& {
    const auto n = static_cast<std::int64_t>(population.size());
    const auto a = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    const auto b = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    if (scores[b] < scores[a] || (scores[b] == scores[a] && b < a)) return population[b];
    return population[a];
  };

  for (std::int64_t gen = 2; gen <= generations && !eval.exhausted(); ++gen) {
    const auto elite = static_cast<std::size_t>(
        std::min_element(scores.begin(), scores.end()) - scores.begin());
    std::vector<std::vector<int>> next{population[elite]};
    std::vector<double> next_scores{fitness(eval(unflatten(problem, population[elite])))};

    while (next.size() < static_cast<std::size_t>(cfg.ga_population) && !eval.exhausted()) {
      const std::vector<int>& mother = tournament();
      const std::vector<int>& father = tournament();
      std::vector<int> child = mother;
      if (child.size() >= 2 && rng.bernoulli(cfg.ga_crossover)) {
        const auto cut = static_cast<std::size_t>(rng.uniform_int(1, std::int64_t(child.size()) - 1));
        std::copy(father.begin() + static_cast<std::ptrdiff_t>(cut), father.end(),
                  child.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (std::size_t i = 0; i < child.size(); ++i) {
        if (rng.bernoulli(cfg.ga_mutation)) child[i] = static_cast<int>(rng.uniform_int(0, radix[i] - 1));
      }
      next_scores.push_back(fitness(eval(unflatten(problem, child))));
      next.push_back(std::move(child));
    }
    population = std::move(next);
    scores = std::move(next_scores);
    trace.push_back({eval.evaluations(), eval.incumbent().best_value()});
  }
  return eval.incumbent().finish("ga", std::move(trace), eval.evaluations());
}

}  // namespace accel_alloc
