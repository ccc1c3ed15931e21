#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "accel_alloc/cost_model.hpp"
#include "accel_alloc/rng.hpp"
#include "accel_alloc/workloads.hpp"

namespace accel_alloc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Coarse action values. Index i of each list is "level i".
struct ActionLevels {
  std::vector<std::int64_t> pe_values;
  std::vector<std::int64_t> buf_values;

  int size() const { return static_cast<int>(pe_values.size()); }
  std::int64_t max_pe() const { return pe_values.back(); }
  std::int64_t max_buf() const { return buf_values.back(); }

  /// Both lists non-empty, same length, strictly increasing, all >= 1.
  void validate() const;

  /// Evenly spaced subset of `count` levels that keeps the first and last.
  ActionLevels subsample(int count) const;

  friend bool operator==(const ActionLevels&, const ActionLevels&) = default;
};

/// PE 1..64 with dense low-end spacing; tile k = 1..12.
ActionLevels default_levels();

/// One layer's coarse assignment.
struct Gene {
  int pe_level = 0;
  int buf_level = 0;
  Dataflow dataflow = Dataflow::DLA;

  friend bool operator==(const Gene&, const Gene&) = default;
};
using Genome = std::vector<Gene>;

/// One layer's assignment in value space.
struct DesignPoint {
  std::int64_t pe = 1;
  std::int64_t k = 1;
  Dataflow dataflow = Dataflow::DLA;

  friend bool operator==(const DesignPoint&, const DesignPoint&) = default;
};
using Design = std::vector<DesignPoint>;

Design decode(const Genome& genome, const ActionLevels& levels);

enum class ConstraintKind { Area, Power, Counts };

/// LS: one engine shared by all layers. LP: dedicated resources per layer.
enum class Deployment { LS, LP };

std::string_view to_string(Deployment deployment);
Deployment parse_deployment(std::string_view name);

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::Area;
  double area_limit = kInf;
  double power_limit = kInf;
  double pe_limit = kInf;
  double buf_limit = kInf;
  Deployment deployment = Deployment::LP;

  static ConstraintSpec unconstrained(Deployment d = Deployment::LP);
  static ConstraintSpec area(double limit, Deployment d = Deployment::LP);
  static ConstraintSpec power(double limit, Deployment d = Deployment::LP);
  static ConstraintSpec counts(double pe_total, double buffer_total,
                               Deployment d = Deployment::LP);

  bool is_unconstrained() const;
  void validate() const;
  /// "area:60000", "power:500", "counts:256:1024" or "unconstrained".
  std::string describe() const;
};

/// Resources used. `amount` is area, power or PE count depending on the
/// constraint kind; `buffers` is the total L1 element count (COUNTS only).
struct Consumption {
  double amount = 0.0;
  double buffers = 0.0;
};

/// Remaining budget (limit minus consumption) per tracked resource.
struct BudgetLeft {
  double amount = kInf;
  double buffers = kInf;
  bool ok() const { return amount >= 0.0 && buffers >= 0.0; }
};

BudgetLeft budget_left(const ConstraintSpec& constraint, const Consumption& consumed);

/// What one layer adds to the running consumption under LP.
Consumption layer_consumption(const ConstraintSpec& constraint, const DesignPoint& point,
                              const LayerShape& layer, const HwMetrics& metrics);

enum class Metric { Latency, Energy };
enum class Aggregation { Sum, Max };

struct Objective {
  Metric metric = Metric::Latency;
  Aggregation aggregation = Aggregation::Sum;
};

std::string_view to_string(Metric metric);
std::string_view to_string(Aggregation aggregation);
Metric parse_metric(std::string_view name);
Aggregation parse_aggregation(std::string_view name);

double metric_value(const HwMetrics& m, Metric metric);

struct GenomeCost {
  double value = 0.0;
  Consumption consumption;
  bool feasible = false;
  std::vector<HwMetrics> layers;
};

/// Model-level cost of a value-space design. Under LS the design must use
/// the same point for every layer; the engine is sized for the most demanding
/// layer, so consumption is the per-layer maximum.
GenomeCost design_cost(const Design& design, const ModelDesc& model,
                       const ConstraintSpec& constraint, const Objective& objective,
                       const HwConstants& hw);

GenomeCost genome_cost(const Genome& genome, const ModelDesc& model, const ActionLevels& levels,
                       const ConstraintSpec& constraint, const Objective& objective,
                       const HwConstants& hw);

struct TracePoint {
  std::int64_t epoch = 0;
  double best_value = kInf;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct SearchResult {
  std::string method;
  std::optional<Genome> best_genome;  // coarse levels, when the searcher works on levels
  std::optional<Design> best_design;  // present iff feasible
  double best_value = kInf;
  bool feasible = false;
  std::vector<TracePoint> trace;
  std::int64_t evaluations = 0;
  std::optional<TracePoint> first_feasible;
};

/// Everything a searcher needs, plus the slot view of the genome: LP has one
/// slot per layer, LS a single slot replicated across all layers.
class SearchProblem {
 public:
  /// `dataflow` empty means MIX: the dataflow is a per-slot decision.
  SearchProblem(ModelDesc model, ActionLevels levels, std::optional<Dataflow> dataflow,
                ConstraintSpec constraint, Objective objective, HwConstants hw = {});

  const ModelDesc& model() const { return model_; }
  const ActionLevels& levels() const { return levels_; }
  const ConstraintSpec& constraint() const { return constraint_; }
  const Objective& objective() const { return objective_; }
  const HwConstants& hw() const { return hw_; }
  std::optional<Dataflow> fixed_dataflow() const { return dataflow_; }

  bool mix() const { return !dataflow_.has_value(); }
  std::size_t slots() const;
  int level_count() const { return levels_.size(); }
  int dataflow_count() const { return mix() ? kNumDataflows : 1; }
  Dataflow dataflow_at(int index) const;
  int dataflow_index(Dataflow df) const;

  /// Number of distinct slot genomes.
  double space_size() const;

  Genome expand(const Genome& slot_genome) const;
  Design expand(const Design& slot_design) const;

  /// Cost of a slot genome (expanded to all layers).
  GenomeCost cost(const Genome& slot_genome) const;
  GenomeCost cost(const Design& slot_design) const;

  Genome random_genome(Rng& rng) const;

 private:
  ModelDesc model_;
  ActionLevels levels_;
  std::optional<Dataflow> dataflow_;
  ConstraintSpec constraint_;
  Objective objective_;
  HwConstants hw_;
};

/// Best-feasible bookkeeping shared by the searchers. Only strict
/// improvements replace the incumbent.
class Incumbent {
 public:
  explicit Incumbent(const SearchProblem& problem) : problem_(&problem) {}

  bool offer(const Genome& slot_genome, const GenomeCost& cost, std::int64_t epoch);
  bool offer(const Design& slot_design, const GenomeCost& cost, std::int64_t epoch);

  double best_value() const { return best_value_; }
  bool found() const { return best_design_.has_value(); }

  SearchResult finish(std::string method, std::vector<TracePoint> trace,
                      std::int64_t evaluations) const;

 private:
  bool accept(const GenomeCost& cost, std::int64_t epoch);

  const SearchProblem* problem_;
  double best_value_ = kInf;
  std::optional<Genome> best_genome_;
  std::optional<Design> best_design_;
  std::optional<TracePoint> first_feasible_;
};

inline constexpr double kOracleSpaceLimit = 1e6;

/// Exact optimum by enumeration in lexicographic slot-genome order (pe level,
/// buffer level, dataflow per slot). Ties keep the lexicographically smallest
/// genome. Refuses spaces larger than kOracleSpaceLimit.
SearchResult exhaustive_oracle(const SearchProblem& problem);

}  // namespace accel_alloc
