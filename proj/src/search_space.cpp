#include "accel_alloc/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace accel_alloc {

void ActionLevels::validate() const {
  if (pe_values.empty() || buf_values.empty())
    throw std::invalid_argument("action levels must not be empty");
  if (pe_values.size() != buf_values.size())
    throw std::invalid_argument("pe_values and buf_values must have the same length");
  for (const auto* values : {&pe_values, &buf_values}) {
    for (std::size_t i = 0; i < values->size(); ++i) {
      if ((*values)[i] < 1) throw std::invalid_argument("action level values must be >= 1");
      if (i > 0 && (*values)[i] <= (*values)[i - 1])
        throw std::invalid_argument("action level values must be strictly increasing");
    }
  }
}

ActionLevels ActionLevels::subsample(int count) const {
  validate();
  const int n = size();
  if (count < 1 || count > n)
    throw std::invalid_argument("level count must be in [1, " + std::to_string(n) + "]");
  ActionLevels out;
  for (int i = 0; i < count; ++i) {
    const auto index =
        count == 1 ? 0 : static_cast<std::size_t>(std::lround(double(i) * (n - 1) / (count - 1)));
    out.pe_values.push_back(pe_values[index]);
    out.buf_values.push_back(buf_values[index]);
  }
  return out;
}

ActionLevels default_levels() {
  return ActionLevels{{1, 2, 4, 8, 12, 16, 24, 32, 40, 48, 56, 64},
                      {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}};
}

Design decode(const Genome& genome, const ActionLevels& levels) {
  Design design;
  design.reserve(genome.size());
  for (const auto& g : genome) {
    if (g.pe_level < 0 || g.pe_level >= levels.size() || g.buf_level < 0 ||
        g.buf_level >= levels.size())
      throw std::invalid_argument("genome level index out of range");
    design.push_back({levels.pe_values[g.pe_level], levels.buf_values[g.buf_level], g.dataflow});
  }
  return design;
}

std::string_view to_string(Deployment deployment) {
  return deployment == Deployment::LS ? "ls" : "lp";
}

Deployment parse_deployment(std::string_view name) {
  if (name == "ls" || name == "LS") return Deployment::LS;
  if (name == "lp" || name == "LP") return Deployment::LP;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "' (expected ls or lp)");
}

ConstraintSpec ConstraintSpec::unconstrained(Deployment d) {
  ConstraintSpec c;
  c.deployment = d;
  return c;
}

ConstraintSpec ConstraintSpec::area(double limit, Deployment d) {
  ConstraintSpec c;
  c.kind = ConstraintKind::Area;
  c.area_limit = limit;
  c.deployment = d;
  c.validate();
  return c;
}

ConstraintSpec ConstraintSpec::power(double limit, Deployment d) {
  ConstraintSpec c;
  c.kind = ConstraintKind::Power;
  c.power_limit = limit;
  c.deployment = d;
  c.validate();
  return c;
}

ConstraintSpec ConstraintSpec::counts(double pe_total, double buffer_total, Deployment d) {
  ConstraintSpec c;
  c.kind = ConstraintKind::Counts;
  c.pe_limit = pe_total;
  c.buf_limit = buffer_total;
  c.deployment = d;
  c.validate();
  return c;
}

bool ConstraintSpec::is_unconstrained() const {
  switch (kind) {
    case ConstraintKind::Area:
      return std::isinf(area_limit);
    case ConstraintKind::Power:
      return std::isinf(power_limit);
    case ConstraintKind::Counts:
      return std::isinf(pe_limit) && std::isinf(buf_limit);
  }
  return false;
}

void ConstraintSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
  };
  switch (kind) {
    case ConstraintKind::Area:
      positive(area_limit, "area limit");
      break;
    case ConstraintKind::Power:
      positive(power_limit, "power limit");
      break;
    case ConstraintKind::Counts:
      positive(pe_limit, "PE limit");
      positive(buf_limit, "buffer limit");
      break;
  }
}

std::string ConstraintSpec::describe() const {
  if (is_unconstrained()) return "unconstrained";
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case ConstraintKind::Area:
      out << "area:" << area_limit;
      break;
    case ConstraintKind::Power:
      out << "power:" << power_limit;
      break;
    case ConstraintKind::Counts:
      out << "counts:" << pe_limit << ":" << buf_limit;
      break;
  }
  return out.str();
}

BudgetLeft budget_left(const ConstraintSpec& constraint, const Consumption& consumed) {
  switch (constraint.kind) {
    case ConstraintKind::Area:
      return {constraint.area_limit - consumed.amount, kInf};
    case ConstraintKind::Power:
      return {constraint.power_limit - consumed.amount, kInf};
    case ConstraintKind::Counts:
      return {constraint.pe_limit - consumed.amount, constraint.buf_limit - consumed.buffers};
  }
  return {};
}

Consumption layer_consumption(const ConstraintSpec& constraint, const DesignPoint& point,
                              const LayerShape& layer, const HwMetrics& metrics) {
  switch (constraint.kind) {
    case ConstraintKind::Area:
      return {metrics.area, 0.0};
    case ConstraintKind::Power:
      return {metrics.power, 0.0};
    case ConstraintKind::Counts:
      return {static_cast<double>(point.pe),
              static_cast<double>(point.pe * buffer_elements(point.dataflow, point.k, layer))};
  }
  return {};
}

std::string_view to_string(Metric metric) {
  return metric == Metric::Latency ? "latency" : "energy";
}

std::string_view to_string(Aggregation aggregation) {
  return aggregation == Aggregation::Sum ? "sum" : "max";
}

Metric parse_metric(std::string_view name) {
  if (name == "latency") return Metric::Latency;
  if (name == "energy") return Metric::Energy;
  throw std::invalid_argument("unknown objective '" + std::string(name) +
                              "' (expected latency or energy)");
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "sum") return Aggregation::Sum;
  if (name == "max") return Aggregation::Max;
  throw std::invalid_argument("unknown aggregation '" + std::string(name) +
                              "' (expected sum or max)");
}

double metric_value(const HwMetrics& m, Metric metric) {
  return metric == Metric::Latency ? m.latency : m.energy;
}

GenomeCost design_cost(const Design& design, const ModelDesc& model,
                       const ConstraintSpec& constraint, const Objective& objective,
                       const HwConstants& hw) {
  if (design.size() != model.layers.size())
    throw std::invalid_argument("genome length " + std::to_string(design.size()) +
                                " does not match model layer count " +
                                std::to_string(model.layers.size()));
  const bool shared = constraint.deployment == Deployment::LS;
  if (shared && std::any_of(design.begin(), design.end(),
                            [&](const DesignPoint& p) { return !(p == design.front()); }))
    throw std::invalid_argument("LS deployment requires one shared design point");

  GenomeCost out;
  out.layers.reserve(design.size());
  for (std::size_t i = 0; i < design.size(); ++i) {
    const auto& point = design[i];
    const auto& layer = model.layers[i];
    const HwMetrics m = evaluate(point.dataflow, point.pe, point.k, layer, hw);
    out.layers.push_back(m);

    const double v = metric_value(m, objective.metric);
    out.value = objective.aggregation == Aggregation::Sum ? out.value + v : std::max(out.value, v);

    const Consumption c = layer_consumption(constraint, point, layer, m);
    if (shared) {
      out.consumption.amount = std::max(out.consumption.amount, c.amount);
      out.consumption.buffers = std::max(out.consumption.buffers, c.buffers);
    } else {
      out.consumption.amount += c.amount;
      out.consumption.buffers += c.buffers;
    }
  }
  out.feasible = budget_left(constraint, out.consumption).ok();
  return out;
}

GenomeCost genome_cost(const Genome& genome, const ModelDesc& model, const ActionLevels& levels,
                       const ConstraintSpec& constraint, const Objective& objective,
                       const HwConstants& hw) {
  return design_cost(decode(genome, levels), model, constraint, objective, hw);
}

SearchProblem::SearchProblem(ModelDesc model, ActionLevels levels,
                             std::optional<Dataflow> dataflow, ConstraintSpec constraint,
                             Objective objective, HwConstants hw)
    : model_(std::move(model)),
      levels_(std::move(levels)),
      dataflow_(dataflow),
      constraint_(constraint),
      objective_(objective),
      hw_(hw) {
  if (model_.layers.empty()) throw std::invalid_argument("model must have at least one layer");
  for (const auto& layer : model_.layers) validate(layer);
  levels_.validate();
  constraint_.validate();
  hw_.validate();
}

std::size_t SearchProblem::slots() const {
  return constraint_.deployment == Deployment::LS ? 1 : model_.layers.size();
}

Dataflow SearchProblem::dataflow_at(int index) const {
  if (!mix()) return *dataflow_;
  return static_cast<Dataflow>(index);
}

int SearchProblem::dataflow_index(Dataflow df) const { return mix() ? static_cast<int>(df) : 0; }

double SearchProblem::space_size() const {
  const double per_slot = double(level_count()) * level_count() * dataflow_count();
  return std::pow(per_slot, double(slots()));
}

Genome SearchProblem::expand(const Genome& slot_genome) const {
  if (slot_genome.size() != slots())
    throw std::invalid_argument("genome length " + std::to_string(slot_genome.size()) +
                                " does not match slot count " + std::to_string(slots()));
  if (slots() == model_.layers.size()) return slot_genome;
  return Genome(model_.layers.size(), slot_genome.front());
}

Design SearchProblem::expand(const Design& slot_design) const {
  if (slot_design.size() != slots())
    throw std::invalid_argument("design length " + std::to_string(slot_design.size()) +
                                " does not match slot count " + std::to_string(slots()));
  if (slots() == model_.layers.size()) return slot_design;
  return Design(model_.layers.size(), slot_design.front());
}

GenomeCost SearchProblem::cost(const Genome& slot_genome) const {
  return genome_cost(expand(slot_genome), model_, levels_, constraint_, objective_, hw_);
}

GenomeCost SearchProblem::cost(const Design& slot_design) const {
  return design_cost(expand(slot_design), model_, constraint_, objective_, hw_);
}

Genome SearchProblem::random_genome(Rng& rng) const {
  Genome g(slots());
  for (auto& gene : g) {
    gene.pe_level = static_cast<int>(rng.uniform_int(0, level_count() - 1));
    gene.buf_level = static_cast<int>(rng.uniform_int(0, level_count() - 1));
    gene.dataflow = dataflow_at(static_cast<int>(rng.uniform_int(0, dataflow_count() - 1)));
  }
  return g;
}

bool Incumbent::accept(const GenomeCost& cost, std::int64_t epoch) {
  if (!cost.feasible) return false;
  if (!first_feasible_) first_feasible_ = TracePoint{epoch, cost.value};
  if (cost.value < best_value_) {
    best_value_ = cost.value;
    return true;
  }
  return false;
}

bool Incumbent::offer(const Genome& slot_genome, const GenomeCost& cost, std::int64_t epoch) {
  if (!accept(cost, epoch)) return false;
  best_genome_ = problem_->expand(slot_genome);
  best_design_ = decode(*best_genome_, problem_->levels());
  return true;
}

bool Incumbent::offer(const Design& slot_design, const GenomeCost& cost, std::int64_t epoch) {
  if (!accept(cost, epoch)) return false;
  best_genome_.reset();
  best_design_ = problem_->expand(slot_design);
  return true;
}

SearchResult Incumbent::finish(std::string method, std::vector<TracePoint> trace,
                               std::int64_t evaluations) const {
  SearchResult r;
  r.method = std::move(method);
  r.best_genome = best_genome_;
  r.best_design = best_design_;
  r.best_value = best_value_;
  r.feasible = best_design_.has_value();
  r.trace = std::move(trace);
  r.evaluations = evaluations;
  r.first_feasible = first_feasible_;
  return r;
}

SearchResult exhaustive_oracle(const SearchProblem& problem) {
  const double size = problem.space_size();
  if (size > kOracleSpaceLimit) {
    std::ostringstream msg;
    msg.precision(0);
    msg << std::fixed << "search space has " << size << " genomes; the oracle is limited to "
        << kOracleSpaceLimit;
    throw std::invalid_argument(msg.str());
  }
  // Mixed-radix counter over flattened genes, last gene fastest.
  const std::size_t slots = problem.slots();
  const int levels = problem.level_count();
  const int dataflows = problem.dataflow_count();
  std::vector<int> digits(slots * 3, 0);
  std::vector<int> radix;
  for (std::size_t s = 0; s < slots; ++s) radix.insert(radix.end(), {levels, levels, dataflows});

  Incumbent incumbent(problem);
  std::vector<TracePoint> trace;
  std::int64_t evaluations = 0;
  Genome genome(slots);
  while (true) {
    for (std::size_t s = 0; s < slots; ++s) {
      genome[s] = Gene{digits[3 * s], digits[3 * s + 1], problem.dataflow_at(digits[3 * s + 2])};
    }
    ++evaluations;
    incumbent.offer(genome, problem.cost(genome), evaluations);
    trace.push_back({evaluations, incumbent.best_value()});

    std::size_t pos = digits.size();
    while (pos > 0) {
      --pos;
      if (++digits[pos] < radix[pos]) break;
      digits[pos] = 0;
      if (pos == 0) return incumbent.finish("oracle", std::move(trace), evaluations);
    }
  }
}

}  // namespace accel_alloc
