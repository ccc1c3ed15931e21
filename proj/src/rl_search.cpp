#include "accel_alloc/rl_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace accel_alloc {

namespace {

int sample(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

double normalize(double value, double max) { return 2.0 * value / max - 1.0; }

double layer_type_code(LayerKind kind) {
  switch (kind) {
    case LayerKind::CONV:
      return -1.0;
    case LayerKind::DWCONV:
      return 0.0;
    case LayerKind::GEMM:
      return 1.0;
  }
  return 0.0;
}

std::vector<int> head_sizes(const SearchProblem& problem) {
  std::vector<int> heads{problem.level_count(), problem.level_count()};
  if (problem.mix()) heads.push_back(kNumDataflows);
  return heads;
}

}  // namespace

int observation_size(bool mix) { return mix ? 11 : 10; }

Eigen::VectorXd observe(const ModelDesc& model, std::size_t t, const std::optional<Gene>& prev,
                        int level_count, bool mix) {
  const std::size_t n = model.layers.size();
  if (t >= n)
    throw std::out_of_range("step " + std::to_string(t) + " out of range for " +
                            std::to_string(n) + " layers");
  LayerShape max_dims{};
  for (const auto& l : model.layers) {
    max_dims.K = std::max(max_dims.K, l.K);
    max_dims.C = std::max(max_dims.C, l.C);
    max_dims.Y = std::max(max_dims.Y, l.Y);
    max_dims.X = std::max(max_dims.X, l.X);
    max_dims.R = std::max(max_dims.R, l.R);
    max_dims.S = std::max(max_dims.S, l.S);
  }
  const LayerShape& l = model.layers[t];
  Eigen::VectorXd obs(observation_size(mix));
  obs[0] = normalize(double(l.K), double(max_dims.K));
  obs[1] = normalize(double(l.C), double(max_dims.C));
  obs[2] = normalize(double(l.Y), double(max_dims.Y));
  obs[3] = normalize(double(l.X), double(max_dims.X));
  obs[4] = normalize(double(l.R), double(max_dims.R));
  obs[5] = normalize(double(l.S), double(max_dims.S));
  obs[6] = layer_type_code(l.kind);
  auto action = [level_count](int index) {
    return level_count > 1 ? normalize(double(index), double(level_count - 1)) : 0.0;
  };
  obs[7] = prev ? action(prev->pe_level) : -1.0;
  obs[8] = prev ? action(prev->buf_level) : -1.0;
  std::size_t next = 9;
  if (mix) obs[next++] = prev ? double(static_cast<int>(prev->dataflow)) - 1.0 : -1.0;
  obs[next] = n > 1 ? normalize(double(t), double(n - 1)) : 0.0;
  return obs;
}

double step_reward(double cost, RewardTracker& tracker, const BudgetLeft& left) {
  if (!left.ok()) throw std::logic_error("step_reward called on a violating step");
  const double performance = -cost;
  tracker.p_min = std::min(tracker.p_min, performance);
  return performance - tracker.p_min;
}

double episode_penalty(std::span<const double> rewards_so_far) {
  return -std::accumulate(rewards_so_far.begin(), rewards_so_far.end(), 0.0);
}

std::vector<double> discounted_returns(std::span<const double> rewards, double discount) {
  if (!(discount > 0.0 && discount <= 1.0))
    throw std::invalid_argument("discount must be in (0, 1]");
  std::vector<double> out(rewards.size());
  double running = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    running = rewards[i] + discount * running;
    out[i] = running;
  }
  return out;
}

std::vector<double> standardize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot standardize an empty sequence");
  const double n = double(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double stddev = std::sqrt(sq / n);
  std::vector<double> out(values.size(), 0.0);
  if (stddev < 1e-8) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / stddev;
  return out;
}

EpisodeTrace run_episode(const SearchProblem& problem, const PolicyNet& net,
                         RewardTracker& tracker, Rng& rng) {
  const ModelDesc& model = problem.model();
  const bool shared = problem.slots() != model.layers.size();
  EpisodeTrace trace;
  PolicyNet::State state = net.initial_state();
  Consumption consumed;
  std::optional<Gene> prev;

  for (std::size_t t = 0; t < problem.slots(); ++t) {
    Eigen::VectorXd obs = observe(model, t, prev, problem.level_count(), problem.mix());
    const auto probs = net.step(obs, state);

    std::vector<int> action;
    double log_prob = 0.0;
    for (const auto& head : probs) {
      action.push_back(sample(head, rng));
      log_prob += std::log(head[action.back()]);
    }
    const Gene gene{action[0], action[1], problem.dataflow_at(problem.mix() ? action[2] : 0)};
    trace.genome.push_back(gene);

    double cost = 0.0;
    Consumption used;
    if (shared) {
      // LS: the single step configures the whole engine.
      const GenomeCost whole = problem.cost(Genome{gene});
      cost = whole.value;
      used = whole.consumption;
    } else {
      const DesignPoint point = decode({gene}, problem.levels()).front();
      const LayerShape& layer = model.layers[t];
      const HwMetrics m = evaluate(point.dataflow, point.pe, point.k, layer, problem.hw());
      cost = metric_value(m, problem.objective().metric);
      used = layer_consumption(problem.constraint(), point, layer, m);
    }
    consumed.amount += used.amount;
    consumed.buffers += used.buffers;
    const BudgetLeft left = budget_left(problem.constraint(), consumed);

    trace.observations.push_back(std::move(obs));
    trace.actions.push_back(std::move(action));
    trace.log_probs.push_back(log_prob);
    trace.costs.push_back(cost);
    trace.consumptions.push_back(used);
    trace.budgets.push_back(left);

    if (!left.ok()) {
      trace.rewards.push_back(episode_penalty(trace.rewards));
      trace.p_min.push_back(tracker.p_min);
      trace.violated = true;
      break;
    }
    trace.rewards.push_back(step_reward(cost, tracker, left));
    trace.p_min.push_back(tracker.p_min);
    prev = gene;
  }
  return trace;
}

double reinforce_update(PolicyNet& net, const EpisodeTrace& trace,
                        std::span<const double> returns, double learning_rate,
                        double clip_norm) {
  if (trace.observations.empty()) throw std::invalid_argument("episode trace is empty");
  Eigen::VectorXd grad;
  net.loss_and_gradient(trace.observations, trace.actions,
                        std::vector<double>(returns.begin(), returns.end()), grad);
  const double norm = grad.norm();
  if (!std::isfinite(norm))
    throw std::runtime_error("non-finite policy gradient (norm " + std::to_string(norm) +
                             ") after " + std::to_string(trace.observations.size()) + " steps");
  if (norm > clip_norm) grad *= clip_norm / norm;
  net.parameters() -= learning_rate * grad;
  return norm;
}

SearchResult train(const SearchProblem& problem, const RlConfig& cfg,
                   const EpisodeObserver& observer) {
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(cfg.discount > 0.0 && cfg.discount <= 1.0))
    throw std::invalid_argument("discount must be in (0, 1]");

  Rng rng(cfg.seed);
  PolicyNet net(cfg.policy, observation_size(problem.mix()), cfg.hidden, head_sizes(problem),
                rng.engine()());
  RewardTracker tracker;
  Incumbent incumbent(problem);
  std::vector<TracePoint> trace;
  trace.reserve(static_cast<std::size_t>(cfg.epochs));

  for (std::int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const EpisodeTrace episode = run_episode(problem, net, tracker, rng);
    if (observer) observer(epoch, episode);
    if (!episode.violated) incumbent.offer(episode.genome, problem.cost(episode.genome), epoch);
    trace.push_back({epoch, incumbent.best_value()});

    const auto returns = standardize(discounted_returns(episode.rewards, cfg.discount));
    reinforce_update(net, episode, returns, cfg.learning_rate, cfg.clip_norm);
  }
  return incumbent.finish("reinforce", std::move(trace), cfg.epochs);
}

}  // namespace accel_alloc
