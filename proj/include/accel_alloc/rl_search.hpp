#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "accel_alloc/policy_net.hpp"
#include "accel_alloc/rng.hpp"
#include "accel_alloc/search_space.hpp"

namespace accel_alloc {

/// Observation width: 10 (shape, type, previous PE/buffer action, step) or
/// 11 with the previous dataflow action.
int observation_size(bool mix);

/// Normalized observation for step t. Shape dims are scaled against the
/// model-wide maximum; previous actions are -1 at step 0.
Eigen::VectorXd observe(const ModelDesc& model, std::size_t t, const std::optional<Gene>& prev,
                        int level_count, bool mix);

/// Running minimum of the performance score P = -cost over all steps of all
/// episodes.
struct RewardTracker {
  double p_min = kInf;
};

/// Shaped reward P_t - P_min >= 0 for a step that kept the budget. Throws
/// std::logic_error if `left` is already violated.
double step_reward(double cost, RewardTracker& tracker, const BudgetLeft& left);

/// Negative of the rewards collected so far in the episode.
double episode_penalty(std::span<const double> rewards_so_far);

std::vector<double> discounted_returns(std::span<const double> rewards, double discount);

/// Zero mean, unit population stddev; all zeros when stddev < 1e-8.
std::vector<double> standardize(std::span<const double> values);

struct EpisodeTrace {
  std::vector<Eigen::VectorXd> observations;
  std::vector<std::vector<int>> actions;   // one index per head
  std::vector<double> log_probs;           // summed over heads
  std::vector<double> rewards;
  std::vector<double> costs;               // per-step objective cost
  std::vector<Consumption> consumptions;   // per-step resource use
  std::vector<BudgetLeft> budgets;         // L_budget after each step
  std::vector<double> p_min;               // tracker value after each step
  Genome genome;                           // slot genes chosen so far
  bool violated = false;
};

/// Samples one episode from the policy. The tracker is updated in place.
EpisodeTrace run_episode(const SearchProblem& problem, const PolicyNet& net,
                         RewardTracker& tracker, Rng& rng);

/// One SGD step on the REINFORCE loss with global-norm gradient clipping.
/// `returns` must already be discounted and standardized. Returns the
/// unclipped gradient norm; throws std::runtime_error on a non-finite
/// gradient.
double reinforce_update(PolicyNet& net, const EpisodeTrace& trace,
                        std::span<const double> returns, double learning_rate,
                        double clip_norm = 5.0);

struct RlConfig {
  std::int64_t epochs = 5000;
  double discount = 0.9;
  double learning_rate = 5e-3;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::RNN;
  int hidden = 128;
};

/// Called after every episode (before the policy update).
using EpisodeObserver = std::function<void(std::int64_t epoch, const EpisodeTrace&)>;

/// Stage-1 global search. The dataflow head is active when the problem is MIX.
SearchResult train(const SearchProblem& problem, const RlConfig& cfg,
                   const EpisodeObserver& observer = {});

}  // namespace accel_alloc
