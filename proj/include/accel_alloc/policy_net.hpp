#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace accel_alloc {

enum class PolicyKind { RNN, MLP };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

/// Categorical policy over one or more action heads.
///
/// RNN: a single LSTM layer whose hidden state threads through the episode.
/// MLP: two tanh hidden layers, stateless per step.
/// Either trunk feeds one linear softmax head per action.
///
/// All parameters live in one flat vector so the optimizer, gradient
/// clipping and finite-difference checks can treat them uniformly.
class PolicyNet {
 public:
  struct State {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
  };

  /// One probability vector per head.
  using HeadProbs = std::vector<Eigen::VectorXd>;

  PolicyNet(PolicyKind kind, int input_dim, int hidden, std::vector<int> head_sizes,
            std::uint64_t seed);

  PolicyKind kind() const { return kind_; }
  int input_dim() const { return input_; }
  int hidden() const { return hidden_; }
  const std::vector<int>& head_sizes() const { return heads_; }

  Eigen::VectorXd& parameters() { return theta_; }
  const Eigen::VectorXd& parameters() const { return theta_; }

  /// Sets every head weight and bias to zero (uniform policy).
  void zero_heads();

  State initial_state() const;
  HeadProbs step(const Eigen::VectorXd& obs, State& state) const;

  /// Probabilities for every step of a sequence, starting from the initial state.
  std::vector<HeadProbs> forward(const std::vector<Eigen::VectorXd>& observations) const;

  /// REINFORCE surrogate: -sum_t G_t * sum_heads log pi(a_t^h | s_t).
  double loss(const std::vector<Eigen::VectorXd>& observations,
              const std::vector<std::vector<int>>& actions,
              const std::vector<double>& returns) const;

  /// Loss plus its gradient w.r.t. parameters(), by backpropagation through time.
  double loss_and_gradient(const std::vector<Eigen::VectorXd>& observations,
                           const std::vector<std::vector<int>>& actions,
                           const std::vector<double>& returns, Eigen::VectorXd& grad) const;

 private:
  struct Layout {
    Eigen::Index wx, wh, b;                  // LSTM
    Eigen::Index w1, b1, w2, b2;             // MLP
    std::vector<Eigen::Index> head_w, head_b;
    Eigen::Index total;
  };

  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  ConstMatMap mat(Eigen::Index offset, Eigen::Index rows, Eigen::Index cols) const {
    return ConstMatMap(theta_.data() + offset, rows, cols);
  }
  ConstVecMap vec(Eigen::Index offset, Eigen::Index size) const {
    return ConstVecMap(theta_.data() + offset, size);
  }

  struct StepCache;
  StepCache run_step(const Eigen::VectorXd& obs, State& state) const;

  void check_sequence(const std::vector<Eigen::VectorXd>& observations,
                      const std::vector<std::vector<int>>& actions,
                      const std::vector<double>& returns) const;

  PolicyKind kind_;
  int input_;
  int hidden_;
  std::vector<int> heads_;
  Layout layout_{};
  Eigen::VectorXd theta_;
};

/// Softmax with max subtraction.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace accel_alloc
