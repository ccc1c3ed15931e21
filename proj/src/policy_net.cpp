#include "accel_alloc/policy_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "accel_alloc/rng.hpp"

namespace accel_alloc {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_sum_exp(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  return m + std::log((logits.array() - m).exp().sum());
}

}  // namespace

// Per-step activations kept for the backward pass.
struct PolicyNet::StepCache {
  Eigen::VectorXd x;
  Eigen::VectorXd h_prev, c_prev;
  Eigen::VectorXd i, f, g, o, c, tanh_c;  // LSTM
  Eigen::VectorXd a1;                     // MLP
  Eigen::VectorXd trunk;                  // input to the heads
  std::vector<Eigen::VectorXd> logits;
};

std::string_view to_string(PolicyKind kind) { return kind == PolicyKind::RNN ? "rnn" : "mlp"; }

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "rnn" || name == "RNN") return PolicyKind::RNN;
  if (name == "mlp" || name == "MLP") return PolicyKind::MLP;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "' (expected rnn or mlp)");
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

PolicyNet::PolicyNet(PolicyKind kind, int input_dim, int hidden, std::vector<int> head_sizes,
                     std::uint64_t seed)
    : kind_(kind), input_(input_dim), hidden_(hidden), heads_(std::move(head_sizes)) {
  if (input_ < 1 || hidden_ < 1) throw std::invalid_argument("policy dimensions must be >= 1");
  if (heads_.empty()) throw std::invalid_argument("policy needs at least one head");
  for (int h : heads_)
    if (h < 1) throw std::invalid_argument("policy head sizes must be >= 1");

  const Eigen::Index in = input_;
  const Eigen::Index hid = hidden_;
  Eigen::Index offset = 0;
  auto take = [&offset](Eigen::Index n) {
    const Eigen::Index at = offset;
    offset += n;
    return at;
  };
  if (kind_ == PolicyKind::RNN) {
    layout_.wx = take(4 * hid * in);
    layout_.wh = take(4 * hid * hid);
    layout_.b = take(4 * hid);
  } else {
    layout_.w1 = take(hid * in);
    layout_.b1 = take(hid);
    layout_.w2 = take(hid * hid);
    layout_.b2 = take(hid);
  }
  const Eigen::Index trunk_end = offset;
  for (int h : heads_) {
    layout_.head_w.push_back(take(Eigen::Index(h) * hid));
    layout_.head_b.push_back(take(h));
  }
  layout_.total = offset;

  // Uniform in +-1/sqrt(fan_in), drawn in layout order.
  theta_.resize(layout_.total);
  Rng rng(seed);
  auto fill = [&](Eigen::Index from, Eigen::Index to, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index i = from; i < to; ++i) theta_[i] = (2.0 * rng.uniform() - 1.0) * bound;
  };
  if (kind_ == PolicyKind::RNN) {
    fill(0, trunk_end, double(in + hid));
  } else {
    fill(layout_.w1, layout_.w2, double(in));
    fill(layout_.w2, trunk_end, double(hid));
  }
  fill(trunk_end, layout_.total, double(hid));
}

void PolicyNet::zero_heads() {
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    theta_.segment(layout_.head_w[h], Eigen::Index(heads_[h]) * hidden_).setZero();
    theta_.segment(layout_.head_b[h], heads_[h]).setZero();
  }
}

PolicyNet::State PolicyNet::initial_state() const {
  return State{Eigen::VectorXd::Zero(hidden_), Eigen::VectorXd::Zero(hidden_)};
}

PolicyNet::StepCache PolicyNet::run_step(const Eigen::VectorXd& obs, State& state) const {
  const Eigen::Index hid = hidden_;
  const Eigen::Index in = input_;
  if (obs.size() != in)
    throw std::invalid_argument("observation has " + std::to_string(obs.size()) +
                                " entries, policy expects " + std::to_string(in));
  StepCache s;
  s.x = obs;
  if (kind_ == PolicyKind::RNN) {
    s.h_prev = state.h;
    s.c_prev = state.c;
    const Eigen::VectorXd z = mat(layout_.wx, 4 * hid, in) * obs +
                              mat(layout_.wh, 4 * hid, hid) * state.h + vec(layout_.b, 4 * hid);
    s.i = z.segment(0, hid).unaryExpr(&sigmoid);
    s.f = z.segment(hid, hid).unaryExpr(&sigmoid);
    s.g = z.segment(2 * hid, hid).array().tanh().matrix();
    s.o = z.segment(3 * hid, hid).unaryExpr(&sigmoid);
    s.c = s.f.cwiseProduct(s.c_prev) + s.i.cwiseProduct(s.g);
    s.tanh_c = s.c.array().tanh().matrix();
    s.trunk = s.o.cwiseProduct(s.tanh_c);
    state.h = s.trunk;
    state.c = s.c;
  } else {
    s.a1 = (mat(layout_.w1, hid, in) * obs + vec(layout_.b1, hid)).array().tanh().matrix();
    s.trunk = (mat(layout_.w2, hid, hid) * s.a1 + vec(layout_.b2, hid)).array().tanh().matrix();
  }
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    s.logits.push_back(mat(layout_.head_w[h], heads_[h], hid) * s.trunk +
                       vec(layout_.head_b[h], heads_[h]));
  }
  return s;
}

PolicyNet::HeadProbs PolicyNet::step(const Eigen::VectorXd& obs, State& state) const {
  const auto cache = run_step(obs, state);
  HeadProbs probs;
  for (const auto& l : cache.logits) probs.push_back(softmax(l));
  return probs;
}

std::vector<PolicyNet::HeadProbs> PolicyNet::forward(
    const std::vector<Eigen::VectorXd>& observations) const {
  if (observations.empty()) throw std::invalid_argument("observation sequence is empty");
  State state = initial_state();
  std::vector<HeadProbs> out;
  for (const auto& obs : observations) out.push_back(step(obs, state));
  return out;
}

void PolicyNet::check_sequence(const std::vector<Eigen::VectorXd>& observations,
                               const std::vector<std::vector<int>>& actions,
                               const std::vector<double>& returns) const {
  if (observations.empty()) throw std::invalid_argument("observation sequence is empty");
  if (actions.size() != observations.size() || returns.size() != observations.size())
    throw std::invalid_argument("observations, actions and returns must have equal length");
  for (const auto& a : actions) {
    if (a.size() != heads_.size()) throw std::invalid_argument("one action per head required");
    for (std::size_t h = 0; h < a.size(); ++h)
      if (a[h] < 0 || a[h] >= heads_[h]) throw std::invalid_argument("action index out of range");
  }
}

double PolicyNet::loss(const std::vector<Eigen::VectorXd>& observations,
                       const std::vector<std::vector<int>>& actions,
                       const std::vector<double>& returns) const {
  check_sequence(observations, actions, returns);
  State state = initial_state();
  double total = 0.0;
  for (std::size_t t = 0; t < observations.size(); ++t) {
    const auto cache = run_step(observations[t], state);
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      const double log_p = cache.logits[h][actions[t][h]] - log_sum_exp(cache.logits[h]);
      total -= returns[t] * log_p;
    }
  }
  return total;
}

double PolicyNet::loss_and_gradient(const std::vector<Eigen::VectorXd>& observations,
                                    const std::vector<std::vector<int>>& actions,
                                    const std::vector<double>& returns,
                                    Eigen::VectorXd& grad) const {
  check_sequence(observations, actions, returns);
  const Eigen::Index hid = hidden_;
  const Eigen::Index in = input_;
  const std::size_t steps = observations.size();

  std::vector<StepCache> caches;
  caches.reserve(steps);
  State state = initial_state();
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    caches.push_back(run_step(observations[t], state));
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      const auto& logits = caches.back().logits[h];
      total -= returns[t] * (logits[actions[t][h]] - log_sum_exp(logits));
    }
  }

  grad = Eigen::VectorXd::Zero(layout_.total);
  auto gmat = [&grad](Eigen::Index o, Eigen::Index r, Eigen::Index c) {
    return MatMap(grad.data() + o, r, c);
  };
  auto gvec = [&grad](Eigen::Index o, Eigen::Index n) { return VecMap(grad.data() + o, n); };

  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(hid);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(hid);
  for (std::size_t rt = steps; rt-- > 0;) {
    const StepCache& s = caches[rt];
    Eigen::VectorXd d_trunk = Eigen::VectorXd::Zero(hid);
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      // d/dlogits of -G log softmax(l)[a] = G (p - onehot(a)).
      Eigen::VectorXd d_logits = softmax(s.logits[h]);
      d_logits[actions[rt][h]] -= 1.0;
      d_logits *= returns[rt];
      gmat(layout_.head_w[h], heads_[h], hid).noalias() += d_logits * s.trunk.transpose();
      gvec(layout_.head_b[h], heads_[h]) += d_logits;
      d_trunk.noalias() += mat(layout_.head_w[h], heads_[h], hid).transpose() * d_logits;
    }

    if (kind_ == PolicyKind::RNN) {
      const Eigen::VectorXd dh = d_trunk + dh_next;
      const Eigen::ArrayXd do_ = dh.array() * s.tanh_c.array();
      const Eigen::ArrayXd dc =
          dh.array() * s.o.array() * (1.0 - s.tanh_c.array().square()) + dc_next.array();
      Eigen::VectorXd dz(4 * hid);
      dz.segment(0, hid) = (dc * s.g.array() * s.i.array() * (1.0 - s.i.array())).matrix();
      dz.segment(hid, hid) = (dc * s.c_prev.array() * s.f.array() * (1.0 - s.f.array())).matrix();
      dz.segment(2 * hid, hid) = (dc * s.i.array() * (1.0 - s.g.array().square())).matrix();
      dz.segment(3 * hid, hid) = (do_ * s.o.array() * (1.0 - s.o.array())).matrix();

      gmat(layout_.wx, 4 * hid, in).noalias() += dz * s.x.transpose();
      gmat(layout_.wh, 4 * hid, hid).noalias() += dz * s.h_prev.transpose();
      gvec(layout_.b, 4 * hid) += dz;
      dh_next.noalias() = mat(layout_.wh, 4 * hid, hid).transpose() * dz;
      dc_next = (dc * s.f.array()).matrix();
    } else {
      const Eigen::VectorXd dz2 = (d_trunk.array() * (1.0 - s.trunk.array().square())).matrix();
      gmat(layout_.w2, hid, hid).noalias() += dz2 * s.a1.transpose();
      gvec(layout_.b2, hid) += dz2;
      const Eigen::VectorXd da1 = mat(layout_.w2, hid, hid).transpose() * dz2;
      const Eigen::VectorXd dz1 = (da1.array() * (1.0 - s.a1.array().square())).matrix();
      gmat(layout_.w1, hid, in).noalias() += dz1 * s.x.transpose();
      gvec(layout_.b1, hid) += dz1;
    }
  }
  return total;
}

}  // namespace accel_alloc
