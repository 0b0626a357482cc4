#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surro/environment.hpp"
#include "surro/mlp.hpp"
#include "surro/rng.hpp"

namespace surro {

inline constexpr int kNumActions = 16;  // 4 experts x binary mode, jointly

struct DqnConfig {
    double learning_rate = 1e-4;
    int replay_capacity = 300;
    int minibatch = 5;
    double epsilon = 0.05;
    double gamma = 0.9;
    // Rewards are multiplied by this before entering the TD targets, so the
    // Q-network regresses values of manageable magnitude; learning curves
    // always log raw rewards. Greedy choice is invariant to the scale.
    double reward_scale = 1.0;
    std::vector<int> hidden = {32, 32};
    int target_sync_period = 100;  // gradient steps between hard target copies
    int episodes = 200;

    void validate() const;
};

struct Transition {
    Observation obs{};
    int action_index = 0;
    double reward = 0.0;
    Observation next_obs{};
    bool done = false;
};

// Bounded FIFO transition store; oldest overwritten first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(const Transition& t) {
        if (data_.size() < capacity_) {
            data_.push_back(t);
        } else {
            data_[next_] = t;
        }
        next_ = (next_ + 1) % capacity_;
    }
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& sample(RngStream& stream) const {
        return data_[stream.uniform_int(data_.size())];
    }
    void clear() {
        data_.clear();
        next_ = 0;
    }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> data_;
};

// Joint-action encoding: bit k (LSB first) is expert k's mode.
int encode_action(const ActionVector& a);
ActionVector decode_action(int index);

int select_action(const Mlp& qnet, const Observation& obs, double epsilon,
                  RngStream& stream);

std::vector<double> td_targets(const std::vector<Transition>& batch,
                               const Mlp& target_net, double gamma,
                               double reward_scale = 1.0);

struct CurvePoint {
    int episode = 0;
    double total_reward = 0.0;
    std::int64_t cumulative_sim_replications = 0;
    std::int64_t cumulative_surrogate_replications = 0;
    std::string phase;  // direct | pretrain | finetune
};
using LearningCurve = std::vector<CurvePoint>;

// DQN with epsilon-greedy exploration, bounded replay, and a hard-copied
// target network. One gradient step per environment epoch.
class DqnAgent {
public:
    DqnAgent(const DqnConfig& cfg, std::uint64_t seed);

    // Uniform minibatch regression of Q(s, a_taken) toward the TD target;
    // no-op (nullopt) while the buffer is under the minibatch size.
    std::optional<double> train_step();

    // Runs `episodes` full episodes against env, one train_step per epoch.
    // `phase` labels the curve entries; counts_simulation selects which
    // replication counter the episodes charge.
    void run_episodes(Environment& env, int episodes, const std::string& phase,
                      bool counts_simulation, LearningCurve& curve);

    int act(const Observation& obs) { return select_action(qnet_, obs, cfg_.epsilon, stream_); }
    int greedy_action(const Observation& obs) const {
        return select_action(qnet_, obs, 0.0, const_cast<RngStream&>(stream_));
    }

    void push_transition(const Transition& t) { buffer_.push(t); }
    void reset_replay() { buffer_.clear(); }

    const Mlp& qnet() const { return qnet_; }
    Mlp& qnet() { return qnet_; }
    const Mlp& target_net() const { return target_net_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const DqnConfig& config() const { return cfg_; }
    std::int64_t gradient_steps() const { return gradient_steps_; }
    std::int64_t sim_replications() const { return sim_replications_; }
    std::int64_t surrogate_replications() const { return surrogate_replications_; }
    int episodes_run() const { return episodes_run_; }

private:
    DqnConfig cfg_;
    RngStream stream_;
    Mlp qnet_;
    Mlp target_net_;
    OptimizerState opt_;
    ReplayBuffer buffer_;
    std::int64_t gradient_steps_ = 0;
    std::int64_t sim_replications_ = 0;
    std::int64_t surrogate_replications_ = 0;
    int episodes_run_ = 0;
};

}  // namespace surro
