#include "surro/dqn.hpp"

#include <algorithm>
#include <stdexcept>

namespace surro {

void DqnConfig::validate() const {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("dqn: epsilon must be in [0,1]");
    if (gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("dqn: gamma must be in [0,1)");
    if (replay_capacity <= 0 || minibatch <= 0 || target_sync_period <= 0)
        throw std::invalid_argument("dqn: capacities and periods must be positive");
    if (learning_rate <= 0.0) throw std::invalid_argument("dqn: learning rate must be positive");
    if (reward_scale <= 0.0) throw std::invalid_argument("dqn: reward_scale must be positive");
    if (episodes < 0) throw std::invalid_argument("dqn: episodes must be nonnegative");
}

int encode_action(const ActionVector& a) {
    int index = 0;
    for (int k = 0; k < 4; ++k) {
        if (a[k] != 0 && a[k] != 1)
            throw std::invalid_argument("encode_action: entries must be 0 or 1");
        index |= a[k] << k;
    }
    return index;
}

ActionVector decode_action(int index) {
    if (index < 0 || index >= kNumActions)
        throw std::invalid_argument("decode_action: index out of range");
    ActionVector a;
    for (int k = 0; k < 4; ++k) a[k] = (index >> k) & 1;
    return a;
}

int select_action(const Mlp& qnet, const Observation& obs, double epsilon,
                  RngStream& stream) {
    if (epsilon > 0.0 && stream.uniform() < epsilon)
        return static_cast<int>(stream.uniform_int(kNumActions));
    const auto q = forward(qnet, std::vector<double>(obs.begin(), obs.end()));
    int best = 0;
    for (int i = 1; i < kNumActions; ++i)
        if (q[i] > q[best]) best = i;  // lowest index wins ties
    return best;
}

std::vector<double> td_targets(const std::vector<Transition>& batch,
                               const Mlp& target_net, double gamma,
                               double reward_scale) {
    std::vector<double> targets;
    targets.reserve(batch.size());
    for (const auto& t : batch) {
        if (t.done) {
            targets.push_back(t.reward * reward_scale);
            continue;
        }
        const auto q = forward(target_net,
                               std::vector<double>(t.next_obs.begin(), t.next_obs.end()));
        targets.push_back(t.reward * reward_scale +
                          gamma * *std::max_element(q.begin(), q.end()));
    }
    return targets;
}

DqnAgent::DqnAgent(const DqnConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), stream_(seed, 0),
      qnet_([&] {
          cfg.validate();
          std::vector<int> dims;
          dims.push_back(7);
          dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
          dims.push_back(kNumActions);
          RngStream init_stream(seed, 1);
          return Mlp::init(dims, 0.0, init_stream);
      }()),
      target_net_(qnet_),
      opt_(OptimizerState::create(qnet_, cfg.learning_rate)),
      buffer_(static_cast<std::size_t>(cfg.replay_capacity)) {}

std::optional<double> DqnAgent::train_step() {
    if (buffer_.size() < static_cast<std::size_t>(cfg_.minibatch)) return std::nullopt;
    std::vector<Transition> batch;
    batch.reserve(cfg_.minibatch);
    for (int i = 0; i < cfg_.minibatch; ++i) batch.push_back(buffer_.sample(stream_));
    const auto targets = td_targets(batch, target_net_, cfg_.gamma, cfg_.reward_scale);

    Minibatch mb;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::vector<double> in(batch[i].obs.begin(), batch[i].obs.end());
        // untouched actions regress toward the current prediction
        auto target = forward(qnet_, in);
        target[batch[i].action_index] = targets[i];
        mb.inputs.push_back(std::move(in));
        mb.targets.push_back(std::move(target));
    }
    Gradients grads;
    const double loss = backward(qnet_, mb, grads);
    optimizer_step(qnet_, grads, opt_);
    gradient_steps_ += 1;
    if (gradient_steps_ % cfg_.target_sync_period == 0) target_net_ = qnet_;
    return loss;
}

void DqnAgent::run_episodes(Environment& env, int episodes, const std::string& phase,
                            bool counts_simulation, LearningCurve& curve) {
    for (int ep = 0; ep < episodes; ++ep) {
        Observation obs = env.reset();
        double total = 0.0;
        for (;;) {
            const int action_index = act(obs);
            const StepResult step = env.step(decode_action(action_index));
            total += step.reward;
            push_transition({obs, action_index, step.reward, step.obs, step.done});
            train_step();
            obs = step.obs;
            if (step.done) break;
        }
        if (counts_simulation)
            sim_replications_ += 1;
        else
            surrogate_replications_ += 1;
        curve.push_back({episodes_run_++, total, sim_replications_,
                         surrogate_replications_, phase});
    }
}

}  // namespace surro
