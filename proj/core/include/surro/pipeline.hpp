#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surro/callcenter.hpp"
#include "surro/dqn.hpp"
#include "surro/surrogate.hpp"

namespace surro {

// Moving-average band test for "the reward has stabilized": window w,
// band delta = max(floor, fraction * |final-window mean|).
struct StabilizationCriterion {
    int window = 10;
    double delta_fraction = 0.1;
    double delta_floor = 5.0;
};

struct ExperimentSpec {
    enum class Mode { Direct, PretrainFinetune };
    Mode mode = Mode::PretrainFinetune;
    int collect_replications = 200;
    int pretrain_surrogate_episodes = 200;
    int max_episodes = 300;  // budget per simulation phase
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    StabilizationCriterion stabilization;
    bool reset_replay_on_finetune = true;

    void validate() const;
};

// DQN against the simulation only; every episode is one simulation
// replication, phase label "direct".
LearningCurve run_direct(const CallCenterConfig& config, const RewardSpec& reward,
                         const DqnConfig& dqn_cfg, int episodes, std::uint64_t seed);

struct CollectResult {
    std::vector<EpochRecord> records;
    SurrogateModel model;
    RmseReport rmse;
};

// Runs n replications under the given policy (typically the epsilon-greedy
// policy at the end of direct training), fits the input models, and trains
// the surrogate on the recorded trajectories.
CollectResult collect_and_fit(const CallCenterConfig& config, const RewardSpec& reward,
                              const Policy& policy, int n,
                              const SurrogateTrainConfig& surro_cfg, std::uint64_t seed);

// Phase 1: fresh DQN on the surrogate environment ("pretrain"); phase 2: the
// same network continues on the simulation ("finetune"). One concatenated
// curve. The replay buffer is cleared between phases when reset_replay is
// set; network weights always carry over.
LearningCurve run_pretrain_finetune(const CallCenterConfig& config,
                                    const RewardSpec& reward,
                                    const SurrogateModel& surrogate,
                                    const DqnConfig& dqn_cfg, int pretrain_episodes,
                                    int finetune_episodes, bool reset_replay,
                                    std::uint64_t seed);

// Smallest episode e within the named phase whose length-w moving average
// lies within +/-delta of the final-window average; nullopt if no window
// qualifies. Throws when the phase holds fewer than 2w episodes.
std::optional<int> detect_stabilization(const LearningCurve& curve,
                                        const std::string& phase,
                                        const StabilizationCriterion& crit);

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::optional<int> direct_episode;    // 1-based replications-to-stabilize
    std::optional<int> finetune_episode;  // simulation replications only
    std::string direct_curve_path;        // relative to the experiment out dir
    std::string pretrain_curve_path;
};

struct ExperimentReport {
    std::vector<SeedOutcome> seeds;
    double median_direct = 0.0;    // censored at the budget when unstabilized
    double median_finetune = 0.0;
    double speedup_ratio = 0.0;    // median_direct / median_finetune
    RmseReport rmse;
    std::string surrogate_path;
    std::string rmse_path;
    std::string trajectory_path;
};

// Full comparison: one direct-training run under train_reward provides the
// collection policy; a surrogate is fitted from its trajectories; then every
// seed is retrained under eval_reward both directly and by surrogate
// pretraining + fine-tuning. train_reward == eval_reward reproduces the
// first experiment; a modified eval_reward reproduces the reward-change one.
ExperimentReport run_experiment(const CallCenterConfig& config,
                                const RewardSpec& train_reward,
                                const RewardSpec& eval_reward,
                                const DqnConfig& dqn_cfg,
                                const SurrogateTrainConfig& surro_cfg,
                                const ExperimentSpec& spec,
                                const std::string& out_dir);

std::string curve_to_csv(const LearningCurve& curve);
LearningCurve curve_from_csv(const std::string& csv);

std::string report_to_json(const ExperimentReport& report);

}  // namespace surro
