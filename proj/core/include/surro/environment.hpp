#pragma once

#include <array>
#include <vector>

namespace surro {

// 7 features: queue lengths (2), remaining back-office tasks per expert
// group (3), busy expert count, epoch index normalized to [0,1].
using Observation = std::array<double, 7>;

// One binary mode per expert: 0 = front office, 1 = back office.
using ActionVector = std::array<int, 4>;

// Per-epoch KPI vectors. A and U entries lie in [0,1]; W and B are
// nonnegative.
struct EpochKpis {
    std::array<double, 2> W{};  // avg waiting time per contact group (minutes)
    std::array<double, 2> A{};  // abandonment rate per contact group
    std::array<double, 3> U{};  // utilization per expert group
    std::array<int, 3> B{};     // remaining back-office tasks per expert group
};

// Piecewise-indicator reward: each (threshold, penalty) pair contributes
// penalty when the metric exceeds the threshold. Penalties are negative.
struct PenaltyStep {
    double threshold = 0.0;
    double penalty = 0.0;
};

struct RewardSpec {
    std::array<std::vector<PenaltyStep>, 2> waiting;
    std::array<std::vector<PenaltyStep>, 2> abandonment;
    std::array<std::vector<PenaltyStep>, 3> utilization;
    double terminal_per_task = 0.0;

    static RewardSpec original();
    static RewardSpec modified();
};

double compute_reward(const EpochKpis& kpis, const RewardSpec& spec);
double terminal_reward(const EpochKpis& final_kpis, const RewardSpec& spec);

struct StepResult {
    EpochKpis kpis;
    Observation obs{};          // next observation
    std::array<int, 2> arrivals{};  // exogenous arrival counts this epoch
    double reward = 0.0;        // includes the terminal penalty when done
    bool done = false;
};

// Contract shared by the simulation and the surrogate; the DQN training
// loop runs unmodified against either.
class Environment {
public:
    virtual ~Environment() = default;
    virtual Observation reset() = 0;
    virtual StepResult step(const ActionVector& action) = 0;
    virtual Observation observe() const = 0;
    virtual int horizon() const = 0;
};

}  // namespace surro
