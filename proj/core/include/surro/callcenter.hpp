#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "surro/distributions.hpp"
#include "surro/environment.hpp"
#include "surro/event_calendar.hpp"
#include "surro/rng.hpp"

namespace surro {

struct ContactGroupConfig {
    double arrival_rate_per_epoch = 0.0;
    DistributionSpec service;
    DistributionSpec patience;
};

struct CallCenterConfig {
    std::array<ContactGroupConfig, 2> contact_groups;
    std::array<int, 3> expert_group_sizes{1, 2, 1};
    // routing[expert_group][contact_group]: eligibility
    std::array<std::array<bool, 2>, 3> routing{{{true, true}, {true, true}, {true, true}}};
    double epoch_length = 30.0;  // minutes
    int horizon = 16;            // epochs per replication
    int backoffice_tasks_per_expert = 5;
    DistributionSpec backoffice_duration;

    int num_experts() const {
        return expert_group_sizes[0] + expert_group_sizes[1] + expert_group_sizes[2];
    }
    void validate() const;

    // The call-center instance of the reproduced experiments: lambda = (7, 6)
    // per epoch, Gamma service/patience, lognormal back-office tasks, expert
    // group sizes (1, 2, 1), group 2 cross-trained for both contact groups.
    static CallCenterConfig defaults();
};

struct Customer {
    enum class Status { Waiting, InService, Served, Abandoned };
    int contact_group = 0;
    double arrival_time = 0.0;
    double patience = 0.0;
    double service_demand = 0.0;
    Status status = Status::Waiting;
    double wait_ended_at = -1.0;  // service start or abandonment; -1 while waiting
};

struct Expert {
    enum class Work { Idle, Serving, Task };
    int id = 0;
    int group = 0;
    int mode = 0;  // 0 front office, 1 back office; fixed per epoch
    Work work = Work::Idle;
    double busy_from = 0.0;  // start of the current uninterrupted busy stretch
    int serving_customer = -1;
    int remaining_tasks = 0;
    double busy_time_this_epoch = 0.0;
};

struct GroupStats {
    std::int64_t arrivals = 0;
    std::int64_t served = 0;  // completed services
    std::int64_t abandoned = 0;
    double wait_sum = 0.0;        // summed over customers whose wait ended
    std::int64_t wait_count = 0;  // service starts + abandonments
};

// Entity-level call-center simulation stepped one decision epoch at a time.
// Owns the full system state; one instance per replication.
class CallCenterSim {
public:
    explicit CallCenterSim(const CallCenterConfig& config);

    // One epoch under the given expert modes. The action is applied
    // non-preemptively: work in progress at the boundary completes first,
    // then the expert follows its mode for the rest of the epoch.
    EpochKpis step_epoch(const ActionVector& action, RngStream& stream);

    // As step_epoch, but with the arrival times (offsets within the epoch,
    // per contact group) supplied by the caller instead of sampled. Used to
    // drive hand-built traces.
    EpochKpis step_epoch_with_arrivals(const ActionVector& action,
                                       const std::array<std::vector<double>, 2>& arrivals,
                                       RngStream& stream);

    Observation observation() const;

    int epoch_index() const { return epoch_index_; }
    bool done() const { return epoch_index_ >= config_.horizon; }
    const std::array<int, 2>& last_arrival_counts() const { return last_arrivals_; }

    const std::vector<Customer>& customers() const { return customers_; }
    const std::vector<Expert>& experts() const { return experts_; }
    const std::array<std::deque<int>, 2>& queues() const { return queues_; }
    const std::array<GroupStats, 2>& stats() const { return stats_; }
    std::array<int, 3> remaining_tasks_per_group() const;

private:
    void dispatch(Expert& expert, double now, double epoch_end, RngStream& stream);
    void start_service(Expert& expert, int customer_id, double now);
    void accrue_busy(Expert& expert, double until, double epoch_start);
    void record_wait_end(int group, double wait, bool abandoned);

    CallCenterConfig config_;
    EventCalendar calendar_;
    std::vector<Customer> customers_;
    std::vector<std::ptrdiff_t> abandon_handles_;  // -1 when no pending abandonment
    std::vector<Expert> experts_;
    std::array<std::deque<int>, 2> queues_;
    std::array<GroupStats, 2> stats_;
    int epoch_index_ = 0;
    std::array<int, 2> last_arrivals_{};

    // per-epoch accumulators
    std::array<double, 2> epoch_wait_sum_{};
    std::array<int, 2> epoch_wait_count_{};
    std::array<int, 2> epoch_abandoned_{};
};

using Policy = std::function<ActionVector(const Observation&)>;

struct ReplicationResult {
    std::vector<StepResult> steps;      // one per epoch
    std::vector<Observation> obs;       // horizon + 1 entries
    std::vector<ActionVector> actions;  // one per epoch
    double total_reward = 0.0;
};

// Full episode under a fixed policy; the terminal penalty is folded into the
// final epoch's reward.
ReplicationResult run_replication(const CallCenterConfig& config,
                                  const RewardSpec& reward, const Policy& policy,
                                  RngStream& stream);

// Environment-contract adapter over CallCenterSim. Each reset starts a new
// replication on its own substream of the base seed.
class SimEnvironment final : public Environment {
public:
    SimEnvironment(CallCenterConfig config, RewardSpec reward, std::uint64_t seed);

    Observation reset() override;
    StepResult step(const ActionVector& action) override;
    Observation observe() const override { return sim_.observation(); }
    int horizon() const override { return config_.horizon; }

    std::uint64_t episodes_started() const { return next_replication_; }

private:
    CallCenterConfig config_;
    RewardSpec reward_;
    std::uint64_t seed_;
    std::uint64_t next_replication_ = 0;
    CallCenterSim sim_;
    RngStream stream_;
};

}  // namespace surro
