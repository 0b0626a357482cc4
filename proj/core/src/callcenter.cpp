#include "surro/callcenter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace surro {

void CallCenterConfig::validate() const {
    for (int g = 0; g < 2; ++g) {
        const auto& cg = contact_groups[g];
        if (cg.arrival_rate_per_epoch < 0.0)
            throw std::invalid_argument("contact_groups: arrival rate must be nonnegative");
        bool routable = false;
        for (int e = 0; e < 3; ++e) routable = routable || routing[e][g];
        if (!routable)
            throw std::invalid_argument("routing: contact group " + std::to_string(g) +
                                        " has no eligible expert group");
    }
    for (int e = 0; e < 3; ++e) {
        if (expert_group_sizes[e] <= 0)
            throw std::invalid_argument("expert_groups: sizes must be positive");
        if (!routing[e][0] && !routing[e][1] && backoffice_tasks_per_expert == 0)
            throw std::invalid_argument("routing: expert group " + std::to_string(e) +
                                        " serves no contact group and has no tasks");
    }
    if (num_experts() != 4)
        throw std::invalid_argument("expert_groups: sizes must total 4 experts");
    if (epoch_length <= 0.0) throw std::invalid_argument("epoch_length must be positive");
    if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
    if (backoffice_tasks_per_expert < 0)
        throw std::invalid_argument("backoffice_tasks_per_expert must be nonnegative");
}

CallCenterConfig CallCenterConfig::defaults() {
    CallCenterConfig cfg;
    cfg.contact_groups[0] = {7.0, DistributionSpec::gamma(4.0, 1.0),
                             DistributionSpec::gamma(5.0, 0.9)};
    cfg.contact_groups[1] = {6.0, DistributionSpec::gamma(4.0, 1.5),
                             DistributionSpec::gamma(2.0, 5.0)};
    cfg.expert_group_sizes = {1, 2, 1};
    // group 1 handles contact 1, the cross-trained pool handles both,
    // group 3 handles contact 2
    cfg.routing = {{{true, false}, {true, true}, {false, true}}};
    cfg.epoch_length = 30.0;
    cfg.horizon = 16;
    cfg.backoffice_tasks_per_expert = 5;
    cfg.backoffice_duration = DistributionSpec::lognormal_from_moments(1.7, 1.7);
    return cfg;
}

RewardSpec RewardSpec::original() {
    RewardSpec r;
    for (int g = 0; g < 2; ++g) {
        r.waiting[g] = {{2.0, -10.0}, {4.0, -40.0}};
        r.abandonment[g] = {{0.3, -20.0}, {0.5, -60.0}};
    }
    for (int e = 0; e < 3; ++e) r.utilization[e] = {{0.9, -4.0}};
    r.terminal_per_task = -20.0;
    return r;
}

RewardSpec RewardSpec::modified() {
    RewardSpec r;
    r.waiting[0] = {{1.0, -100.0}, {2.0, -1200.0}};
    r.waiting[1] = {{2.0, -100.0}, {4.0, -1200.0}};
    r.abandonment[0] = {{0.2, -40.0}, {0.5, -30.0}};
    r.abandonment[1] = {{0.3, -40.0}, {0.5, -30.0}};
    for (int e = 0; e < 3; ++e) r.utilization[e] = {{0.9, -2000.0}};
    r.terminal_per_task = -50.0;
    return r;
}

namespace {
double penalty_sum(double value, const std::vector<PenaltyStep>& steps) {
    double total = 0.0;
    for (const auto& s : steps)
        if (value > s.threshold) total += s.penalty;
    return total;
}
}  // namespace

double compute_reward(const EpochKpis& kpis, const RewardSpec& spec) {
    double r = 0.0;
    for (int g = 0; g < 2; ++g) {
        r += penalty_sum(kpis.W[g], spec.waiting[g]);
        r += penalty_sum(kpis.A[g], spec.abandonment[g]);
    }
    for (int e = 0; e < 3; ++e) r += penalty_sum(kpis.U[e], spec.utilization[e]);
    return r;
}

double terminal_reward(const EpochKpis& final_kpis, const RewardSpec& spec) {
    const int total = final_kpis.B[0] + final_kpis.B[1] + final_kpis.B[2];
    return spec.terminal_per_task * total;
}

CallCenterSim::CallCenterSim(const CallCenterConfig& config) : config_(config) {
    config_.validate();
    int id = 0;
    for (int g = 0; g < 3; ++g) {
        for (int i = 0; i < config_.expert_group_sizes[g]; ++i) {
            Expert e;
            e.id = id++;
            e.group = g;
            e.remaining_tasks = config_.backoffice_tasks_per_expert;
            experts_.push_back(e);
        }
    }
}

std::array<int, 3> CallCenterSim::remaining_tasks_per_group() const {
    std::array<int, 3> b{};
    for (const auto& e : experts_) b[e.group] += e.remaining_tasks;
    return b;
}

Observation CallCenterSim::observation() const {
    const auto b = remaining_tasks_per_group();
    int busy = 0;
    for (const auto& e : experts_)
        if (e.work != Expert::Work::Idle) ++busy;
    return {static_cast<double>(queues_[0].size()),
            static_cast<double>(queues_[1].size()),
            static_cast<double>(b[0]),
            static_cast<double>(b[1]),
            static_cast<double>(b[2]),
            static_cast<double>(busy),
            static_cast<double>(epoch_index_) / config_.horizon};
}

void CallCenterSim::record_wait_end(int group, double wait, bool abandoned) {
    epoch_wait_sum_[group] += wait;
    epoch_wait_count_[group] += 1;
    if (abandoned) epoch_abandoned_[group] += 1;
    stats_[group].wait_sum += wait;
    stats_[group].wait_count += 1;
    if (abandoned) stats_[group].abandoned += 1;
}

void CallCenterSim::start_service(Expert& expert, int customer_id, double now) {
    Customer& c = customers_[customer_id];
    c.status = Customer::Status::InService;
    c.wait_ended_at = now;
    record_wait_end(c.contact_group, now - c.arrival_time, /*abandoned=*/false);
    expert.work = Expert::Work::Serving;
    expert.serving_customer = customer_id;
    expert.busy_from = now;
    calendar_.schedule(now + c.service_demand, EventKind::ServiceCompletion, expert.id);
}

void CallCenterSim::dispatch(Expert& expert, double now, double epoch_end,
                             RngStream& stream) {
    if (expert.work != Expert::Work::Idle) return;
    if (expert.mode == 0) {
        // longest current wait among eligible queues (global FIFO)
        int best = -1;
        int best_group = -1;
        for (int g = 0; g < 2; ++g) {
            if (!config_.routing[expert.group][g] || queues_[g].empty()) continue;
            const int front = queues_[g].front();
            if (best < 0 ||
                customers_[front].arrival_time < customers_[best].arrival_time) {
                best = front;
                best_group = g;
            }
        }
        if (best < 0) return;
        queues_[best_group].pop_front();
        if (abandon_handles_[best] >= 0) {
            calendar_.cancel_handle(static_cast<std::size_t>(abandon_handles_[best]));
            abandon_handles_[best] = -1;
        }
        start_service(expert, best, now);
    } else if (expert.remaining_tasks > 0 && now < epoch_end) {
        const double duration = config_.backoffice_duration.sample(stream);
        expert.work = Expert::Work::Task;
        expert.busy_from = now;
        calendar_.schedule(now + duration, EventKind::BackofficeCompletion, expert.id);
    }
}

void CallCenterSim::accrue_busy(Expert& expert, double until, double epoch_start) {
    expert.busy_time_this_epoch += until - std::max(expert.busy_from, epoch_start);
}

EpochKpis CallCenterSim::step_epoch(const ActionVector& action, RngStream& stream) {
    std::array<std::vector<double>, 2> arrivals;
    for (int g = 0; g < 2; ++g)
        arrivals[g] = sample_arrivals(stream, config_.contact_groups[g].arrival_rate_per_epoch,
                                      config_.epoch_length);
    return step_epoch_with_arrivals(action, arrivals, stream);
}

EpochKpis CallCenterSim::step_epoch_with_arrivals(
    const ActionVector& action, const std::array<std::vector<double>, 2>& arrivals,
    RngStream& stream) {
    if (done()) throw std::runtime_error("step_epoch: episode complete");
    const double epoch_start = static_cast<double>(epoch_index_) * config_.epoch_length;
    const double epoch_end = epoch_start + config_.epoch_length;

    epoch_wait_sum_ = {};
    epoch_wait_count_ = {};
    epoch_abandoned_ = {};
    for (auto& e : experts_) e.busy_time_this_epoch = 0.0;

    // apply modes, then let idle experts pick up work at the boundary
    for (int k = 0; k < config_.num_experts(); ++k) experts_[k].mode = action[k];
    for (auto& e : experts_) dispatch(e, epoch_start, epoch_end, stream);

    last_arrivals_ = {};
    for (int g = 0; g < 2; ++g) {
        last_arrivals_[g] = static_cast<int>(arrivals[g].size());
        for (double t : arrivals[g])
            calendar_.schedule(epoch_start + t, EventKind::Arrival, g);
    }
    calendar_.schedule(epoch_end, EventKind::EpochBoundary);

    for (;;) {
        const auto ev_opt = calendar_.pop_next();
        if (!ev_opt) throw std::logic_error("calendar exhausted before epoch boundary");
        const Event ev = *ev_opt;
        const double now = ev.time;
        switch (ev.kind) {
            case EventKind::Arrival: {
                const int g = static_cast<int>(ev.payload);
                Customer c;
                c.contact_group = g;
                c.arrival_time = now;
                c.patience = config_.contact_groups[g].patience.sample(stream);
                c.service_demand = config_.contact_groups[g].service.sample(stream);
                customers_.push_back(c);
                abandon_handles_.push_back(-1);
                const int id = static_cast<int>(customers_.size()) - 1;
                stats_[g].arrivals += 1;
                Expert* idle = nullptr;
                for (auto& e : experts_) {
                    if (e.work == Expert::Work::Idle && e.mode == 0 &&
                        config_.routing[e.group][g]) {
                        idle = &e;
                        break;
                    }
                }
                if (idle) {
                    start_service(*idle, id, now);
                } else {
                    queues_[g].push_back(id);
                    abandon_handles_[id] = static_cast<std::ptrdiff_t>(
                        calendar_.schedule(now + c.patience, EventKind::Abandonment, id));
                }
                break;
            }
            case EventKind::ServiceCompletion: {
                Expert& e = experts_[ev.payload];
                customers_[e.serving_customer].status = Customer::Status::Served;
                stats_[customers_[e.serving_customer].contact_group].served += 1;
                accrue_busy(e, now, epoch_start);
                e.work = Expert::Work::Idle;
                e.serving_customer = -1;
                dispatch(e, now, epoch_end, stream);
                break;
            }
            case EventKind::Abandonment: {
                const int id = static_cast<int>(ev.payload);
                Customer& c = customers_[id];
                auto& q = queues_[c.contact_group];
                q.erase(std::find(q.begin(), q.end(), id));
                abandon_handles_[id] = -1;
                c.status = Customer::Status::Abandoned;
                c.wait_ended_at = c.arrival_time + c.patience;
                record_wait_end(c.contact_group, c.patience, /*abandoned=*/true);
                break;
            }
            case EventKind::BackofficeCompletion: {
                Expert& e = experts_[ev.payload];
                e.remaining_tasks -= 1;
                accrue_busy(e, now, epoch_start);
                e.work = Expert::Work::Idle;
                dispatch(e, now, epoch_end, stream);
                break;
            }
            case EventKind::EpochBoundary: {
                for (auto& e : experts_)
                    if (e.work != Expert::Work::Idle) accrue_busy(e, epoch_end, epoch_start);
                goto epoch_done;
            }
        }
    }
epoch_done:
    EpochKpis kpis;
    for (int g = 0; g < 2; ++g) {
        if (epoch_wait_count_[g] > 0) {
            kpis.W[g] = epoch_wait_sum_[g] / epoch_wait_count_[g];
            kpis.A[g] = static_cast<double>(epoch_abandoned_[g]) / epoch_wait_count_[g];
        }
    }
    std::array<double, 3> busy_by_group{};
    for (const auto& e : experts_) busy_by_group[e.group] += e.busy_time_this_epoch;
    for (int gr = 0; gr < 3; ++gr)
        kpis.U[gr] = busy_by_group[gr] /
                     (config_.epoch_length * config_.expert_group_sizes[gr]);
    kpis.B = remaining_tasks_per_group();
    epoch_index_ += 1;
    return kpis;
}

ReplicationResult run_replication(const CallCenterConfig& config,
                                  const RewardSpec& reward, const Policy& policy,
                                  RngStream& stream) {
    CallCenterSim sim(config);
    ReplicationResult result;
    result.obs.push_back(sim.observation());
    for (int j = 0; j < config.horizon; ++j) {
        const ActionVector action = policy(result.obs.back());
        StepResult step;
        step.kpis = sim.step_epoch(action, stream);
        step.arrivals = sim.last_arrival_counts();
        step.obs = sim.observation();
        step.reward = compute_reward(step.kpis, reward);
        step.done = sim.done();
        if (step.done) step.reward += terminal_reward(step.kpis, reward);
        result.total_reward += step.reward;
        result.actions.push_back(action);
        result.obs.push_back(step.obs);
        result.steps.push_back(step);
    }
    return result;
}

SimEnvironment::SimEnvironment(CallCenterConfig config, RewardSpec reward,
                               std::uint64_t seed)
    : config_(std::move(config)), reward_(std::move(reward)), seed_(seed),
      sim_(config_), stream_(seed, 0) {
    config_.validate();
}

Observation SimEnvironment::reset() {
    stream_ = RngStream(seed_, next_replication_++);
    sim_ = CallCenterSim(config_);
    return sim_.observation();
}

StepResult SimEnvironment::step(const ActionVector& action) {
    StepResult step;
    step.kpis = sim_.step_epoch(action, stream_);
    step.arrivals = sim_.last_arrival_counts();
    step.obs = sim_.observation();
    step.reward = compute_reward(step.kpis, reward_);
    step.done = sim_.done();
    if (step.done) step.reward += terminal_reward(step.kpis, reward_);
    return step;
}

}  // namespace surro
