#include "surro/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "surro/config_io.hpp"

namespace surro {

namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t label) {
    // splitmix64 finalizer over (base, label)
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (label + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) throw std::invalid_argument("median: empty");
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int max_workers() {
    if (const char* env = std::getenv("SURRO_ACCEL_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

void ExperimentSpec::validate() const {
    if (collect_replications < 0 || pretrain_surrogate_episodes < 0)
        throw std::invalid_argument("experiment: budgets must be nonnegative");
    if (max_episodes <= 0) throw std::invalid_argument("experiment: max_episodes must be positive");
    if (seeds.empty()) throw std::invalid_argument("experiment: need at least one seed");
    if (stabilization.window < 2)
        throw std::invalid_argument("experiment: stabilization window must be >= 2");
    if (stabilization.delta_fraction <= 0.0 && stabilization.delta_floor <= 0.0)
        throw std::invalid_argument("experiment: stabilization band must be positive");
}

LearningCurve run_direct(const CallCenterConfig& config, const RewardSpec& reward,
                         const DqnConfig& dqn_cfg, int episodes, std::uint64_t seed) {
    SimEnvironment env(config, reward, derive_seed(seed, 1));
    DqnAgent agent(dqn_cfg, derive_seed(seed, 2));
    LearningCurve curve;
    agent.run_episodes(env, episodes, "direct", /*counts_simulation=*/true, curve);
    return curve;
}

CollectResult collect_and_fit(const CallCenterConfig& config, const RewardSpec& reward,
                              const Policy& policy, int n,
                              const SurrogateTrainConfig& surro_cfg, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("collect_and_fit: need at least one replication");
    CollectResult result;
    std::vector<std::array<int, 2>> arrival_counts;
    for (int rep = 0; rep < n; ++rep) {
        RngStream stream(derive_seed(seed, 1), static_cast<std::uint64_t>(rep));
        const ReplicationResult rr = run_replication(config, reward, policy, stream);
        for (std::size_t j = 0; j < rr.steps.size(); ++j) {
            const auto& step = rr.steps[j];
            EpochRecord rec;
            rec.replication = rep;
            rec.epoch = static_cast<int>(j);
            rec.obs = rr.obs[j];
            rec.arrivals = step.arrivals;
            rec.action = rr.actions[j];
            rec.kpis = step.kpis;
            rec.reward = step.reward;
            rec.next_obs = step.obs;
            rec.done = step.done;
            result.records.push_back(rec);
            arrival_counts.push_back(step.arrivals);
        }
    }
    const InputModels input_models = fit_input_models(
        arrival_counts,
        {config.contact_groups[0].service, config.contact_groups[1].service},
        {config.contact_groups[0].patience, config.contact_groups[1].patience},
        config.backoffice_duration);
    const SurrogateDataset dataset =
        build_dataset(result.records, surro_cfg.holdout_fraction, derive_seed(seed, 2));
    auto [model, rmse] = train_surrogate(dataset, input_models, surro_cfg, derive_seed(seed, 3));
    result.model = std::move(model);
    result.rmse = rmse;
    return result;
}

LearningCurve run_pretrain_finetune(const CallCenterConfig& config,
                                    const RewardSpec& reward,
                                    const SurrogateModel& surrogate,
                                    const DqnConfig& dqn_cfg, int pretrain_episodes,
                                    int finetune_episodes, bool reset_replay,
                                    std::uint64_t seed) {
    const Observation initial = CallCenterSim(config).observation();
    SurrogateEnvironment surro_env(surrogate, initial, reward, config.horizon,
                                   derive_seed(seed, 1));
    SimEnvironment sim_env(config, reward, derive_seed(seed, 2));
    DqnAgent agent(dqn_cfg, derive_seed(seed, 3));
    LearningCurve curve;
    agent.run_episodes(surro_env, pretrain_episodes, "pretrain",
                       /*counts_simulation=*/false, curve);
    if (reset_replay) agent.reset_replay();
    agent.run_episodes(sim_env, finetune_episodes, "finetune",
                       /*counts_simulation=*/true, curve);
    return curve;
}

std::optional<int> detect_stabilization(const LearningCurve& curve,
                                        const std::string& phase,
                                        const StabilizationCriterion& crit) {
    std::vector<double> rewards;
    for (const auto& p : curve)
        if (p.phase == phase) rewards.push_back(p.total_reward);
    const int w = crit.window;
    const int n = static_cast<int>(rewards.size());
    if (n < 2 * w)
        throw std::invalid_argument("detect_stabilization: phase shorter than two windows");

    std::vector<double> window_mean(n - w + 1);
    double acc = 0.0;
    for (int i = 0; i < w; ++i) acc += rewards[i];
    window_mean[0] = acc / w;
    for (int i = 1; i <= n - w; ++i) {
        acc += rewards[i + w - 1] - rewards[i - 1];
        window_mean[i] = acc / w;
    }
    const double final_mean = window_mean.back();
    const double delta =
        std::max(crit.delta_floor, crit.delta_fraction * std::fabs(final_mean));

    for (int e = 0; e <= n - w; ++e)
        if (std::fabs(window_mean[e] - final_mean) <= delta) return e;
    return std::nullopt;
}

std::string curve_to_csv(const LearningCurve& curve) {
    std::ostringstream out;
    out << "episode,total_reward,cumulative_sim_replications,"
           "cumulative_surrogate_replications,phase\n";
    for (const auto& p : curve)
        out << p.episode << ',' << fmt_double(p.total_reward) << ','
            << p.cumulative_sim_replications << ',' << p.cumulative_surrogate_replications
            << ',' << p.phase << '\n';
    return out.str();
}

LearningCurve curve_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("curve: empty file");
    LearningCurve curve;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        CurvePoint p;
        std::string field;
        std::getline(row, field, ',');
        p.episode = std::stoi(field);
        std::getline(row, field, ',');
        p.total_reward = std::stod(field);
        std::getline(row, field, ',');
        p.cumulative_sim_replications = std::stoll(field);
        std::getline(row, field, ',');
        p.cumulative_surrogate_replications = std::stoll(field);
        std::getline(row, p.phase);
        curve.push_back(p);
    }
    return curve;
}

ExperimentReport run_experiment(const CallCenterConfig& config,
                                const RewardSpec& train_reward,
                                const RewardSpec& eval_reward,
                                const DqnConfig& dqn_cfg,
                                const SurrogateTrainConfig& surro_cfg,
                                const ExperimentSpec& spec,
                                const std::string& out_dir) {
    spec.validate();
    config.validate();
    dqn_cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::uint64_t base = spec.seeds[0];

    // One direct run under the training reward provides the collection policy.
    SimEnvironment policy_env(config, train_reward, derive_seed(base, 10));
    DqnAgent policy_agent(dqn_cfg, derive_seed(base, 11));
    {
        LearningCurve scratch;
        policy_agent.run_episodes(policy_env, spec.max_episodes, "direct", true, scratch);
    }
    const Mlp collection_qnet = policy_agent.qnet();
    RngStream policy_stream(derive_seed(base, 12), 0);
    const double eps = dqn_cfg.epsilon;
    const Policy collect_policy = [&collection_qnet, &policy_stream,
                                   eps](const Observation& obs) {
        return decode_action(select_action(collection_qnet, obs, eps, policy_stream));
    };

    CollectResult collected =
        collect_and_fit(config, train_reward, collect_policy, spec.collect_replications,
                        surro_cfg, derive_seed(base, 13));

    ExperimentReport report;
    report.rmse = collected.rmse;
    // paths are stored relative to out_dir so reports are location-independent
    report.trajectory_path = "trajectories.jsonl";
    report.surrogate_path = "surrogate.json";
    report.rmse_path = "rmse.json";
    write_trajectories_file((fs::path(out_dir) / report.trajectory_path).string(),
                            collected.records);
    write_file_atomic((fs::path(out_dir) / report.surrogate_path).string(),
                      save_surrogate(collected.model));
    write_file_atomic((fs::path(out_dir) / report.rmse_path).string(),
                      rmse_report_json(collected.rmse));

    report.seeds.resize(spec.seeds.size());
    const int workers = std::min<int>(max_workers(), static_cast<int>(spec.seeds.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.seeds.size()) return;
            const std::uint64_t s = spec.seeds[i];
            SeedOutcome outcome;
            outcome.seed = s;

            const LearningCurve direct =
                run_direct(config, eval_reward, dqn_cfg, spec.max_episodes,
                           derive_seed(s, 20));
            outcome.direct_curve_path = "curve_direct_seed" + std::to_string(s) + ".csv";
            write_file_atomic((fs::path(out_dir) / outcome.direct_curve_path).string(),
                              curve_to_csv(direct));
            if (const auto e = detect_stabilization(direct, "direct", spec.stabilization))
                outcome.direct_episode = *e + 1;

            const LearningCurve pf = run_pretrain_finetune(
                config, eval_reward, collected.model, dqn_cfg,
                spec.pretrain_surrogate_episodes, spec.max_episodes,
                spec.reset_replay_on_finetune, derive_seed(s, 21));
            outcome.pretrain_curve_path =
                "curve_pretrain_seed" + std::to_string(s) + ".csv";
            write_file_atomic((fs::path(out_dir) / outcome.pretrain_curve_path).string(),
                              curve_to_csv(pf));
            if (const auto e = detect_stabilization(pf, "finetune", spec.stabilization))
                outcome.finetune_episode = *e + 1;

            report.seeds[i] = outcome;
        }
    };
    std::vector<std::thread> threads;
    for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    std::vector<double> direct_counts, finetune_counts;
    for (const auto& o : report.seeds) {
        direct_counts.push_back(o.direct_episode ? *o.direct_episode
                                                 : static_cast<double>(spec.max_episodes));
        finetune_counts.push_back(o.finetune_episode
                                      ? *o.finetune_episode
                                      : static_cast<double>(spec.max_episodes));
    }
    report.median_direct = median(direct_counts);
    report.median_finetune = median(finetune_counts);
    report.speedup_ratio = report.median_finetune > 0.0
                               ? report.median_direct / report.median_finetune
                               : 0.0;
    write_file_atomic((fs::path(out_dir) / "report.json").string(),
                      report_to_json(report));
    return report;
}

std::string report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["median_direct_replications"] = report.median_direct;
    j["median_finetune_replications"] = report.median_finetune;
    j["speedup_ratio"] = report.speedup_ratio;
    j["surrogate_path"] = report.surrogate_path;
    j["rmse_path"] = report.rmse_path;
    j["trajectory_path"] = report.trajectory_path;
    j["rmse"] = nlohmann::json::parse(rmse_report_json(report.rmse));
    j["seeds"] = nlohmann::json::array();
    for (const auto& o : report.seeds) {
        nlohmann::json s;
        s["seed"] = o.seed;
        s["direct_replications_to_stabilize"] =
            o.direct_episode ? nlohmann::json(*o.direct_episode) : nlohmann::json(nullptr);
        s["finetune_replications_to_stabilize"] =
            o.finetune_episode ? nlohmann::json(*o.finetune_episode)
                               : nlohmann::json(nullptr);
        s["direct_curve"] = o.direct_curve_path;
        s["pretrain_curve"] = o.pretrain_curve_path;
        j["seeds"].push_back(s);
    }
    return j.dump(2);
}

}  // namespace surro
