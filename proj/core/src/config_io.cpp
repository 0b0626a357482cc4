#include "surro/config_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace surro {

nlohmann::json distribution_to_json(const DistributionSpec& d) {
    nlohmann::json j;
    j["kind"] = d.kind_name();
    switch (d.kind) {
        case DistributionSpec::Kind::Gamma:
            j["shape"] = d.a;
            j["scale"] = d.b;
            break;
        case DistributionSpec::Kind::Lognormal:
            j["mu"] = d.a;
            j["sigma"] = d.b;
            break;
        case DistributionSpec::Kind::Exponential:
            j["rate"] = d.a;
            break;
        case DistributionSpec::Kind::Deterministic:
            j["value"] = d.a;
            break;
    }
    return j;
}

DistributionSpec distribution_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "gamma")
        return DistributionSpec::gamma(j.at("shape").get<double>(),
                                       j.at("scale").get<double>());
    if (kind == "lognormal") {
        if (j.contains("mean"))  // moment parameterization
            return DistributionSpec::lognormal_from_moments(j.at("mean").get<double>(),
                                                            j.at("variance").get<double>());
        return DistributionSpec::lognormal(j.at("mu").get<double>(),
                                           j.at("sigma").get<double>());
    }
    if (kind == "exponential")
        return DistributionSpec::exponential(j.at("rate").get<double>());
    if (kind == "deterministic")
        return DistributionSpec::deterministic(j.at("value").get<double>());
    throw std::invalid_argument("distribution: unknown kind \"" + kind + "\"");
}

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

std::vector<PenaltyStep> penalties_from_json(const nlohmann::json& j, const std::string& path) {
    std::vector<PenaltyStep> steps;
    if (!j.is_array()) throw std::invalid_argument(path + ": expected an array");
    double prev = -1e300;
    for (const auto& e : j) {
        PenaltyStep s;
        s.threshold = e.at("threshold").get<double>();
        s.penalty = e.at("penalty").get<double>();
        if (s.penalty > 0.0)
            throw std::invalid_argument(path + ": penalties must be <= 0");
        if (s.threshold < prev)
            throw std::invalid_argument(path + ": thresholds must be nondecreasing");
        prev = s.threshold;
        steps.push_back(s);
    }
    return steps;
}

nlohmann::json penalties_to_json(const std::vector<PenaltyStep>& steps) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : steps)
        j.push_back({{"threshold", s.threshold}, {"penalty", s.penalty}});
    return j;
}

RewardSpec reward_from_json(const nlohmann::json& j, const std::string& path) {
    RewardSpec r;
    const auto& w = j.at("waiting");
    const auto& a = j.at("abandonment");
    const auto& u = j.at("utilization");
    if (w.size() != 2 || a.size() != 2)
        throw std::invalid_argument(path + ": waiting/abandonment need 2 contact-group entries");
    if (u.size() != 3)
        throw std::invalid_argument(path + ": utilization needs 3 expert-group entries");
    for (int g = 0; g < 2; ++g) {
        r.waiting[g] = penalties_from_json(w[g], path + ".waiting[" + std::to_string(g) + "]");
        r.abandonment[g] =
            penalties_from_json(a[g], path + ".abandonment[" + std::to_string(g) + "]");
    }
    for (int e = 0; e < 3; ++e)
        r.utilization[e] =
            penalties_from_json(u[e], path + ".utilization[" + std::to_string(e) + "]");
    r.terminal_per_task = j.at("terminal_per_task").get<double>();
    if (r.terminal_per_task > 0.0)
        throw std::invalid_argument(path + ".terminal_per_task: must be <= 0");
    return r;
}

nlohmann::json reward_to_json(const RewardSpec& r) {
    nlohmann::json j;
    j["waiting"] = {penalties_to_json(r.waiting[0]), penalties_to_json(r.waiting[1])};
    j["abandonment"] = {penalties_to_json(r.abandonment[0]),
                        penalties_to_json(r.abandonment[1])};
    j["utilization"] = {penalties_to_json(r.utilization[0]),
                        penalties_to_json(r.utilization[1]),
                        penalties_to_json(r.utilization[2])};
    j["terminal_per_task"] = r.terminal_per_task;
    return j;
}

}  // namespace

ResolvedConfig default_config() {
    ResolvedConfig cfg;
    cfg.seed = 1;
    cfg.callcenter = CallCenterConfig::defaults();
    cfg.reward = RewardSpec::original();
    cfg.reward_modified = RewardSpec::modified();
    cfg.dqn = DqnConfig{};
    // call-center episode rewards run to the tens of thousands; scaled TD
    // targets keep the Q-network in a trainable range at lr 1e-4
    cfg.dqn.reward_scale = 1e-3;
    cfg.surrogate = SurrogateTrainConfig{};
    cfg.experiment = ExperimentSpec{};
    return cfg;
}

ResolvedConfig parse_config(const nlohmann::json& doc) {
    ResolvedConfig cfg = default_config();
    cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);

    auto& cc = cfg.callcenter;
    if (doc.contains("contact_groups")) {
        const auto& groups = doc.at("contact_groups");
        if (groups.size() != 2)
            throw std::invalid_argument("contact_groups: exactly 2 entries required");
        for (int g = 0; g < 2; ++g) {
            const auto& e = groups[g];
            const std::string path = "contact_groups[" + std::to_string(g) + "]";
            auto& group = cc.contact_groups[g];
            group.arrival_rate_per_epoch =
                get_or<double>(e, "arrival_rate_per_epoch", group.arrival_rate_per_epoch);
            if (group.arrival_rate_per_epoch < 0.0)
                throw std::invalid_argument(path + ".arrival_rate_per_epoch: must be nonnegative");
            if (e.contains("service")) group.service = distribution_from_json(e.at("service"));
            if (e.contains("patience")) group.patience = distribution_from_json(e.at("patience"));
        }
    }
    if (doc.contains("expert_groups")) {
        const auto& groups = doc.at("expert_groups");
        if (groups.size() != 3)
            throw std::invalid_argument("expert_groups: exactly 3 entries required");
        for (int e = 0; e < 3; ++e)
            cc.expert_group_sizes[e] = groups[e].at("size").get<int>();
    }
    if (doc.contains("routing")) {
        const auto& rows = doc.at("routing");
        if (rows.size() != 3)
            throw std::invalid_argument("routing: 3 expert-group rows required");
        for (int e = 0; e < 3; ++e) {
            if (rows[e].size() != 2)
                throw std::invalid_argument("routing[" + std::to_string(e) +
                                            "]: 2 contact-group entries required");
            for (int g = 0; g < 2; ++g) cc.routing[e][g] = rows[e][g].get<bool>();
        }
    }
    cc.epoch_length = get_or<double>(doc, "epoch_length_minutes", cc.epoch_length);
    cc.horizon = get_or<int>(doc, "horizon_epochs", cc.horizon);
    cc.backoffice_tasks_per_expert =
        get_or<int>(doc, "backoffice_tasks_per_expert", cc.backoffice_tasks_per_expert);
    if (doc.contains("backoffice_duration"))
        cc.backoffice_duration = distribution_from_json(doc.at("backoffice_duration"));
    cc.validate();

    if (doc.contains("reward")) cfg.reward = reward_from_json(doc.at("reward"), "reward");
    if (doc.contains("reward_modified"))
        cfg.reward_modified = reward_from_json(doc.at("reward_modified"), "reward_modified");

    if (doc.contains("dqn")) {
        const auto& d = doc.at("dqn");
        cfg.dqn.learning_rate = get_or<double>(d, "learning_rate", cfg.dqn.learning_rate);
        cfg.dqn.replay_capacity = get_or<int>(d, "replay_capacity", cfg.dqn.replay_capacity);
        cfg.dqn.minibatch = get_or<int>(d, "minibatch", cfg.dqn.minibatch);
        cfg.dqn.epsilon = get_or<double>(d, "epsilon", cfg.dqn.epsilon);
        cfg.dqn.gamma = get_or<double>(d, "gamma", cfg.dqn.gamma);
        cfg.dqn.reward_scale = get_or<double>(d, "reward_scale", cfg.dqn.reward_scale);
        cfg.dqn.hidden = get_or<std::vector<int>>(d, "hidden", cfg.dqn.hidden);
        cfg.dqn.target_sync_period =
            get_or<int>(d, "target_sync_period", cfg.dqn.target_sync_period);
        cfg.dqn.episodes = get_or<int>(d, "episodes", cfg.dqn.episodes);
    }
    cfg.dqn.validate();

    if (doc.contains("surrogate")) {
        const auto& s = doc.at("surrogate");
        cfg.surrogate.epochs = get_or<int>(s, "epochs", cfg.surrogate.epochs);
        cfg.surrogate.minibatch = get_or<int>(s, "minibatch", cfg.surrogate.minibatch);
        cfg.surrogate.learning_rate =
            get_or<double>(s, "learning_rate", cfg.surrogate.learning_rate);
        cfg.surrogate.dropout_rate =
            get_or<double>(s, "dropout_rate", cfg.surrogate.dropout_rate);
        cfg.surrogate.hidden = get_or<std::vector<int>>(s, "hidden", cfg.surrogate.hidden);
        cfg.surrogate.holdout_fraction =
            get_or<double>(s, "holdout_fraction", cfg.surrogate.holdout_fraction);
        if (cfg.surrogate.epochs <= 0 || cfg.surrogate.minibatch <= 0)
            throw std::invalid_argument("surrogate: epochs and minibatch must be positive");
        if (cfg.surrogate.holdout_fraction <= 0.0 || cfg.surrogate.holdout_fraction >= 1.0)
            throw std::invalid_argument("surrogate.holdout_fraction: must be in (0,1)");
    }

    if (doc.contains("experiment")) {
        const auto& e = doc.at("experiment");
        auto& exp = cfg.experiment;
        if (e.contains("mode")) {
            const auto mode = e.at("mode").get<std::string>();
            if (mode == "direct")
                exp.mode = ExperimentSpec::Mode::Direct;
            else if (mode == "pretrain_finetune")
                exp.mode = ExperimentSpec::Mode::PretrainFinetune;
            else
                throw std::invalid_argument("experiment.mode: unknown mode \"" + mode + "\"");
        }
        exp.collect_replications =
            get_or<int>(e, "collect_replications", exp.collect_replications);
        exp.pretrain_surrogate_episodes =
            get_or<int>(e, "pretrain_surrogate_episodes", exp.pretrain_surrogate_episodes);
        exp.max_episodes = get_or<int>(e, "max_episodes", exp.max_episodes);
        exp.seeds = get_or<std::vector<std::uint64_t>>(e, "seeds", exp.seeds);
        exp.stabilization.window =
            get_or<int>(e, "stabilization_window", exp.stabilization.window);
        exp.stabilization.delta_fraction =
            get_or<double>(e, "stabilization_delta_fraction", exp.stabilization.delta_fraction);
        exp.stabilization.delta_floor =
            get_or<double>(e, "stabilization_delta_floor", exp.stabilization.delta_floor);
        exp.reset_replay_on_finetune =
            get_or<bool>(e, "reset_replay_on_finetune", exp.reset_replay_on_finetune);
    }
    cfg.experiment.validate();
    return cfg;
}

nlohmann::json resolved_to_json(const ResolvedConfig& cfg) {
    nlohmann::json doc;
    doc["seed"] = cfg.seed;
    doc["contact_groups"] = nlohmann::json::array();
    for (int g = 0; g < 2; ++g) {
        const auto& group = cfg.callcenter.contact_groups[g];
        doc["contact_groups"].push_back(
            {{"arrival_rate_per_epoch", group.arrival_rate_per_epoch},
             {"service", distribution_to_json(group.service)},
             {"patience", distribution_to_json(group.patience)}});
    }
    doc["expert_groups"] = nlohmann::json::array();
    for (int e = 0; e < 3; ++e)
        doc["expert_groups"].push_back({{"size", cfg.callcenter.expert_group_sizes[e]}});
    doc["routing"] = nlohmann::json::array();
    for (int e = 0; e < 3; ++e)
        doc["routing"].push_back({cfg.callcenter.routing[e][0], cfg.callcenter.routing[e][1]});
    doc["epoch_length_minutes"] = cfg.callcenter.epoch_length;
    doc["horizon_epochs"] = cfg.callcenter.horizon;
    doc["backoffice_tasks_per_expert"] = cfg.callcenter.backoffice_tasks_per_expert;
    doc["backoffice_duration"] = distribution_to_json(cfg.callcenter.backoffice_duration);
    doc["reward"] = reward_to_json(cfg.reward);
    doc["reward_modified"] = reward_to_json(cfg.reward_modified);
    doc["dqn"] = {{"learning_rate", cfg.dqn.learning_rate},
                  {"replay_capacity", cfg.dqn.replay_capacity},
                  {"minibatch", cfg.dqn.minibatch},
                  {"epsilon", cfg.dqn.epsilon},
                  {"gamma", cfg.dqn.gamma},
                  {"reward_scale", cfg.dqn.reward_scale},
                  {"hidden", cfg.dqn.hidden},
                  {"target_sync_period", cfg.dqn.target_sync_period},
                  {"episodes", cfg.dqn.episodes}};
    doc["surrogate"] = {{"epochs", cfg.surrogate.epochs},
                        {"minibatch", cfg.surrogate.minibatch},
                        {"learning_rate", cfg.surrogate.learning_rate},
                        {"dropout_rate", cfg.surrogate.dropout_rate},
                        {"hidden", cfg.surrogate.hidden},
                        {"holdout_fraction", cfg.surrogate.holdout_fraction}};
    doc["experiment"] = {
        {"mode", cfg.experiment.mode == ExperimentSpec::Mode::Direct ? "direct"
                                                                     : "pretrain_finetune"},
        {"collect_replications", cfg.experiment.collect_replications},
        {"pretrain_surrogate_episodes", cfg.experiment.pretrain_surrogate_episodes},
        {"max_episodes", cfg.experiment.max_episodes},
        {"seeds", cfg.experiment.seeds},
        {"stabilization_window", cfg.experiment.stabilization.window},
        {"stabilization_delta_fraction", cfg.experiment.stabilization.delta_fraction},
        {"stabilization_delta_floor", cfg.experiment.stabilization.delta_floor},
        {"reset_replay_on_finetune", cfg.experiment.reset_replay_on_finetune}};
    return doc;
}

ResolvedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config: parse error in " + path + ": " + e.what());
    }
    try {
        return parse_config(doc);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path + ": " + e.what());
    }
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace surro
