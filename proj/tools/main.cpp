// Command-line front end for the call-center simulation, the DQN trainer,
// the surrogate pipeline, and the speedup experiments.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "surro/config_io.hpp"
#include "surro/pipeline.hpp"

namespace fs = std::filesystem;
using namespace surro;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file (defaults applied when omitted)");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed_override, "seed override");
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

ResolvedConfig load(const CommonOpts& opts) {
    ResolvedConfig cfg =
        opts.config_path.empty() ? default_config() : load_config_file(opts.config_path);
    if (opts.seed_override) cfg.seed = *opts.seed_override;
    return cfg;
}

// Every run echoes its fully resolved config for provenance; re-running with
// the snapshot and the same seed reproduces outputs byte-identically.
void snapshot(const ResolvedConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    write_file_atomic((fs::path(out_dir) / "resolved_config.json").string(),
                      resolved_to_json(cfg).dump(2) + "\n");
}

Policy policy_from_weights(const std::string& qnet_path, double epsilon,
                           std::uint64_t seed) {
    auto stream = std::make_shared<RngStream>(seed, 0);
    if (qnet_path.empty()) {
        // all-front-office baseline
        return [](const Observation&) { return ActionVector{0, 0, 0, 0}; };
    }
    auto net = std::make_shared<Mlp>(load_weights(read_file(qnet_path)));
    return [net, stream, epsilon](const Observation& obs) {
        return decode_action(select_action(*net, obs, epsilon, *stream));
    };
}

std::vector<EpochRecord> roll_trajectories(const ResolvedConfig& cfg, const Policy& policy,
                                           int replications) {
    std::vector<EpochRecord> records;
    for (int rep = 0; rep < replications; ++rep) {
        RngStream stream(cfg.seed, static_cast<std::uint64_t>(rep));
        const ReplicationResult rr =
            run_replication(cfg.callcenter, cfg.reward, policy, stream);
        for (std::size_t j = 0; j < rr.steps.size(); ++j) {
            EpochRecord rec;
            rec.replication = rep;
            rec.epoch = static_cast<int>(j);
            rec.obs = rr.obs[j];
            rec.arrivals = rr.steps[j].arrivals;
            rec.action = rr.actions[j];
            rec.kpis = rr.steps[j].kpis;
            rec.reward = rr.steps[j].reward;
            rec.next_obs = rr.steps[j].obs;
            rec.done = rr.steps[j].done;
            records.push_back(rec);
        }
    }
    return records;
}

int run(int argc, char** argv) {
    CLI::App app{"surrogate-accelerated DQN training on a call-center simulation"};
    app.require_subcommand(1);

    CommonOpts sim_opts;
    int sim_replications = 1;
    std::string sim_qnet;
    auto* sim = app.add_subcommand("simulate", "run simulation replications, write trajectories");
    add_common(sim, sim_opts);
    sim->add_option("--replications", sim_replications, "replication count");
    sim->add_option("--qnet", sim_qnet, "roll out a saved Q-network (epsilon-greedy)");

    CommonOpts td_opts;
    std::optional<int> td_episodes;
    auto* td = app.add_subcommand("train-direct", "train DQN against the simulation");
    add_common(td, td_opts);
    td->add_option("--episodes", td_episodes, "episode budget");

    CommonOpts col_opts;
    std::optional<int> col_replications;
    std::string col_qnet;
    auto* col = app.add_subcommand("collect", "record trajectories under a policy");
    add_common(col, col_opts);
    col->add_option("--replications", col_replications, "replication count");
    col->add_option("--qnet", col_qnet, "policy network weight file");

    CommonOpts fit_opts;
    std::string fit_trajectories;
    auto* fit = app.add_subcommand("fit-surrogate", "fit the surrogate from a trajectory file");
    add_common(fit, fit_opts);
    fit->add_option("--trajectories", fit_trajectories, "trajectory JSONL file")->required();

    CommonOpts pf_opts;
    std::string pf_surrogate;
    std::optional<int> pf_episodes;
    auto* pf = app.add_subcommand("pretrain-finetune",
                                  "train on the surrogate, then fine-tune on the simulation");
    add_common(pf, pf_opts);
    pf->add_option("--surrogate", pf_surrogate, "surrogate model file")->required();
    pf->add_option("--episodes", pf_episodes, "fine-tune episode budget");

    CommonOpts exp_opts;
    bool exp_reward_change = false;
    auto* exp = app.add_subcommand("experiment", "full direct-vs-pretraining comparison");
    add_common(exp, exp_opts);
    exp->add_flag("--reward-change", exp_reward_change,
                  "evaluate under the modified reward (surrogate still fitted under the original)");

    CommonOpts rep_opts;
    std::string rep_path;
    auto* rep = app.add_subcommand("report", "summarize an experiment report");
    add_common(rep, rep_opts);
    rep->add_option("--report", rep_path, "report JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage message
        return 1;
    }

    if (sim->parsed()) {
        const ResolvedConfig cfg = load(sim_opts);
        snapshot(cfg, sim_opts.out_dir);
        const Policy policy =
            policy_from_weights(sim_qnet, cfg.dqn.epsilon, cfg.seed ^ 0x5157);
        const auto records = roll_trajectories(cfg, policy, sim_replications);
        const std::string path = (fs::path(sim_opts.out_dir) / "trajectories.jsonl").string();
        std::ostringstream buf;
        write_trajectories(buf, records);
        write_file_atomic(path, buf.str());
        if (!sim_opts.quiet)
            std::cout << "wrote " << records.size() << " epoch records to " << path << "\n";
        return 0;
    }

    if (td->parsed()) {
        const ResolvedConfig cfg = load(td_opts);
        snapshot(cfg, td_opts.out_dir);
        const int episodes = td_episodes.value_or(cfg.dqn.episodes);
        SimEnvironment env(cfg.callcenter, cfg.reward, cfg.seed);
        DqnAgent agent(cfg.dqn, cfg.seed ^ 0xD47);
        LearningCurve curve;
        agent.run_episodes(env, episodes, "direct", true, curve);
        write_file_atomic((fs::path(td_opts.out_dir) / "curve.csv").string(),
                          curve_to_csv(curve));
        write_file_atomic((fs::path(td_opts.out_dir) / "qnet.json").string(),
                          save_weights(agent.qnet()));
        if (!td_opts.quiet)
            std::cout << "trained " << episodes << " episodes; outputs in "
                      << td_opts.out_dir << "\n";
        return 0;
    }

    if (col->parsed()) {
        const ResolvedConfig cfg = load(col_opts);
        snapshot(cfg, col_opts.out_dir);
        const int n = col_replications.value_or(cfg.experiment.collect_replications);
        const Policy policy =
            policy_from_weights(col_qnet, cfg.dqn.epsilon, cfg.seed ^ 0xC0);
        const auto records = roll_trajectories(cfg, policy, n);
        const std::string path = (fs::path(col_opts.out_dir) / "trajectories.jsonl").string();
        std::ostringstream buf;
        write_trajectories(buf, records);
        write_file_atomic(path, buf.str());
        if (!col_opts.quiet)
            std::cout << "collected " << n << " replications to " << path << "\n";
        return 0;
    }

    if (fit->parsed()) {
        const ResolvedConfig cfg = load(fit_opts);
        snapshot(cfg, fit_opts.out_dir);
        const auto records = read_trajectories_file(fit_trajectories);
        std::vector<std::array<int, 2>> counts;
        for (const auto& r : records) counts.push_back(r.arrivals);
        const InputModels input_models = fit_input_models(
            counts,
            {cfg.callcenter.contact_groups[0].service, cfg.callcenter.contact_groups[1].service},
            {cfg.callcenter.contact_groups[0].patience, cfg.callcenter.contact_groups[1].patience},
            cfg.callcenter.backoffice_duration);
        const auto dataset =
            build_dataset(records, cfg.surrogate.holdout_fraction, cfg.seed ^ 0xDA7A);
        auto [model, rmse] = train_surrogate(dataset, input_models, cfg.surrogate,
                                             cfg.seed ^ 0xF17);
        write_file_atomic((fs::path(fit_opts.out_dir) / "surrogate.json").string(),
                          save_surrogate(model));
        write_file_atomic((fs::path(fit_opts.out_dir) / "rmse.json").string(),
                          rmse_report_json(rmse));
        if (!fit_opts.quiet)
            std::cout << "surrogate fitted from " << records.size() << " rows; RMSE in "
                      << fit_opts.out_dir << "/rmse.json\n";
        return 0;
    }

    if (pf->parsed()) {
        const ResolvedConfig cfg = load(pf_opts);
        snapshot(cfg, pf_opts.out_dir);
        const SurrogateModel model = load_surrogate(read_file(pf_surrogate));
        const int finetune = pf_episodes.value_or(cfg.experiment.max_episodes);
        const LearningCurve curve = run_pretrain_finetune(
            cfg.callcenter, cfg.reward, model, cfg.dqn,
            cfg.experiment.pretrain_surrogate_episodes, finetune,
            cfg.experiment.reset_replay_on_finetune, cfg.seed);
        write_file_atomic((fs::path(pf_opts.out_dir) / "curve.csv").string(),
                          curve_to_csv(curve));
        if (!pf_opts.quiet)
            std::cout << "pretrain+finetune curve written to " << pf_opts.out_dir
                      << "/curve.csv\n";
        return 0;
    }

    if (exp->parsed()) {
        ResolvedConfig cfg = load(exp_opts);
        snapshot(cfg, exp_opts.out_dir);
        ExperimentSpec spec = cfg.experiment;
        if (exp_opts.seed_override) {
            // --seed rebases the per-seed list
            for (std::size_t i = 0; i < spec.seeds.size(); ++i)
                spec.seeds[i] = *exp_opts.seed_override + i;
        }
        const RewardSpec& eval_reward = exp_reward_change ? cfg.reward_modified : cfg.reward;
        const ExperimentReport report =
            run_experiment(cfg.callcenter, cfg.reward, eval_reward, cfg.dqn, cfg.surrogate,
                           spec, exp_opts.out_dir);
        if (!exp_opts.quiet) {
            std::cout << "median direct replications:   " << report.median_direct << "\n"
                      << "median finetune replications: " << report.median_finetune << "\n"
                      << "speedup ratio:                " << report.speedup_ratio << "\n"
                      << "report: " << exp_opts.out_dir << "/report.json\n";
        }
        return 0;
    }

    if (rep->parsed()) {
        const auto doc = nlohmann::json::parse(read_file(rep_path));
        std::cout << "speedup ratio: " << doc.at("speedup_ratio").dump() << "\n"
                  << "median direct: " << doc.at("median_direct_replications").dump()
                  << ", median finetune: " << doc.at("median_finetune_replications").dump()
                  << "\n";
        for (const auto& s : doc.at("seeds"))
            std::cout << "  seed " << s.at("seed").dump() << ": direct "
                      << s.at("direct_replications_to_stabilize").dump() << ", finetune "
                      << s.at("finetune_replications_to_stabilize").dump() << "\n";
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
