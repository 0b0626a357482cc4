#include "surro/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "surro/config_io.hpp"

namespace surro {

Normalization Normalization::fit(const std::vector<const double*>& rows, int dim) {
    if (rows.empty()) throw std::invalid_argument("Normalization: empty data");
    Normalization norm;
    norm.mean.assign(dim, 0.0);
    norm.stddev.assign(dim, 0.0);
    norm.constant.assign(dim, false);
    const double n = static_cast<double>(rows.size());
    for (const double* r : rows)
        for (int d = 0; d < dim; ++d) norm.mean[d] += r[d] / n;
    for (const double* r : rows)
        for (int d = 0; d < dim; ++d) {
            const double diff = r[d] - norm.mean[d];
            norm.stddev[d] += diff * diff / n;
        }
    for (int d = 0; d < dim; ++d) {
        norm.stddev[d] = std::sqrt(norm.stddev[d]);
        if (norm.stddev[d] <= 1e-12) {
            norm.stddev[d] = 1.0;
            norm.constant[d] = true;
        }
    }
    return norm;
}

std::vector<double> Normalization::standardize(const double* x, int dim) const {
    std::vector<double> z(dim);
    for (int d = 0; d < dim; ++d) z[d] = (x[d] - mean[d]) / stddev[d];
    return z;
}

std::vector<double> Normalization::destandardize(const double* z, int dim) const {
    std::vector<double> x(dim);
    for (int d = 0; d < dim; ++d) x[d] = z[d] * stddev[d] + mean[d];
    return x;
}

SurrogateRow make_row(const EpochRecord& rec) {
    SurrogateRow row;
    int i = 0;
    for (double v : rec.obs) row.input[i++] = v;
    for (int v : rec.action) row.input[i++] = v;
    for (int v : rec.arrivals) row.input[i++] = v;
    int t = 0;
    for (double v : rec.next_obs) row.target[t++] = v;
    for (double v : rec.kpis.W) row.target[t++] = v;
    for (double v : rec.kpis.A) row.target[t++] = v;
    for (double v : rec.kpis.U) row.target[t++] = v;
    for (int v : rec.kpis.B) row.target[t++] = v;
    return row;
}

SurrogateDataset build_dataset(const std::vector<EpochRecord>& records,
                               double holdout_fraction, std::uint64_t seed) {
    if (records.empty()) throw std::invalid_argument("build_dataset: no records");
    std::map<int, std::vector<const EpochRecord*>> by_rep;
    for (const auto& rec : records) by_rep[rec.replication].push_back(&rec);
    for (const auto& [rep, recs] : by_rep) {
        std::set<int> epochs;
        for (const auto* r : recs)
            if (!epochs.insert(r->epoch).second)
                throw std::runtime_error("build_dataset: duplicate replication id " +
                                         std::to_string(rep));
    }
    const std::size_t n_reps = by_rep.size();
    if (n_reps < 2)
        throw std::invalid_argument("build_dataset: need at least 2 replications to split");

    std::vector<int> rep_ids;
    for (const auto& [rep, recs] : by_rep) rep_ids.push_back(rep);
    RngStream stream(seed, 0);
    for (std::size_t i = rep_ids.size(); i > 1; --i)
        std::swap(rep_ids[i - 1], rep_ids[stream.uniform_int(i)]);

    std::size_t n_holdout = static_cast<std::size_t>(
        std::llround(holdout_fraction * static_cast<double>(n_reps)));
    n_holdout = std::clamp<std::size_t>(n_holdout, 1, n_reps - 1);

    SurrogateDataset ds;
    for (std::size_t i = 0; i < rep_ids.size(); ++i) {
        auto& split = i < n_holdout ? ds.holdout : ds.train;
        for (const auto* rec : by_rep[rep_ids[i]]) split.push_back(make_row(*rec));
    }
    return ds;
}

namespace {

RmseReport report_from_dims(const std::array<double, kSurrogateTargetDim>& per_dim) {
    RmseReport rep;
    for (int d = 0; d < 7; ++d) rep.next_state[d] = per_dim[d];
    for (int d = 0; d < 2; ++d) rep.waiting[d] = per_dim[7 + d];
    for (int d = 0; d < 2; ++d) rep.abandonment[d] = per_dim[9 + d];
    for (int d = 0; d < 3; ++d) rep.utilization[d] = per_dim[11 + d];
    for (int d = 0; d < 3; ++d) rep.backoffice[d] = per_dim[14 + d];
    return rep;
}

}  // namespace

RmseReport evaluate_rmse(const SurrogateModel& model,
                         const std::vector<SurrogateRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("evaluate_rmse: no rows");
    std::array<double, kSurrogateTargetDim> sq{};
    for (const auto& row : rows) {
        const auto zin = model.input_norm.standardize(row.input.data(), kSurrogateInputDim);
        const auto zout = forward(model.net, zin);
        const auto pred = model.target_norm.destandardize(zout.data(), kSurrogateTargetDim);
        for (int d = 0; d < kSurrogateTargetDim; ++d) {
            const double err = pred[d] - row.target[d];
            sq[d] += err * err;
        }
    }
    for (auto& v : sq) v = std::sqrt(v / static_cast<double>(rows.size()));
    return report_from_dims(sq);
}

std::pair<SurrogateModel, RmseReport> train_surrogate(
    const SurrogateDataset& dataset, const InputModels& input_models,
    const SurrogateTrainConfig& cfg, std::uint64_t seed) {
    if (dataset.train.empty()) throw std::invalid_argument("train_surrogate: empty train split");

    SurrogateModel model;
    model.input_models = input_models;
    {
        std::vector<const double*> in_ptrs, out_ptrs;
        for (const auto& row : dataset.train) {
            in_ptrs.push_back(row.input.data());
            out_ptrs.push_back(row.target.data());
        }
        model.input_norm = Normalization::fit(in_ptrs, kSurrogateInputDim);
        model.target_norm = Normalization::fit(out_ptrs, kSurrogateTargetDim);
    }

    RngStream init_stream(seed, 0);
    std::vector<int> dims;
    dims.push_back(kSurrogateInputDim);
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(kSurrogateTargetDim);
    model.net = Mlp::init(dims, cfg.dropout_rate, init_stream);

    // pre-standardized copies of the training rows
    std::vector<std::vector<double>> inputs, targets;
    inputs.reserve(dataset.train.size());
    for (const auto& row : dataset.train) {
        inputs.push_back(model.input_norm.standardize(row.input.data(), kSurrogateInputDim));
        targets.push_back(model.target_norm.standardize(row.target.data(), kSurrogateTargetDim));
    }

    OptimizerState opt = OptimizerState::create(model.net, cfg.learning_rate);
    RngStream train_stream(seed, 1);
    std::vector<std::size_t> order(inputs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Gradients grads;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[train_stream.uniform_int(i)]);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.minibatch)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch));
            Minibatch mb;
            for (std::size_t i = start; i < end; ++i) {
                mb.inputs.push_back(inputs[order[i]]);
                mb.targets.push_back(targets[order[i]]);
            }
            const double loss = backward(model.net, mb, grads, /*training=*/true,
                                         &train_stream);
            if (!std::isfinite(loss))
                throw std::runtime_error("train_surrogate: loss diverged at epoch " +
                                         std::to_string(epoch));
            optimizer_step(model.net, grads, opt);
        }
    }
    model.trained = true;
    const auto& eval_rows = dataset.holdout.empty() ? dataset.train : dataset.holdout;
    RmseReport report = evaluate_rmse(model, eval_rows);
    return {std::move(model), report};
}

SurrogateStep surrogate_step(const SurrogateModel& model, const Observation& state,
                             const ActionVector& action, RngStream& stream) {
    if (!model.trained) throw std::runtime_error("surrogate_step: model not trained");
    SurrogateStep out;
    std::array<double, kSurrogateInputDim> input{};
    int i = 0;
    for (double v : state) input[i++] = v;
    for (int v : action) input[i++] = v;
    for (int g = 0; g < 2; ++g) {
        out.arrivals[g] =
            static_cast<int>(stream.poisson(model.input_models.arrival_rate_per_epoch[g]));
        input[i++] = out.arrivals[g];
    }
    const auto zin = model.input_norm.standardize(input.data(), kSurrogateInputDim);
    const auto zout = forward(model.net, zin);  // dropout off
    const auto pred = model.target_norm.destandardize(zout.data(), kSurrogateTargetDim);

    for (int d = 0; d < 7; ++d) out.next_state[d] = pred[d];
    // queue lengths and per-group backlogs are counts
    for (int d = 0; d < 5; ++d)
        out.next_state[d] = std::max(0.0, std::round(out.next_state[d]));
    out.next_state[5] = std::max(0.0, out.next_state[5]);

    for (int d = 0; d < 2; ++d) {
        out.kpis.W[d] = std::max(0.0, pred[7 + d]);
        out.kpis.A[d] = std::clamp(pred[9 + d], 0.0, 1.0);
    }
    for (int d = 0; d < 3; ++d) {
        out.kpis.U[d] = std::clamp(pred[11 + d], 0.0, 1.0);
        out.kpis.B[d] = static_cast<int>(std::max(0.0, std::round(pred[14 + d])));
    }
    return out;
}

SurrogateEnvironment::SurrogateEnvironment(SurrogateModel model,
                                           Observation initial_state, RewardSpec reward,
                                           int horizon, std::uint64_t seed)
    : model_(std::move(model)), initial_state_(initial_state), reward_(std::move(reward)),
      horizon_(horizon), seed_(seed), stream_(seed, 0), state_(initial_state) {
    if (!model_.trained) throw std::runtime_error("SurrogateEnvironment: model not trained");
    if (horizon_ <= 0) throw std::invalid_argument("SurrogateEnvironment: horizon must be positive");
}

Observation SurrogateEnvironment::reset() {
    stream_ = RngStream(seed_, next_replication_++);
    state_ = initial_state_;
    epoch_ = 0;
    return state_;
}

StepResult SurrogateEnvironment::step(const ActionVector& action) {
    if (epoch_ >= horizon_) throw std::runtime_error("SurrogateEnvironment: episode complete");
    const SurrogateStep s = surrogate_step(model_, state_, action, stream_);
    StepResult result;
    result.kpis = s.kpis;
    result.obs = s.next_state;
    result.arrivals = s.arrivals;
    result.reward = compute_reward(s.kpis, reward_);
    epoch_ += 1;
    result.done = epoch_ >= horizon_;
    if (result.done) result.reward += terminal_reward(s.kpis, reward_);
    state_ = s.next_state;
    return result;
}

namespace {
nlohmann::json norm_to_json(const Normalization& n) {
    return {{"mean", n.mean},
            {"stddev", n.stddev},
            {"constant", std::vector<int>(n.constant.begin(), n.constant.end())}};
}

Normalization norm_from_json(const nlohmann::json& j) {
    Normalization n;
    n.mean = j.at("mean").get<std::vector<double>>();
    n.stddev = j.at("stddev").get<std::vector<double>>();
    const auto c = j.at("constant").get<std::vector<int>>();
    n.constant.assign(c.begin(), c.end());
    if (n.mean.size() != n.stddev.size() || n.mean.size() != n.constant.size())
        throw std::runtime_error("surrogate: inconsistent normalization vectors");
    return n;
}

}  // namespace

std::string save_surrogate(const SurrogateModel& model) {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["trained"] = model.trained;
    doc["net"] = nlohmann::json::parse(save_weights(model.net));
    doc["input_norm"] = norm_to_json(model.input_norm);
    doc["target_norm"] = norm_to_json(model.target_norm);
    nlohmann::json im;
    im["arrival_rate_per_epoch"] = model.input_models.arrival_rate_per_epoch;
    im["service"] = {distribution_to_json(model.input_models.service[0]),
                     distribution_to_json(model.input_models.service[1])};
    im["patience"] = {distribution_to_json(model.input_models.patience[0]),
                      distribution_to_json(model.input_models.patience[1])};
    im["backoffice_duration"] = distribution_to_json(model.input_models.backoffice_duration);
    doc["input_models"] = im;
    return doc.dump(2);
}

SurrogateModel load_surrogate(const std::string& document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("surrogate: parse error: ") + e.what());
    }
    SurrogateModel model;
    model.net = load_weights(doc.at("net").dump());
    model.input_norm = norm_from_json(doc.at("input_norm"));
    model.target_norm = norm_from_json(doc.at("target_norm"));
    const auto& im = doc.at("input_models");
    const auto rates = im.at("arrival_rate_per_epoch").get<std::vector<double>>();
    if (rates.size() != 2) throw std::runtime_error("surrogate: bad arrival rates");
    model.input_models.arrival_rate_per_epoch = {rates[0], rates[1]};
    for (int g = 0; g < 2; ++g) {
        model.input_models.service[g] = distribution_from_json(im.at("service")[g]);
        model.input_models.patience[g] = distribution_from_json(im.at("patience")[g]);
    }
    model.input_models.backoffice_duration =
        distribution_from_json(im.at("backoffice_duration"));
    model.trained = doc.at("trained").get<bool>();
    return model;
}

std::string rmse_report_json(const RmseReport& report) {
    nlohmann::json j;
    j["waiting"] = report.waiting;
    j["abandonment"] = report.abandonment;
    j["utilization"] = report.utilization;
    j["backoffice"] = report.backoffice;
    j["next_state"] = report.next_state;
    return j.dump(2);
}

}  // namespace surro
