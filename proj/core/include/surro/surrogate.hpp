#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "surro/distributions.hpp"
#include "surro/environment.hpp"
#include "surro/mlp.hpp"
#include "surro/trajectory.hpp"

namespace surro {

inline constexpr int kSurrogateInputDim = 13;   // obs 7 + action 4 + arrivals 2
inline constexpr int kSurrogateTargetDim = 17;  // next obs 7 + W 2 + A 2 + U 3 + B 3

struct SurrogateRow {
    std::array<double, kSurrogateInputDim> input{};
    std::array<double, kSurrogateTargetDim> target{};
};

struct SurrogateDataset {
    std::vector<SurrogateRow> train;
    std::vector<SurrogateRow> holdout;
};

// Per-feature standardization; zero-variance features keep std 1 and are
// flagged so de-standardization is exact.
struct Normalization {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> constant;

    static Normalization fit(const std::vector<const double*>& rows, int dim);
    std::vector<double> standardize(const double* x, int dim) const;
    std::vector<double> destandardize(const double* z, int dim) const;
};

struct SurrogateModel {
    Mlp net;  // 13 -> 64 -> 64 -> 17, dropout 0.1
    Normalization input_norm;
    Normalization target_norm;
    InputModels input_models;
    bool trained = false;
};

struct RmseReport {
    std::array<double, 2> waiting{};
    std::array<double, 2> abandonment{};
    std::array<double, 3> utilization{};
    std::array<double, 3> backoffice{};
    std::array<double, 7> next_state{};
};

struct SurrogateTrainConfig {
    int epochs = 200;
    int minibatch = 32;
    double learning_rate = 1e-3;
    double dropout_rate = 0.1;
    std::vector<int> hidden = {64, 64};
    double holdout_fraction = 0.2;
};

SurrogateRow make_row(const EpochRecord& rec);

// One row per recorded epoch; whole replications are kept together in a
// deterministic shuffled 80/20 split.
SurrogateDataset build_dataset(const std::vector<EpochRecord>& records,
                               double holdout_fraction, std::uint64_t seed);

std::pair<SurrogateModel, RmseReport> train_surrogate(
    const SurrogateDataset& dataset, const InputModels& input_models,
    const SurrogateTrainConfig& cfg, std::uint64_t seed);

RmseReport evaluate_rmse(const SurrogateModel& model,
                         const std::vector<SurrogateRow>& rows);

// One generative transition: arrival counts sampled from the fitted input
// models, then a deterministic de-standardized forward pass with validity
// clamps (A, U to [0,1]; W, B, queue lengths to >= 0; B and queue lengths
// rounded to integers).
struct SurrogateStep {
    EpochKpis kpis;
    Observation next_state{};
    std::array<int, 2> arrivals{};
};
SurrogateStep surrogate_step(const SurrogateModel& model, const Observation& state,
                             const ActionVector& action, RngStream& stream);

// Drop-in environment over a trained surrogate. reward_spec is applied to
// predicted KPIs, so a reward change needs no surrogate re-fit.
class SurrogateEnvironment final : public Environment {
public:
    SurrogateEnvironment(SurrogateModel model, Observation initial_state,
                         RewardSpec reward, int horizon, std::uint64_t seed);

    Observation reset() override;
    StepResult step(const ActionVector& action) override;
    Observation observe() const override { return state_; }
    int horizon() const override { return horizon_; }

private:
    SurrogateModel model_;
    Observation initial_state_;
    RewardSpec reward_;
    int horizon_;
    std::uint64_t seed_;
    std::uint64_t next_replication_ = 0;
    RngStream stream_;
    Observation state_{};
    int epoch_ = 0;
};

std::string save_surrogate(const SurrogateModel& model);
SurrogateModel load_surrogate(const std::string& document);

std::string rmse_report_json(const RmseReport& report);

}  // namespace surro
