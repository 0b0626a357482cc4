#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "surro/callcenter.hpp"
#include "surro/dqn.hpp"
#include "surro/pipeline.hpp"
#include "surro/surrogate.hpp"

namespace surro {

nlohmann::json distribution_to_json(const DistributionSpec& d);
DistributionSpec distribution_from_json(const nlohmann::json& j);

// Fully resolved run configuration: every invariant checked, defaults
// applied for omitted optional fields.
struct ResolvedConfig {
    std::uint64_t seed = 1;
    CallCenterConfig callcenter;
    RewardSpec reward;           // active reward
    RewardSpec reward_modified;  // second reward for the reward-change experiment
    DqnConfig dqn;
    SurrogateTrainConfig surrogate;
    ExperimentSpec experiment;
};

ResolvedConfig parse_config(const nlohmann::json& doc);
nlohmann::json resolved_to_json(const ResolvedConfig& cfg);

ResolvedConfig load_config_file(const std::string& path);

// The shipped default: the full call-center parameter set with both reward
// structures.
ResolvedConfig default_config();

// write-temp-then-rename
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace surro
