#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "surro/environment.hpp"

namespace surro {

// One JSONL row of a trajectory file.
struct EpochRecord {
    int replication = 0;
    int epoch = 0;
    Observation obs{};
    std::array<int, 2> arrivals{};
    ActionVector action{};
    EpochKpis kpis;
    double reward = 0.0;
    Observation next_obs{};
    bool done = false;
};

std::string to_jsonl_line(const EpochRecord& rec);
EpochRecord from_jsonl_line(const std::string& line);

void write_trajectories(std::ostream& out, const std::vector<EpochRecord>& records);
std::vector<EpochRecord> read_trajectories(std::istream& in);

void write_trajectories_file(const std::string& path,
                             const std::vector<EpochRecord>& records);
std::vector<EpochRecord> read_trajectories_file(const std::string& path);

}  // namespace surro
