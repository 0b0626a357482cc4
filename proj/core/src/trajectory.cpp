#include "surro/trajectory.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace surro {

namespace {
template <typename T, std::size_t N>
std::array<T, N> to_array(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != N)
        throw std::runtime_error(std::string("trajectory: bad field ") + what);
    std::array<T, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<T>();
    return out;
}
}  // namespace

std::string to_jsonl_line(const EpochRecord& rec) {
    nlohmann::json j;
    j["replication"] = rec.replication;
    j["epoch"] = rec.epoch;
    j["obs"] = rec.obs;
    j["arrivals"] = rec.arrivals;
    j["action"] = rec.action;
    j["kpis"] = {{"W", rec.kpis.W}, {"A", rec.kpis.A}, {"U", rec.kpis.U}, {"B", rec.kpis.B}};
    j["reward"] = rec.reward;
    j["next_obs"] = rec.next_obs;
    j["done"] = rec.done;
    return j.dump();
}

EpochRecord from_jsonl_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("trajectory: parse error: ") + e.what());
    }
    EpochRecord rec;
    try {
        rec.replication = j.at("replication").get<int>();
        rec.epoch = j.at("epoch").get<int>();
        rec.obs = to_array<double, 7>(j.at("obs"), "obs");
        rec.arrivals = to_array<int, 2>(j.at("arrivals"), "arrivals");
        rec.action = to_array<int, 4>(j.at("action"), "action");
        const auto& k = j.at("kpis");
        rec.kpis.W = to_array<double, 2>(k.at("W"), "kpis.W");
        rec.kpis.A = to_array<double, 2>(k.at("A"), "kpis.A");
        rec.kpis.U = to_array<double, 3>(k.at("U"), "kpis.U");
        rec.kpis.B = to_array<int, 3>(k.at("B"), "kpis.B");
        rec.reward = j.at("reward").get<double>();
        rec.next_obs = to_array<double, 7>(j.at("next_obs"), "next_obs");
        rec.done = j.at("done").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("trajectory: bad record: ") + e.what());
    }
    return rec;
}

void write_trajectories(std::ostream& out, const std::vector<EpochRecord>& records) {
    for (const auto& rec : records) out << to_jsonl_line(rec) << '\n';
}

std::vector<EpochRecord> read_trajectories(std::istream& in) {
    std::vector<EpochRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(from_jsonl_line(line));
    }
    return records;
}

void write_trajectories_file(const std::string& path,
                             const std::vector<EpochRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("trajectory: cannot open " + path);
    write_trajectories(out, records);
}

std::vector<EpochRecord> read_trajectories_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("trajectory: cannot open " + path);
    return read_trajectories(in);
}

}  // namespace surro
