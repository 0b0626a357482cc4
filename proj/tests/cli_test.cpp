#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SURRO_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe))
        r.output.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("surro_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("simulate writes trajectories and a resolved config snapshot") {
    const fs::path dir = fresh_dir("simulate");
    const auto r = run_cli("simulate --replications 3 --seed 11 --quiet --out " +
                           dir.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "trajectories.jsonl"));
    CHECK(fs::exists(dir / "resolved_config.json"));
    CHECK(count_lines(slurp(dir / "trajectories.jsonl")) == 3 * 16);
    const std::string snapshot = slurp(dir / "resolved_config.json");
    CHECK(snapshot.find("\"seed\": 11") != std::string::npos);
    CHECK(snapshot.find("arrival_rate_per_epoch") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical outputs") {
    const fs::path a = fresh_dir("rerun_a");
    const fs::path b = fresh_dir("rerun_b");
    CHECK(run_cli("simulate --replications 2 --seed 7 --quiet --out " + a.string())
              .exit_code == 0);
    CHECK(run_cli("simulate --replications 2 --seed 7 --quiet --out " + b.string())
              .exit_code == 0);
    CHECK(slurp(a / "trajectories.jsonl") == slurp(b / "trajectories.jsonl"));
    CHECK(slurp(a / "resolved_config.json") == slurp(b / "resolved_config.json"));
}

TEST_CASE("a config file overrides the defaults") {
    const fs::path dir = fresh_dir("config");
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"horizon_epochs": 4, "seed": 3})";
    const auto r = run_cli("simulate --replications 2 --quiet --config " + cfg.string() +
                           " --out " + dir.string());
    CHECK(r.exit_code == 0);
    CHECK(count_lines(slurp(dir / "trajectories.jsonl")) == 2 * 4);
    CHECK(slurp(dir / "resolved_config.json").find("\"horizon_epochs\": 4") !=
          std::string::npos);
}

TEST_CASE("malformed config fails with a message naming the field") {
    const fs::path dir = fresh_dir("badcfg");
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"contact_groups": [{"arrival_rate_per_epoch": -1}, {}]})";
    const auto r = run_cli("simulate --quiet --config " + cfg.string() + " --out " +
                           dir.string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("arrival_rate_per_epoch") != std::string::npos);
}

TEST_CASE("missing required option is a usage error") {
    const auto r = run_cli("fit-surrogate");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("--trajectories") != std::string::npos);
}

TEST_CASE("train-direct then pretrain-finetune round-trip through files") {
    const fs::path dir = fresh_dir("roundtrip");
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"dqn": {"episodes": 6}, "seed": 5})";

    auto r = run_cli("train-direct --quiet --config " + cfg.string() + " --out " +
                     (dir / "direct").string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "direct" / "curve.csv"));
    CHECK(fs::exists(dir / "direct" / "qnet.json"));
    CHECK(count_lines(slurp(dir / "direct" / "curve.csv")) == 7);  // header + 6

    r = run_cli("collect --replications 6 --quiet --config " + cfg.string() + " --qnet " +
                (dir / "direct" / "qnet.json").string() + " --out " +
                (dir / "collect").string());
    CHECK(r.exit_code == 0);

    r = run_cli("fit-surrogate --quiet --config " + cfg.string() + " --trajectories " +
                (dir / "collect" / "trajectories.jsonl").string() + " --out " +
                (dir / "fit").string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "fit" / "surrogate.json"));
    CHECK(fs::exists(dir / "fit" / "rmse.json"));

    r = run_cli("pretrain-finetune --quiet --episodes 4 --config " + cfg.string() +
                " --surrogate " + (dir / "fit" / "surrogate.json").string() + " --out " +
                (dir / "pf").string());
    CHECK(r.exit_code == 0);
    const std::string curve = slurp(dir / "pf" / "curve.csv");
    CHECK(curve.find("pretrain") != std::string::npos);
    CHECK(curve.find("finetune") != std::string::npos);
}
