#include <benchmark/benchmark.h>

#include "surro/callcenter.hpp"
#include "surro/mlp.hpp"
#include "surro/surrogate.hpp"

using namespace surro;

static void BM_SimEpoch(benchmark::State& state) {
    const CallCenterConfig cfg = CallCenterConfig::defaults();
    RngStream stream(1, 0);
    CallCenterSim sim(cfg);
    for (auto _ : state) {
        if (sim.done()) sim = CallCenterSim(cfg);
        benchmark::DoNotOptimize(sim.step_epoch({0, 1, 0, 1}, stream));
    }
}
BENCHMARK(BM_SimEpoch);

static void BM_Replication(benchmark::State& state) {
    const CallCenterConfig cfg = CallCenterConfig::defaults();
    const Policy front = [](const Observation&) { return ActionVector{0, 0, 0, 0}; };
    std::uint64_t rep = 0;
    for (auto _ : state) {
        RngStream stream(2, rep++);
        benchmark::DoNotOptimize(
            run_replication(cfg, RewardSpec::original(), front, stream));
    }
}
BENCHMARK(BM_Replication);

static void BM_MlpForward(benchmark::State& state) {
    RngStream stream(3, 0);
    const Mlp net = Mlp::init({13, 64, 64, 17}, 0.0, stream);
    std::vector<double> x(13);
    for (auto& v : x) v = stream.normal();
    for (auto _ : state) benchmark::DoNotOptimize(forward(net, x));
}
BENCHMARK(BM_MlpForward);

static void BM_MlpBackward(benchmark::State& state) {
    RngStream stream(4, 0);
    const Mlp net = Mlp::init({13, 64, 64, 17}, 0.0, stream);
    Minibatch batch;
    for (int i = 0; i < 32; ++i) {
        std::vector<double> x(13), t(17);
        for (auto& v : x) v = stream.normal();
        for (auto& v : t) v = stream.normal();
        batch.inputs.push_back(x);
        batch.targets.push_back(t);
    }
    Gradients grads = Gradients::zeros_like(net);
    for (auto _ : state) benchmark::DoNotOptimize(backward(net, batch, grads));
}
BENCHMARK(BM_MlpBackward);

BENCHMARK_MAIN();
