#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "surro/mlp.hpp"

using namespace surro;

namespace {

Mlp tiny_net(const std::vector<int>& dims, double dropout = 0.0) {
    RngStream stream(9, 0);
    return Mlp::init(dims, dropout, stream);
}

double batch_loss(const Mlp& net, const Minibatch& batch) {
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
        const auto out = forward(net, batch.inputs[i]);
        double sample = 0.0;
        for (std::size_t d = 0; d < out.size(); ++d) {
            const double e = out[d] - batch.targets[i][d];
            sample += e * e;
        }
        loss += sample / static_cast<double>(out.size());
    }
    return loss / static_cast<double>(batch.inputs.size());
}

}  // namespace

TEST_CASE("all-zero network outputs zero") {
    Mlp net = tiny_net({3, 4, 2});
    for (auto& w : net.weights)
        for (auto& v : w) v = 0.0;
    const auto out = forward(net, {1.0, -2.0, 3.0});
    CHECK(out == std::vector<double>{0.0, 0.0});
}

TEST_CASE("single linear layer is a plain affine map") {
    Mlp net = tiny_net({2, 1});
    net.weights[0] = {2.0, -1.0};
    net.biases[0] = {0.5};
    const auto out = forward(net, {3.0, 4.0});
    CHECK(out[0] == doctest::Approx(2.5));
}

TEST_CASE("rectifier gates hidden units") {
    Mlp net = tiny_net({1, 2, 1});
    net.weights[0] = {1.0, -1.0};  // unit 0 passes x, unit 1 passes -x
    net.biases[0] = {0.0, 0.0};
    net.weights[1] = {1.0, 1.0};
    net.biases[1] = {0.0};
    CHECK(forward(net, {3.0})[0] == doctest::Approx(3.0));
    CHECK(forward(net, {-3.0})[0] == doctest::Approx(3.0));
}

TEST_CASE("hand-computed gradient on a 1-1 net") {
    // y = w x, loss = (y - t)^2; x = 1, w = 2, t = 0 -> loss 4, dL/dw 4
    Mlp net = tiny_net({1, 1});
    net.weights[0] = {2.0};
    net.biases[0] = {0.0};
    Minibatch batch{{{1.0}}, {{0.0}}};
    Gradients grads = Gradients::zeros_like(net);
    const double loss = backward(net, batch, grads);
    CHECK(loss == doctest::Approx(4.0));
    CHECK(grads.weights[0][0] == doctest::Approx(4.0));
    CHECK(grads.biases[0][0] == doctest::Approx(4.0));
}

TEST_CASE("backward matches finite differences on a deep net") {
    Mlp net = tiny_net({7, 32, 32, 16});
    RngStream stream(11, 0);
    Minibatch batch;
    for (int i = 0; i < 5; ++i) {
        std::vector<double> x(7), t(16);
        for (auto& v : x) v = stream.normal();
        for (auto& v : t) v = stream.normal();
        batch.inputs.push_back(x);
        batch.targets.push_back(t);
    }
    Gradients grads = Gradients::zeros_like(net);
    backward(net, batch, grads);

    const double h = 1e-6;
    int checked = 0;
    for (std::size_t layer = 0; layer < net.num_layers(); ++layer) {
        for (std::size_t k = 0; k < net.weights[layer].size(); k += 97) {
            const double saved = net.weights[layer][k];
            net.weights[layer][k] = saved + h;
            const double up = batch_loss(net, batch);
            net.weights[layer][k] = saved - h;
            const double down = batch_loss(net, batch);
            net.weights[layer][k] = saved;
            const double fd = (up - down) / (2 * h);
            const double an = grads.weights[layer][k];
            if (std::abs(fd) < 1e-8 && std::abs(an) < 1e-8) continue;
            CHECK(std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}) < 1e-4);
            ++checked;
        }
    }
    CHECK(checked > 10);
}

TEST_CASE("training reduces the loss on a fixed batch") {
    Mlp net = tiny_net({4, 16, 3});
    RngStream stream(12, 0);
    Minibatch batch;
    for (int i = 0; i < 16; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = stream.uniform();
        batch.inputs.push_back(x);
        batch.targets.push_back({x[0] + x[1], x[2] - x[3], 0.5});
    }
    OptimizerState opt = OptimizerState::create(net, 1e-3);
    Gradients grads = Gradients::zeros_like(net);
    const double initial = batch_loss(net, batch);
    for (int step = 0; step < 200; ++step) {
        grads = Gradients::zeros_like(net);
        backward(net, batch, grads);
        optimizer_step(net, grads, opt);
    }
    CHECK(batch_loss(net, batch) < 0.5 * initial);
}

TEST_CASE("optimizer first step has magnitude near the learning rate") {
    Mlp net = tiny_net({1, 1});
    net.weights[0] = {2.0};
    net.biases[0] = {0.0};
    Gradients grads = Gradients::zeros_like(net);
    backward(net, {{{1.0}}, {{0.0}}}, grads);
    OptimizerState opt = OptimizerState::create(net, 1e-2);
    optimizer_step(net, grads, opt);
    // bias-corrected moments make the first update = lr * sign(grad)
    CHECK(net.weights[0][0] == doctest::Approx(2.0 - 1e-2).epsilon(1e-6));
}

TEST_CASE("dropout disabled at inference; mask preserves expectation") {
    Mlp net = tiny_net({8, 64, 1}, 0.1);
    std::vector<double> x(8, 1.0);
    const auto ref = forward(net, x);
    CHECK(forward(net, x) == ref);  // inference path ignores dropout

    RngStream stream(13, 0);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum += forward(net, x, true, &stream)[0];
    CHECK(sum / n == doctest::Approx(ref[0]).epsilon(0.02));
}

TEST_CASE("zero dropout training pass equals inference pass") {
    Mlp net = tiny_net({5, 10, 2});
    RngStream stream(14, 0);
    std::vector<double> x = {0.1, -0.2, 0.3, 0.4, -0.5};
    CHECK(forward(net, x, true, &stream) == forward(net, x));
}

TEST_CASE("weight serialization round-trips exactly") {
    Mlp net = tiny_net({7, 32, 32, 16}, 0.1);
    const std::string doc = save_weights(net);
    const Mlp back = load_weights(doc);
    CHECK(back.layer_dims == net.layer_dims);
    CHECK(back.weights == net.weights);
    CHECK(back.biases == net.biases);
    CHECK(back.dropout_rate == net.dropout_rate);
}

TEST_CASE("malformed weight documents are rejected") {
    Mlp net = tiny_net({3, 2});
    const std::string doc = save_weights(net);
    CHECK_THROWS_AS(load_weights(doc.substr(0, doc.size() / 2)), std::runtime_error);
    CHECK_THROWS_AS(load_weights("{}"), std::runtime_error);
}
