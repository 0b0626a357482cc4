#include "surro/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace surro {

Mlp Mlp::init(const std::vector<int>& layer_dims, double dropout_rate,
              RngStream& stream) {
    if (layer_dims.size() < 2)
        throw std::invalid_argument("Mlp: need at least input and output dims");
    for (int d : layer_dims)
        if (d <= 0) throw std::invalid_argument("Mlp: layer dims must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("Mlp: dropout_rate must be in [0, 1)");
    Mlp net;
    net.layer_dims = layer_dims;
    net.dropout_rate = dropout_rate;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int fan_in = layer_dims[l];
        const int fan_out = layer_dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
        for (auto& x : w) x = (2.0 * stream.uniform() - 1.0) * bound;
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

Gradients Gradients::zeros_like(const Mlp& net) {
    Gradients g;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        g.weights.emplace_back(net.weights[l].size(), 0.0);
        g.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
}

void Gradients::accumulate(const Gradients& other, double scale) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i)
            weights[l][i] += scale * other.weights[l][i];
        for (std::size_t i = 0; i < biases[l].size(); ++i)
            biases[l][i] += scale * other.biases[l][i];
    }
}

namespace {

// Activations (post-rectifier, post-dropout) per layer, input included.
struct ForwardTrace {
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> masks;  // per hidden layer; empty if no dropout
};

void forward_trace(const Mlp& net, const std::vector<double>& input, bool training,
                   RngStream* stream, ForwardTrace& trace) {
    if (static_cast<int>(input.size()) != net.input_dim())
        throw std::invalid_argument("forward: input size mismatch");
    const bool drop = training && net.dropout_rate > 0.0;
    if (drop && !stream)
        throw std::invalid_argument("forward: dropout requires a stream");
    trace.activations.clear();
    trace.masks.clear();
    trace.activations.push_back(input);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const int n_in = net.layer_dims[l];
        const int n_out = net.layer_dims[l + 1];
        const auto& prev = trace.activations.back();
        std::vector<double> out(n_out);
        const double* w = net.weights[l].data();
        for (int i = 0; i < n_out; ++i) {
            double acc = net.biases[l][i];
            const double* row = w + static_cast<std::size_t>(i) * n_in;
            for (int j = 0; j < n_in; ++j) acc += row[j] * prev[j];
            out[i] = acc;
        }
        const bool hidden = l + 1 < net.num_layers();
        if (hidden) {
            for (auto& x : out) x = x > 0.0 ? x : 0.0;
            if (drop) {
                const double keep = 1.0 - net.dropout_rate;
                std::vector<double> mask(n_out);
                for (int i = 0; i < n_out; ++i)
                    mask[i] = stream->uniform() < keep ? 1.0 / keep : 0.0;
                for (int i = 0; i < n_out; ++i) out[i] *= mask[i];
                trace.masks.push_back(std::move(mask));
            }
        }
        trace.activations.push_back(std::move(out));
    }
}

}  // namespace

std::vector<double> forward(const Mlp& net, const std::vector<double>& input,
                            bool training, RngStream* stream) {
    ForwardTrace trace;
    forward_trace(net, input, training, stream, trace);
    return trace.activations.back();
}

double backward(const Mlp& net, const Minibatch& batch, Gradients& grads,
                bool training, RngStream* stream) {
    if (batch.inputs.empty() || batch.inputs.size() != batch.targets.size())
        throw std::invalid_argument("backward: malformed batch");
    const std::size_t n = batch.inputs.size();
    const int d_out = net.output_dim();
    if (grads.weights.empty()) grads = Gradients::zeros_like(net);
    for (auto& g : grads.weights) std::fill(g.begin(), g.end(), 0.0);
    for (auto& g : grads.biases) std::fill(g.begin(), g.end(), 0.0);

    double loss = 0.0;
    ForwardTrace trace;
    for (std::size_t s = 0; s < n; ++s) {
        if (static_cast<int>(batch.targets[s].size()) != d_out)
            throw std::invalid_argument("backward: target size mismatch");
        forward_trace(net, batch.inputs[s], training, stream, trace);
        const auto& out = trace.activations.back();

        // delta at the output of layer l+1, starting from d(mse)/d(out)
        std::vector<double> delta(d_out);
        for (int i = 0; i < d_out; ++i) {
            const double err = out[i] - batch.targets[s][i];
            loss += err * err / (static_cast<double>(d_out) * n);
            delta[i] = 2.0 * err / (static_cast<double>(d_out) * n);
        }
        for (std::size_t l = net.num_layers(); l-- > 0;) {
            const int n_in = net.layer_dims[l];
            const int n_out = net.layer_dims[l + 1];
            const auto& prev = trace.activations[l];
            for (int i = 0; i < n_out; ++i) {
                grads.biases[l][i] += delta[i];
                double* grow = grads.weights[l].data() + static_cast<std::size_t>(i) * n_in;
                for (int j = 0; j < n_in; ++j) grow[j] += delta[i] * prev[j];
            }
            if (l == 0) break;
            std::vector<double> prev_delta(n_in, 0.0);
            const double* w = net.weights[l].data();
            for (int i = 0; i < n_out; ++i) {
                const double* row = w + static_cast<std::size_t>(i) * n_in;
                for (int j = 0; j < n_in; ++j) prev_delta[j] += row[j] * delta[i];
            }
            // backprop through dropout then rectifier of the hidden layer
            if (!trace.masks.empty())
                for (int j = 0; j < n_in; ++j) prev_delta[j] *= trace.masks[l - 1][j];
            for (int j = 0; j < n_in; ++j)
                if (trace.activations[l][j] <= 0.0) prev_delta[j] = 0.0;
            delta = std::move(prev_delta);
        }
    }
    return loss;
}

OptimizerState OptimizerState::create(const Mlp& net, double learning_rate) {
    OptimizerState opt;
    opt.learning_rate = learning_rate;
    opt.first_moment = Gradients::zeros_like(net);
    opt.second_moment = Gradients::zeros_like(net);
    return opt;
}

namespace {
void adam_update(std::vector<double>& p, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v,
                 const OptimizerState& opt, double c1, double c2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
        v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        p[i] -= opt.learning_rate * mhat / (std::sqrt(vhat) + opt.epsilon);
    }
}
}  // namespace

void optimizer_step(Mlp& net, const Gradients& grads, OptimizerState& opt) {
    opt.step_count += 1;
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step_count));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step_count));
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        adam_update(net.weights[l], grads.weights[l], opt.first_moment.weights[l],
                    opt.second_moment.weights[l], opt, c1, c2);
        adam_update(net.biases[l], grads.biases[l], opt.first_moment.biases[l],
                    opt.second_moment.biases[l], opt, c1, c2);
    }
}

std::string save_weights(const Mlp& net) {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["layer_dims"] = net.layer_dims;
    doc["dropout_rate"] = net.dropout_rate;
    doc["weights"] = net.weights;
    doc["biases"] = net.biases;
    return doc.dump();
}

Mlp load_weights(const std::string& document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("load_weights: parse error: ") + e.what());
    }
    Mlp net;
    try {
        if (doc.at("format_version").get<int>() != 1)
            throw std::runtime_error("load_weights: unsupported format version");
        net.layer_dims = doc.at("layer_dims").get<std::vector<int>>();
        net.dropout_rate = doc.at("dropout_rate").get<double>();
        net.weights = doc.at("weights").get<std::vector<std::vector<double>>>();
        net.biases = doc.at("biases").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("load_weights: malformed document: ") + e.what());
    }
    if (net.layer_dims.size() < 2 || net.weights.size() != net.layer_dims.size() - 1 ||
        net.biases.size() != net.weights.size())
        throw std::runtime_error("load_weights: inconsistent shapes");
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const std::size_t want_w =
            static_cast<std::size_t>(net.layer_dims[l]) * net.layer_dims[l + 1];
        if (net.weights[l].size() != want_w ||
            net.biases[l].size() != static_cast<std::size_t>(net.layer_dims[l + 1]))
            throw std::runtime_error("load_weights: inconsistent shapes");
    }
    return net;
}

}  // namespace surro
