#include "lnn/network.hpp"

#include "lnn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lnn {

double activate(Activation f, double net) noexcept {
    switch (f) {
    case Activation::tanh:
        return std::tanh(net);
    case Activation::logistic:
        return 1.0 / (1.0 + std::exp(-net));
    case Activation::identity:
        break;
    }
    return net;
}

double activation_derivative(Activation f, double /*net*/, double activation) noexcept {
    switch (f) {
    case Activation::tanh:
        return 1.0 - activation * activation;
    case Activation::logistic:
        return activation * (1.0 - activation);
    case Activation::identity:
        break;
    }
    return 1.0;
}

std::string to_string(Activation f) {
    switch (f) {
    case Activation::tanh:
        return "tanh";
    case Activation::logistic:
        return "logistic";
    case Activation::identity:
        break;
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh")
        return Activation::tanh;
    if (name == "logistic")
        return Activation::logistic;
    if (name == "identity")
        return Activation::identity;
    throw ConfigError("unknown activation '" + name + "'");
}

// ---------------------------------------------------------------------- Layer

Layer::Layer(std::size_t inputs, std::size_t outputs, Activation activation)
    : inputs_(inputs), outputs_(outputs), activation_(activation), weights_(inputs * outputs, 0.0),
      biases_(outputs, 0.0) {}

// ------------------------------------------------------------------ WeightSet

WeightSet::WeightSet(const Topology& topology) : topology_(topology) {
    std::size_t fan_in = topology.input_width();
    for (std::size_t width : topology.hidden_sizes) {
        if (width == 0)
            throw ConfigError("hidden layer width must be positive");
        layers_.emplace_back(fan_in, width, topology.hidden_activation);
        fan_in = width;
    }
    layers_.emplace_back(fan_in, topology.output_count, topology.output_activation);
}

WeightSet WeightSet::random(const Topology& topology, double deviation, Rng& rng) {
    WeightSet w(topology);
    std::normal_distribution<double> normal(0.0, deviation);
    for (Layer& layer : w.layers_) {
        for (double& x : layer.weights())
            x = normal(rng);
        for (double& b : layer.biases())
            b = normal(rng);
    }
    return w;
}

bool WeightSet::all_finite() const noexcept {
    for (const Layer& layer : layers_) {
        for (double x : layer.weights())
            if (!std::isfinite(x))
                return false;
        for (double b : layer.biases())
            if (!std::isfinite(b))
                return false;
    }
    return true;
}

LatentMatrix LatentMatrix::random(std::size_t rows, std::size_t cols, double deviation, Rng& rng) {
    LatentMatrix v(rows, cols);
    std::normal_distribution<double> normal(0.0, deviation);
    for (double& x : v.values_)
        x = normal(rng);
    return v;
}

// ------------------------------------------------------------- WeightGradient

double WeightGradient::weight(std::size_t k, std::size_t dest, std::size_t src) const {
    if (k < hidden_weights.size()) {
        std::size_t fan_in = hidden_weights[k].size() / hidden_biases[k].size();
        return hidden_weights[k][dest * fan_in + src];
    }
    return dest == output ? output_row[src] : 0.0;
}

double WeightGradient::bias(std::size_t k, std::size_t dest) const {
    if (k < hidden_biases.size())
        return hidden_biases[k][dest];
    return dest == output ? output_bias : 0.0;
}

// ------------------------------------------------------------------- forward

void assemble_input_into(std::span<const double> latent, std::span<const double> given,
                         std::vector<double>& out) {
    out.resize(latent.size() + given.size());
    std::copy(latent.begin(), latent.end(), out.begin());
    std::copy(given.begin(), given.end(), out.begin() + static_cast<std::ptrdiff_t>(latent.size()));
}

std::vector<double> assemble_input(std::span<const double> latent, std::span<const double> given) {
    std::vector<double> q;
    assemble_input_into(latent, given, q);
    return q;
}

std::vector<double> assemble_input(std::span<const double> latent, std::span<const double> given,
                                   const Topology& topology) {
    if (latent.size() != topology.latent_count || given.size() != topology.attribute_count)
        throw ConfigError("input lengths do not match topology (expected " +
                          std::to_string(topology.latent_count) + " latent + " +
                          std::to_string(topology.attribute_count) + " given)");
    return assemble_input(latent, given);
}

double forward_single(std::span<const double> q, const WeightSet& weights, std::size_t c,
                      ActivationTrace& trace) {
    const Topology& topo = weights.topology();
    if (q.size() != topo.input_width())
        throw ConfigError("input width mismatch");
    if (c >= topo.output_count)
        throw ConfigError("output index " + std::to_string(c) + " out of range");

    const std::size_t hidden = weights.hidden_layers();
    trace.input.assign(q.begin(), q.end());
    trace.net.resize(hidden);
    trace.activation.resize(hidden);
    trace.delta.resize(hidden);

    std::span<const double> in = trace.input;
    for (std::size_t k = 0; k < hidden; ++k) {
        const Layer& layer = weights.hidden(k);
        auto& net = trace.net[k];
        auto& act = trace.activation[k];
        net.resize(layer.outputs());
        act.resize(layer.outputs());
        trace.delta[k].assign(layer.outputs(), 0.0);
        for (std::size_t j = 0; j < layer.outputs(); ++j) {
            auto w = layer.row(j);
            double sum = layer.bias(j);
            for (std::size_t i = 0; i < in.size(); ++i)
                sum += w[i] * in[i];
            net[j] = sum;
            act[j] = activate(layer.activation(), sum);
        }
        in = act;
    }

    const Layer& out = weights.output();
    auto w = out.row(c);
    double sum = out.bias(c);
    for (std::size_t i = 0; i < in.size(); ++i)
        sum += w[i] * in[i];
    trace.output = c;
    trace.output_net = sum;
    trace.output_activation = activate(out.activation(), sum);
    trace.output_delta = 0.0;
    if (!std::isfinite(trace.output_activation))
        throw DivergenceError("non-finite network output");
    return trace.output_activation;
}

ForwardResult forward_single(std::span<const double> q, const WeightSet& weights, std::size_t c) {
    ForwardResult r{0.0, {}};
    r.prediction = forward_single(q, weights, c, r.trace);
    return r;
}

// ------------------------------------------------------------------ backward

void error_terms(double target, ActivationTrace& trace, const WeightSet& weights) {
    const Layer& out = weights.output();
    const std::size_t c = trace.output;
    trace.output_delta = (target - trace.output_activation) *
                         activation_derivative(out.activation(), trace.output_net,
                                               trace.output_activation);
    if (!std::isfinite(trace.output_delta))
        throw DivergenceError("non-finite output error term");

    const std::size_t hidden = weights.hidden_layers();
    if (hidden == 0)
        return;

    // Last hidden layer feeds only the active output unit.
    {
        const Layer& layer = weights.hidden(hidden - 1);
        auto w = out.row(c);
        auto& delta = trace.delta[hidden - 1];
        for (std::size_t i = 0; i < layer.outputs(); ++i)
            delta[i] = w[i] * trace.output_delta *
                       activation_derivative(layer.activation(), trace.net[hidden - 1][i],
                                             trace.activation[hidden - 1][i]);
    }
    for (std::size_t k = hidden - 1; k-- > 0;) {
        const Layer& layer = weights.hidden(k);
        const Layer& next = weights.hidden(k + 1);
        const auto& next_delta = trace.delta[k + 1];
        auto& delta = trace.delta[k];
        std::fill(delta.begin(), delta.end(), 0.0);
        for (std::size_t d = 0; d < next.outputs(); ++d) {
            auto w = next.row(d);
            const double nd = next_delta[d];
            for (std::size_t j = 0; j < layer.outputs(); ++j)
                delta[j] += w[j] * nd;
        }
        for (std::size_t j = 0; j < layer.outputs(); ++j)
            delta[j] *= activation_derivative(layer.activation(), trace.net[k][j],
                                              trace.activation[k][j]);
    }
}

void weight_gradient(const ActivationTrace& trace, const WeightSet& weights, WeightGradient& out) {
    const std::size_t hidden = weights.hidden_layers();
    out.hidden_weights.resize(hidden);
    out.hidden_biases.resize(hidden);

    std::span<const double> in = trace.input;
    for (std::size_t k = 0; k < hidden; ++k) {
        const Layer& layer = weights.hidden(k);
        auto& g = out.hidden_weights[k];
        auto& gb = out.hidden_biases[k];
        g.resize(layer.inputs() * layer.outputs());
        gb.resize(layer.outputs());
        const auto& delta = trace.delta[k];
        for (std::size_t j = 0; j < layer.outputs(); ++j) {
            const double dj = delta[j];
            double* row = g.data() + j * layer.inputs();
            for (std::size_t i = 0; i < layer.inputs(); ++i)
                row[i] = -dj * in[i];
            gb[j] = -dj;
        }
        in = trace.activation[k];
    }
    out.output = trace.output;
    out.output_row.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i)
        out.output_row[i] = -trace.output_delta * in[i];
    out.output_bias = -trace.output_delta;
}

WeightGradient weight_gradient(const ActivationTrace& trace, const WeightSet& weights) {
    WeightGradient g;
    weight_gradient(trace, weights, g);
    return g;
}

void latent_gradient_single_layer(const ActivationTrace& trace, const WeightSet& weights,
                                  std::span<double> h) {
    const std::size_t t = weights.topology().latent_count;
    auto w = weights.output().row(trace.output);
    for (std::size_t i = 0; i < t; ++i)
        h[i] = -w[i] * trace.output_delta;
}

void latent_gradient_multilayer(const ActivationTrace& trace, const WeightSet& weights,
                                std::span<double> h) {
    const std::size_t t = weights.topology().latent_count;
    std::fill(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(t), 0.0);
    if (weights.hidden_layers() == 0) {
        // The next layer is the output layer, where only unit c has an error term.
        auto w = weights.output().row(trace.output);
        const double d = trace.output_delta;
        for (std::size_t i = 0; i < t; ++i)
            h[i] -= w[i] * d;
        return;
    }
    const Layer& first = weights.hidden(0);
    const auto& delta = trace.delta[0];
    for (std::size_t j = 0; j < first.outputs(); ++j) {
        auto w = first.row(j);
        const double d = delta[j];
        for (std::size_t i = 0; i < t; ++i)
            h[i] -= w[i] * d;
    }
}

void latent_gradient(const ActivationTrace& trace, const WeightSet& weights, std::span<double> h) {
    if (h.size() != weights.topology().latent_count)
        throw ConfigError("latent gradient length mismatch");
    if (weights.hidden_layers() == 0)
        latent_gradient_single_layer(trace, weights, h);
    else
        latent_gradient_multilayer(trace, weights, h);
}

std::vector<double> latent_gradient(const ActivationTrace& trace, const WeightSet& weights) {
    std::vector<double> h(weights.topology().latent_count);
    latent_gradient(trace, weights, h);
    return h;
}

// -------------------------------------------------------------------- update

void apply_updates(WeightSet& weights, const WeightGradient& g, std::span<double> latent,
                   std::span<const double> h, double eta, double lambda, bool update_latents) {
    const std::size_t hidden = weights.hidden_layers();
    if (g.hidden_weights.size() != hidden)
        throw ConfigError("gradient shape does not match weights");
    for (std::size_t k = 0; k < hidden; ++k) {
        Layer& layer = weights.hidden(k);
        auto w = layer.weights();
        const auto& gw = g.hidden_weights[k];
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] -= eta * (gw[i] + lambda * w[i]);
        auto b = layer.biases();
        const auto& gb = g.hidden_biases[k];
        for (std::size_t j = 0; j < b.size(); ++j)
            b[j] -= eta * gb[j];
    }

    Layer& out = weights.output();
    auto w = out.row(g.output);
    bool finite = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] -= eta * (g.output_row[i] + lambda * w[i]);
        finite = finite && std::isfinite(w[i]);
    }
    out.bias(g.output) -= eta * g.output_bias;
    finite = finite && std::isfinite(out.bias(g.output));

    if (update_latents) {
        if (h.size() != latent.size())
            throw ConfigError("latent gradient length mismatch");
        for (std::size_t i = 0; i < latent.size(); ++i) {
            latent[i] -= eta * (h[i] + lambda * latent[i]);
            finite = finite && std::isfinite(latent[i]);
        }
    }
    if (!finite)
        throw DivergenceError("non-finite value after update");
}

} // namespace lnn
