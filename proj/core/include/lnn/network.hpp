#pragma once

// Feedforward network over concatenated (latent, given) item inputs.
//
// Only the output unit for the presented user is evaluated; every other
// output unit is treated as having zero error and is never touched. Weight
// and latent gradients are the descent directions used by per-element SGD,
// i.e. gradients of (x - x_hat)^2 / 2.

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace lnn {

using Rng = std::mt19937_64;

enum class Activation { identity, tanh, logistic };

double activate(Activation f, double net) noexcept;
/// f'(net), given the already computed activation value.
double activation_derivative(Activation f, double net, double activation) noexcept;
std::string to_string(Activation f);
Activation activation_from_string(const std::string& name);

struct Topology {
    std::size_t latent_count = 0;
    std::size_t attribute_count = 0;
    std::vector<std::size_t> hidden_sizes;
    std::size_t output_count = 0;
    Activation hidden_activation = Activation::tanh;
    Activation output_activation = Activation::identity;

    std::size_t input_width() const noexcept { return latent_count + attribute_count; }
    std::size_t hidden_layers() const noexcept { return hidden_sizes.size(); }

    bool operator==(const Topology&) const = default;
};

/// Fully connected layer; weights stored one row per destination unit.
class Layer {
public:
    Layer() = default;
    Layer(std::size_t inputs, std::size_t outputs, Activation activation);

    std::size_t inputs() const noexcept { return inputs_; }
    std::size_t outputs() const noexcept { return outputs_; }
    Activation activation() const noexcept { return activation_; }

    std::span<double> row(std::size_t dest) { return {weights_.data() + dest * inputs_, inputs_}; }
    std::span<const double> row(std::size_t dest) const {
        return {weights_.data() + dest * inputs_, inputs_};
    }
    double& weight(std::size_t dest, std::size_t src) { return weights_[dest * inputs_ + src]; }
    double weight(std::size_t dest, std::size_t src) const { return weights_[dest * inputs_ + src]; }
    double& bias(std::size_t dest) { return biases_[dest]; }
    double bias(std::size_t dest) const { return biases_[dest]; }

    std::span<double> weights() noexcept { return weights_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> biases() noexcept { return biases_; }
    std::span<const double> biases() const noexcept { return biases_; }

    bool operator==(const Layer&) const = default;

private:
    std::size_t inputs_ = 0;
    std::size_t outputs_ = 0;
    Activation activation_ = Activation::identity;
    std::vector<double> weights_;
    std::vector<double> biases_;
};

/// Ragged weight set: hidden layers in forward order, then the output layer.
class WeightSet {
public:
    WeightSet() = default;
    explicit WeightSet(const Topology& topology);

    /// Weights and biases drawn from Normal(0, deviation).
    static WeightSet random(const Topology& topology, double deviation, Rng& rng);

    const Topology& topology() const noexcept { return topology_; }
    std::size_t hidden_layers() const noexcept { return layers_.size() - 1; }
    Layer& hidden(std::size_t k) { return layers_[k]; }
    const Layer& hidden(std::size_t k) const { return layers_[k]; }
    Layer& output() { return layers_.back(); }
    const Layer& output() const { return layers_.back(); }
    std::vector<Layer>& layers() noexcept { return layers_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }

    bool all_finite() const noexcept;
    bool operator==(const WeightSet&) const = default;

private:
    Topology topology_;
    std::vector<Layer> layers_;
};

/// Induced latent portion of the item profiles, one row of length t per item.
class LatentMatrix {
public:
    LatentMatrix() = default;
    LatentMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}

    static LatentMatrix random(std::size_t rows, std::size_t cols, double deviation, Rng& rng);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const LatentMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Net inputs, activations, and error terms for one element presentation.
/// Hidden layers are stored in full; the output layer holds only unit `output`.
struct ActivationTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> net;
    std::vector<std::vector<double>> activation;
    std::vector<std::vector<double>> delta;
    std::size_t output = 0;
    double output_net = 0.0;
    double output_activation = 0.0;
    double output_delta = 0.0;
};

/// Gradient w.r.t. the weights. Rows into output units other than `output`
/// are implicitly zero and not stored.
struct WeightGradient {
    std::vector<std::vector<double>> hidden_weights; ///< per layer, dest-major
    std::vector<std::vector<double>> hidden_biases;
    std::vector<double> output_row;
    double output_bias = 0.0;
    std::size_t output = 0;

    /// Gradient entry for weight (dest <- src) of layer k, where k == number
    /// of hidden layers addresses the output layer.
    double weight(std::size_t k, std::size_t dest, std::size_t src) const;
    double bias(std::size_t k, std::size_t dest) const;
};

std::vector<double> assemble_input(std::span<const double> latent, std::span<const double> given);
std::vector<double> assemble_input(std::span<const double> latent, std::span<const double> given,
                                   const Topology& topology);
void assemble_input_into(std::span<const double> latent, std::span<const double> given,
                         std::vector<double>& out);

/// Propagates q through every hidden layer and into output unit c only.
/// Throws DivergenceError on a non-finite prediction.
double forward_single(std::span<const double> q, const WeightSet& weights, std::size_t c,
                      ActivationTrace& trace);

struct ForwardResult {
    double prediction;
    ActivationTrace trace;
};
ForwardResult forward_single(std::span<const double> q, const WeightSet& weights, std::size_t c);

/// Fills trace.output_delta and every hidden delta for normalized target x.
void error_terms(double target, ActivationTrace& trace, const WeightSet& weights);

void weight_gradient(const ActivationTrace& trace, const WeightSet& weights, WeightGradient& out);
WeightGradient weight_gradient(const ActivationTrace& trace, const WeightSet& weights);

/// h over the t latent input positions; dispatches on the hidden layer count.
void latent_gradient(const ActivationTrace& trace, const WeightSet& weights, std::span<double> h);
std::vector<double> latent_gradient(const ActivationTrace& trace, const WeightSet& weights);

/// No hidden layers: h_i = -w_ic * delta_c.
void latent_gradient_single_layer(const ActivationTrace& trace, const WeightSet& weights,
                                  std::span<double> h);
/// h_i = -sum_j w_ij * delta_j over every computed unit j fed by the inputs.
/// With no hidden layers the only such unit is the active output.
void latent_gradient_multilayer(const ActivationTrace& trace, const WeightSet& weights,
                                std::span<double> h);

/// W <- W - eta (g + lambda W) on every weight with a computed gradient
/// (biases are not decayed), then, if requested, v <- v - eta (h + lambda v).
void apply_updates(WeightSet& weights, const WeightGradient& g, std::span<double> latent,
                   std::span<const double> h, double eta, double lambda, bool update_latents);

} // namespace lnn
