#pragma once

#include "lnn/data.hpp"
#include "lnn/network.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lnn {

struct TrainConfig {
    double eta_initial = 0.1;
    double eta_final = 1e-4;
    /// Expected relative RMSE improvement per epoch; below it eta halves.
    double gamma = 1e-4;
    double lambda = 0.01;
    std::size_t latent_count = 8;
    std::vector<std::size_t> hidden_sizes;
    double init_deviation = 0.01;
    std::uint64_t seed = 0;
    bool three_phase = true;
    Activation hidden_activation = Activation::tanh;
    /// Hard cap on epochs in one phase; 0 disables the cap.
    std::size_t max_epochs_per_phase = 10000;

    /// Throws ConfigError on an invalid combination.
    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

enum class PhaseMode {
    latents_with_temporary_weights, ///< phase 1: V and a single-layer T
    weights_only,                   ///< phase 2: W with V held constant
    joint,                          ///< phase 3 (and single-phase): V and W together
};

struct EpochRecord {
    int phase = 0;
    std::size_t epoch = 0;
    double eta = 0.0;
    double rmse = 0.0;
};

struct ConvergenceState {
    double eta = 0.0;
    double previous_rmse = 0.0;
    std::size_t epoch = 0;
};

struct TrainedModel {
    Topology topology;
    WeightSet weights;
    LatentMatrix latents;
    ItemProfiles profiles;
    RatingScale scale;
    std::vector<EpochRecord> log;
};

/// Optional observers; used for logging and for auditing which triples a
/// training run ever presents.
struct TrainHooks {
    std::function<void(const EpochRecord&)> on_epoch;
    std::function<void(const Rating&)> on_present;
};

/// Training triples with targets already mapped onto the network range.
struct TrainingSet {
    std::vector<Rating> elements; ///< value holds the normalized target
    std::size_t num_items = 0;
    std::size_t num_users = 0;
    RatingScale scale;

    static TrainingSet from(const SparseRatings& ratings);
};

/// Mutable state of a run: weights, latents, generator, and scratch space.
struct TrainingState {
    WeightSet weights;
    LatentMatrix latents;
    Rng rng;
    std::vector<std::size_t> order;
    ActivationTrace trace;
    WeightGradient gradient;
    std::vector<double> input;
    std::vector<double> latent_gradient;
};

/// One pass over every element in a fresh random order. Returns the running
/// RMSE of the pre-update predictions over the epoch (normalized scale).
double train_epoch(const TrainingSet& data, const ItemProfiles& profiles, TrainingState& state,
                   double eta, double lambda, bool update_latents, const TrainHooks& hooks = {});

/// Runs epochs until eta falls to eta_final, halving eta whenever the relative
/// improvement 1 - s/s' is below gamma. Returns the per-epoch history.
std::vector<EpochRecord> run_phase(const TrainingSet& data, const ItemProfiles& profiles,
                                   TrainingState& state, PhaseMode mode, int phase_number,
                                   const TrainConfig& config, const TrainHooks& hooks = {});

/// Full training: three phases when config.three_phase, otherwise one
/// regularized joint phase from random initialization.
TrainedModel train(const SparseRatings& ratings, const ItemProfiles& profiles,
                   const TrainConfig& config, const TrainHooks& hooks = {});

/// Raw network output for (item, user) on the normalized scale.
double predict_normalized(const TrainedModel& model, std::size_t item, std::size_t user);
/// Prediction on the native rating scale, clamped to the scale bounds.
double predict(const TrainedModel& model, std::size_t item, std::size_t user);
/// Prediction from an explicit latent row and profile.
double predict_with(const TrainedModel& model, std::span<const double> latent,
                    std::span<const double> profile, std::size_t user);

/// Upper bound on consecutive eta halvings before a phase must stop.
std::size_t max_consecutive_halvings(double eta_initial, double eta_final);

} // namespace lnn
