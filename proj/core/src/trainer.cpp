#include "lnn/trainer.hpp"

#include "lnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace lnn {

void TrainConfig::validate() const {
    if (!(eta_final > 0.0))
        throw ConfigError("eta_final must be positive");
    if (!(eta_initial > eta_final))
        throw ConfigError("eta_initial must exceed eta_final");
    if (!(init_deviation > 0.0))
        throw ConfigError("init_deviation must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ConfigError("lambda must be finite and non-negative");
    if (!std::isfinite(gamma))
        throw ConfigError("gamma must be finite");
    for (std::size_t h : hidden_sizes)
        if (h == 0)
            throw ConfigError("hidden layer sizes must be positive");
}

TrainingSet TrainingSet::from(const SparseRatings& ratings) {
    TrainingSet set;
    set.num_items = ratings.num_items();
    set.num_users = ratings.num_users();
    set.scale = ratings.scale();
    set.elements.reserve(ratings.size());
    for (const Rating& r : ratings.triples())
        set.elements.push_back({r.item, r.user, ratings.scale().normalize(r.value)});
    return set;
}

double train_epoch(const TrainingSet& data, const ItemProfiles& profiles, TrainingState& state,
                   double eta, double lambda, bool update_latents, const TrainHooks& hooks) {
    if (data.elements.empty())
        throw DataError("no ratings to train on");
    const std::size_t count = data.elements.size();
    if (state.order.size() != count) {
        state.order.resize(count);
        std::iota(state.order.begin(), state.order.end(), std::size_t{0});
    }
    std::shuffle(state.order.begin(), state.order.end(), state.rng);

    const std::size_t t = state.latents.cols();
    state.latent_gradient.resize(t);
    double sse = 0.0;
    for (std::size_t pos : state.order) {
        const Rating& e = data.elements[pos];
        if (hooks.on_present)
            hooks.on_present(e);
        auto v = state.latents.row(e.item);
        assemble_input_into(v, profiles.row(e.item), state.input);
        const double predicted = forward_single(state.input, state.weights, e.user, state.trace);
        const double err = e.value - predicted;
        sse += err * err;

        // g and h both come from the trace of the pre-update weights.
        error_terms(e.value, state.trace, state.weights);
        weight_gradient(state.trace, state.weights, state.gradient);
        if (update_latents)
            latent_gradient(state.trace, state.weights, state.latent_gradient);
        apply_updates(state.weights, state.gradient, v, state.latent_gradient, eta, lambda,
                      update_latents);
    }
    return std::sqrt(sse / static_cast<double>(count));
}

std::vector<EpochRecord> run_phase(const TrainingSet& data, const ItemProfiles& profiles,
                                   TrainingState& state, PhaseMode mode, int phase_number,
                                   const TrainConfig& config, const TrainHooks& hooks) {
    const bool update_latents = mode != PhaseMode::weights_only;
    const double lambda = phase_number == 3 ? 0.0 : config.lambda;

    std::vector<EpochRecord> history;
    ConvergenceState cs{config.eta_initial, std::numeric_limits<double>::infinity(), 0};
    while (cs.eta > config.eta_final) {
        double s = 0.0;
        try {
            s = train_epoch(data, profiles, state, cs.eta, lambda, update_latents, hooks);
        } catch (const DivergenceError& e) {
            std::ostringstream os;
            os << "training diverged in phase " << phase_number << ", epoch " << cs.epoch + 1
               << ": " << e.what();
            throw DivergenceError(os.str(), phase_number, cs.epoch + 1);
        }
        ++cs.epoch;
        EpochRecord rec{phase_number, cs.epoch, cs.eta, s};
        history.push_back(rec);
        if (hooks.on_epoch)
            hooks.on_epoch(rec);
        // Written as a negated >= so that 0/0 (perfect fit twice) also decays.
        if (!(1.0 - s / cs.previous_rmse >= config.gamma))
            cs.eta /= 2.0;
        cs.previous_rmse = s;
        if (config.max_epochs_per_phase != 0 && cs.epoch >= config.max_epochs_per_phase)
            break;
    }
    return history;
}

namespace {

Topology make_topology(const TrainConfig& config, const ItemProfiles& profiles,
                       std::size_t num_users, bool single_layer) {
    Topology topo;
    topo.latent_count = config.latent_count;
    topo.attribute_count = profiles.num_attributes();
    if (!single_layer)
        topo.hidden_sizes = config.hidden_sizes;
    topo.output_count = num_users;
    topo.hidden_activation = config.hidden_activation;
    topo.output_activation = Activation::identity;
    return topo;
}

} // namespace

TrainedModel train(const SparseRatings& ratings, const ItemProfiles& profiles,
                   const TrainConfig& config, const TrainHooks& hooks) {
    config.validate();
    if (ratings.empty())
        throw DataError("no ratings to train on");
    if (profiles.num_items() != ratings.num_items())
        throw DataError("profile rows (" + std::to_string(profiles.num_items()) +
                        ") do not match item count (" + std::to_string(ratings.num_items()) + ")");

    const TrainingSet data = TrainingSet::from(ratings);
    const Topology topology = make_topology(config, profiles, ratings.num_users(), false);

    TrainingState state;
    state.rng.seed(config.seed);
    state.latents = LatentMatrix::random(ratings.num_items(), config.latent_count,
                                         config.init_deviation, state.rng);

    TrainedModel model;
    auto append = [&model](std::vector<EpochRecord> h) {
        model.log.insert(model.log.end(), h.begin(), h.end());
    };

    if (config.three_phase) {
        const Topology single = make_topology(config, profiles, ratings.num_users(), true);
        state.weights = WeightSet::random(single, config.init_deviation, state.rng);
        append(run_phase(data, profiles, state, PhaseMode::latents_with_temporary_weights, 1,
                         config, hooks));

        state.weights = WeightSet::random(topology, config.init_deviation, state.rng);
        append(run_phase(data, profiles, state, PhaseMode::weights_only, 2, config, hooks));
        append(run_phase(data, profiles, state, PhaseMode::joint, 3, config, hooks));
    } else {
        state.weights = WeightSet::random(topology, config.init_deviation, state.rng);
        append(run_phase(data, profiles, state, PhaseMode::joint, 0, config, hooks));
    }

    model.topology = topology;
    model.weights = std::move(state.weights);
    model.latents = std::move(state.latents);
    model.profiles = profiles;
    model.scale = ratings.scale();
    return model;
}

double predict_with(const TrainedModel& model, std::span<const double> latent,
                    std::span<const double> profile, std::size_t user) {
    ActivationTrace trace;
    auto q = assemble_input(latent, profile, model.topology);
    const double y = forward_single(q, model.weights, user, trace);
    return model.scale.clamp(model.scale.denormalize(y));
}

double predict_normalized(const TrainedModel& model, std::size_t item, std::size_t user) {
    if (item >= model.latents.rows())
        throw DataError("item index " + std::to_string(item) + " out of range");
    if (user >= model.topology.output_count)
        throw DataError("user index " + std::to_string(user) + " out of range");
    ActivationTrace trace;
    auto q = assemble_input(model.latents.row(item), model.profiles.row(item), model.topology);
    return forward_single(q, model.weights, user, trace);
}

double predict(const TrainedModel& model, std::size_t item, std::size_t user) {
    return model.scale.clamp(model.scale.denormalize(predict_normalized(model, item, user)));
}

std::size_t max_consecutive_halvings(double eta_initial, double eta_final) {
    return static_cast<std::size_t>(std::ceil(std::log2(eta_initial / eta_final)));
}

} // namespace lnn
