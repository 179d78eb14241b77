#include "lnn/eval.hpp"

#include "lnn/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

namespace lnn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is
/// handled by exactly one thread; fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                fn(i);
        });
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

std::size_t hidden_units(const TrainConfig& c) {
    std::size_t n = 0;
    for (std::size_t h : c.hidden_sizes)
        n += h;
    return n;
}

} // namespace

double mae(std::span<const Prediction> predictions) {
    if (predictions.empty())
        throw DataError("MAE of an empty prediction set");
    double sum = 0.0;
    for (const Prediction& p : predictions)
        sum += std::abs(p.predicted - p.actual);
    return sum / static_cast<double>(predictions.size());
}

double rmse(std::span<const Prediction> predictions) {
    if (predictions.empty())
        throw DataError("RMSE of an empty prediction set");
    double sum = 0.0;
    for (const Prediction& p : predictions)
        sum += (p.predicted - p.actual) * (p.predicted - p.actual);
    return std::sqrt(sum / static_cast<double>(predictions.size()));
}

std::vector<Prediction> score(const TrainedModel& model, const SparseRatings& ratings,
                              std::span<const std::size_t> positions) {
    std::vector<Prediction> out;
    out.reserve(positions.size());
    for (std::size_t p : positions) {
        const Rating& r = ratings[p];
        out.push_back({predict(model, r.item, r.user), r.value});
    }
    return out;
}

std::vector<Prediction> constant_predictions(const SparseRatings& ratings,
                                             std::span<const std::size_t> positions, double value) {
    std::vector<Prediction> out;
    out.reserve(positions.size());
    for (std::size_t p : positions)
        out.push_back({value, ratings[p].value});
    return out;
}

// ----------------------------------------------------------------- grid search

std::vector<TrainConfig> GridSpec::enumerate(VariantKind kind, const TrainConfig& base) const {
    std::vector<TrainConfig> out;
    for (std::size_t t : latent_counts) {
        for (std::size_t h : hidden_sizes) {
            if (kind == VariantKind::mf && h != 0)
                continue;
            for (double lambda : lambdas) {
                TrainConfig c = base;
                c.latent_count = t;
                c.lambda = lambda;
                c.hidden_sizes = h == 0 ? std::vector<std::size_t>{} : std::vector<std::size_t>{h};
                out.push_back(c);
            }
        }
    }
    if (out.empty())
        throw ConfigError("grid has no valid points for variant " + to_string(kind));
    return out;
}

const GridPoint* best_grid_point(std::span<const GridPoint> points) {
    const auto key = [](const TrainConfig& c) {
        return std::make_tuple(c.latent_count, hidden_units(c), -c.lambda);
    };
    const GridPoint* best = nullptr;
    for (const GridPoint& p : points) {
        if (p.diverged)
            continue;
        if (best == nullptr || p.validation_mae < best->validation_mae) {
            best = &p;
            continue;
        }
        if (p.validation_mae == best->validation_mae && key(p.config) < key(best->config))
            best = &p;
    }
    return best;
}

GridResult grid_search(VariantKind kind, const GridSpec& grid, const TrainConfig& base,
                       const Dataset& data, const SplitAssignment& split, std::size_t workers) {
    if (split.validation.empty())
        throw DataError("grid search needs a validation partition");
    const auto configs = grid.enumerate(kind, base);
    const SparseRatings training = data.ratings.subset(split.training());

    std::vector<ModelSpec> specs;
    for (const TrainConfig& c : configs)
        specs.push_back(make_variant(kind, c));

    GridResult result;
    result.kind = kind;
    result.points.resize(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    parallel_for(configs.size(), workers, [&](std::size_t i) {
        GridPoint& point = result.points[i];
        point.config = configs[i];
        const auto start = Clock::now();
        try {
            TrainedModel model = train_variant(specs[i], training, data.profiles);
            auto preds = score(model, data.ratings, split.validation);
            point.validation_mae = mae(preds);
        } catch (const DivergenceError& e) {
            point.diverged = true;
            point.error = e.what();
        } catch (...) {
            errors[i] = std::current_exception();
        }
        point.seconds = seconds_since(start);
    });
    rethrow_first(errors);

    const GridPoint* best = best_grid_point(result.points);
    if (best == nullptr)
        throw DivergenceError("every grid point diverged");
    result.best = best->config;
    result.best_mae = best->validation_mae;
    return result;
}

// ------------------------------------------------------------------ evaluation

MetricRow evaluate_holdout(const ModelSpec& spec, const Dataset& data, const SplitAssignment& split,
                           const TrainHooks& hooks) {
    MetricRow row;
    row.variant = to_string(spec.kind);
    row.split = "test";
    row.config = spec.config;
    row.seed = spec.config.seed;
    const auto start = Clock::now();
    const SparseRatings training = data.ratings.subset(split.training_and_validation());
    TrainedModel model = train_variant(spec, training, data.profiles, hooks);
    auto preds = score(model, data.ratings, split.test);
    row.seconds = seconds_since(start);
    row.mae = mae(preds);
    row.rmse = rmse(preds);
    row.count = preds.size();
    return row;
}

CvReport evaluate_cv(const ModelSpec& spec, const Dataset& data, int k, std::uint64_t seed,
                     std::size_t workers) {
    const SplitAssignment folds = kfold(data.ratings, k, seed);
    CvReport report;
    report.folds.resize(static_cast<std::size_t>(k));
    std::vector<std::exception_ptr> errors(report.folds.size());
    parallel_for(static_cast<std::size_t>(k), workers, [&](std::size_t f) {
        MetricRow& row = report.folds[f];
        row.variant = to_string(spec.kind);
        row.split = "fold" + std::to_string(f);
        row.config = spec.config;
        row.seed = spec.config.seed;
        const auto start = Clock::now();
        try {
            const SparseRatings training = data.ratings.subset(folds.all_but_fold(static_cast<int>(f)));
            TrainedModel model = train_variant(spec, training, data.profiles);
            auto held = folds.fold(static_cast<int>(f));
            auto preds = score(model, data.ratings, held);
            row.mae = mae(preds);
            row.rmse = rmse(preds);
            row.count = preds.size();
        } catch (const DivergenceError& e) {
            row.failed = true;
            row.error = e.what();
        } catch (...) {
            errors[f] = std::current_exception();
        }
        row.seconds = seconds_since(start);
    });
    rethrow_first(errors);

    MetricRow& s = report.summary;
    s.variant = to_string(spec.kind);
    s.split = std::to_string(k) + "CV";
    s.config = spec.config;
    s.seed = seed;
    std::size_t ok = 0;
    for (const MetricRow& row : report.folds) {
        s.seconds += row.seconds;
        if (row.failed) {
            ++report.failed_folds;
            continue;
        }
        ++ok;
        s.mae += row.mae;
        s.rmse += row.rmse;
        s.count += row.count;
    }
    if (ok > 0) {
        s.mae /= static_cast<double>(ok);
        s.rmse /= static_cast<double>(ok);
    }
    if (report.failed_folds > 0) {
        s.failed = true;
        s.error = std::to_string(report.failed_folds) + " fold(s) diverged";
    }
    return report;
}

// ------------------------------------------------------------------- cold start

GenreMeanBaseline::GenreMeanBaseline(const SparseRatings& training, const ItemProfiles& profiles)
    : profiles_(&profiles), sums_(profiles.num_items(), 0.0), counts_(profiles.num_items(), 0) {
    if (training.empty())
        throw DataError("baseline needs training ratings");
    double total = 0.0;
    for (const Rating& r : training.triples()) {
        sums_[r.item] += r.value;
        ++counts_[r.item];
        total += r.value;
    }
    global_mean_ = total / static_cast<double>(training.size());
}

double GenreMeanBaseline::predict(std::span<const double> profile) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < profiles_->num_items(); ++r) {
        if (counts_[r] == 0)
            continue;
        auto row = profiles_->row(r);
        if (std::equal(row.begin(), row.end(), profile.begin(), profile.end())) {
            sum += sums_[r];
            n += counts_[r];
        }
    }
    return n == 0 ? global_mean_ : sum / static_cast<double>(n);
}

std::vector<HoldOutCondition> top_k_conditions(const Dataset& data, std::size_t k,
                                               bool include_individual) {
    auto items = most_rated_items(data.ratings, k);
    std::vector<HoldOutCondition> out;
    auto label_of = [&](std::size_t item) {
        return data.item_ids.size() == data.ratings.num_items()
                   ? std::to_string(data.item_ids.id(item))
                   : std::to_string(item);
    };
    if (include_individual) {
        // Sorted by label text, the column order of the usual results table.
        std::vector<std::size_t> sorted = items;
        std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
            return label_of(a) < label_of(b);
        });
        for (std::size_t item : sorted)
            out.push_back({label_of(item), {item}});
    }
    out.push_back({"top" + std::to_string(k), items});
    return out;
}

ColdStartReport coldstart_experiment(const ModelSpec& spec, const Dataset& data,
                                     std::span<const HoldOutCondition> conditions,
                                     const ColdStartConfig& config, std::size_t workers) {
    if (!spec.use_attributes)
        throw ConfigError("cold-start prediction needs a variant with item descriptions (lnn, lnn3pt)");
    ColdStartReport report;
    report.variant = to_string(spec.kind);
    report.conditions.resize(conditions.size());

    std::vector<std::exception_ptr> errors(conditions.size());
    parallel_for(conditions.size(), workers, [&](std::size_t ci) {
        try {
            const HoldOutCondition& cond = conditions[ci];
            ColdStartCondition& out = report.conditions[ci];
            out.label = cond.label;
            out.items = cond.items;
            const auto start = Clock::now();

            HoldOut split = hold_out_items(data.ratings, cond.items);
            out.held_count = split.held.size();
            if (split.held.empty()) {
                out.empty = true;
                return;
            }
            TrainedModel model = train_variant(spec, split.train, data.profiles);
            ColdStartPredictor predictor(model, split.train, config);
            GenreMeanBaseline baseline(split.train, data.profiles);

            // Neighbors and the baseline depend only on the item.
            std::map<std::size_t, std::pair<std::vector<Neighbor>, double>> per_item;
            std::vector<Prediction> preds;
            std::vector<Prediction> base;
            for (const Rating& r : split.held.triples()) {
                auto profile = model.profiles.row(r.item);
                auto it = per_item.find(r.item);
                if (it == per_item.end())
                    it = per_item
                             .emplace(r.item, std::make_pair(predictor.eligible_neighbors(profile),
                                                             baseline.predict(profile)))
                             .first;
                ColdStartPrediction p = predictor.predict_from(it->second.first, profile, r.user);
                out.fallback_count += p.fallback ? 1 : 0;
                preds.push_back({p.rating, r.value});
                base.push_back({it->second.second, r.value});
            }
            out.mae = mae(preds);
            out.rmse = rmse(preds);
            out.baseline_mae = mae(base);
            out.seconds = seconds_since(start);
        } catch (...) {
            errors[ci] = std::current_exception();
        }
    });
    rethrow_first(errors);
    return report;
}

} // namespace lnn
