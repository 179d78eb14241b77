#pragma once

#include "lnn/coldstart.hpp"
#include "lnn/data.hpp"
#include "lnn/trainer.hpp"
#include "lnn/variants.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lnn {

struct Prediction {
    double predicted = 0.0;
    double actual = 0.0;
};

/// Mean absolute error on the native scale. Throws DataError when empty.
double mae(std::span<const Prediction> predictions);
double rmse(std::span<const Prediction> predictions);

/// Scores a trained model on the triples at the given positions.
std::vector<Prediction> score(const TrainedModel& model, const SparseRatings& ratings,
                              std::span<const std::size_t> positions);
std::vector<Prediction> constant_predictions(const SparseRatings& ratings,
                                             std::span<const std::size_t> positions, double value);

struct MetricRow {
    std::string variant;
    std::string split; ///< "validation", "test", "10CV", "fold3", ...
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t count = 0;
    double seconds = 0.0;
    TrainConfig config;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
};

struct GridSpec {
    std::vector<std::size_t> latent_counts{2, 4, 8, 16, 32};
    std::vector<double> lambdas{0.001, 0.01, 0.1};
    /// 0 means no hidden layer.
    std::vector<std::size_t> hidden_sizes{0, 8, 16, 32};

    /// Every valid configuration for the variant (MF only takes hidden = 0).
    std::vector<TrainConfig> enumerate(VariantKind kind, const TrainConfig& base) const;
};

struct GridPoint {
    TrainConfig config;
    double validation_mae = 0.0;
    double seconds = 0.0;
    bool diverged = false;
    std::string error;
};

struct GridResult {
    VariantKind kind = VariantKind::lnn_3pt;
    TrainConfig best;
    double best_mae = 0.0;
    std::vector<GridPoint> points;
};

/// Lowest validation MAE among non-diverged points, ties broken as in
/// grid_search; nullptr when every point diverged.
const GridPoint* best_grid_point(std::span<const GridPoint> points);

/// Trains every grid point on the training partition, scores the validation
/// partition, and returns the argmin. Ties prefer smaller t, then fewer hidden
/// units, then larger lambda. Diverged points are recorded and skipped.
GridResult grid_search(VariantKind kind, const GridSpec& grid, const TrainConfig& base,
                       const Dataset& data, const SplitAssignment& split, std::size_t workers = 1);

/// Trains on training + validation and scores the test partition.
MetricRow evaluate_holdout(const ModelSpec& spec, const Dataset& data, const SplitAssignment& split,
                           const TrainHooks& hooks = {});

struct CvReport {
    MetricRow summary;
    std::vector<MetricRow> folds;
    std::size_t failed_folds = 0;
};

/// k-fold cross-validation; the summary MAE/RMSE is the mean over folds that
/// trained successfully.
CvReport evaluate_cv(const ModelSpec& spec, const Dataset& data, int k, std::uint64_t seed,
                     std::size_t workers = 1);

/// Mean training rating of items whose profile is identical to the queried
/// item's; falls back to the global mean when no such item was rated.
class GenreMeanBaseline {
public:
    GenreMeanBaseline(const SparseRatings& training, const ItemProfiles& profiles);
    double predict(std::span<const double> profile) const;

private:
    const ItemProfiles* profiles_;
    std::vector<double> sums_;
    std::vector<std::size_t> counts_;
    double global_mean_ = 0.0;
};

struct ColdStartCondition {
    std::string label;
    std::vector<std::size_t> items;
    std::size_t held_count = 0;
    double mae = 0.0;
    double rmse = 0.0;
    double baseline_mae = 0.0;
    std::size_t fallback_count = 0;
    double seconds = 0.0;
    bool empty = false;
};

struct ColdStartReport {
    std::string variant;
    std::vector<ColdStartCondition> conditions;
};

struct HoldOutCondition {
    std::string label;
    std::vector<std::size_t> items;
};

/// Each top-k item alone, then all of them together (labelled "top<k>").
/// Labels use original item ids when available.
std::vector<HoldOutCondition> top_k_conditions(const Dataset& data, std::size_t k,
                                               bool include_individual = true);

/// For each condition: remove the items' ratings, retrain on the rest with
/// the given spec, predict every removed rating through the cold-start
/// procedure, and compare with the genre-mean baseline.
ColdStartReport coldstart_experiment(const ModelSpec& spec, const Dataset& data,
                                     std::span<const HoldOutCondition> conditions,
                                     const ColdStartConfig& config = {}, std::size_t workers = 1);

} // namespace lnn
