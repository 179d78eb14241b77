#pragma once

// Rating prediction for items that have never been rated. Latent vectors are
// borrowed from well-rated items whose description matches the new item, each
// borrowed vector yields one rounded network prediction, and the result is
// the mode of those predictions weighted by each neighbor's rating count.

#include "lnn/data.hpp"
#include "lnn/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace lnn {

struct ColdStartConfig {
    std::size_t num_neighbors = 100;
    /// Neighbors farther than this (Hamming) are skipped.
    double dist_thresh = 0.0;
    /// Neighbors need strictly more ratings than this.
    std::size_t min_ratings = 50;

    void validate() const;
};

struct Neighbor {
    std::size_t item = 0;
    double distance = 0.0;

    bool operator==(const Neighbor&) const = default;
};

/// Exact k-nearest-neighbor search over item profiles under Hamming distance
/// (number of attribute positions that differ). Linear scan over packed bit
/// rows; ties resolve to the lower item index.
class NeighborIndex {
public:
    NeighborIndex() = default;
    explicit NeighborIndex(const ItemProfiles& profiles);

    std::size_t size() const noexcept { return num_items_; }
    std::size_t num_attributes() const noexcept { return num_attributes_; }

    std::vector<Neighbor> query(std::span<const double> profile, std::size_t k) const;

private:
    std::size_t num_items_ = 0;
    std::size_t num_attributes_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> bits_;
    // Non-binary profiles fall back to comparing raw values.
    bool binary_ = true;
    std::vector<double> raw_;
};

std::vector<Neighbor> get_neighbors(std::span<const double> profile, std::size_t k,
                                    const NeighborIndex& index);

/// Accumulated weight per predicted rating value.
class RatingHistogram {
public:
    void add(double rating, std::uint64_t weight);
    std::uint64_t weight(double rating) const;
    std::uint64_t total() const noexcept { return total_; }
    bool empty() const noexcept { return total_ == 0; }
    const std::map<double, std::uint64_t>& bins() const noexcept { return bins_; }

private:
    std::map<double, std::uint64_t> bins_;
    std::uint64_t total_ = 0;
};

/// Rating with the largest weight; ties go to the lower rating.
/// Throws NoEligibleNeighbors when nothing has positive weight.
double weighted_mode(const RatingHistogram& hist);

struct ColdStartPrediction {
    double rating = 0.0;
    bool fallback = false;
    RatingHistogram histogram;
    std::vector<Neighbor> contributors;
};

/// Reusable predictor: neighbor index and training rating counts are built once.
class ColdStartPredictor {
public:
    ColdStartPredictor(const TrainedModel& model, std::vector<std::size_t> item_rating_counts,
                       ColdStartConfig config = {});
    ColdStartPredictor(const TrainedModel& model, const SparseRatings& training,
                       ColdStartConfig config = {});

    /// Eligible neighbors for a profile (depends only on the profile).
    std::vector<Neighbor> eligible_neighbors(std::span<const double> profile) const;

    ColdStartPrediction predict_detailed(std::span<const double> profile, std::size_t user) const;
    double predict(std::span<const double> profile, std::size_t user) const;
    /// Same as predict but reuses a precomputed eligible-neighbor list.
    ColdStartPrediction predict_from(std::span<const Neighbor> eligible,
                                     std::span<const double> profile, std::size_t user) const;

    double fallback_rating() const noexcept;
    const ColdStartConfig& config() const noexcept { return config_; }

private:
    const TrainedModel* model_;
    std::vector<std::size_t> counts_;
    ColdStartConfig config_;
    NeighborIndex index_;
};

/// One-shot form: builds the index and counts from the given ratings.
double new_item_prediction(std::span<const double> profile, std::size_t user,
                           const TrainedModel& model, const SparseRatings& ratings,
                           const ColdStartConfig& config = {});

} // namespace lnn
