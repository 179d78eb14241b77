#include "lnn/coldstart.hpp"

#include "lnn/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace lnn {

void ColdStartConfig::validate() const {
    if (num_neighbors < 1)
        throw ConfigError("num_neighbors must be at least 1");
    if (!(dist_thresh >= 0.0))
        throw ConfigError("dist_thresh must be non-negative");
}

// ---------------------------------------------------------------- NeighborIndex

namespace {

bool is_binary(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0 || x == 1.0; });
}

void pack(std::span<const double> values, std::span<std::uint64_t> out) {
    std::fill(out.begin(), out.end(), 0);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] != 0.0)
            out[i / 64] |= std::uint64_t{1} << (i % 64);
}

} // namespace

NeighborIndex::NeighborIndex(const ItemProfiles& profiles)
    : num_items_(profiles.num_items()), num_attributes_(profiles.num_attributes()),
      words_((profiles.num_attributes() + 63) / 64) {
    raw_.reserve(num_items_ * num_attributes_);
    for (std::size_t r = 0; r < num_items_; ++r) {
        auto row = profiles.row(r);
        raw_.insert(raw_.end(), row.begin(), row.end());
        binary_ = binary_ && is_binary(row);
    }
    if (binary_) {
        bits_.assign(num_items_ * words_, 0);
        for (std::size_t r = 0; r < num_items_; ++r)
            pack(profiles.row(r), {bits_.data() + r * words_, words_});
    }
}

std::vector<Neighbor> NeighborIndex::query(std::span<const double> profile, std::size_t k) const {
    if (profile.size() != num_attributes_)
        throw DataError("query profile has " + std::to_string(profile.size()) +
                        " attributes, index expects " + std::to_string(num_attributes_));
    std::vector<Neighbor> all(num_items_);
    if (binary_ && is_binary(profile)) {
        std::vector<std::uint64_t> q(words_);
        pack(profile, q);
        for (std::size_t r = 0; r < num_items_; ++r) {
            const std::uint64_t* row = bits_.data() + r * words_;
            int d = 0;
            for (std::size_t w = 0; w < words_; ++w)
                d += std::popcount(row[w] ^ q[w]);
            all[r] = {r, static_cast<double>(d)};
        }
    } else {
        for (std::size_t r = 0; r < num_items_; ++r) {
            const double* row = raw_.data() + r * num_attributes_;
            int d = 0;
            for (std::size_t i = 0; i < num_attributes_; ++i)
                d += row[i] != profile[i];
            all[r] = {r, static_cast<double>(d)};
        }
    }
    const std::size_t take = std::min(k, all.size());
    auto less = [](const Neighbor& a, const Neighbor& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.item < b.item);
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), less);
    all.resize(take);
    return all;
}

std::vector<Neighbor> get_neighbors(std::span<const double> profile, std::size_t k,
                                    const NeighborIndex& index) {
    if (index.size() == 0)
        return {};
    return index.query(profile, k);
}

// -------------------------------------------------------------- RatingHistogram

void RatingHistogram::add(double rating, std::uint64_t weight) {
    if (weight == 0)
        return;
    bins_[rating] += weight;
    total_ += weight;
}

std::uint64_t RatingHistogram::weight(double rating) const {
    auto it = bins_.find(rating);
    return it == bins_.end() ? 0 : it->second;
}

double weighted_mode(const RatingHistogram& hist) {
    if (hist.empty())
        throw NoEligibleNeighbors();
    double best = 0.0;
    std::uint64_t best_weight = 0;
    for (const auto& [rating, w] : hist.bins()) {
        if (w > best_weight) {
            best = rating;
            best_weight = w;
        }
    }
    return best;
}

// ----------------------------------------------------------- ColdStartPredictor

ColdStartPredictor::ColdStartPredictor(const TrainedModel& model,
                                       std::vector<std::size_t> item_rating_counts,
                                       ColdStartConfig config)
    : model_(&model), counts_(std::move(item_rating_counts)), config_(config),
      index_(model.profiles) {
    config_.validate();
    if (counts_.size() != model.latents.rows())
        throw DataError("rating counts do not cover every item");
}

ColdStartPredictor::ColdStartPredictor(const TrainedModel& model, const SparseRatings& training,
                                       ColdStartConfig config)
    : ColdStartPredictor(model, training.item_rating_counts(), config) {}

std::vector<Neighbor> ColdStartPredictor::eligible_neighbors(std::span<const double> profile) const {
    std::vector<Neighbor> out;
    for (const Neighbor& n : get_neighbors(profile, config_.num_neighbors, index_))
        if (counts_[n.item] > config_.min_ratings && n.distance <= config_.dist_thresh)
            out.push_back(n);
    return out;
}

double ColdStartPredictor::fallback_rating() const noexcept {
    return model_->scale.round_to_step(model_->scale.midpoint());
}

ColdStartPrediction ColdStartPredictor::predict_from(std::span<const Neighbor> eligible,
                                                     std::span<const double> profile,
                                                     std::size_t user) const {
    ColdStartPrediction out;
    for (const Neighbor& n : eligible) {
        const double raw = predict_with(*model_, model_->latents.row(n.item), profile, user);
        out.histogram.add(model_->scale.round_to_step(raw), counts_[n.item]);
        out.contributors.push_back(n);
    }
    if (out.histogram.empty()) {
        out.rating = fallback_rating();
        out.fallback = true;
    } else {
        out.rating = weighted_mode(out.histogram);
    }
    return out;
}

ColdStartPrediction ColdStartPredictor::predict_detailed(std::span<const double> profile,
                                                         std::size_t user) const {
    auto eligible = eligible_neighbors(profile);
    return predict_from(eligible, profile, user);
}

double ColdStartPredictor::predict(std::span<const double> profile, std::size_t user) const {
    return predict_detailed(profile, user).rating;
}

double new_item_prediction(std::span<const double> profile, std::size_t user,
                           const TrainedModel& model, const SparseRatings& ratings,
                           const ColdStartConfig& config) {
    return ColdStartPredictor(model, ratings, config).predict(profile, user);
}

} // namespace lnn
