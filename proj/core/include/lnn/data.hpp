#pragma once

// Sparse rating data, item descriptions, and the train/validation/test
// bookkeeping shared by every other part of the engine.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lnn {

/// Affine map between a dataset's native rating scale and the network's
/// target range. A step of 0 denotes a continuous scale.
struct RatingScale {
    double min_rating = 0.5;
    double max_rating = 5.0;
    double step = 0.5;
    double target_low = 0.0;
    double target_high = 1.0;

    static RatingScale movielens() { return {}; }

    bool contains(double r) const noexcept;
    /// True iff r is inside the scale and sits on the step grid.
    bool is_valid(double r) const noexcept;

    double normalize(double r) const;
    double denormalize(double y) const noexcept;
    double clamp(double r) const noexcept;
    /// Nearest valid scale value, ties rounding up.
    double round_to_step(double r) const noexcept;
    double midpoint() const noexcept { return 0.5 * (min_rating + max_rating); }

    bool operator==(const RatingScale&) const = default;
};

double normalize(double r, const RatingScale& scale);
double denormalize(double y, const RatingScale& scale);

struct Rating {
    std::size_t item = 0;
    std::size_t user = 0;
    double value = 0.0;

    bool operator==(const Rating&) const = default;
};

/// The m x n item/user rating matrix, stored as triples.
class SparseRatings {
public:
    SparseRatings() = default;
    /// Validates every invariant (range, scale, no duplicate pair).
    SparseRatings(std::vector<Rating> triples, std::size_t num_items, std::size_t num_users,
                  RatingScale scale);

    std::span<const Rating> triples() const noexcept { return triples_; }
    const Rating& operator[](std::size_t i) const { return triples_[i]; }
    std::size_t size() const noexcept { return triples_.size(); }
    bool empty() const noexcept { return triples_.empty(); }
    std::size_t num_items() const noexcept { return num_items_; }
    std::size_t num_users() const noexcept { return num_users_; }
    const RatingScale& scale() const noexcept { return scale_; }

    /// Triples at the given positions, same m, n, and scale.
    SparseRatings subset(std::span<const std::size_t> positions) const;
    /// Number of ratings per item.
    std::vector<std::size_t> item_rating_counts() const;

private:
    std::vector<Rating> triples_;
    std::size_t num_items_ = 0;
    std::size_t num_users_ = 0;
    RatingScale scale_;
};

/// Given (non-latent) portion of every item profile, one row per item.
class ItemProfiles {
public:
    ItemProfiles() = default;
    ItemProfiles(std::size_t num_items, std::size_t num_attributes);
    ItemProfiles(std::size_t num_items, std::size_t num_attributes,
                 std::vector<std::string> attribute_names);

    std::size_t num_items() const noexcept { return num_items_; }
    std::size_t num_attributes() const noexcept { return num_attributes_; }

    std::span<const double> row(std::size_t item) const;
    std::span<double> row(std::size_t item);
    void set(std::size_t item, std::size_t attribute, double value);

    const std::vector<std::string>& attribute_names() const noexcept { return names_; }
    std::optional<std::size_t> attribute_index(const std::string& name) const;
    /// Builds a binary profile vector from attribute names.
    std::vector<double> encode(std::span<const std::string> names) const;
    /// Same items, zero attributes.
    ItemProfiles without_attributes() const { return ItemProfiles(num_items_, 0); }

    bool operator==(const ItemProfiles&) const = default;

private:
    std::size_t num_items_ = 0;
    std::size_t num_attributes_ = 0;
    std::vector<double> values_;
    std::vector<std::string> names_;
};

/// Dense index <-> original identifier mapping.
class IdMap {
public:
    IdMap() = default;
    /// Indices are assigned in ascending id order.
    explicit IdMap(std::vector<std::int64_t> ids);

    std::size_t size() const noexcept { return ids_.size(); }
    std::int64_t id(std::size_t index) const { return ids_.at(index); }
    std::optional<std::size_t> index(std::int64_t id) const;
    const std::vector<std::int64_t>& ids() const noexcept { return ids_; }

    bool operator==(const IdMap& other) const { return ids_ == other.ids_; }

private:
    std::vector<std::int64_t> ids_;
    std::map<std::int64_t, std::size_t> lookup_;
};

struct Dataset {
    SparseRatings ratings;
    ItemProfiles profiles;
    IdMap item_ids;
    IdMap user_ids;
};

/// HetRec2011 MovieLens files: tab-separated with a header row.
/// Ratings columns start with userID, movieID, rating; genre columns are
/// movieID, genre.
Dataset load_movielens(const std::filesystem::path& ratings_path,
                       const std::filesystem::path& genres_path);
/// Looks for user_ratedmovies.dat and movie_genres.dat inside dir.
Dataset load_movielens_dir(const std::filesystem::path& dir);
/// One `item,user,rating` triple per line; '#' starts a comment. No profiles.
Dataset load_triples_csv(const std::filesystem::path& path, const RatingScale& scale);

struct SplitAssignment {
    std::vector<std::size_t> test;        ///< sorted triple positions
    std::vector<std::size_t> validation;  ///< sorted triple positions
    std::vector<int> fold_of;             ///< k-fold mode only; empty otherwise
    std::size_t total = 0;
    int num_folds = 0;

    /// Positions in neither test nor validation.
    std::vector<std::size_t> training() const;
    /// Training plus validation (everything but test).
    std::vector<std::size_t> training_and_validation() const;
    std::vector<std::size_t> fold(int f) const;
    std::vector<std::size_t> all_but_fold(int f) const;
};

/// 20% test, then 10% of the remainder as validation; floor() sizes.
SplitAssignment split_holdout(const SparseRatings& ratings, std::uint64_t seed);
SplitAssignment kfold(const SparseRatings& ratings, int k, std::uint64_t seed);

struct HoldOut {
    SparseRatings train;
    SparseRatings held;
};

HoldOut hold_out_items(const SparseRatings& ratings, std::span<const std::size_t> items);

/// The k items with the most ratings, ties by ascending index.
std::vector<std::size_t> most_rated_items(const SparseRatings& ratings, std::size_t k);

} // namespace lnn
