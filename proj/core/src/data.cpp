#include "lnn/data.hpp"

#include "lnn/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_set>

namespace lnn {

namespace {

constexpr double kStepTolerance = 1e-9;

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n'))
        ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n'))
        --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
    if (s.empty())
        return false;
    const char* first = s.data();
    if (*first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line, const std::string& msg) {
    std::ostringstream os;
    os << path.string() << ":" << line << ": " << msg;
    throw DataError(os.str());
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    return in;
}

std::uint64_t pair_key(std::size_t item, std::size_t user) {
    return (static_cast<std::uint64_t>(item) << 32) ^ static_cast<std::uint64_t>(user);
}

std::vector<std::size_t> shuffled_positions(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

} // namespace

// ---------------------------------------------------------------- RatingScale

bool RatingScale::contains(double r) const noexcept {
    return std::isfinite(r) && r >= min_rating - kStepTolerance && r <= max_rating + kStepTolerance;
}

bool RatingScale::is_valid(double r) const noexcept {
    if (!contains(r))
        return false;
    if (step <= 0.0)
        return true;
    double k = (r - min_rating) / step;
    return std::abs(k - std::round(k)) < kStepTolerance;
}

double RatingScale::normalize(double r) const {
    if (!contains(r)) {
        std::ostringstream os;
        os << "rating " << r << " outside scale [" << min_rating << ", " << max_rating << "]";
        throw DataError(os.str());
    }
    return target_low + (r - min_rating) * (target_high - target_low) / (max_rating - min_rating);
}

double RatingScale::denormalize(double y) const noexcept {
    return min_rating + (y - target_low) * (max_rating - min_rating) / (target_high - target_low);
}

double RatingScale::clamp(double r) const noexcept {
    return std::clamp(r, min_rating, max_rating);
}

double RatingScale::round_to_step(double r) const noexcept {
    double c = clamp(r);
    if (step <= 0.0)
        return c;
    double k = std::floor((c - min_rating) / step + 0.5);
    return clamp(min_rating + k * step);
}

double normalize(double r, const RatingScale& scale) { return scale.normalize(r); }
double denormalize(double y, const RatingScale& scale) { return scale.denormalize(y); }

// -------------------------------------------------------------- SparseRatings

SparseRatings::SparseRatings(std::vector<Rating> triples, std::size_t num_items,
                             std::size_t num_users, RatingScale scale)
    : triples_(std::move(triples)), num_items_(num_items), num_users_(num_users), scale_(scale) {
    if (!(scale_.max_rating > scale_.min_rating) || scale_.step < 0.0 ||
        scale_.target_high == scale_.target_low)
        throw DataError("invalid rating scale");
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(triples_.size() * 2);
    for (const Rating& t : triples_) {
        if (t.item >= num_items_ || t.user >= num_users_)
            throw DataError("rating index out of range");
        if (!scale_.is_valid(t.value))
            throw DataError("rating value " + std::to_string(t.value) + " not valid on scale");
        if (!seen.insert(pair_key(t.item, t.user)).second)
            throw DataError("duplicate rating for item " + std::to_string(t.item) + ", user " +
                            std::to_string(t.user));
    }
}

SparseRatings SparseRatings::subset(std::span<const std::size_t> positions) const {
    SparseRatings out;
    out.triples_.reserve(positions.size());
    for (std::size_t p : positions)
        out.triples_.push_back(triples_.at(p));
    out.num_items_ = num_items_;
    out.num_users_ = num_users_;
    out.scale_ = scale_;
    return out;
}

std::vector<std::size_t> SparseRatings::item_rating_counts() const {
    std::vector<std::size_t> counts(num_items_, 0);
    for (const Rating& t : triples_)
        ++counts[t.item];
    return counts;
}

// --------------------------------------------------------------- ItemProfiles

ItemProfiles::ItemProfiles(std::size_t num_items, std::size_t num_attributes)
    : num_items_(num_items), num_attributes_(num_attributes),
      values_(num_items * num_attributes, 0.0) {}

ItemProfiles::ItemProfiles(std::size_t num_items, std::size_t num_attributes,
                           std::vector<std::string> attribute_names)
    : ItemProfiles(num_items, num_attributes) {
    if (attribute_names.size() != num_attributes)
        throw DataError("attribute name count does not match attribute count");
    names_ = std::move(attribute_names);
}

std::span<const double> ItemProfiles::row(std::size_t item) const {
    if (item >= num_items_)
        throw DataError("profile row out of range");
    return {values_.data() + item * num_attributes_, num_attributes_};
}

std::span<double> ItemProfiles::row(std::size_t item) {
    if (item >= num_items_)
        throw DataError("profile row out of range");
    return {values_.data() + item * num_attributes_, num_attributes_};
}

void ItemProfiles::set(std::size_t item, std::size_t attribute, double value) {
    if (attribute >= num_attributes_)
        throw DataError("attribute index out of range");
    row(item)[attribute] = value;
}

std::optional<std::size_t> ItemProfiles::attribute_index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

std::vector<double> ItemProfiles::encode(std::span<const std::string> names) const {
    std::vector<double> out(num_attributes_, 0.0);
    for (const std::string& n : names) {
        auto idx = attribute_index(n);
        if (!idx)
            throw DataError("unknown attribute '" + n + "'");
        out[*idx] = 1.0;
    }
    return out;
}

// ---------------------------------------------------------------------- IdMap

IdMap::IdMap(std::vector<std::int64_t> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    for (std::size_t i = 0; i < ids_.size(); ++i)
        lookup_.emplace(ids_[i], i);
}

std::optional<std::size_t> IdMap::index(std::int64_t id) const {
    auto it = lookup_.find(id);
    if (it == lookup_.end())
        return std::nullopt;
    return it->second;
}

// -------------------------------------------------------------------- loaders

namespace {

struct RawRating {
    std::int64_t item;
    std::int64_t user;
    double value;
    std::size_t line;
};

} // namespace

Dataset load_movielens(const std::filesystem::path& ratings_path,
                       const std::filesystem::path& genres_path) {
    const RatingScale scale = RatingScale::movielens();

    std::vector<RawRating> raw;
    {
        std::ifstream in = open_or_throw(ratings_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno == 1)
                continue; // header
            if (trim(line).empty())
                continue;
            auto fields = split(line, '\t');
            if (fields.size() < 3)
                fail_at(ratings_path, lineno, "expected at least 3 tab-separated columns");
            std::int64_t user = 0;
            std::int64_t movie = 0;
            double value = 0.0;
            if (!parse_number(fields[0], user))
                fail_at(ratings_path, lineno, "bad userID '" + fields[0] + "'");
            if (!parse_number(fields[1], movie))
                fail_at(ratings_path, lineno, "bad movieID '" + fields[1] + "'");
            if (!parse_number(fields[2], value))
                fail_at(ratings_path, lineno, "bad rating '" + fields[2] + "'");
            if (!scale.is_valid(value))
                fail_at(ratings_path, lineno, "rating '" + fields[2] + "' not on the 0.5..5.0 scale");
            raw.push_back({movie, user, value, lineno});
        }
    }

    std::vector<std::pair<std::int64_t, std::string>> genre_rows;
    {
        std::ifstream in = open_or_throw(genres_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno == 1)
                continue;
            if (trim(line).empty())
                continue;
            auto fields = split(line, '\t');
            if (fields.size() < 2 || fields[1].empty())
                fail_at(genres_path, lineno, "expected movieID and genre columns");
            std::int64_t movie = 0;
            if (!parse_number(fields[0], movie))
                fail_at(genres_path, lineno, "bad movieID '" + fields[0] + "'");
            genre_rows.emplace_back(movie, fields[1]);
        }
    }

    std::vector<std::int64_t> movie_ids;
    std::vector<std::int64_t> user_ids;
    movie_ids.reserve(raw.size() + genre_rows.size());
    user_ids.reserve(raw.size());
    for (const RawRating& r : raw) {
        movie_ids.push_back(r.item);
        user_ids.push_back(r.user);
    }
    for (const auto& g : genre_rows)
        movie_ids.push_back(g.first);

    std::set<std::string> genre_set;
    for (const auto& g : genre_rows)
        genre_set.insert(g.second);

    Dataset ds;
    ds.item_ids = IdMap(std::move(movie_ids));
    ds.user_ids = IdMap(std::move(user_ids));

    std::vector<Rating> triples;
    triples.reserve(raw.size());
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(raw.size() * 2);
    for (const RawRating& r : raw) {
        std::size_t item = *ds.item_ids.index(r.item);
        std::size_t user = *ds.user_ids.index(r.user);
        if (!seen.insert(pair_key(item, user)).second)
            fail_at(ratings_path, r.line,
                    "duplicate rating for user " + std::to_string(r.user) + ", movie " +
                        std::to_string(r.item));
        triples.push_back({item, user, r.value});
    }
    ds.ratings = SparseRatings(std::move(triples), ds.item_ids.size(), ds.user_ids.size(), scale);

    std::vector<std::string> names(genre_set.begin(), genre_set.end());
    ds.profiles = ItemProfiles(ds.item_ids.size(), names.size(), names);
    for (const auto& [movie, genre] : genre_rows)
        ds.profiles.set(*ds.item_ids.index(movie), *ds.profiles.attribute_index(genre), 1.0);
    return ds;
}

Dataset load_movielens_dir(const std::filesystem::path& dir) {
    return load_movielens(dir / "user_ratedmovies.dat", dir / "movie_genres.dat");
}

Dataset load_triples_csv(const std::filesystem::path& path, const RatingScale& scale) {
    std::ifstream in = open_or_throw(path);
    std::vector<RawRating> raw;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        auto fields = split(t, ',');
        if (fields.size() != 3)
            fail_at(path, lineno, "expected item,user,rating");
        RawRating r{};
        r.line = lineno;
        if (!parse_number(fields[0], r.item) || !parse_number(fields[1], r.user) ||
            !parse_number(fields[2], r.value))
            fail_at(path, lineno, "unparseable triple");
        if (!scale.is_valid(r.value))
            fail_at(path, lineno, "rating '" + fields[2] + "' not valid on scale");
        raw.push_back(r);
    }
    std::vector<std::int64_t> items;
    std::vector<std::int64_t> users;
    for (const RawRating& r : raw) {
        items.push_back(r.item);
        users.push_back(r.user);
    }
    Dataset ds;
    ds.item_ids = IdMap(std::move(items));
    ds.user_ids = IdMap(std::move(users));
    std::vector<Rating> triples;
    std::unordered_set<std::uint64_t> seen;
    for (const RawRating& r : raw) {
        std::size_t item = *ds.item_ids.index(r.item);
        std::size_t user = *ds.user_ids.index(r.user);
        if (!seen.insert(pair_key(item, user)).second)
            fail_at(path, r.line, "duplicate (item, user) pair");
        triples.push_back({item, user, r.value});
    }
    ds.ratings = SparseRatings(std::move(triples), ds.item_ids.size(), ds.user_ids.size(), scale);
    ds.profiles = ItemProfiles(ds.item_ids.size(), 0);
    return ds;
}

// --------------------------------------------------------------------- splits

std::vector<std::size_t> SplitAssignment::training() const {
    std::vector<char> excluded(total, 0);
    for (std::size_t p : test)
        excluded[p] = 1;
    for (std::size_t p : validation)
        excluded[p] = 1;
    std::vector<std::size_t> out;
    out.reserve(total - test.size() - validation.size());
    for (std::size_t p = 0; p < total; ++p)
        if (!excluded[p])
            out.push_back(p);
    return out;
}

std::vector<std::size_t> SplitAssignment::training_and_validation() const {
    std::vector<char> excluded(total, 0);
    for (std::size_t p : test)
        excluded[p] = 1;
    std::vector<std::size_t> out;
    out.reserve(total - test.size());
    for (std::size_t p = 0; p < total; ++p)
        if (!excluded[p])
            out.push_back(p);
    return out;
}

std::vector<std::size_t> SplitAssignment::fold(int f) const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < fold_of.size(); ++p)
        if (fold_of[p] == f)
            out.push_back(p);
    return out;
}

std::vector<std::size_t> SplitAssignment::all_but_fold(int f) const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < fold_of.size(); ++p)
        if (fold_of[p] != f)
            out.push_back(p);
    return out;
}

SplitAssignment split_holdout(const SparseRatings& ratings, std::uint64_t seed) {
    const std::size_t total = ratings.size();
    if (total < 10)
        throw DataError("split needs at least 10 ratings, got " + std::to_string(total));
    const std::size_t n_test = total * 2 / 10;
    const std::size_t n_val = (total - n_test) / 10;

    auto order = shuffled_positions(total, seed);
    SplitAssignment s;
    s.total = total;
    s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                        order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.validation.begin(), s.validation.end());
    return s;
}

SplitAssignment kfold(const SparseRatings& ratings, int k, std::uint64_t seed) {
    if (k < 2)
        throw DataError("k-fold needs k >= 2");
    const std::size_t total = ratings.size();
    if (total < static_cast<std::size_t>(k))
        throw DataError("fewer ratings than folds");
    auto order = shuffled_positions(total, seed);
    SplitAssignment s;
    s.total = total;
    s.num_folds = k;
    s.fold_of.assign(total, 0);
    for (std::size_t rank = 0; rank < total; ++rank)
        s.fold_of[order[rank]] = static_cast<int>(rank % static_cast<std::size_t>(k));
    return s;
}

HoldOut hold_out_items(const SparseRatings& ratings, std::span<const std::size_t> items) {
    std::vector<char> held_item(ratings.num_items(), 0);
    for (std::size_t i : items) {
        if (i >= ratings.num_items())
            throw DataError("hold-out item index out of range");
        held_item[i] = 1;
    }
    std::vector<std::size_t> keep;
    std::vector<std::size_t> held;
    for (std::size_t p = 0; p < ratings.size(); ++p)
        (held_item[ratings[p].item] ? held : keep).push_back(p);
    return {ratings.subset(keep), ratings.subset(held)};
}

std::vector<std::size_t> most_rated_items(const SparseRatings& ratings, std::size_t k) {
    auto counts = ratings.item_rating_counts();
    std::vector<std::size_t> order(counts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
    order.resize(std::min(k, order.size()));
    return order;
}

} // namespace lnn
