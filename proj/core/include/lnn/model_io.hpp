#pragma once

// Versioned text format for trained models. Doubles are written in shortest
// round-trip form, so write -> read -> write reproduces the file byte for byte.

#include "lnn/data.hpp"
#include "lnn/trainer.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lnn {

inline constexpr int kModelFormatVersion = 1;

/// A trained model plus what is needed to query it standalone.
struct ModelFile {
    std::string variant;
    TrainedModel model;
    /// Training ratings per item; drives cold-start neighbor eligibility.
    std::vector<std::size_t> item_rating_counts;
    IdMap item_ids;
    IdMap user_ids;
};

void write_model(std::ostream& out, const ModelFile& file);
ModelFile read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

std::string serialize_model(const ModelFile& file);

} // namespace lnn
