#pragma once

// The comparison models as configurations of the one SGD engine.
//
//   MF      linear, latent inputs only, no hidden layers, one regularized phase
//   NLPCA   latent inputs only, one joint phase
//   UBP     latent inputs only, three phases
//   LNN     latent + given inputs, one joint phase
//   LNN_3PT latent + given inputs, three phases

#include "lnn/data.hpp"
#include "lnn/trainer.hpp"

#include <string>

namespace lnn {

enum class VariantKind { mf, nlpca, ubp, lnn, lnn_3pt };

std::string to_string(VariantKind kind);
/// Accepts mf, nlpca, ubp, lnn, lnn3pt (case-insensitive; lnn_3pt also works).
VariantKind variant_from_string(const std::string& name);

struct ModelSpec {
    VariantKind kind = VariantKind::lnn_3pt;
    TrainConfig config;
    bool use_attributes = true;
};

/// Applies the variant's overlay to base. Throws ConfigError on contradictions
/// such as MF with hidden layers.
ModelSpec make_variant(VariantKind kind, const TrainConfig& base);

/// Profiles the variant actually feeds to the network.
ItemProfiles variant_profiles(const ModelSpec& spec, const ItemProfiles& profiles);

TrainedModel train_variant(const ModelSpec& spec, const SparseRatings& ratings,
                           const ItemProfiles& profiles, const TrainHooks& hooks = {});

} // namespace lnn
