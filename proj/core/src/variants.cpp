#include "lnn/variants.hpp"

#include "lnn/errors.hpp"

#include <algorithm>
#include <cctype>

namespace lnn {

std::string to_string(VariantKind kind) {
    switch (kind) {
    case VariantKind::mf:
        return "mf";
    case VariantKind::nlpca:
        return "nlpca";
    case VariantKind::ubp:
        return "ubp";
    case VariantKind::lnn:
        return "lnn";
    case VariantKind::lnn_3pt:
        break;
    }
    return "lnn3pt";
}

VariantKind variant_from_string(const std::string& name) {
    std::string s;
    for (char ch : name)
        if (ch != '_' && ch != '-')
            s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (s == "mf")
        return VariantKind::mf;
    if (s == "nlpca")
        return VariantKind::nlpca;
    if (s == "ubp")
        return VariantKind::ubp;
    if (s == "lnn")
        return VariantKind::lnn;
    if (s == "lnn3pt")
        return VariantKind::lnn_3pt;
    throw ConfigError("unknown variant '" + name + "' (expected mf, nlpca, ubp, lnn, lnn3pt)");
}

ModelSpec make_variant(VariantKind kind, const TrainConfig& base) {
    ModelSpec spec;
    spec.kind = kind;
    spec.config = base;
    switch (kind) {
    case VariantKind::mf:
        if (!base.hidden_sizes.empty())
            throw ConfigError("MF is a linear model and does not accept hidden layers");
        spec.config.hidden_activation = Activation::identity;
        spec.config.three_phase = false;
        spec.use_attributes = false;
        break;
    case VariantKind::nlpca:
        spec.config.three_phase = false;
        spec.use_attributes = false;
        break;
    case VariantKind::ubp:
        spec.config.three_phase = true;
        spec.use_attributes = false;
        break;
    case VariantKind::lnn:
        spec.config.three_phase = false;
        spec.use_attributes = true;
        break;
    case VariantKind::lnn_3pt:
        spec.config.three_phase = true;
        spec.use_attributes = true;
        break;
    }
    spec.config.validate();
    return spec;
}

ItemProfiles variant_profiles(const ModelSpec& spec, const ItemProfiles& profiles) {
    return spec.use_attributes ? profiles : profiles.without_attributes();
}

TrainedModel train_variant(const ModelSpec& spec, const SparseRatings& ratings,
                           const ItemProfiles& profiles, const TrainHooks& hooks) {
    if (spec.use_attributes)
        return train(ratings, profiles, spec.config, hooks);
    return train(ratings, profiles.without_attributes(), spec.config, hooks);
}

} // namespace lnn
