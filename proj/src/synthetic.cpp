#include "hyperproto/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "hyperproto/error.hpp"

namespace hyperproto {

namespace {

std::string class_name(std::size_t c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "class_%03zu", c);
    return buf;
}

std::string attribute_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "attr_%03zu", k);
    return buf;
}

struct Split {
    std::vector<std::string> ids;
    std::vector<ClassLabel> labels;
    std::vector<std::int8_t> attributes;
    std::vector<double> features;
};

}  // namespace

void SynthConfig::validate() const {
    if (classes < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 training classes");
    if (held_out < 1) throw Error(ErrorCode::InvalidArgument, "need at least 1 held-out class");
    if (attributes < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 attributes");
    if (samples_per_class < 1) throw Error(ErrorCode::InvalidArgument, "need at least 1 sample per class");
    if (feature_dim < 1) throw Error(ErrorCode::InvalidArgument, "feature dimension must be >= 1");
    if (family_size < 1) throw Error(ErrorCode::InvalidArgument, "family size must be >= 1");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw Error(ErrorCode::InvalidArgument, "noise must be >= 0");
}

SyntheticData generate_synthetic(const SynthConfig& config) {
    config.validate();
    const std::size_t total = config.classes + config.held_out;
    const std::size_t a = config.attributes;
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Class templates: family sign pattern plus a class-level perturbation.
    const std::size_t families = (total + config.family_size - 1) / config.family_size;
    std::vector<std::vector<double>> family(families, std::vector<double>(a));
    for (auto& f : family) {
        for (double& v : f) v = unit(rng) < 0.5 ? -0.6 : 0.6;
    }
    std::vector<std::vector<double>> templates(total, std::vector<double>(a));
    for (std::size_t c = 0; c < total; ++c) {
        for (std::size_t k = 0; k < a; ++k) {
            templates[c][k] = std::clamp(family[c / config.family_size][k] + 0.5 * gauss(rng), -0.95, 0.95);
        }
    }

    Matrix projection(config.feature_dim, a);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a));
    for (double& w : projection.flat()) w = scale * gauss(rng);

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> is_held_out(total, false);
    for (std::size_t i = 0; i < config.held_out; ++i) is_held_out[order[i]] = true;

    Split train, held;
    std::size_t next_id = 0;
    std::vector<double> mean(config.feature_dim);
    for (std::size_t c = 0; c < total; ++c) {
        Split& split = is_held_out[c] ? held : train;
        for (std::size_t o = 0; o < config.feature_dim; ++o) mean[o] = dot(projection.row(o), templates[c]);
        for (std::size_t s = 0; s < config.samples_per_class; ++s) {
            split.ids.push_back(std::to_string(next_id++));
            split.labels.push_back(class_name(c));
            for (std::size_t k = 0; k < a; ++k) {
                const double u = unit(rng);
                std::int8_t v = 0;
                if (u >= kUndeterminedProbability) {
                    v = unit(rng) < 0.5 * (1.0 + templates[c][k]) ? 1 : -1;
                }
                split.attributes.push_back(v);
            }
            for (std::size_t o = 0; o < config.feature_dim; ++o) {
                split.features.push_back(mean[o] + config.noise * gauss(rng));
            }
        }
    }

    std::vector<std::string> names(a);
    for (std::size_t k = 0; k < a; ++k) names[k] = attribute_name(k);
    auto dataset = [&](Split& s) {
        LabeledDataset d;
        d.ids = s.ids;
        d.labels = s.labels;
        d.inputs = Matrix(s.labels.size(), config.feature_dim);
        std::copy(s.features.begin(), s.features.end(), d.inputs.flat().begin());
        return d;
    };
    return SyntheticData{AttributeTable(train.ids, train.labels, train.attributes, names), dataset(train),
                         AttributeTable(held.ids, held.labels, held.attributes, names), dataset(held)};
}

}  // namespace hyperproto
