#ifndef HYPERPROTO_SYNTHETIC_HPP
#define HYPERPROTO_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>

#include "hyperproto/attributes.hpp"
#include "hyperproto/embedding.hpp"

namespace hyperproto {

// Desk-scale stand-in for an image dataset with per-example attribute annotations.
//
// Classes come in families. Each class has a template tau in [-1, 1]^A: its family's
// template plus a class-specific perturbation. An attribute of an example is 0 with
// probability 0.1 and otherwise +1 with probability (1 + tau_k) / 2. Features are a fixed
// random linear image W tau of the class template plus isotropic Gaussian noise, so
// classes with similar attributes sit close together in feature space.
struct SynthConfig {
    std::size_t classes = 20;           // training classes
    std::size_t held_out = 6;           // extra classes kept out of training
    std::size_t attributes = 40;
    std::size_t samples_per_class = 30;
    std::size_t feature_dim = 32;
    std::size_t family_size = 4;        // classes per family
    double noise = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr double kUndeterminedProbability = 0.1;

struct SyntheticData {
    AttributeTable train_attributes;
    LabeledDataset train;
    AttributeTable held_out_attributes;
    LabeledDataset held_out;
};

// Deterministic in config.seed. Held-out classes are drawn at random from all families.
SyntheticData generate_synthetic(const SynthConfig& config);

}  // namespace hyperproto

#endif  // HYPERPROTO_SYNTHETIC_HPP
