#ifndef HYPERPROTO_EMBEDDING_HPP
#define HYPERPROTO_EMBEDDING_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperproto/matrix.hpp"
#include "hyperproto/prototype_set.hpp"
#include "hyperproto/sphere.hpp"

namespace hyperproto {

// Flat input vectors with class labels.
struct LabeledDataset {
    std::vector<std::string> ids;
    std::vector<ClassLabel> labels;
    Matrix inputs;  // N x V'

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t input_dim() const noexcept { return inputs.cols(); }

    // Distinct labels in order of first appearance.
    std::vector<ClassLabel> classes() const;
};

// Reads "id,class,f_1,...,f_V'" with real-valued features.
LabeledDataset load_dataset(std::istream& in);
void write_dataset(std::ostream& out, const LabeledDataset& data);

// Anything that maps an input vector onto the unit sphere.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual UnitVector embed(std::span<const double> input) const = 0;
};

// Fully connected network with rectifier hidden layers; the output is normalized onto the sphere.
class EmbeddingModel : public Embedder {
public:
    struct Layer {
        Matrix weights;  // out x in
        std::vector<double> bias;
    };

    explicit EmbeddingModel(std::vector<Layer> layers);

    // Uniform init in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    static EmbeddingModel create(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

    std::vector<std::size_t> layer_sizes() const;
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::vector<Layer>& layers() noexcept { return layers_; }

    std::size_t input_dim() const override { return layers_.front().weights.cols(); }
    std::size_t output_dim() const override { return layers_.back().weights.rows(); }

    // Throws DimensionMismatch on a wrong-sized input, ZeroNorm if the output vanishes.
    UnitVector forward(std::span<const double> input) const;
    UnitVector embed(std::span<const double> input) const override { return forward(input); }

    friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b);

private:
    std::vector<Layer> layers_;
};

bool operator==(const EmbeddingModel::Layer& a, const EmbeddingModel::Layer& b);

// "layers=k sizes=s0,...,sk", then per layer one line per weight row and one bias line.
void write_checkpoint(std::ostream& out, const EmbeddingModel& model);
EmbeddingModel read_checkpoint(std::istream& in);

enum class LossKind { Squared, Linear };

// (1 - cos)^2 by default, 1 - cos for LossKind::Linear.
double cosine_loss(const UnitVector& output, const UnitVector& prototype, LossKind kind = LossKind::Squared);

struct BatchGradient {
    double loss = 0.0;  // mean over the batch
    std::vector<EmbeddingModel::Layer> grads;
};

// Mean loss over rows of `inputs` against their target prototypes, with its exact gradient
// by backpropagation through the normalization.
BatchGradient batch_gradient(const EmbeddingModel& model, const Matrix& inputs, std::span<const std::size_t> rows,
                             std::span<const UnitVector* const> targets, LossKind kind);

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 128;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::Squared;
    // Epochs at which the rate drops tenfold; unset means a single drop at 70% of training.
    std::optional<std::vector<std::size_t>> lr_drop_epochs;

    void validate() const;
    std::vector<std::size_t> drop_epochs() const;
};

struct TrainResult {
    EmbeddingModel model;
    std::vector<double> history;  // mean per-example loss per epoch
};

// Minibatch SGD with momentum and weight decay against fixed prototypes.
// Throws MissingPrototype for labels with no prototype and NonFiniteLoss on divergence.
TrainResult train(EmbeddingModel model, const LabeledDataset& data, const PrototypeSet& prototypes,
                  const TrainConfig& config);

}  // namespace hyperproto

#endif  // HYPERPROTO_EMBEDDING_HPP
