#include "hyperproto/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "hyperproto/error.hpp"
#include "hyperproto/text_io.hpp"

namespace hyperproto {

namespace {

struct ForwardCache {
    std::vector<std::vector<double>> activations;  // input, then each hidden output
    std::vector<std::vector<double>> preacts;      // per layer, before rectifier / normalization
};

std::vector<double> affine(const EmbeddingModel::Layer& layer, std::span<const double> x) {
    std::vector<double> z(layer.bias);
    for (std::size_t o = 0; o < z.size(); ++o) z[o] += dot(layer.weights.row(o), x);
    return z;
}

ForwardCache run_forward(const std::vector<EmbeddingModel::Layer>& layers, std::span<const double> input) {
    if (input.size() != layers.front().weights.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(layers.front().weights.cols()) +
                                                      " inputs, got " + std::to_string(input.size()));
    }
    ForwardCache cache;
    cache.activations.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto z = affine(layers[l], cache.activations.back());
        if (l + 1 < layers.size()) {
            std::vector<double> h(z.size());
            for (std::size_t k = 0; k < z.size(); ++k) h[k] = z[k] > 0.0 ? z[k] : 0.0;
            cache.activations.push_back(std::move(h));
        }
        cache.preacts.push_back(std::move(z));
    }
    return cache;
}

std::vector<EmbeddingModel::Layer> zeros_like(const std::vector<EmbeddingModel::Layer>& layers) {
    std::vector<EmbeddingModel::Layer> out;
    out.reserve(layers.size());
    for (const auto& l : layers) out.push_back({Matrix(l.weights.rows(), l.weights.cols()), std::vector<double>(l.bias.size())});
    return out;
}

std::string where(const text::LineReader& reader) { return "line " + std::to_string(reader.line_number()) + ": "; }

}  // namespace

std::vector<ClassLabel> LabeledDataset::classes() const {
    std::vector<ClassLabel> order;
    std::set<ClassLabel> seen;
    for (const auto& l : labels) {
        if (seen.insert(l).second) order.push_back(l);
    }
    return order;
}

LabeledDataset load_dataset(std::istream& in) {
    text::LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw Error(ErrorCode::EmptyTable, "dataset file is empty");
    const auto header = text::split_csv(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "class") {
        throw Error(ErrorCode::ParseError, where(reader) + "header must be 'id,class,f_1,...'");
    }
    const std::size_t dim = header.size() - 2;
    LabeledDataset data;
    std::vector<double> values;
    while (reader.next(line)) {
        auto fields = text::split_csv(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::ParseError, where(reader) + "expected " + std::to_string(header.size()) +
                                                   " columns, got " + std::to_string(fields.size()));
        }
        validate_label(fields[1]);
        for (std::size_t k = 2; k < fields.size(); ++k) {
            const auto v = text::parse_double(fields[k]);
            if (!v) throw Error(ErrorCode::ParseError, where(reader) + "bad feature '" + fields[k] + "'");
            values.push_back(*v);
        }
        data.ids.push_back(std::move(fields[0]));
        data.labels.push_back(std::move(fields[1]));
    }
    if (data.labels.empty()) throw Error(ErrorCode::EmptyTable, "dataset has a header but no rows");
    data.inputs = Matrix(data.labels.size(), dim);
    std::copy(values.begin(), values.end(), data.inputs.flat().begin());
    return data;
}

void write_dataset(std::ostream& out, const LabeledDataset& data) {
    out << "id,class";
    for (std::size_t k = 0; k < data.input_dim(); ++k) out << ",f_" << (k + 1);
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.ids[i] << ',' << data.labels[i];
        for (double v : data.inputs.row(i)) out << ',' << text::format_double(v);
        out << '\n';
    }
}

bool operator==(const EmbeddingModel::Layer& a, const EmbeddingModel::Layer& b) {
    return a.weights == b.weights && a.bias == b.bias;
}

bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) { return a.layers_ == b.layers_; }

EmbeddingModel::EmbeddingModel(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw Error(ErrorCode::InvalidArgument, "a model needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.weights.rows() == 0 || layer.weights.cols() == 0 || layer.bias.size() != layer.weights.rows()) {
            throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(l) + " has inconsistent shapes");
        }
        if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
            throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(l) + " input does not match layer " +
                                                          std::to_string(l - 1) + " output");
        }
    }
    if (output_dim() < 2) throw Error(ErrorCode::InvalidDimension, "output dimension must be >= 2");
}

EmbeddingModel EmbeddingModel::create(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw Error(ErrorCode::InvalidArgument, "need input and output sizes");
    std::mt19937_64 rng(seed);
    std::vector<Layer> layers;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const std::size_t in = layer_sizes[l];
        const std::size_t out = layer_sizes[l + 1];
        if (in == 0 || out == 0) throw Error(ErrorCode::InvalidArgument, "layer sizes must be positive");
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> uniform(-limit, limit);
        Layer layer{Matrix(out, in), std::vector<double>(out, 0.0)};
        for (double& w : layer.weights.flat()) w = uniform(rng);
        layers.push_back(std::move(layer));
    }
    return EmbeddingModel(std::move(layers));
}

std::vector<std::size_t> EmbeddingModel::layer_sizes() const {
    std::vector<std::size_t> sizes{input_dim()};
    for (const auto& l : layers_) sizes.push_back(l.weights.rows());
    return sizes;
}

UnitVector EmbeddingModel::forward(std::span<const double> input) const {
    auto cache = run_forward(layers_, input);
    try {
        return normalize(cache.preacts.back());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroNorm) throw;
        throw Error(ErrorCode::ZeroNorm, "model output vanished before normalization");
    }
}

void write_checkpoint(std::ostream& out, const EmbeddingModel& model) {
    const auto sizes = model.layer_sizes();
    out << "layers=" << model.layers().size() << " sizes=";
    for (std::size_t i = 0; i < sizes.size(); ++i) out << (i ? "," : "") << sizes[i];
    out << '\n';
    auto write_row = [&out](std::span<const double> row) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << text::format_double(row[k]);
        out << '\n';
    };
    for (const auto& layer : model.layers()) {
        for (std::size_t r = 0; r < layer.weights.rows(); ++r) write_row(layer.weights.row(r));
        write_row(layer.bias);
    }
}

EmbeddingModel read_checkpoint(std::istream& in) {
    text::LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw Error(ErrorCode::ParseError, "empty checkpoint");
    const auto layers_field = text::header_field(line, "layers");
    const auto sizes_field = text::header_field(line, "sizes");
    if (!layers_field || !sizes_field) throw Error(ErrorCode::ParseError, "line 1: bad checkpoint header");
    const auto count = text::parse_integer(*layers_field);
    std::vector<std::size_t> sizes;
    for (const auto& s : text::split_csv(*sizes_field)) {
        const auto v = text::parse_integer(s);
        if (!v || *v <= 0) throw Error(ErrorCode::ParseError, "line 1: bad layer size '" + s + "'");
        sizes.push_back(static_cast<std::size_t>(*v));
    }
    if (!count || *count < 1 || sizes.size() != static_cast<std::size_t>(*count) + 1) {
        throw Error(ErrorCode::ParseError, "line 1: layer count does not match sizes");
    }

    auto read_row = [&](std::size_t expected, std::span<double> dest) {
        if (!reader.next(line)) throw Error(ErrorCode::ParseError, "checkpoint ends early");
        const auto fields = text::split_csv(line);
        if (fields.size() != expected) {
            throw Error(ErrorCode::ParseError, where(reader) + "expected " + std::to_string(expected) + " values");
        }
        for (std::size_t k = 0; k < expected; ++k) {
            const auto v = text::parse_double(fields[k]);
            if (!v) throw Error(ErrorCode::ParseError, where(reader) + "bad number '" + fields[k] + "'");
            dest[k] = *v;
        }
    };
    std::vector<EmbeddingModel::Layer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        EmbeddingModel::Layer layer{Matrix(sizes[l + 1], sizes[l]), std::vector<double>(sizes[l + 1])};
        for (std::size_t r = 0; r < layer.weights.rows(); ++r) read_row(sizes[l], layer.weights.row(r));
        read_row(sizes[l + 1], layer.bias);
        layers.push_back(std::move(layer));
    }
    if (reader.next(line)) throw Error(ErrorCode::ParseError, where(reader) + "trailing data in checkpoint");
    return EmbeddingModel(std::move(layers));
}

double cosine_loss(const UnitVector& output, const UnitVector& prototype, LossKind kind) {
    const double gap = 1.0 - cosine_similarity(output, prototype);
    return kind == LossKind::Squared ? gap * gap : gap;
}

BatchGradient batch_gradient(const EmbeddingModel& model, const Matrix& inputs, std::span<const std::size_t> rows,
                             std::span<const UnitVector* const> targets, LossKind kind) {
    const auto& layers = model.layers();
    BatchGradient result{0.0, zeros_like(layers)};
    if (rows.empty()) return result;
    const double scale = 1.0 / static_cast<double>(rows.size());

    for (std::size_t b = 0; b < rows.size(); ++b) {
        const UnitVector& target = *targets[b];
        if (target.dim() != model.output_dim()) {
            throw Error(ErrorCode::DimensionMismatch, "prototype dimension differs from model output");
        }
        const auto cache = run_forward(layers, inputs.row(rows[b]));
        const auto& z = cache.preacts.back();
        const double length = norm(z);
        if (!std::isfinite(length)) throw Error(ErrorCode::NonFiniteLoss, "model output is not finite");
        if (!(length > kZeroNormEpsilon)) {
            throw Error(ErrorCode::ZeroNorm, "model output vanished before normalization");
        }
        std::vector<double> y(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) y[k] = z[k] / length;
        const double c = dot(y, target.coords());
        const double gap = 1.0 - c;
        result.loss += scale * (kind == LossKind::Squared ? gap * gap : gap);
        const double dloss_dc = kind == LossKind::Squared ? -2.0 * gap : -1.0;

        // d/dz of loss(z / |z|): project dL/dy off y and divide by |z|.
        std::vector<double> delta(z.size());
        double radial = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) radial += y[k] * dloss_dc * target[k];
        for (std::size_t k = 0; k < z.size(); ++k) delta[k] = (dloss_dc * target[k] - radial * y[k]) / length;

        for (std::size_t l = layers.size(); l-- > 0;) {
            const auto& x = cache.activations[l];
            auto& g = result.grads[l];
            for (std::size_t o = 0; o < delta.size(); ++o) {
                const double d = scale * delta[o];
                g.bias[o] += d;
                auto grow = g.weights.row(o);
                for (std::size_t i = 0; i < x.size(); ++i) grow[i] += d * x[i];
            }
            if (l == 0) break;
            std::vector<double> upstream(x.size(), 0.0);
            for (std::size_t o = 0; o < delta.size(); ++o) {
                const auto wrow = layers[l].weights.row(o);
                for (std::size_t i = 0; i < x.size(); ++i) upstream[i] += wrow[i] * delta[o];
            }
            const auto& pre = cache.preacts[l - 1];
            for (std::size_t i = 0; i < upstream.size(); ++i) {
                if (!(pre[i] > 0.0)) upstream[i] = 0.0;
            }
            delta = std::move(upstream);
        }
    }
    return result;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
    if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::InvalidArgument, "momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
        throw Error(ErrorCode::InvalidArgument, "weight decay must be >= 0");
    }
}

std::vector<std::size_t> TrainConfig::drop_epochs() const {
    if (lr_drop_epochs) return *lr_drop_epochs;
    return {std::max<std::size_t>(1, epochs * 7 / 10)};
}

TrainResult train(EmbeddingModel model, const LabeledDataset& data, const PrototypeSet& prototypes,
                  const TrainConfig& config) {
    config.validate();
    if (data.size() == 0) throw Error(ErrorCode::EmptyTable, "training set is empty");
    if (data.input_dim() != model.input_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "dataset has " + std::to_string(data.input_dim()) +
                                                      " features, model expects " + std::to_string(model.input_dim()));
    }
    if (prototypes.dim() != model.output_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "prototypes have dimension " + std::to_string(prototypes.dim()) +
                                                      ", model outputs " + std::to_string(model.output_dim()));
    }
    std::map<ClassLabel, std::size_t> index;
    for (std::size_t p = 0; p < prototypes.size(); ++p) {
        if (prototypes.labels()[p]) index.emplace(*prototypes.labels()[p], p);
    }
    std::vector<const UnitVector*> target(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto it = index.find(data.labels[i]);
        if (it == index.end()) {
            throw Error(ErrorCode::MissingPrototype, "class '" + data.labels[i] + "' has no prototype");
        }
        target[i] = &prototypes[it->second];
    }

    const auto drops = config.drop_epochs();
    auto velocity = zeros_like(model.layers());
    std::vector<std::size_t> order(data.size());
    std::vector<const UnitVector*> batch_targets;
    TrainResult result{std::move(model), {}};
    auto& layers = result.model.layers();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double rate = config.learning_rate;
        for (std::size_t d : drops) {
            if (epoch >= d) rate *= 0.1;
        }
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                          static_cast<std::uint32_t>(epoch)};
        std::mt19937_64 rng(seq);
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> rows(order.data() + start, stop - start);
            batch_targets.clear();
            for (std::size_t r : rows) batch_targets.push_back(target[r]);
            BatchGradient step;
            try {
                step = batch_gradient(result.model, data.inputs, rows, batch_targets, config.loss);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NonFiniteLoss) throw;
                throw Error(ErrorCode::NonFiniteLoss, "loss diverged in epoch " + std::to_string(epoch));
            }
            if (!std::isfinite(step.loss)) {
                throw Error(ErrorCode::NonFiniteLoss, "loss diverged in epoch " + std::to_string(epoch));
            }
            epoch_loss += step.loss * static_cast<double>(rows.size());

            for (std::size_t l = 0; l < layers.size(); ++l) {
                auto update = [&](std::span<double> param, std::span<const double> grad, std::span<double> vel) {
                    for (std::size_t k = 0; k < param.size(); ++k) {
                        vel[k] = config.momentum * vel[k] + grad[k] + config.weight_decay * param[k];
                        param[k] -= rate * vel[k];
                    }
                };
                update(layers[l].weights.flat(), step.grads[l].weights.flat(), velocity[l].weights.flat());
                update(layers[l].bias, step.grads[l].bias, velocity[l].bias);
            }
        }
        const double mean_loss = epoch_loss / static_cast<double>(data.size());
        if (!std::isfinite(mean_loss)) {
            throw Error(ErrorCode::NonFiniteLoss, "loss diverged in epoch " + std::to_string(epoch));
        }
        result.history.push_back(mean_loss);
    }
    return result;
}

}  // namespace hyperproto
