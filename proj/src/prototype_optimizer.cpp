#include "hyperproto/prototype_optimizer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "hyperproto/error.hpp"

namespace hyperproto {

namespace {

void check_shape(std::size_t count, std::size_t dim) {
    if (dim < 2) throw Error(ErrorCode::InvalidDimension, "latent dimension must be >= 2, got " + std::to_string(dim));
    if (count < 1) throw Error(ErrorCode::InvalidCount, "prototype count must be >= 1");
}

void renormalize_rows(Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        const auto unit = normalize(row);
        std::copy(unit.coords().begin(), unit.coords().end(), row.begin());
    }
}

double max_row_inner_product(const Matrix& m) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.rows(); ++j) best = std::max(best, dot(m.row(i), m.row(j)));
    }
    return best;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::InvalidArgument, "momentum must be in [0, 1)");
}

PrototypeSet init_prototypes(std::size_t count, std::size_t dim, std::uint64_t seed) {
    check_shape(count, dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<UnitVector> vectors;
    vectors.reserve(count);
    std::vector<double> draw(dim);
    while (vectors.size() < count) {
        for (double& x : draw) x = gauss(rng);
        if (norm(draw) > kZeroNormEpsilon) vectors.push_back(normalize(draw));
    }
    return PrototypeSet(std::move(vectors));
}

SeparationLoss separation_loss(const Matrix& prototypes) {
    const std::size_t m = prototypes.rows();
    if (m < 2) throw Error(ErrorCode::TooFewPrototypes, "need at least 2 prototypes, got " + std::to_string(m));

    SeparationLoss result{0.0, Matrix(m, prototypes.cols()), std::vector<std::size_t>(m)};
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t partner = i == 0 ? 1 : 0;
        double best = dot(prototypes.row(i), prototypes.row(partner));
        for (std::size_t j = partner + 1; j < m; ++j) {
            if (j == i) continue;
            const double s = dot(prototypes.row(i), prototypes.row(j));
            if (s > best) {
                best = s;
                partner = j;
            }
        }
        result.loss += best;
        result.partners[i] = partner;
        auto gi = result.gradient.row(i);
        auto gj = result.gradient.row(partner);
        const auto pi = prototypes.row(i);
        const auto pj = prototypes.row(partner);
        for (std::size_t k = 0; k < pi.size(); ++k) {
            gi[k] += scale * pj[k];
            gj[k] += scale * pi[k];
        }
    }
    result.loss *= scale;
    return result;
}

SeparationLoss separation_loss(const PrototypeSet& prototypes) { return separation_loss(prototypes.to_matrix()); }

Matrix separation_direction(const Matrix& prototypes, const SeparationLoss& loss) {
    const std::size_t m = prototypes.rows();
    const std::size_t a = prototypes.cols();
    const double scale = 1.0 / static_cast<double>(m);
    Matrix direction(m, a);
    std::vector<double> tangent(a);

    // Adds the unit tangent at row `from` pointing toward row `to`.
    auto push = [&](std::size_t from, std::size_t to) {
        const auto p = prototypes.row(from);
        const auto q = prototypes.row(to);
        const double c = dot(p, q);
        for (std::size_t k = 0; k < a; ++k) tangent[k] = q[k] - c * p[k];
        const double length = norm(tangent);
        if (length <= kZeroNormEpsilon) return;  // coincident or antipodal: no tangential preference
        auto d = direction.row(from);
        for (std::size_t k = 0; k < a; ++k) d[k] += scale * tangent[k] / length;
    };
    for (std::size_t i = 0; i < m; ++i) {
        push(i, loss.partners[i]);
        push(loss.partners[i], i);
    }
    return direction;
}

PrototypeSet optimize_prototypes(std::size_t count, std::size_t dim, const OptimizerConfig& config,
                                 OptimizerTrace* trace, const StepObserver& observer) {
    check_shape(count, dim);
    if (count < 2) throw Error(ErrorCode::InvalidCount, "spreading needs at least 2 prototypes");
    config.validate();

    Matrix current = init_prototypes(count, dim, config.seed).to_matrix();
    Matrix velocity(count, dim);
    Matrix best = current;
    double best_score = max_row_inner_product(current);
    OptimizerTrace local{best_score, best_score, 0, config.iterations};

    for (std::size_t it = 1; it <= config.iterations; ++it) {
        const auto loss = separation_loss(current);
        const Matrix direction = separation_direction(current, loss);
        const double progress = static_cast<double>(it - 1) / static_cast<double>(config.iterations);
        const double rate = config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
        auto v = velocity.flat();
        auto p = current.flat();
        const auto g = direction.flat();
        for (std::size_t k = 0; k < p.size(); ++k) {
            v[k] = config.momentum * v[k] + g[k];
            p[k] -= rate * v[k];
        }
        renormalize_rows(current);
        if (observer) observer(it, current);

        const double score = max_row_inner_product(current);
        if (score < best_score) {
            best_score = score;
            best = current;
            local.best_iteration = it;
        }
    }
    local.best_max_cosine = best_score;
    if (trace) *trace = local;
    return PrototypeSet::from_rows(best);
}

}  // namespace hyperproto
