#include "hyperproto/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hyperproto/error.hpp"

namespace hyperproto {

namespace {

// Re-normalizing an already normalized vector would perturb the last bits.
constexpr double kUnitSlack = 64 * std::numeric_limits<double>::epsilon();

}  // namespace

double dot(std::span<const double> u, std::span<const double> v) {
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * v[i];
    return sum;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

UnitVector normalize(std::span<const double> v) {
    if (v.size() < 2) {
        throw Error(ErrorCode::InvalidDimension,
                    "unit vectors need at least 2 coordinates, got " + std::to_string(v.size()));
    }
    const double n = norm(v);
    if (!(n > kZeroNormEpsilon)) {
        throw Error(ErrorCode::ZeroNorm, "cannot normalize a vector of norm " + std::to_string(n));
    }
    std::vector<double> coords(v.begin(), v.end());
    if (std::abs(n - 1.0) > kUnitSlack) {
        for (double& c : coords) c /= n;
    }
    return UnitVector(std::move(coords));
}

double cosine_similarity(const UnitVector& u, const UnitVector& v) {
    if (u.dim() != v.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "dimensions " + std::to_string(u.dim()) + " and " + std::to_string(v.dim()));
    }
    if (u == v) return 1.0;
    return std::clamp(dot(u.coords(), v.coords()), -1.0, 1.0);
}

double max_pairwise_cosine(std::span<const UnitVector> vectors) {
    if (vectors.size() < 2) {
        throw Error(ErrorCode::TooFewPrototypes,
                    "need at least 2 vectors, got " + std::to_string(vectors.size()));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            best = std::max(best, cosine_similarity(vectors[i], vectors[j]));
        }
    }
    return best;
}

}  // namespace hyperproto
