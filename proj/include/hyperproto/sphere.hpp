#ifndef HYPERPROTO_SPHERE_HPP
#define HYPERPROTO_SPHERE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace hyperproto {

// Norms at or below this are treated as degenerate.
inline constexpr double kZeroNormEpsilon = 1e-12;

// A point on the unit hypersphere S^{a-1}, a >= 2. Only constructible through normalize().
class UnitVector {
public:
    std::size_t dim() const noexcept { return coords_.size(); }
    std::span<const double> coords() const noexcept { return coords_; }
    double operator[](std::size_t i) const { return coords_[i]; }

    friend bool operator==(const UnitVector&, const UnitVector&) = default;

private:
    friend UnitVector normalize(std::span<const double> v);
    explicit UnitVector(std::vector<double> coords) : coords_(std::move(coords)) {}

    std::vector<double> coords_;
};

// Scales v onto the unit sphere.
// Throws InvalidDimension for fewer than two coordinates and ZeroNorm when the norm is <= 1e-12.
// Vectors already unit to within a few ulps are returned unchanged, so normalize is bit-idempotent.
UnitVector normalize(std::span<const double> v);
inline UnitVector normalize(const std::vector<double>& v) { return normalize(std::span<const double>(v)); }
inline UnitVector normalize(std::initializer_list<double> v) {
    return normalize(std::span<const double>(v.begin(), v.size()));
}

double norm(std::span<const double> v);
double dot(std::span<const double> u, std::span<const double> v);

// Inner product of two unit vectors clamped to [-1, 1]. Throws DimensionMismatch.
double cosine_similarity(const UnitVector& u, const UnitVector& v);

// Largest cosine over all unordered distinct pairs. Throws TooFewPrototypes for fewer than two.
double max_pairwise_cosine(std::span<const UnitVector> vectors);

}  // namespace hyperproto

#endif  // HYPERPROTO_SPHERE_HPP
