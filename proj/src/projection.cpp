#include "hyperproto/projection.hpp"

#include <ostream>
#include <random>

#include "hyperproto/error.hpp"
#include "hyperproto/text_io.hpp"

namespace hyperproto {

namespace {

std::vector<double> multiply(const Matrix& m, const std::vector<double>& v) {
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
    return out;
}

void remove_component(std::vector<double>& v, const std::vector<double>& direction) {
    const double d = dot(v, direction);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= d * direction[k];
}

// Dominant eigenvector of a symmetric PSD matrix, orthogonal to `avoid`. Zero if none exists.
std::vector<double> power_iteration(const Matrix& cov, std::mt19937_64& rng, const std::vector<double>* avoid) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(cov.rows());
    for (double& x : v) x = gauss(rng);
    for (std::size_t it = 0; it < kPowerIterations; ++it) {
        if (avoid) remove_component(v, *avoid);
        const double n = norm(v);
        if (n <= kZeroNormEpsilon) return std::vector<double>(cov.rows(), 0.0);
        for (double& x : v) x /= n;
        v = multiply(cov, v);
    }
    if (avoid) remove_component(v, *avoid);
    const double n = norm(v);
    if (n <= kZeroNormEpsilon) return std::vector<double>(cov.rows(), 0.0);
    for (double& x : v) x /= n;
    return v;
}

}  // namespace

std::vector<ProjectedPoint> project_2d(const PrototypeSet& set, std::uint64_t seed) {
    const std::size_t m = set.size();
    const std::size_t a = set.dim();
    if (m < 3) throw Error(ErrorCode::TooFewPrototypes, "projection needs at least 3 vectors, got " + std::to_string(m));

    Matrix centered = set.to_matrix();
    for (std::size_t k = 0; k < a; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i) mean += centered(i, k);
        mean /= static_cast<double>(m);
        for (std::size_t i = 0; i < m; ++i) centered(i, k) -= mean;
    }
    Matrix cov(a, a);
    for (std::size_t r = 0; r < a; ++r) {
        for (std::size_t c = 0; c < a; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += centered(i, r) * centered(i, c);
            cov(r, c) = s / static_cast<double>(m);
        }
    }

    std::mt19937_64 rng(seed);
    const auto first = power_iteration(cov, rng, nullptr);
    const auto second = power_iteration(cov, rng, &first);

    std::vector<ProjectedPoint> points;
    points.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        points.push_back({set.labels()[i], dot(centered.row(i), first), dot(centered.row(i), second)});
    }
    return points;
}

void write_projection(std::ostream& out, const std::vector<ProjectedPoint>& points) {
    out << "label,x,y\n";
    for (const auto& p : points) {
        out << (p.label ? *p.label : "_") << ',' << text::format_double(p.x) << ',' << text::format_double(p.y) << '\n';
    }
}

}  // namespace hyperproto
