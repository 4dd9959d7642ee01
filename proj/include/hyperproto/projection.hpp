#ifndef HYPERPROTO_PROJECTION_HPP
#define HYPERPROTO_PROJECTION_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hyperproto/prototype_set.hpp"

namespace hyperproto {

struct ProjectedPoint {
    std::optional<ClassLabel> label;
    double x = 0.0;
    double y = 0.0;
};

inline constexpr std::size_t kPowerIterations = 200;

// Centers the vectors and projects them onto the top two principal directions, found by
// power iteration with deflation from a seeded start. Needs at least 3 vectors.
std::vector<ProjectedPoint> project_2d(const PrototypeSet& set, std::uint64_t seed);

// "label,x,y" lines.
void write_projection(std::ostream& out, const std::vector<ProjectedPoint>& points);

}  // namespace hyperproto

#endif  // HYPERPROTO_PROJECTION_HPP
