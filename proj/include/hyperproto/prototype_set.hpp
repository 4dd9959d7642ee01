#ifndef HYPERPROTO_PROTOTYPE_SET_HPP
#define HYPERPROTO_PROTOTYPE_SET_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hyperproto/matrix.hpp"
#include "hyperproto/sphere.hpp"

namespace hyperproto {

using ClassLabel = std::string;

// M labeled unit vectors sharing one dimension. Labels are optional until assignment
// and unique once assigned.
class PrototypeSet {
public:
    PrototypeSet(std::vector<UnitVector> vectors, std::vector<std::optional<ClassLabel>> labels);
    explicit PrototypeSet(std::vector<UnitVector> vectors);

    // Normalizes every row of the matrix; labels unassigned.
    static PrototypeSet from_rows(const Matrix& rows);

    std::size_t size() const noexcept { return vectors_.size(); }
    std::size_t dim() const noexcept { return vectors_.front().dim(); }

    const std::vector<UnitVector>& vectors() const noexcept { return vectors_; }
    const std::vector<std::optional<ClassLabel>>& labels() const noexcept { return labels_; }
    const UnitVector& operator[](std::size_t i) const { return vectors_[i]; }

    bool fully_labeled() const;
    std::optional<std::size_t> find(const ClassLabel& label) const;

    Matrix to_matrix() const;

    friend bool operator==(const PrototypeSet&, const PrototypeSet&) = default;

private:
    std::vector<UnitVector> vectors_;
    std::vector<std::optional<ClassLabel>> labels_;
};

double max_pairwise_cosine(const PrototypeSet& set);

// Text format: "dim=a count=M", then "label,c_1,...,c_a" per prototype with 17 significant
// digits; "_" marks an unassigned label.
void write_prototypes(std::ostream& out, const PrototypeSet& set);
PrototypeSet read_prototypes(std::istream& in);

// Throws InvalidArgument for labels that cannot round-trip through the text formats.
void validate_label(const ClassLabel& label);

}  // namespace hyperproto

#endif  // HYPERPROTO_PROTOTYPE_SET_HPP
