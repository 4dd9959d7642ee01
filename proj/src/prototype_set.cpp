#include "hyperproto/prototype_set.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "hyperproto/error.hpp"
#include "hyperproto/text_io.hpp"

namespace hyperproto {

namespace {

constexpr const char* kUnassigned = "_";

}  // namespace

void validate_label(const ClassLabel& label) {
    if (label.empty() || label == kUnassigned || label.find_first_of(",\n\r") != std::string::npos ||
        text::trim(label).size() != label.size()) {
        throw Error(ErrorCode::InvalidArgument, "unusable class label '" + label + "'");
    }
}

PrototypeSet::PrototypeSet(std::vector<UnitVector> vectors, std::vector<std::optional<ClassLabel>> labels)
    : vectors_(std::move(vectors)), labels_(std::move(labels)) {
    if (vectors_.empty()) throw Error(ErrorCode::InvalidCount, "a prototype set needs at least one vector");
    if (labels_.size() != vectors_.size()) {
        throw Error(ErrorCode::SizeMismatch, std::to_string(vectors_.size()) + " vectors but " +
                                                 std::to_string(labels_.size()) + " labels");
    }
    const std::size_t a = vectors_.front().dim();
    for (const auto& v : vectors_) {
        if (v.dim() != a) {
            throw Error(ErrorCode::DimensionMismatch,
                        "prototype dims " + std::to_string(a) + " and " + std::to_string(v.dim()));
        }
    }
    std::set<ClassLabel> seen;
    for (const auto& label : labels_) {
        if (!label) continue;
        validate_label(*label);
        if (!seen.insert(*label).second) throw Error(ErrorCode::DuplicateClass, "class '" + *label + "' appears twice");
    }
}

PrototypeSet::PrototypeSet(std::vector<UnitVector> vectors) {
    const std::size_t count = vectors.size();
    *this = PrototypeSet(std::move(vectors), std::vector<std::optional<ClassLabel>>(count));
}

PrototypeSet PrototypeSet::from_rows(const Matrix& rows) {
    std::vector<UnitVector> vectors;
    vectors.reserve(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) vectors.push_back(normalize(rows.row(i)));
    return PrototypeSet(std::move(vectors));
}

bool PrototypeSet::fully_labeled() const {
    for (const auto& label : labels_) {
        if (!label) return false;
    }
    return true;
}

std::optional<std::size_t> PrototypeSet::find(const ClassLabel& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] && *labels_[i] == label) return i;
    }
    return std::nullopt;
}

Matrix PrototypeSet::to_matrix() const {
    Matrix m(size(), dim());
    for (std::size_t i = 0; i < size(); ++i) {
        const auto c = vectors_[i].coords();
        std::copy(c.begin(), c.end(), m.row(i).begin());
    }
    return m;
}

double max_pairwise_cosine(const PrototypeSet& set) { return max_pairwise_cosine(set.vectors()); }

void write_prototypes(std::ostream& out, const PrototypeSet& set) {
    out << "dim=" << set.dim() << " count=" << set.size() << '\n';
    for (std::size_t i = 0; i < set.size(); ++i) {
        out << (set.labels()[i] ? *set.labels()[i] : kUnassigned);
        for (double c : set[i].coords()) out << ',' << text::format_double(c);
        out << '\n';
    }
}

PrototypeSet read_prototypes(std::istream& in) {
    text::LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw Error(ErrorCode::ParseError, "missing 'dim=a count=M' header");
    const auto dim_field = text::header_field(line, "dim");
    const auto count_field = text::header_field(line, "count");
    const long long dim = dim_field ? text::parse_integer(*dim_field).value_or(0) : 0;
    const long long count = count_field ? text::parse_integer(*count_field).value_or(0) : 0;
    if (dim < 2 || count < 1) throw Error(ErrorCode::ParseError, "line 1: bad header '" + line + "'");

    std::vector<UnitVector> vectors;
    std::vector<std::optional<ClassLabel>> labels;
    while (reader.next(line)) {
        const auto where = "line " + std::to_string(reader.line_number()) + ": ";
        auto fields = text::split_csv(line);
        if (fields.size() != static_cast<std::size_t>(dim) + 1) {
            throw Error(ErrorCode::ParseError, where + "expected " + std::to_string(dim + 1) + " fields, got " +
                                                   std::to_string(fields.size()));
        }
        std::vector<double> coords;
        coords.reserve(dim);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            const auto v = text::parse_double(fields[k]);
            if (!v) throw Error(ErrorCode::ParseError, where + "bad number '" + fields[k] + "'");
            coords.push_back(*v);
        }
        if (std::abs(norm(coords) - 1.0) > 1e-9) {
            throw Error(ErrorCode::DomainError, where + "prototype is not unit norm");
        }
        vectors.push_back(normalize(coords));
        labels.push_back(fields[0] == kUnassigned ? std::nullopt : std::optional<ClassLabel>(fields[0]));
    }
    if (vectors.size() != static_cast<std::size_t>(count)) {
        throw Error(ErrorCode::ParseError, "header declares " + std::to_string(count) + " prototypes, found " +
                                               std::to_string(vectors.size()));
    }
    return PrototypeSet(std::move(vectors), std::move(labels));
}

}  // namespace hyperproto
