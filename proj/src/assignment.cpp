#include "hyperproto/assignment.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <set>

#include "hyperproto/error.hpp"
#include "hyperproto/text_io.hpp"

namespace hyperproto {

double Assignment::mean_similarity() const {
    if (pairs.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& p : pairs) sum += p.similarity;
    return sum / static_cast<double>(pairs.size());
}

double Assignment::min_similarity() const {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs) lowest = std::min(lowest, p.similarity);
    return lowest;
}

PrototypeSet direct_prototypes(const PriorVectors& priors) {
    if (priors.vectors.empty()) throw Error(ErrorCode::InvalidCount, "no prior vectors");
    if (priors.classes.size() != priors.vectors.size()) {
        throw Error(ErrorCode::SizeMismatch, "prior classes and vectors differ in count");
    }
    return priors.as_prototypes();
}

std::vector<std::pair<std::size_t, std::size_t>> greedy_assignment(const Matrix& similarity) {
    const std::size_t m = similarity.rows();
    if (similarity.cols() != m) throw Error(ErrorCode::SizeMismatch, "similarity matrix must be square");
    std::vector<bool> class_done(m, false), proto_done(m, false);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(m);
    for (std::size_t round = 0; round < m; ++round) {
        std::size_t best_c = m, best_p = m;
        for (std::size_t c = 0; c < m; ++c) {
            if (class_done[c]) continue;
            for (std::size_t p = 0; p < m; ++p) {
                if (proto_done[p]) continue;
                if (best_c == m || similarity(c, p) > similarity(best_c, best_p)) {
                    best_c = c;
                    best_p = p;
                }
            }
        }
        class_done[best_c] = true;
        proto_done[best_p] = true;
        pairs.emplace_back(best_c, best_p);
    }
    return pairs;
}

MatchResult match_prototypes(const PrototypeSet& prototypes, const PriorVectors& priors) {
    const std::size_t m = prototypes.size();
    if (priors.vectors.size() != m || priors.classes.size() != m) {
        throw Error(ErrorCode::SizeMismatch, std::to_string(m) + " prototypes but " +
                                                 std::to_string(priors.vectors.size()) + " priors");
    }
    if (priors.vectors.front().dim() != prototypes.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "priors have dimension " + std::to_string(priors.vectors.front().dim()) +
                                                      ", prototypes " + std::to_string(prototypes.dim()));
    }
    std::set<ClassLabel> distinct(priors.classes.begin(), priors.classes.end());
    if (distinct.size() != m) throw Error(ErrorCode::DuplicateClass, "prior classes are not unique");

    Matrix similarity(m, m);
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t p = 0; p < m; ++p) similarity(c, p) = cosine_similarity(priors.vectors[c], prototypes[p]);
    }

    std::vector<std::optional<ClassLabel>> labels(m);
    Assignment assignment;
    assignment.mode = AssignmentMode::Matched;
    for (const auto& [c, p] : greedy_assignment(similarity)) {
        labels[p] = priors.classes[c];
        assignment.pairs.push_back({priors.classes[c], p, similarity(c, p)});
    }
    return {PrototypeSet(prototypes.vectors(), std::move(labels)), std::move(assignment)};
}

void write_assignment(std::ostream& out, const Assignment& assignment) {
    for (const auto& p : assignment.pairs) {
        out << p.label << ',' << p.prototype << ',' << text::format_double(p.similarity) << '\n';
    }
}

}  // namespace hyperproto
