#ifndef HYPERPROTO_ASSIGNMENT_HPP
#define HYPERPROTO_ASSIGNMENT_HPP

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "hyperproto/attributes.hpp"
#include "hyperproto/prototype_set.hpp"

namespace hyperproto {

enum class AssignmentMode { Direct, Matched };

struct AssignedPair {
    ClassLabel label;
    std::size_t prototype = 0;
    double similarity = 0.0;
};

// Class <-> prototype bijection, pairs in the order they were made.
struct Assignment {
    std::vector<AssignedPair> pairs;
    AssignmentMode mode = AssignmentMode::Matched;

    double mean_similarity() const;
    double min_similarity() const;
};

// Uses the prior vectors themselves as the class prototypes. Throws DuplicateClass.
PrototypeSet direct_prototypes(const PriorVectors& priors);

// Greedy global matching on a class-major similarity matrix: (class, prototype) pairs in the
// order they are taken. Ties go to the earlier class, then the lower prototype index.
std::vector<std::pair<std::size_t, std::size_t>> greedy_assignment(const Matrix& similarity);

struct MatchResult {
    PrototypeSet labeled;
    Assignment assignment;
};

// Labels unlabeled prototypes by greedy global matching: repeatedly takes the most similar
// (class, prototype) pair among unassigned classes and prototypes. Ties go to the earlier class,
// then the lower prototype index. Vector positions are left untouched.
MatchResult match_prototypes(const PrototypeSet& prototypes, const PriorVectors& priors);

// "class,prototype_index,similarity" lines in assignment order.
void write_assignment(std::ostream& out, const Assignment& assignment);

}  // namespace hyperproto

#endif  // HYPERPROTO_ASSIGNMENT_HPP
