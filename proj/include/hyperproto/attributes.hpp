#ifndef HYPERPROTO_ATTRIBUTES_HPP
#define HYPERPROTO_ATTRIBUTES_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hyperproto/prototype_set.hpp"
#include "hyperproto/sphere.hpp"

namespace hyperproto {

// Per-example ternary attribute rows: +1 present, -1 absent, 0 undetermined.
class AttributeTable {
public:
    AttributeTable(std::vector<std::string> example_ids, std::vector<ClassLabel> class_labels,
                   std::vector<std::int8_t> values, std::vector<std::string> attribute_names);

    std::size_t rows() const noexcept { return class_labels_.size(); }
    std::size_t attributes() const noexcept { return attribute_names_.size(); }

    const std::vector<std::string>& example_ids() const noexcept { return example_ids_; }
    const std::vector<ClassLabel>& class_labels() const noexcept { return class_labels_; }
    const std::vector<std::string>& attribute_names() const noexcept { return attribute_names_; }

    int value(std::size_t row, std::size_t attribute) const { return values_[row * attributes() + attribute]; }
    std::span<const std::int8_t> row(std::size_t r) const { return {values_.data() + r * attributes(), attributes()}; }

    // Distinct classes in order of first appearance, and each row's index into that list.
    const std::vector<ClassLabel>& classes() const noexcept { return classes_; }
    std::size_t class_index(std::size_t row) const { return class_index_[row]; }

private:
    std::vector<std::string> example_ids_;
    std::vector<ClassLabel> class_labels_;
    std::vector<std::int8_t> values_;
    std::vector<std::string> attribute_names_;
    std::vector<ClassLabel> classes_;
    std::vector<std::size_t> class_index_;
};

// Reads "id,class,<attr_1>,...,<attr_A>" followed by rows of -1/0/1.
// Errors name the offending line: ParseError, DomainError, EmptyTable.
AttributeTable load_attribute_table(std::istream& source);
void write_attribute_table(std::ostream& out, const AttributeTable& table);

// Shannon entropy (bits) of a vector of class counts.
double entropy(std::span<const std::size_t> counts);

// Entropy reduction (bits) from sending value <= threshold left and > threshold right.
// threshold must be -0.5 or 0.5. A split with an empty branch has gain 0.
double information_gain(const AttributeTable& table, std::span<const std::size_t> rows, std::size_t feature,
                        double threshold);

// Gains closer than this are treated as equal; gains at or below it do not justify a split.
inline constexpr double kGainTolerance = 1e-12;
inline constexpr std::size_t kMaxTreeDepth = 20;

struct TreeNode {
    std::size_t depth = 0;
    std::size_t row_count = 0;
    std::vector<std::size_t> class_counts;
    bool is_leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
    double weighted_gain = 0.0;  // (node rows / N) * gain
    std::size_t left = 0;
    std::size_t right = 0;
};

// Nodes in depth-first creation order; nodes[0] is the root.
struct DecisionTree {
    std::vector<TreeNode> nodes;

    std::size_t split_count() const;
    std::size_t depth() const;
};

// Greedy entropy tree over thresholds {-0.5, 0.5}. Ties go to the lowest feature index,
// then to -0.5. Stops on pure nodes, zero gain, depth 20 or fewer than 2 rows.
DecisionTree build_decision_tree(const AttributeTable& table);

struct FeatureSelection {
    std::vector<std::size_t> selected;  // top-a of ranking
    std::vector<std::size_t> ranking;   // all attributes, best first
    std::vector<double> scores;         // cumulative weighted gain per attribute (bits)
};

// Ranks attributes by total weighted gain across the tree, then fills with unused attributes
// by root-level gain. Throws InvalidTarget unless 1 <= a <= A.
FeatureSelection select_features(const AttributeTable& table, std::size_t a);

struct PriorVectors {
    std::vector<ClassLabel> classes;
    std::vector<UnitVector> vectors;
    std::vector<std::size_t> class_counts;

    PrototypeSet as_prototypes() const;
};

// Per class, the normalized sum of its rows restricted to the selected attributes.
// Throws ZeroNorm naming the class when the sum vanishes.
PriorVectors class_prior_vectors(const AttributeTable& table, const FeatureSelection& selection);

// "attr_index,attr_name,score" in ranking order.
void write_ranking(std::ostream& out, const AttributeTable& table, const FeatureSelection& selection);

}  // namespace hyperproto

#endif  // HYPERPROTO_ATTRIBUTES_HPP
