#include "hyperproto/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "hyperproto/error.hpp"
#include "hyperproto/text_io.hpp"

namespace hyperproto {

namespace {

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

// Index of the largest score; a later candidate must beat the incumbent by more than the
// tolerance, so near-ties resolve to the earliest position.
std::size_t argmax_with_tolerance(std::span<const double> scores, std::span<const std::size_t> candidates) {
    std::size_t best = candidates.front();
    for (std::size_t c : candidates.subspan(1)) {
        if (scores[c] > scores[best] + kGainTolerance) best = c;
    }
    return best;
}

std::vector<std::size_t> rank_by(std::span<const double> scores, std::vector<std::size_t> pool) {
    std::vector<std::size_t> order;
    order.reserve(pool.size());
    while (!pool.empty()) {
        const std::size_t best = argmax_with_tolerance(scores, pool);
        order.push_back(best);
        pool.erase(std::find(pool.begin(), pool.end(), best));
    }
    return order;
}

}  // namespace

AttributeTable::AttributeTable(std::vector<std::string> example_ids, std::vector<ClassLabel> class_labels,
                               std::vector<std::int8_t> values, std::vector<std::string> attribute_names)
    : example_ids_(std::move(example_ids)),
      class_labels_(std::move(class_labels)),
      values_(std::move(values)),
      attribute_names_(std::move(attribute_names)) {
    if (class_labels_.empty()) throw Error(ErrorCode::EmptyTable, "attribute table has no rows");
    if (attribute_names_.empty()) throw Error(ErrorCode::EmptyTable, "attribute table has no attributes");
    if (example_ids_.size() != class_labels_.size() || values_.size() != rows() * attributes()) {
        throw Error(ErrorCode::SizeMismatch, "attribute table columns disagree in length");
    }
    for (auto v : values_) {
        if (v < -1 || v > 1) throw Error(ErrorCode::DomainError, "attribute value " + std::to_string(v));
    }
    std::map<ClassLabel, std::size_t> index;
    class_index_.reserve(rows());
    for (const auto& label : class_labels_) {
        auto [it, inserted] = index.try_emplace(label, classes_.size());
        if (inserted) classes_.push_back(label);
        class_index_.push_back(it->second);
    }
}

AttributeTable load_attribute_table(std::istream& source) {
    text::LineReader reader(source);
    std::string line;
    if (!reader.next(line)) throw Error(ErrorCode::EmptyTable, "attribute file is empty");
    auto header = text::split_csv(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "class") {
        throw Error(ErrorCode::ParseError,
                    line_prefix(reader.line_number()) + "header must be 'id,class,<attribute>,...'");
    }
    std::vector<std::string> names(header.begin() + 2, header.end());

    std::vector<std::string> ids;
    std::vector<ClassLabel> labels;
    std::vector<std::int8_t> values;
    while (reader.next(line)) {
        const auto where = line_prefix(reader.line_number());
        auto fields = text::split_csv(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::ParseError, where + "expected " + std::to_string(header.size()) +
                                                   " columns, got " + std::to_string(fields.size()));
        }
        if (fields[1].empty()) throw Error(ErrorCode::ParseError, where + "empty class label");
        validate_label(fields[1]);
        for (std::size_t k = 2; k < fields.size(); ++k) {
            const auto number = text::parse_double(fields[k]);
            if (!number) throw Error(ErrorCode::ParseError, where + "bad value '" + fields[k] + "'");
            if (*number != -1.0 && *number != 0.0 && *number != 1.0) {
                throw Error(ErrorCode::DomainError,
                            where + "value '" + fields[k] + "' for " + names[k - 2] + " is not -1, 0 or 1");
            }
            values.push_back(static_cast<std::int8_t>(*number));
        }
        ids.push_back(std::move(fields[0]));
        labels.push_back(std::move(fields[1]));
    }
    if (labels.empty()) throw Error(ErrorCode::EmptyTable, "attribute file has a header but no rows");
    return AttributeTable(std::move(ids), std::move(labels), std::move(values), std::move(names));
}

void write_attribute_table(std::ostream& out, const AttributeTable& table) {
    out << "id,class";
    for (const auto& name : table.attribute_names()) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out << table.example_ids()[r] << ',' << table.class_labels()[r];
        for (auto v : table.row(r)) out << ',' << static_cast<int>(v);
        out << '\n';
    }
}

double entropy(std::span<const std::size_t> counts) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) return 0.0;
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double information_gain(const AttributeTable& table, std::span<const std::size_t> rows, std::size_t feature,
                        double threshold) {
    if (rows.empty()) throw Error(ErrorCode::EmptyRowSet, "information gain over no rows");
    if (threshold != -0.5 && threshold != 0.5) {
        throw Error(ErrorCode::InvalidThreshold, "threshold must be -0.5 or 0.5");
    }
    if (feature >= table.attributes()) throw Error(ErrorCode::InvalidArgument, "feature index out of range");

    const std::size_t k = table.classes().size();
    std::vector<std::size_t> all(k), left(k), right(k);
    std::size_t left_rows = 0;
    for (std::size_t r : rows) {
        const std::size_t c = table.class_index(r);
        ++all[c];
        if (table.value(r, feature) <= threshold) {
            ++left[c];
            ++left_rows;
        } else {
            ++right[c];
        }
    }
    const std::size_t right_rows = rows.size() - left_rows;
    if (left_rows == 0 || right_rows == 0) return 0.0;
    const double n = static_cast<double>(rows.size());
    const double gain = entropy(all) - (static_cast<double>(left_rows) / n) * entropy(left) -
                        (static_cast<double>(right_rows) / n) * entropy(right);
    return std::max(0.0, gain);
}

std::size_t DecisionTree::split_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf; }));
}

std::size_t DecisionTree::depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
}

DecisionTree build_decision_tree(const AttributeTable& table) {
    const double total = static_cast<double>(table.rows());
    DecisionTree tree;

    struct Pending {
        std::size_t node;
        std::vector<std::size_t> rows;
    };
    std::vector<std::size_t> all_rows(table.rows());
    for (std::size_t r = 0; r < all_rows.size(); ++r) all_rows[r] = r;

    auto make_node = [&](std::span<const std::size_t> rows, std::size_t depth) {
        TreeNode node;
        node.depth = depth;
        node.row_count = rows.size();
        node.class_counts.assign(table.classes().size(), 0);
        for (std::size_t r : rows) ++node.class_counts[table.class_index(r)];
        tree.nodes.push_back(std::move(node));
        return tree.nodes.size() - 1;
    };

    std::vector<Pending> stack;
    stack.push_back({make_node(all_rows, 0), std::move(all_rows)});
    while (!stack.empty()) {
        Pending item = std::move(stack.back());
        stack.pop_back();
        const TreeNode& node = tree.nodes[item.node];
        const bool pure = std::count_if(node.class_counts.begin(), node.class_counts.end(),
                                        [](std::size_t c) { return c > 0; }) <= 1;
        if (pure || node.depth >= kMaxTreeDepth || item.rows.size() < 2) continue;

        double best_gain = 0.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;
        for (std::size_t f = 0; f < table.attributes(); ++f) {
            for (double t : {-0.5, 0.5}) {
                const double g = information_gain(table, item.rows, f, t);
                if (g > best_gain + kGainTolerance) {
                    best_gain = g;
                    best_feature = f;
                    best_threshold = t;
                    found = true;
                }
            }
        }
        if (!found) continue;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : item.rows) {
            (table.value(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        }
        const std::size_t depth = node.depth + 1;
        const std::size_t left = make_node(left_rows, depth);
        const std::size_t right = make_node(right_rows, depth);
        TreeNode& split = tree.nodes[item.node];
        split.is_leaf = false;
        split.feature = best_feature;
        split.threshold = best_threshold;
        split.gain = best_gain;
        split.weighted_gain = static_cast<double>(split.row_count) / total * best_gain;
        split.left = left;
        split.right = right;
        // Right pushed first so the left subtree is expanded first.
        stack.push_back({right, std::move(right_rows)});
        stack.push_back({left, std::move(left_rows)});
    }
    return tree;
}

FeatureSelection select_features(const AttributeTable& table, std::size_t a) {
    const std::size_t count = table.attributes();
    if (a < 1 || a > count) {
        throw Error(ErrorCode::InvalidTarget,
                    "cannot select " + std::to_string(a) + " of " + std::to_string(count) + " attributes");
    }
    const DecisionTree tree = build_decision_tree(table);

    FeatureSelection selection;
    selection.scores.assign(count, 0.0);
    std::vector<bool> used(count, false);
    for (const auto& node : tree.nodes) {
        if (node.is_leaf) continue;
        selection.scores[node.feature] += node.weighted_gain;
        used[node.feature] = true;
    }

    std::vector<std::size_t> in_tree, unused;
    for (std::size_t f = 0; f < count; ++f) (used[f] ? in_tree : unused).push_back(f);
    selection.ranking = rank_by(selection.scores, std::move(in_tree));

    if (!unused.empty()) {
        std::vector<std::size_t> all_rows(table.rows());
        for (std::size_t r = 0; r < all_rows.size(); ++r) all_rows[r] = r;
        std::vector<double> root_gain(count, 0.0);
        for (std::size_t f : unused) {
            root_gain[f] = std::max(information_gain(table, all_rows, f, -0.5), information_gain(table, all_rows, f, 0.5));
        }
        for (std::size_t f : rank_by(root_gain, std::move(unused))) selection.ranking.push_back(f);
    }
    selection.selected.assign(selection.ranking.begin(), selection.ranking.begin() + static_cast<std::ptrdiff_t>(a));
    return selection;
}

PrototypeSet PriorVectors::as_prototypes() const {
    std::vector<std::optional<ClassLabel>> labels(classes.begin(), classes.end());
    return PrototypeSet(vectors, std::move(labels));
}

PriorVectors class_prior_vectors(const AttributeTable& table, const FeatureSelection& selection) {
    for (std::size_t f : selection.selected) {
        if (f >= table.attributes()) throw Error(ErrorCode::InvalidArgument, "selected attribute out of range");
    }
    const std::size_t k = table.classes().size();
    const std::size_t a = selection.selected.size();
    std::vector<std::vector<long long>> sums(k, std::vector<long long>(a, 0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const std::size_t c = table.class_index(r);
        ++counts[c];
        for (std::size_t j = 0; j < a; ++j) sums[c][j] += table.value(r, selection.selected[j]);
    }

    PriorVectors priors;
    priors.classes = table.classes();
    priors.class_counts = counts;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> sum(sums[c].begin(), sums[c].end());
        try {
            priors.vectors.push_back(normalize(sum));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroNorm) throw;
            throw Error(ErrorCode::ZeroNorm, "attribute mean of class '" + table.classes()[c] +
                                                 "' vanishes on the selected attributes");
        }
    }
    return priors;
}

void write_ranking(std::ostream& out, const AttributeTable& table, const FeatureSelection& selection) {
    out << "attr_index,attr_name,score\n";
    for (std::size_t f : selection.ranking) {
        out << f << ',' << table.attribute_names()[f] << ',' << text::format_double(selection.scores[f]) << '\n';
    }
}

}  // namespace hyperproto
