#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hyperproto/attributes.hpp"
#include "support.hpp"

using namespace hyperproto;
using testing::error_of;

namespace {

AttributeTable parse(const std::string& text) {
    std::istringstream in(text);
    return load_attribute_table(in);
}

std::vector<std::size_t> all_rows(const AttributeTable& t) {
    std::vector<std::size_t> rows(t.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return rows;
}

std::string error_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("attributes") {

TEST_CASE("load the tabular example") {
    auto t = parse(
        "id,class,back color: black,wing color: yellow,wing pattern: spotted\n"
        "1,Black footed Albatross,0,-1,0\n"
        "2,Black footed Albatross,-1,-1,0\n");
    CHECK(t.rows() == 2);
    CHECK(t.attributes() == 3);
    CHECK(t.classes() == std::vector<ClassLabel>{"Black footed Albatross"});
    CHECK(t.value(0, 0) == 0);
    CHECK(t.value(1, 0) == -1);
    CHECK(t.value(0, 1) == -1);
    CHECK(t.value(1, 2) == 0);
    CHECK(t.attribute_names()[1] == "wing color: yellow");
}

TEST_CASE("load errors") {
    CHECK(error_of([] { parse("id,class,a,b\n1,x,0,2\n"); }) == ErrorCode::DomainError);
    CHECK(error_of([] { parse("id,class,a,b\n1,x,0,0.5\n"); }) == ErrorCode::DomainError);
    CHECK(error_of([] { parse("id,class,a,b\n"); }) == ErrorCode::EmptyTable);
    CHECK(error_of([] { parse(""); }) == ErrorCode::EmptyTable);
    CHECK(error_of([] { parse("id,class,a,b\n1,x,0\n"); }) == ErrorCode::ParseError);
    CHECK(error_of([] { parse("id,class,a,b\n1,x,0,yes\n"); }) == ErrorCode::ParseError);
    CHECK(error_of([] { parse("name,label,a\n1,x,0\n"); }) == ErrorCode::ParseError);
    CHECK(error_message([] { parse("id,class,a\n1,x,0\n\n2,y,3\n"); }).find("line 4") != std::string::npos);
}

TEST_CASE("table round trip") {
    const std::string text = "id,class,a,b\n1,x,0,-1\n2,y,1,1\n3,x,-1,0\n";
    auto t = parse(text);
    std::ostringstream out;
    write_attribute_table(out, t);
    CHECK(out.str() == text);
    CHECK(t.classes() == std::vector<ClassLabel>{"x", "y"});
    CHECK(t.class_index(2) == 0);
}

TEST_CASE("information gain examples") {
    auto t = parse("id,class,sep,const\n1,x,1,1\n2,x,1,1\n3,y,-1,1\n4,y,-1,1\n");
    auto rows = all_rows(t);
    CHECK(information_gain(t, rows, 0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(information_gain(t, rows, 0, -0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(information_gain(t, rows, 1, 0.5) == 0.0);
    CHECK(information_gain(t, rows, 1, -0.5) == 0.0);
    CHECK(error_of([&] { information_gain(t, std::span<const std::size_t>{}, 0, 0.5); }) == ErrorCode::EmptyRowSet);
    CHECK(error_of([&] { information_gain(t, rows, 0, 0.0); }) == ErrorCode::InvalidThreshold);
}

TEST_CASE("information gain on a 3-class 9-row table by hand") {
    // Classes a,a,a,b,b,b,c,c,c. Feature values: -1 -1 0 | 0 1 1 | 1 1 -1.
    auto t = parse(
        "id,class,f\n1,a,-1\n2,a,-1\n3,a,0\n4,b,0\n5,b,1\n6,b,1\n7,c,1\n8,c,1\n9,c,-1\n");
    auto rows = all_rows(t);
    const double h_root = std::log2(3.0);
    // threshold -0.5: left {a,a,c}, right {a,b,b,b,c,c}
    const double h_left1 = -(2.0 / 3) * std::log2(2.0 / 3) - (1.0 / 3) * std::log2(1.0 / 3);
    const double h_right1 = -(1.0 / 6) * std::log2(1.0 / 6) - 0.5 * std::log2(0.5) - (2.0 / 6) * std::log2(2.0 / 6);
    const double expected1 = h_root - (3.0 / 9) * h_left1 - (6.0 / 9) * h_right1;
    // threshold 0.5: left {a,a,a,b,c}, right {b,b,c,c}
    const double h_left2 = -(3.0 / 5) * std::log2(3.0 / 5) - 2 * (1.0 / 5) * std::log2(1.0 / 5);
    const double h_right2 = 1.0;
    const double expected2 = h_root - (5.0 / 9) * h_left2 - (4.0 / 9) * h_right2;
    CHECK(information_gain(t, rows, 0, -0.5) == doctest::Approx(expected1).epsilon(1e-12));
    CHECK(information_gain(t, rows, 0, 0.5) == doctest::Approx(expected2).epsilon(1e-12));

    // Subsets go through the same formula.
    std::vector<std::size_t> sub{0, 3, 4, 8};
    testing::OracleTable o{{0, 0, 0, 1, 1, 1, 2, 2, 2}, {{-1}, {-1}, {0}, {0}, {1}, {1}, {1}, {1}, {-1}}};
    CHECK(information_gain(t, sub, 0, 0.5) == doctest::Approx(testing::oracle_gain(sub, o, 0, 0.5)).epsilon(1e-12));
}

TEST_CASE("information gain is bounded") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t classes = 1 + trial % 5;
        auto o = testing::random_oracle_table(rng, 2 + trial % 40, 1 + trial % 4, classes);
        auto t = testing::to_attribute_table(o);
        std::vector<std::size_t> rows;
        std::bernoulli_distribution keep(0.6);
        for (std::size_t r = 0; r < t.rows(); ++r) {
            if (keep(rng)) rows.push_back(r);
        }
        if (rows.empty()) rows.push_back(0);
        std::set<std::size_t> present;
        for (auto r : rows) present.insert(t.class_index(r));
        for (std::size_t f = 0; f < t.attributes(); ++f) {
            for (double thr : {-0.5, 0.5}) {
                const double g = information_gain(t, rows, f, thr);
                CHECK(g >= 0.0);
                CHECK(g <= std::log2(static_cast<double>(present.size())) + 1e-12);
                CHECK(g == doctest::Approx(testing::oracle_gain(rows, o, f, thr)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("decision tree examples") {
    auto single = parse("id,class,a,b\n1,x,1,-1\n2,x,-1,0\n3,x,0,1\n");
    auto lone = build_decision_tree(single);
    CHECK(lone.nodes.size() == 1);
    CHECK(lone.nodes[0].is_leaf);
    CHECK(lone.split_count() == 0);

    auto two = parse("id,class,noise,sep\n1,x,1,1\n2,x,-1,1\n3,y,1,-1\n4,y,-1,-1\n");
    auto tree = build_decision_tree(two);
    CHECK(tree.split_count() == 1);
    CHECK(tree.depth() == 1);
    CHECK(tree.nodes[0].feature == 1);
    CHECK(tree.nodes[0].threshold == -0.5);
    CHECK(tree.nodes[0].weighted_gain == doctest::Approx(1.0).epsilon(1e-15));

    // Four classes need two features; the root must carry the best root-level gain.
    auto four = parse(
        "id,class,f0,f1,f2\n"
        "1,a,1,1,0\n2,a,1,1,1\n3,b,1,-1,0\n4,b,1,-1,-1\n5,b,1,-1,1\n"
        "6,c,-1,1,1\n7,d,-1,-1,-1\n8,d,-1,-1,0\n");
    auto t4 = build_decision_tree(four);
    auto rows = all_rows(four);
    double best = -1.0;
    std::size_t best_f = 0;
    double best_t = 0.0;
    for (std::size_t f = 0; f < four.attributes(); ++f) {
        for (double thr : {-0.5, 0.5}) {
            const double g = information_gain(four, rows, f, thr);
            if (g > best + kGainTolerance) {
                best = g;
                best_f = f;
                best_t = thr;
            }
        }
    }
    CHECK(t4.nodes[0].feature == best_f);
    CHECK(t4.nodes[0].threshold == best_t);
    CHECK(t4.depth() == 2);
    for (const auto& node : t4.nodes) {
        if (!node.is_leaf) continue;
        std::size_t nonzero = 0;
        for (auto c : node.class_counts) nonzero += c > 0;
        CHECK(nonzero == 1);
    }
    CHECK(build_decision_tree(four).nodes.size() == t4.nodes.size());
}

TEST_CASE("tree tie-break prefers the lower feature, then -0.5") {
    // Both features split the classes perfectly at either threshold.
    auto t = parse("id,class,a,b\n1,x,1,1\n2,y,-1,-1\n");
    auto tree = build_decision_tree(t);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == -0.5);
}

TEST_CASE("select features examples") {
    auto t = parse(
        "id,class,n0,n1,key,n2\n"
        "1,x,1,-1,1,0\n2,x,-1,1,1,1\n3,x,0,0,1,-1\n"
        "4,y,1,-1,-1,0\n5,y,-1,0,-1,-1\n6,y,0,1,-1,1\n");
    auto sel = select_features(t, 1);
    CHECK(sel.selected == std::vector<std::size_t>{2});
    CHECK(sel.ranking.front() == 2);
    CHECK(sel.scores[2] == doctest::Approx(1.0).epsilon(1e-15));

    auto full = select_features(t, t.attributes());
    std::vector<std::size_t> sorted = full.selected;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});

    CHECK(error_of([&] { select_features(t, 5); }) == ErrorCode::InvalidTarget);
    CHECK(error_of([&] { select_features(t, 0); }) == ErrorCode::InvalidTarget);
}

TEST_CASE("select features matches the independent tree oracle") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t rows = 2 + trial % 29, attrs = 1 + trial % 6, classes = 1 + trial % 4;
        auto o = testing::random_oracle_table(rng, rows, attrs, classes);
        auto t = testing::to_attribute_table(o);
        const auto expected = testing::oracle_ranking(o);
        const std::size_t a = std::min<std::size_t>(3, attrs);
        auto sel = select_features(t, a);
        CHECK(sel.ranking == expected);
        CHECK(sel.selected == std::vector<std::size_t>(expected.begin(), expected.begin() + a));
    }
}

TEST_CASE("selection is a prefix of the full ranking") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        auto t = testing::to_attribute_table(testing::random_oracle_table(rng, 40, 8, 5));
        auto full = select_features(t, 8);
        for (std::size_t a = 1; a <= 8; ++a) {
            auto sel = select_features(t, a);
            CHECK(sel.selected == std::vector<std::size_t>(full.ranking.begin(), full.ranking.begin() + a));
            std::set<std::size_t> distinct(sel.selected.begin(), sel.selected.end());
            CHECK(distinct.size() == a);
        }
        CHECK(build_decision_tree(t).nodes.size() == build_decision_tree(t).nodes.size());
    }
}

TEST_CASE("prior vector examples") {
    auto single = parse("id,class,a,b,c\n1,x,1,0,-1\n");
    auto sel = select_features(single, 3);
    sel.selected = {0, 1, 2};
    auto p = class_prior_vectors(single, sel);
    REQUIRE(p.vectors.size() == 1);
    CHECK(p.vectors[0][0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(p.vectors[0][1] == 0.0);
    CHECK(p.vectors[0][2] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(p.class_counts == std::vector<std::size_t>{1});

    auto cancel = parse("id,class,a,b,c\n1,x,1,1,0\n2,x,1,-1,0\n");
    sel.selected = {0, 1, 2};
    auto q = class_prior_vectors(cancel, sel);
    CHECK(q.vectors[0][0] == 1.0);
    CHECK(q.vectors[0][1] == 0.0);
    CHECK(q.vectors[0][2] == 0.0);

    auto zero = parse("id,class,a,b,c\n1,Laysan Albatross,1,-1,0\n2,Laysan Albatross,-1,1,0\n");
    CHECK(error_of([&] { class_prior_vectors(zero, sel); }) == ErrorCode::ZeroNorm);
    CHECK(error_message([&] { class_prior_vectors(zero, sel); }).find("Laysan Albatross") != std::string::npos);
}

TEST_CASE("prior vectors depend only on their own class and not on row order") {
    std::mt19937_64 rng(17);
    std::size_t compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto o = testing::random_oracle_table(rng, 24, 6, 3);
        FeatureSelection sel;
        sel.selected = {5, 0, 3};
        auto t = testing::to_attribute_table(o);

        auto shuffled = o;
        std::vector<std::size_t> perm(o.labels.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            shuffled.labels[i] = o.labels[perm[i]];
            shuffled.values[i] = o.values[perm[i]];
        }
        // Rows of a new class appended at the end.
        auto extended = o;
        for (int extra = 0; extra < 5; ++extra) {
            extended.labels.push_back(7);
            extended.values.push_back({1, -1, 1, 0, 1, -1});
        }

        std::optional<PriorVectors> base, perm_p, ext_p;
        try {
            base = class_prior_vectors(t, sel);
            perm_p = class_prior_vectors(testing::to_attribute_table(shuffled), sel);
            ext_p = class_prior_vectors(testing::to_attribute_table(extended), sel);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ZeroNorm);
            continue;
        }
        for (std::size_t c = 0; c < base->classes.size(); ++c) {
            CHECK(std::abs(norm(base->vectors[c].coords()) - 1.0) <= 1e-9);
            auto it = std::find(perm_p->classes.begin(), perm_p->classes.end(), base->classes[c]);
            REQUIRE(it != perm_p->classes.end());
            CHECK(perm_p->vectors[it - perm_p->classes.begin()] == base->vectors[c]);
            CHECK(ext_p->vectors[c] == base->vectors[c]);
            ++compared;
        }
    }
    CHECK(compared > 100);
}

TEST_CASE("ranking file") {
    auto t = parse("id,class,n,key\n1,x,1,1\n2,y,1,-1\n");
    auto sel = select_features(t, 2);
    std::ostringstream out;
    write_ranking(out, t, sel);
    CHECK(out.str().rfind("attr_index,attr_name,score\n1,key,1\n0,n,0\n", 0) == 0);
}

}  // TEST_SUITE
