// Test-only oracles and fixtures. Nothing here calls into the code path it is used to check.
#ifndef HYPERPROTO_TESTS_SUPPORT_HPP
#define HYPERPROTO_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstring>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hyperproto/attributes.hpp"
#include "hyperproto/error.hpp"
#include "hyperproto/embedding.hpp"
#include "hyperproto/sphere.hpp"

namespace testing {

// Error code raised by f, or nullopt if it returned normally.
template <class F>
std::optional<hyperproto::ErrorCode> error_of(F&& f) {
    try {
        f();
    } catch (const hyperproto::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

using Vec = std::vector<double>;

inline double raw_dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec random_gaussian(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Vec v(n);
    for (double& x : v) x = g(rng);
    return v;
}

inline hyperproto::UnitVector random_unit(std::mt19937_64& rng, std::size_t n) {
    return hyperproto::normalize(random_gaussian(rng, n));
}

inline Vec to_vec(const hyperproto::UnitVector& u) { return Vec(u.coords().begin(), u.coords().end()); }

// Exhaustive scan over all ordered pairs i != j.
inline double brute_max_cosine(const std::vector<Vec>& vs) {
    double best = -2.0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        for (std::size_t j = 0; j < vs.size(); ++j) {
            if (i == j) continue;
            best = std::max(best, raw_dot(vs[i], vs[j]) / std::sqrt(raw_dot(vs[i], vs[i]) * raw_dot(vs[j], vs[j])));
        }
    }
    return best;
}

// Mean over rows of the largest inner product with any other row.
inline double mean_row_max(const std::vector<Vec>& rows) {
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double best = -1e300;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (j != i) best = std::max(best, raw_dot(rows[i], rows[j]));
        }
        total += best;
    }
    return total / static_cast<double>(rows.size());
}

inline std::vector<std::size_t> row_argmax(const std::vector<Vec>& rows) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t arg = 0;
        double best = -1e300;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (j == i) continue;
            const double s = raw_dot(rows[i], rows[j]);
            if (s > best) {
                best = s;
                arg = j;
            }
        }
        out.push_back(arg);
    }
    return out;
}

inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

// ---- Independent decision-tree oracle -------------------------------------------------------

struct OracleTable {
    std::vector<int> labels;               // class ids
    std::vector<std::vector<int>> values;  // row-major ternary
};

inline double oracle_entropy(const std::vector<std::size_t>& rows, const OracleTable& t) {
    std::map<int, double> counts;
    for (auto r : rows) counts[t.labels[r]] += 1.0;
    const double n = static_cast<double>(rows.size());
    // H = log2 n - (1/n) sum c log2 c
    double s = 0.0;
    for (auto& [k, c] : counts) s += c * std::log2(c);
    return std::log2(n) - s / n;
}

inline double oracle_gain(const std::vector<std::size_t>& rows, const OracleTable& t, std::size_t f, double thr) {
    std::vector<std::size_t> lo, hi;
    for (auto r : rows) (t.values[r][f] <= thr ? lo : hi).push_back(r);
    if (lo.empty() || hi.empty()) return 0.0;
    const double n = static_cast<double>(rows.size());
    return std::max(0.0, oracle_entropy(rows, t) - lo.size() / n * oracle_entropy(lo, t) -
                             hi.size() / n * oracle_entropy(hi, t));
}

inline void oracle_grow(const std::vector<std::size_t>& rows, const OracleTable& t, std::size_t depth, double total,
                        std::vector<double>& score, std::vector<bool>& used) {
    std::set<int> classes;
    for (auto r : rows) classes.insert(t.labels[r]);
    if (classes.size() <= 1 || depth >= 20 || rows.size() < 2) return;
    const std::size_t a = t.values.front().size();
    double best = 0.0;
    long best_f = -1;
    double best_t = 0.0;
    for (std::size_t f = 0; f < a; ++f) {
        for (double thr : {-0.5, 0.5}) {
            const double g = oracle_gain(rows, t, f, thr);
            if (g > best + 1e-12) {
                best = g;
                best_f = static_cast<long>(f);
                best_t = thr;
            }
        }
    }
    if (best_f < 0) return;
    score[best_f] += rows.size() / total * best;
    used[best_f] = true;
    std::vector<std::size_t> lo, hi;
    for (auto r : rows) (t.values[r][best_f] <= best_t ? lo : hi).push_back(r);
    oracle_grow(lo, t, depth + 1, total, score, used);
    oracle_grow(hi, t, depth + 1, total, score, used);
}

// Full attribute ranking: tree attributes by cumulative weighted gain, then the rest by root gain.
inline std::vector<std::size_t> oracle_ranking(const OracleTable& t) {
    const std::size_t a = t.values.front().size();
    std::vector<std::size_t> all(t.labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<double> score(a, 0.0);
    std::vector<bool> used(a, false);
    oracle_grow(all, t, 0, static_cast<double>(all.size()), score, used);

    auto by_score = [](const std::vector<double>& s) {
        return [&s](std::size_t x, std::size_t y) {
            if (std::abs(s[x] - s[y]) > 1e-9) return s[x] > s[y];
            return x < y;
        };
    };
    std::vector<std::size_t> in_tree, rest;
    for (std::size_t f = 0; f < a; ++f) (used[f] ? in_tree : rest).push_back(f);
    std::sort(in_tree.begin(), in_tree.end(), by_score(score));
    std::vector<double> root(a, 0.0);
    for (auto f : rest) root[f] = std::max(oracle_gain(all, t, f, -0.5), oracle_gain(all, t, f, 0.5));
    std::sort(rest.begin(), rest.end(), by_score(root));
    in_tree.insert(in_tree.end(), rest.begin(), rest.end());
    return in_tree;
}

inline OracleTable random_oracle_table(std::mt19937_64& rng, std::size_t rows, std::size_t attrs, std::size_t classes) {
    OracleTable t;
    std::uniform_int_distribution<int> cls(0, static_cast<int>(classes) - 1), val(-1, 1);
    for (std::size_t r = 0; r < rows; ++r) {
        t.labels.push_back(cls(rng));
        std::vector<int> row(attrs);
        for (int& v : row) v = val(rng);
        t.values.push_back(row);
    }
    return t;
}

inline hyperproto::AttributeTable to_attribute_table(const OracleTable& t) {
    std::vector<std::string> ids, labels, names;
    std::vector<std::int8_t> values;
    for (std::size_t r = 0; r < t.labels.size(); ++r) {
        ids.push_back(std::to_string(r));
        labels.push_back("c" + std::to_string(t.labels[r]));
        for (int v : t.values[r]) values.push_back(static_cast<std::int8_t>(v));
    }
    for (std::size_t f = 0; f < t.values.front().size(); ++f) names.push_back("a" + std::to_string(f));
    return hyperproto::AttributeTable(ids, labels, values, names);
}

// ---- Similarity construction ----------------------------------------------------------------

// Prototypes and priors in dimension 6 whose class-major cosine matrix is exactly `s`.
// Prototypes are the Cholesky rows of a Gram matrix with off-diagonal g; each prior solves
// L x = s_c and takes up the remaining norm in a private coordinate.
inline std::pair<std::vector<hyperproto::UnitVector>, std::vector<hyperproto::UnitVector>> realize_similarity(
    const double s[3][3], double g) {
    double G[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) G[i][j] = i == j ? 1.0 : g;
    double L[3][3] = {};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) {
            double acc = G[i][j];
            for (int k = 0; k < j; ++k) acc -= L[i][k] * L[j][k];
            L[i][j] = i == j ? std::sqrt(acc) : acc / L[j][j];
        }
    }
    std::vector<hyperproto::UnitVector> protos, priors;
    for (int i = 0; i < 3; ++i) protos.push_back(hyperproto::normalize({L[i][0], L[i][1], L[i][2], 0.0, 0.0, 0.0}));
    for (int c = 0; c < 3; ++c) {
        double x[3];
        for (int i = 0; i < 3; ++i) {
            double acc = s[c][i];
            for (int k = 0; k < i; ++k) acc -= L[i][k] * x[k];
            x[i] = acc / L[i][i];
        }
        std::vector<double> v(6, 0.0);
        double used = 0.0;
        for (int i = 0; i < 3; ++i) {
            v[i] = x[i];
            used += x[i] * x[i];
        }
        v[3 + c] = std::sqrt(1.0 - used);
        priors.push_back(hyperproto::normalize(v));
    }
    return {protos, priors};
}

// Three points 120 degrees apart on a great circle of S^2, turned by a fixed rotation.
inline std::vector<hyperproto::UnitVector> exact_triangle() {
    const double c = std::cos(0.7), s = std::sin(0.7), ct = std::cos(1.1), st = std::sin(1.1);
    std::vector<hyperproto::UnitVector> out;
    for (int k = 0; k < 3; ++k) {
        const double t = 2.0 * 3.14159265358979323846 * k / 3.0;
        const double x = std::cos(t), y = std::sin(t);
        // Rotate about z by 0.7, then about x by 1.1.
        const double rx = c * x - s * y, ry = s * x + c * y;
        out.push_back(hyperproto::normalize({rx, ct * ry, st * ry}));
    }
    return out;
}

// ---- Embedder fixtures ----------------------------------------------------------------------

// Embeds an input by normalizing it.
class IdentityEmbedder : public hyperproto::Embedder {
public:
    explicit IdentityEmbedder(std::size_t dim) : dim_(dim) {}
    std::size_t input_dim() const override { return dim_; }
    std::size_t output_dim() const override { return dim_; }
    hyperproto::UnitVector embed(std::span<const double> input) const override { return hyperproto::normalize(input); }

private:
    std::size_t dim_;
};

// A fixed pseudo-random unit vector per distinct input; carries no information about the class.
class RandomEmbedder : public hyperproto::Embedder {
public:
    RandomEmbedder(std::size_t in, std::size_t out, std::uint64_t seed) : in_(in), out_(out), seed_(seed) {}
    std::size_t input_dim() const override { return in_; }
    std::size_t output_dim() const override { return out_; }
    hyperproto::UnitVector embed(std::span<const double> input) const override {
        std::uint64_t h = seed_ ^ 0x9e3779b97f4a7c15ull;
        for (double x : input) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, sizeof bits);
            h = (h ^ bits) * 0x100000001b3ull;
            h ^= h >> 29;
        }
        std::mt19937_64 rng(h);
        return random_unit(rng, out_);
    }

private:
    std::size_t in_, out_;
    std::uint64_t seed_;
};

// Ignores its input entirely: every call draws the next vector from a seeded stream.
class StreamEmbedder : public hyperproto::Embedder {
public:
    StreamEmbedder(std::size_t in, std::size_t out, std::uint64_t seed) : in_(in), out_(out), rng_(seed) {}
    std::size_t input_dim() const override { return in_; }
    std::size_t output_dim() const override { return out_; }
    hyperproto::UnitVector embed(std::span<const double>) const override { return random_unit(rng_, out_); }

private:
    std::size_t in_, out_;
    mutable std::mt19937_64 rng_;
};

// Sends every example of class c to the c-th basis vector, ignoring the per-example coordinate
// of one_hot_dataset.
class OracleEmbedder : public hyperproto::Embedder {
public:
    explicit OracleEmbedder(std::size_t classes) : classes_(classes) {}
    std::size_t input_dim() const override { return classes_ + 1; }
    std::size_t output_dim() const override { return classes_; }
    hyperproto::UnitVector embed(std::span<const double> input) const override {
        return hyperproto::normalize(input.first(classes_));
    }

private:
    std::size_t classes_;
};

// Dataset whose example i of class c is a unique input; class is recoverable from the first
// `classes` coordinates (one-hot), the remaining coordinate makes inputs distinct.
inline hyperproto::LabeledDataset one_hot_dataset(std::size_t classes, std::size_t per_class) {
    hyperproto::LabeledDataset d;
    d.inputs = hyperproto::Matrix(classes * per_class, classes + 1);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t r = c * per_class + i;
            d.ids.push_back(std::to_string(r));
            d.labels.push_back("class" + std::to_string(c));
            d.inputs(r, c) = 1.0;
            d.inputs(r, classes) = 1e-3 * static_cast<double>(i + 1);
        }
    }
    return d;
}

// ---- Filesystem helpers ---------------------------------------------------------------------

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("hyperproto_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

// Files in dir (name -> bytes).
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        files[entry.path().filename().string()] = slurp(entry.path());
    }
    return files;
}

}  // namespace testing

#endif  // HYPERPROTO_TESTS_SUPPORT_HPP
