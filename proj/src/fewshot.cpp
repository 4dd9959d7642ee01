#include "hyperproto/fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "hyperproto/error.hpp"
#include "hyperproto/text_io.hpp"

namespace hyperproto {

namespace {

std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(episode), 0x5eedu};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

void recompute_summary(EvalReport& report) {
    const double n = static_cast<double>(report.episodes());
    const double q = static_cast<double>(report.queries_per_episode);
    double mean = 0.0;
    for (auto c : report.episode_correct) mean += static_cast<double>(c) / q;
    mean /= n;
    double ss = 0.0;
    for (auto c : report.episode_correct) {
        const double d = static_cast<double>(c) / q - mean;
        ss += d * d;
    }
    report.std_error = report.episodes() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    report.mean_accuracy =
        std::accumulate(report.per_seed_accuracies.begin(), report.per_seed_accuracies.end(), 0.0) /
        static_cast<double>(report.per_seed_accuracies.size());
}

}  // namespace

void Protocol::validate() const {
    if (way < 2) throw Error(ErrorCode::InvalidArgument, "way must be >= 2");
    if (shot < 1) throw Error(ErrorCode::InvalidArgument, "shot must be >= 1");
    if (queries < 1) throw Error(ErrorCode::InvalidArgument, "queries per class must be >= 1");
    if (episodes < 1) throw Error(ErrorCode::InvalidArgument, "episodes must be >= 1");
}

Episode sample_episode(const LabeledDataset& data, std::size_t way, std::size_t shot, std::size_t queries,
                       std::uint64_t seed) {
    const auto classes = data.classes();
    if (classes.size() < way) {
        throw Error(ErrorCode::InsufficientClasses, "need " + std::to_string(way) + " classes, dataset has " +
                                                        std::to_string(classes.size()));
    }
    std::map<ClassLabel, std::vector<std::size_t>> rows_of;
    for (std::size_t i = 0; i < data.size(); ++i) rows_of[data.labels[i]].push_back(i);
    const std::size_t per_class = shot + queries;
    for (const auto& c : classes) {
        if (rows_of[c].size() < per_class) {
            throw Error(ErrorCode::InsufficientExamples, "class '" + c + "' has " + std::to_string(rows_of[c].size()) +
                                                             " examples, episode needs " + std::to_string(per_class));
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> class_order(classes.size());
    std::iota(class_order.begin(), class_order.end(), 0);
    std::shuffle(class_order.begin(), class_order.end(), rng);

    Episode episode{way, shot, queries, {}, {}, {}};
    for (std::size_t n = 0; n < way; ++n) {
        const auto& label = classes[class_order[n]];
        auto rows = rows_of[label];
        std::shuffle(rows.begin(), rows.end(), rng);
        episode.classes.push_back(label);
        for (std::size_t k = 0; k < shot; ++k) episode.support.push_back({rows[k], label});
        for (std::size_t k = shot; k < per_class; ++k) episode.query.push_back({rows[k], label});
    }
    return episode;
}

PrototypeSet episode_prototypes(const Embedder& model, const LabeledDataset& data, const Episode& episode) {
    std::vector<UnitVector> vectors;
    std::vector<std::optional<ClassLabel>> labels;
    for (const auto& label : episode.classes) {
        std::vector<double> sum(model.output_dim(), 0.0);
        for (const auto& s : episode.support) {
            if (s.label != label) continue;
            const auto e = model.embed(data.inputs.row(s.row));
            for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += e[k];
        }
        try {
            vectors.push_back(normalize(sum));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroNorm) throw;
            throw Error(ErrorCode::ZeroNorm, "support embeddings of class '" + label + "' cancel out");
        }
        labels.emplace_back(label);
    }
    return PrototypeSet(std::move(vectors), std::move(labels));
}

ClassLabel classify(const UnitVector& embedding, const PrototypeSet& prototypes) {
    std::size_t best = 0;
    double best_sim = cosine_similarity(embedding, prototypes[0]);
    for (std::size_t p = 1; p < prototypes.size(); ++p) {
        const double s = cosine_similarity(embedding, prototypes[p]);
        if (s > best_sim) {
            best_sim = s;
            best = p;
        }
    }
    const auto& label = prototypes.labels()[best];
    if (!label) throw Error(ErrorCode::MissingPrototype, "nearest prototype is unlabeled");
    return *label;
}

ClassLabel classify(const Embedder& model, const PrototypeSet& prototypes, std::span<const double> query) {
    return classify(model.embed(query), prototypes);
}

EvalReport evaluate(const Embedder& model, const LabeledDataset& data, const Protocol& protocol,
                    std::span<const std::uint64_t> seeds) {
    protocol.validate();
    if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "at least one seed is required");
    if (data.input_dim() != model.input_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "dataset has " + std::to_string(data.input_dim()) +
                                                      " features, model expects " + std::to_string(model.input_dim()));
    }

    EvalReport report;
    report.protocol = protocol;
    report.seeds.assign(seeds.begin(), seeds.end());
    report.queries_per_episode = protocol.way * protocol.queries;
    for (std::uint64_t seed : seeds) {
        std::size_t correct = 0;
        for (std::size_t e = 0; e < protocol.episodes; ++e) {
            const auto episode =
                sample_episode(data, protocol.way, protocol.shot, protocol.queries, episode_seed(seed, e));
            const auto prototypes = episode_prototypes(model, data, episode);
            std::size_t hits = 0;
            for (const auto& q : episode.query) {
                if (classify(model, prototypes, data.inputs.row(q.row)) == q.label) ++hits;
            }
            report.episode_correct.push_back(hits);
            correct += hits;
        }
        report.per_seed_accuracies.push_back(static_cast<double>(correct) /
                                             static_cast<double>(protocol.episodes * report.queries_per_episode));
    }
    recompute_summary(report);
    return report;
}

EvalReport combine_reports(std::span<const EvalReport> reports) {
    if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "no reports to combine");
    EvalReport out;
    out.protocol = reports.front().protocol;
    out.queries_per_episode = reports.front().queries_per_episode;
    out.config_echo = reports.front().config_echo;
    for (const auto& r : reports) {
        if (r.queries_per_episode != out.queries_per_episode) {
            throw Error(ErrorCode::InvalidArgument, "reports use different protocols");
        }
        out.seeds.insert(out.seeds.end(), r.seeds.begin(), r.seeds.end());
        out.per_seed_accuracies.insert(out.per_seed_accuracies.end(), r.per_seed_accuracies.begin(),
                                       r.per_seed_accuracies.end());
        out.episode_correct.insert(out.episode_correct.end(), r.episode_correct.begin(), r.episode_correct.end());
    }
    recompute_summary(out);
    return out;
}

void write_report_text(std::ostream& out, const EvalReport& report) {
    out << "way=" << report.protocol.way << '\n'
        << "shot=" << report.protocol.shot << '\n'
        << "queries=" << report.protocol.queries << '\n'
        << "episodes_per_seed=" << report.protocol.episodes << '\n'
        << "episodes=" << report.episodes() << '\n';
    out << "seeds=";
    for (std::size_t i = 0; i < report.seeds.size(); ++i) out << (i ? "," : "") << report.seeds[i];
    out << '\n';
    for (std::size_t i = 0; i < report.seeds.size(); ++i) {
        out << "accuracy_seed_" << report.seeds[i] << '=' << text::format_double(report.per_seed_accuracies[i]) << '\n';
    }
    out << "mean_accuracy=" << text::format_double(report.mean_accuracy) << '\n'
        << "std_error=" << text::format_double(report.std_error) << '\n';
    for (const auto& [key, value] : report.config_echo) out << "config." << key << '=' << value << '\n';
}

void write_report_json(std::ostream& out, const EvalReport& report) {
    nlohmann::ordered_json j;
    j["protocol"] = {{"way", report.protocol.way},
                     {"shot", report.protocol.shot},
                     {"queries", report.protocol.queries},
                     {"episodes_per_seed", report.protocol.episodes}};
    j["seeds"] = report.seeds;
    j["per_seed_accuracy"] = report.per_seed_accuracies;
    j["mean_accuracy"] = report.mean_accuracy;
    j["std_error"] = report.std_error;
    j["episodes"] = report.episodes();
    j["config"] = report.config_echo;
    out << j.dump(2) << '\n';
}

}  // namespace hyperproto
