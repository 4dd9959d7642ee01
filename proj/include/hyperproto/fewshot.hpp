#ifndef HYPERPROTO_FEWSHOT_HPP
#define HYPERPROTO_FEWSHOT_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hyperproto/embedding.hpp"
#include "hyperproto/prototype_set.hpp"

namespace hyperproto {

struct EpisodeExample {
    std::size_t row = 0;  // index into the dataset
    ClassLabel label;
};

// One N-way K-shot task. Classes are listed in sampling order; supports and queries are
// grouped by class in that same order.
struct Episode {
    std::size_t way = 0;
    std::size_t shot = 0;
    std::size_t query_count = 0;
    std::vector<ClassLabel> classes;
    std::vector<EpisodeExample> support;
    std::vector<EpisodeExample> query;
};

struct Protocol {
    std::size_t way = 5;
    std::size_t shot = 1;
    std::size_t queries = 15;
    std::size_t episodes = 600;

    void validate() const;
};

// Draws N classes without replacement, then K+Q distinct examples per class; the first K
// are supports. Throws InsufficientClasses / InsufficientExamples (naming the class).
Episode sample_episode(const LabeledDataset& data, std::size_t way, std::size_t shot, std::size_t queries,
                       std::uint64_t seed);

// Normalized mean of the support embeddings per class. Training prototypes are not consulted.
PrototypeSet episode_prototypes(const Embedder& model, const LabeledDataset& data, const Episode& episode);

// Label of the most similar prototype; ties go to the lowest position.
ClassLabel classify(const Embedder& model, const PrototypeSet& prototypes, std::span<const double> query);
ClassLabel classify(const UnitVector& embedding, const PrototypeSet& prototypes);

struct EvalReport {
    Protocol protocol;
    std::vector<std::uint64_t> seeds;
    std::vector<double> per_seed_accuracies;
    std::vector<std::size_t> episode_correct;  // per episode, seed-major
    std::size_t queries_per_episode = 0;
    double mean_accuracy = 0.0;  // mean of per-seed accuracies
    double std_error = 0.0;      // of per-episode accuracy
    std::map<std::string, std::string> config_echo;

    std::size_t episodes() const noexcept { return episode_correct.size(); }
};

// Runs protocol.episodes episodes per seed. Per-seed accuracy is correct / total queries.
EvalReport evaluate(const Embedder& model, const LabeledDataset& data, const Protocol& protocol,
                    std::span<const std::uint64_t> seeds);

// Concatenates reports for the same protocol, e.g. one per independently trained model.
EvalReport combine_reports(std::span<const EvalReport> reports);

// "key=value" lines.
void write_report_text(std::ostream& out, const EvalReport& report);
// One JSON object per report.
void write_report_json(std::ostream& out, const EvalReport& report);

}  // namespace hyperproto

#endif  // HYPERPROTO_FEWSHOT_HPP
