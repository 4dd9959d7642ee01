#include "hyperproto/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "hyperproto/assignment.hpp"
#include "hyperproto/attributes.hpp"
#include "hyperproto/embedding.hpp"
#include "hyperproto/error.hpp"
#include "hyperproto/fewshot.hpp"
#include "hyperproto/projection.hpp"
#include "hyperproto/prototype_optimizer.hpp"
#include "hyperproto/synthetic.hpp"
#include "hyperproto/text_io.hpp"

namespace hyperproto::cli {

namespace fs = std::filesystem;

namespace {

// Bad flag values or flag combinations; exit status 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

template <typename Fn>
auto open_input(const std::string& path, Fn&& parse) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    try {
        return parse(in);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
    }
}

// Outputs are staged in memory and only written once the command has succeeded.
class OutputSet {
public:
    std::ostream& file(const std::string& name) { return files_.emplace_back(name, std::ostringstream{}).second; }

    void commit(const fs::path& dir) const {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
        for (const auto& [name, content] : files_) {
            std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
            out << content.str();
            if (!out) throw Error(ErrorCode::IoError, "cannot write '" + (dir / name).string() + "'");
        }
    }

private:
    std::vector<std::pair<std::string, std::ostringstream>> files_;
};

// "name=value" for every option of the subcommand, in declaration order.
std::string config_echo(const CLI::App& command) {
    std::ostringstream out;
    out << "command=" << command.get_name() << '\n';
    for (const CLI::Option* opt : command.get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config" || name == "out") continue;
        std::string value;
        if (opt->count() > 0) {
            const auto results = opt->reduced_results();
            for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
        } else {
            value = opt->get_default_str();
            if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
        }
        out << name << '=' << value << '\n';
    }
    return out.str();
}

std::map<std::string, std::string> echo_map(const std::string& echo) {
    std::map<std::string, std::string> m;
    std::istringstream in(echo);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return m;
}

std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& what) {
    std::vector<std::size_t> values;
    if (text::trim(s).empty()) return values;
    for (const auto& field : text::split_csv(s)) {
        const auto v = text::parse_integer(field);
        require(v && *v >= 0, "bad " + what + " entry '" + field + "'");
        values.push_back(static_cast<std::size_t>(*v));
    }
    return values;
}

std::string pairwise_summary(const std::vector<UnitVector>& vectors) {
    std::ostringstream out;
    if (vectors.size() < 2) {
        out << "min_pairwise_cosine=nan\nmean_pairwise_cosine=nan\nmax_pairwise_cosine=nan\n";
        return out.str();
    }
    double lo = 1.0, hi = -1.0, sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            const double c = cosine_similarity(vectors[i], vectors[j]);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
            sum += c;
            ++pairs;
        }
    }
    out << "min_pairwise_cosine=" << text::format_double(lo) << '\n'
        << "mean_pairwise_cosine=" << text::format_double(sum / static_cast<double>(pairs)) << '\n'
        << "max_pairwise_cosine=" << text::format_double(hi) << '\n';
    return out.str();
}

struct OptimizerFlags {
    std::size_t iterations = 1000;
    double learning_rate = 0.1;
    double momentum = 0.9;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--iterations", iterations, "Optimizer steps")->capture_default_str();
        cmd.add_option("--lr", learning_rate, "Optimizer learning rate")->capture_default_str();
        cmd.add_option("--momentum", momentum, "Optimizer momentum")->capture_default_str();
    }

    OptimizerConfig config(std::uint64_t seed) const {
        OptimizerConfig c{iterations, learning_rate, momentum, seed};
        try {
            c.validate();
        } catch (const Error& e) {
            throw ValidationError(e.what());
        }
        return c;
    }
};

// Each command: registers flags, then returns a runner that fills the output set.
using Runner = std::function<void(OutputSet&, std::ostream&)>;

struct Command {
    CLI::App* app = nullptr;
    Runner run;
};

Command prototypes_command(CLI::App& root, std::string& out_dir) {
    auto* cmd = root.add_subcommand("prototypes", "Optimize maximally separated unlabeled prototypes");
    auto classes = std::make_shared<std::size_t>(0);
    auto dim = std::make_shared<std::size_t>(0);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto opt = std::make_shared<OptimizerFlags>();
    cmd->add_option("--classes", *classes, "Number of prototypes M")->required();
    cmd->add_option("--dim", *dim, "Latent dimension a")->required();
    cmd->add_option("--seed", *seed, "Random seed")->capture_default_str();
    opt->add_to(*cmd);
    cmd->add_option("--out", out_dir, "Output directory")->required();

    return {cmd, [=](OutputSet& outputs, std::ostream& log) {
                require(*classes >= 2, "--classes must be >= 2");
                require(*dim >= 2, "--dim must be >= 2");
                const auto config = opt->config(*seed);
                OptimizerTrace trace;
                const auto set = optimize_prototypes(*classes, *dim, config, &trace);
                write_prototypes(outputs.file("prototypes.txt"), set);
                outputs.file("diagnostics.txt") << "count=" << set.size() << '\n'
                                                << "dim=" << set.dim() << '\n'
                                                << "iterations=" << trace.iterations << '\n'
                                                << "best_iteration=" << trace.best_iteration << '\n'
                                                << "initial_max_pairwise_cosine="
                                                << text::format_double(trace.initial_max_cosine) << '\n'
                                                << "max_pairwise_cosine=" << text::format_double(max_pairwise_cosine(set))
                                                << '\n';
                log << "max pairwise cosine " << text::format_double(max_pairwise_cosine(set)) << '\n';
            }};
}

Command priors_command(CLI::App& root, std::string& out_dir) {
    auto* cmd = root.add_subcommand("priors", "Select informative attributes and build class prior vectors");
    auto path = std::make_shared<std::string>();
    auto dim = std::make_shared<std::size_t>(0);
    cmd->add_option("--attributes", *path, "Attribute table (id,class,attr...)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dim", *dim, "Latent dimension a (attributes kept)")->required();
    cmd->add_option("--out", out_dir, "Output directory")->required();

    return {cmd, [=](OutputSet& outputs, std::ostream& log) {
                require(*dim >= 2, "--dim must be >= 2");
                const auto table = open_input(*path, [](std::istream& in) { return load_attribute_table(in); });
                require(*dim <= table.attributes(), "--dim " + std::to_string(*dim) + " exceeds the " +
                                                        std::to_string(table.attributes()) + " attributes in the table");
                const auto selection = select_features(table, *dim);
                const auto priors = class_prior_vectors(table, selection);
                write_prototypes(outputs.file("priors.txt"), priors.as_prototypes());
                write_ranking(outputs.file("ranking.csv"), table, selection);
                auto& summary = outputs.file("summary.txt");
                summary << "classes=" << priors.classes.size() << '\n' << "dim=" << *dim << '\n' << "selected=";
                for (std::size_t i = 0; i < selection.selected.size(); ++i) {
                    summary << (i ? "," : "") << selection.selected[i];
                }
                summary << '\n' << pairwise_summary(priors.vectors);
                log << priors.classes.size() << " class priors in dimension " << *dim << '\n';
            }};
}

Command assign_command(CLI::App& root, std::string& out_dir) {
    auto* cmd = root.add_subcommand("assign", "Attach class labels to prototypes");
    auto priors_path = std::make_shared<std::string>();
    auto protos_path = std::make_shared<std::string>();
    auto mode = std::make_shared<std::string>("matched");
    auto seed = std::make_shared<std::uint64_t>(0);
    auto opt = std::make_shared<OptimizerFlags>();
    cmd->add_option("--priors", *priors_path, "Prior vectors file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--prototypes", *protos_path, "Unlabeled prototypes; optimized on the fly if omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--mode", *mode, "matched | direct | spread (seeded arbitrary labels)")
        ->capture_default_str()
        ->check(CLI::IsMember({"matched", "direct", "spread"}));
    cmd->add_option("--seed", *seed, "Seed for on-the-fly prototypes and spread labeling")->capture_default_str();
    opt->add_to(*cmd);
    cmd->add_option("--out", out_dir, "Output directory")->required();

    return {cmd, [=](OutputSet& outputs, std::ostream& log) {
                require(!(*mode == "direct" && !protos_path->empty()), "--prototypes is not used with --mode direct");
                const auto config = opt->config(*seed);
                const auto prior_set = open_input(*priors_path, [](std::istream& in) { return read_prototypes(in); });
                require(prior_set.fully_labeled(), "prior vectors must all carry class labels");
                PriorVectors priors;
                for (std::size_t i = 0; i < prior_set.size(); ++i) {
                    priors.classes.push_back(*prior_set.labels()[i]);
                    priors.vectors.push_back(prior_set[i]);
                }

                Assignment assignment;
                std::optional<PrototypeSet> labeled;
                if (*mode == "direct") {
                    labeled = direct_prototypes(priors);
                    assignment.mode = AssignmentMode::Direct;
                    for (std::size_t i = 0; i < priors.classes.size(); ++i) assignment.pairs.push_back({priors.classes[i], i, 1.0});
                } else {
                    const PrototypeSet spread =
                        protos_path->empty()
                            ? optimize_prototypes(priors.vectors.size(), priors.vectors.front().dim(), config)
                            : open_input(*protos_path, [](std::istream& in) { return read_prototypes(in); });
                    if (*mode == "matched") {
                        auto match = match_prototypes(spread, priors);
                        labeled = std::move(match.labeled);
                        assignment = std::move(match.assignment);
                    } else {
                        if (spread.size() != priors.classes.size()) {
                            throw Error(ErrorCode::SizeMismatch, std::to_string(spread.size()) + " prototypes but " +
                                                                     std::to_string(priors.classes.size()) + " priors");
                        }
                        std::vector<std::size_t> order(spread.size());
                        std::iota(order.begin(), order.end(), 0);
                        std::mt19937_64 rng(*seed);
                        std::shuffle(order.begin(), order.end(), rng);
                        std::vector<std::optional<ClassLabel>> labels(spread.size());
                        for (std::size_t c = 0; c < order.size(); ++c) {
                            labels[order[c]] = priors.classes[c];
                            assignment.pairs.push_back(
                                {priors.classes[c], order[c], cosine_similarity(priors.vectors[c], spread[order[c]])});
                        }
                        labeled = PrototypeSet(spread.vectors(), std::move(labels));
                    }
                }
                write_prototypes(outputs.file("labeled.txt"), *labeled);
                write_assignment(outputs.file("assignment.csv"), assignment);
                outputs.file("summary.txt") << "mode=" << *mode << '\n'
                                            << "count=" << labeled->size() << '\n'
                                            << "mean_similarity=" << text::format_double(assignment.mean_similarity())
                                            << '\n'
                                            << "min_similarity=" << text::format_double(assignment.min_similarity())
                                            << '\n'
                                            << "max_pairwise_cosine="
                                            << text::format_double(labeled->size() > 1 ? max_pairwise_cosine(*labeled) : -1.0)
                                            << '\n';
                log << "assigned " << labeled->size() << " classes, mean similarity "
                    << text::format_double(assignment.mean_similarity()) << '\n';
            }};
}

Command train_command(CLI::App& root, std::string& out_dir) {
    auto* cmd = root.add_subcommand("train", "Train the embedding network against fixed prototypes");
    auto data_path = std::make_shared<std::string>();
    auto protos_path = std::make_shared<std::string>();
    auto hidden = std::make_shared<std::string>("64");
    auto loss = std::make_shared<std::string>("squared");
    auto drops = std::make_shared<std::string>();
    auto cfg = std::make_shared<TrainConfig>();
    cmd->add_option("--dataset", *data_path, "Training dataset (id,class,f_1...)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--prototypes", *protos_path, "Labeled prototypes")->required()->check(CLI::ExistingFile);
    cmd->add_option("--hidden", *hidden, "Hidden layer sizes, comma separated (empty for none)")->capture_default_str();
    cmd->add_option("--epochs", cfg->epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--batch-size", cfg->batch_size, "Minibatch size")->capture_default_str();
    cmd->add_option("--lr", cfg->learning_rate, "Learning rate")->capture_default_str();
    cmd->add_option("--momentum", cfg->momentum, "SGD momentum")->capture_default_str();
    cmd->add_option("--weight-decay", cfg->weight_decay, "L2 weight decay")->capture_default_str();
    cmd->add_option("--loss", *loss, "squared | linear")->capture_default_str()->check(CLI::IsMember({"squared", "linear"}));
    cmd->add_option("--lr-drops", *drops, "Epochs at which the rate drops tenfold (default: 70% of epochs)");
    cmd->add_option("--seed", cfg->seed, "Seed for initialization and shuffling")->capture_default_str();
    cmd->add_option("--out", out_dir, "Output directory")->required();

    return {cmd, [=](OutputSet& outputs, std::ostream& log) {
                TrainConfig config = *cfg;
                config.loss = *loss == "linear" ? LossKind::Linear : LossKind::Squared;
                if (!text::trim(*drops).empty()) config.lr_drop_epochs = parse_size_list(*drops, "--lr-drops");
                try {
                    config.validate();
                } catch (const Error& e) {
                    throw ValidationError(e.what());
                }
                auto sizes = parse_size_list(*hidden, "--hidden");
                require(std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }),
                        "hidden layer sizes must be positive");

                const auto data = open_input(*data_path, [](std::istream& in) { return load_dataset(in); });
                const auto prototypes = open_input(*protos_path, [](std::istream& in) { return read_prototypes(in); });
                sizes.insert(sizes.begin(), data.input_dim());
                sizes.push_back(prototypes.dim());
                auto result = train(EmbeddingModel::create(sizes, config.seed), data, prototypes, config);
                write_checkpoint(outputs.file("model.ckpt"), result.model);
                auto& history = outputs.file("history.csv");
                history << "epoch,loss\n";
                for (std::size_t e = 0; e < result.history.size(); ++e) {
                    history << e << ',' << text::format_double(result.history[e]) << '\n';
                }
                log << "final loss " << text::format_double(result.history.back()) << '\n';
            }};
}

Command eval_command(CLI::App& root, std::string& out_dir, std::function<std::string()> echo) {
    auto* cmd = root.add_subcommand("eval", "Episodic N-way K-shot evaluation on held-out classes");
    auto model_path = std::make_shared<std::string>();
    auto data_path = std::make_shared<std::string>();
    auto protocol = std::make_shared<Protocol>();
    auto seeds = std::make_shared<std::vector<std::uint64_t>>(std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    cmd->add_option("--model", *model_path, "Model checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dataset", *data_path, "Held-out dataset")->required()->check(CLI::ExistingFile);
    cmd->add_option("--way", protocol->way, "Classes per episode (N)")->capture_default_str();
    cmd->add_option("--shot", protocol->shot, "Supports per class (K)")->capture_default_str();
    cmd->add_option("--queries", protocol->queries, "Queries per class (Q)")->capture_default_str();
    cmd->add_option("--episodes", protocol->episodes, "Episodes per seed (E)")->capture_default_str();
    cmd->add_option("--seeds", *seeds, "Evaluation seeds")->delimiter(',')->capture_default_str();
    cmd->add_option("--out", out_dir, "Output directory")->required();

    return {cmd, [=](OutputSet& outputs, std::ostream& log) {
                try {
                    protocol->validate();
                } catch (const Error& e) {
                    throw ValidationError(e.what());
                }
                require(!seeds->empty(), "--seeds needs at least one seed");
                const auto model = open_input(*model_path, [](std::istream& in) { return read_checkpoint(in); });
                const auto data = open_input(*data_path, [](std::istream& in) { return load_dataset(in); });
                auto report = evaluate(model, data, *protocol, *seeds);
                report.config_echo = echo_map(echo());
                write_report_text(outputs.file("report.txt"), report);
                write_report_json(outputs.file("report.json"), report);
                log << protocol->way << "-way " << protocol->shot << "-shot accuracy "
                    << text::format_double(report.mean_accuracy) << " (se " << text::format_double(report.std_error)
                    << ")\n";
            }};
}

Command project_command(CLI::App& root, std::string& out_dir) {
    auto* cmd = root.add_subcommand("project", "Project prototypes or priors to 2D for plotting");
    auto path = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(0);
    cmd->add_option("--input", *path, "Prototype or priors file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", *seed, "Power iteration start seed")->capture_default_str();
    cmd->add_option("--out", out_dir, "Output directory")->required();

    return {cmd, [=](OutputSet& outputs, std::ostream& log) {
                const auto set = open_input(*path, [](std::istream& in) { return read_prototypes(in); });
                require(set.size() >= 3, "projection needs at least 3 vectors, got " + std::to_string(set.size()));
                const auto points = project_2d(set, *seed);
                write_projection(outputs.file("projection.csv"), points);
                log << "projected " << points.size() << " vectors\n";
            }};
}

Command synth_command(CLI::App& root, std::string& out_dir) {
    auto* cmd = root.add_subcommand("synth", "Generate a synthetic attribute table and feature datasets");
    auto cfg = std::make_shared<SynthConfig>();
    cmd->add_option("--classes", cfg->classes, "Training classes")->capture_default_str();
    cmd->add_option("--held-out", cfg->held_out, "Held-out classes")->capture_default_str();
    cmd->add_option("--attributes", cfg->attributes, "Attributes per example (A)")->capture_default_str();
    cmd->add_option("--samples", cfg->samples_per_class, "Samples per class")->capture_default_str();
    cmd->add_option("--feature-dim", cfg->feature_dim, "Input feature dimension")->capture_default_str();
    cmd->add_option("--family-size", cfg->family_size, "Classes sharing a family template")->capture_default_str();
    cmd->add_option("--noise", cfg->noise, "Feature noise sigma")->capture_default_str();
    cmd->add_option("--seed", cfg->seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", out_dir, "Output directory")->required();

    return {cmd, [=](OutputSet& outputs, std::ostream& log) {
                try {
                    cfg->validate();
                } catch (const Error& e) {
                    throw ValidationError(e.what());
                }
                const auto data = generate_synthetic(*cfg);
                write_attribute_table(outputs.file("attributes.csv"), data.train_attributes);
                write_dataset(outputs.file("train.csv"), data.train);
                write_attribute_table(outputs.file("heldout_attributes.csv"), data.held_out_attributes);
                write_dataset(outputs.file("heldout.csv"), data.held_out);
                log << data.train.size() << " training and " << data.held_out.size() << " held-out examples\n";
            }};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app("Hyperspherical prototype construction, training and few-shot evaluation", "hyperproto");
    app.set_config("--config", "", "Config file; command-line flags take precedence");
    app.require_subcommand(1);

    std::string out_dir;
    std::vector<Command> commands;
    commands.push_back(prototypes_command(app, out_dir));
    commands.push_back(priors_command(app, out_dir));
    commands.push_back(assign_command(app, out_dir));
    commands.push_back(train_command(app, out_dir));
    const CLI::App* active = nullptr;
    commands.push_back(eval_command(app, out_dir, [&active] { return config_echo(*active); }));
    commands.push_back(project_command(app, out_dir));
    commands.push_back(synth_command(app, out_dir));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto& command : commands) {
            if (command.app->parsed()) target = command.app;
        }
        out << target->help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    for (const auto& command : commands) {
        if (!command.app->parsed()) continue;
        active = command.app;
        try {
            OutputSet outputs;
            command.run(outputs, out);
            outputs.file("run.meta") << config_echo(*command.app);
            outputs.commit(out_dir);
            return kExitOk;
        } catch (const ValidationError& e) {
            err << "error: " << e.what() << '\n';
            return kExitValidation;
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return kExitRuntime;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitRuntime;
        }
    }
    return kExitValidation;
}

}  // namespace hyperproto::cli
