#include "autolabel/pipeline.hpp"

#include "autolabel/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace autolabel {

namespace {

using nlohmann::json;

/// Reruns of a stage keep their exception type but gain the stage name, so
/// CLI diagnostics can say where a run failed.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(name + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(name + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    } catch (const ShapeError& e) {
        throw ShapeError(name + ": " + e.what());
    } catch (const ContractError& e) {
        throw ContractError(name + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(name + ": " + e.what());
    } catch (const TrainingError& e) {
        throw TrainingError(name + ": " + e.what());
    }
}

std::string format_label(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%g", value);
    return buffer;
}

TimeSeriesDataset load_and_prepare(const PipelineConfig& config, const std::string& path,
                                   const std::string& stage_name) {
    auto dataset = stage(stage_name, [&] { return load_dataset(path, config.has_header); });
    if (config.normalize) {
        dataset = znormalize(dataset);
    }
    return dataset;
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(rep_fraction > 0.0 && rep_fraction <= 1.0)) {
        throw ConfigError("rep_fraction must be in (0, 1]");
    }
    if (!(tau >= 0.0 && tau < 1.0)) {
        throw ConfigError("tau must be in [0, 1)");
    }
    if (compact_length < 2) {
        throw ConfigError("compact_length must be at least 2");
    }
    if (max_iterations < 1) {
        throw ConfigError("max_iterations must be at least 1");
    }
    if (aecs_epochs < 1 || vae_epochs < 1) {
        throw ConfigError("epoch counts must be at least 1");
    }
    if (knn_k < 1) {
        throw ConfigError("knn_k must be at least 1");
    }
    if (tree_depth < 1) {
        throw ConfigError("tree_depth must be at least 1");
    }
    for (const auto& name : classifiers) {
        if (name != "knn" && name != "dt") {
            throw ConfigError("unknown classifier: " + name);
        }
    }
}

AecsConfig PipelineConfig::aecs() const {
    AecsConfig result;
    result.compact_length = compact_length;
    result.epochs = aecs_epochs;
    return result;
}

SelfCorrectConfig PipelineConfig::correction() const {
    SelfCorrectConfig result;
    result.tau = tau;
    result.max_iterations = max_iterations;
    result.vae.epochs = vae_epochs;
    result.vae.hidden_size = vae_hidden;
    result.cca.merge_representatives = merge_representatives;
    result.cca.linkage = linkage;
    result.seed = seed;
    return result;
}

EvaluateOptions PipelineConfig::evaluation() const {
    EvaluateOptions result;
    result.classifiers = classifiers;
    result.knn_k = knn_k;
    result.tree_depth = tree_depth;
    return result;
}

std::string run_meta_json(const PipelineConfig& config, const std::string& command) {
    json doc;
    doc["command"] = command;
    doc["train_path"] = config.train_path;
    doc["test_path"] = config.test_path;
    doc["labels_path"] = config.labels_path;
    doc["output_dir"] = config.output_dir;
    doc["load_model_path"] = config.load_model_path;
    doc["save_model_path"] = config.save_model_path;
    doc["dataset_name"] = config.dataset_name;
    doc["rep_fraction"] = config.rep_fraction;
    doc["tau"] = config.tau;
    doc["compact_length"] = config.compact_length;
    doc["seed"] = config.seed;
    doc["max_iterations"] = config.max_iterations;
    doc["aecs_epochs"] = config.aecs_epochs;
    doc["vae_epochs"] = config.vae_epochs;
    doc["vae_hidden"] = config.vae_hidden;
    doc["linkage"] = to_string(config.linkage);
    doc["normalize"] = config.normalize;
    doc["merge_representatives"] = config.merge_representatives;
    doc["has_header"] = config.has_header;
    doc["dump_dendrogram"] = config.dump_dendrogram;
    doc["knn_k"] = config.knn_k;
    doc["tree_depth"] = config.tree_depth;
    doc["classifiers"] = config.classifiers;
    return doc.dump(2) + "\n";
}

LabelRun run_label_pipeline(const PipelineConfig& config) {
    config.validate();
    if (config.train_path.empty()) {
        throw InputError("no training file given");
    }

    LabelRun run;
    run.train = load_and_prepare(config, config.train_path, "load-train");
    if (!config.dataset_name.empty()) {
        run.train.name = config.dataset_name;
    }

    run.selection = stage("select-representatives",
                          [&] { return select_representatives(run.train, config.rep_fraction, config.seed); });

    if (!config.load_model_path.empty()) {
        run.model = stage("load-model", [&] { return AecsModel::load(config.load_model_path); });
        if (run.model.channels != run.train.channels()) {
            throw ShapeError("load-model: checkpoint channel count does not match the dataset");
        }
    } else {
        run.model = stage("train-aecs", [&] {
            TimeSeriesDataset training_set = run.selection.unlabeled;
            if (config.merge_representatives) {
                training_set =
                    concat_instances(run.selection.unlabeled, run.selection.representatives.instances);
            }
            return train_aecs(training_set, config.aecs(), config.seed);
        });
    }
    if (!config.save_model_path.empty()) {
        stage("save-model", [&] { run.model.save(config.save_model_path); });
    }

    run.correction = stage("self-correct", [&] {
        return self_correct(run.selection.unlabeled, run.selection.representatives, run.model,
                            config.correction());
    });
    run.embeddings = stage("encode", [&] { return encode(run.model, run.selection.unlabeled); });
    return run;
}

void write_label_artifacts(const PipelineConfig& config, const LabelRun& run) {
    stage("write-artifacts", [&] {
        std::filesystem::create_directories(config.output_dir);
        const std::filesystem::path dir(config.output_dir);
        write_labels_csv((dir / "labels.csv").string(), run.correction.labels, run.train);
        write_text_file((dir / "iterations.json").string(), iteration_log_json(run.correction.log));
        export_embedding_2d(run.embeddings.embeddings, run.correction.labels.labels,
                            (dir / "embedding.csv").string());
        write_text_file((dir / "run_meta.json").string(), run_meta_json(config, "label"));
        if (config.dump_dendrogram) {
            write_text_file((dir / "dendrogram.json").string(),
                            dendrogram_json(run.correction.last_trace.clustering));
        }
    });
}

void write_labels_csv(const std::string& path, const LabelVector& labels,
                      const TimeSeriesDataset& dataset) {
    std::ostringstream out;
    out << "instance_index,label\n";
    for (int i = 0; i < labels.size(); ++i) {
        const int internal = labels.labels[static_cast<std::size_t>(i)];
        const double original = dataset.label_names.empty()
                                    ? static_cast<double>(internal)
                                    : dataset.label_names[static_cast<std::size_t>(internal)];
        out << i << ',' << format_label(original) << '\n';
    }
    write_text_file(path, out.str());
}

std::vector<int> read_labels_csv(const std::string& path, const TimeSeriesDataset& dataset) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open labels file: " + path);
    }
    std::vector<int> labels;
    std::string line;
    bool first = true;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (first && line.rfind("instance_index", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError(path + ": line " + std::to_string(line_number) + " is not index,label");
        }
        const std::string token = line.substr(comma + 1);
        double value = 0.0;
        const char* begin = token.data();
        auto [ptr, ec] = std::from_chars(begin, begin + token.size(), value);
        if (ec != std::errc() || ptr != begin + token.size()) {
            throw ParseError(path + ": line " + std::to_string(line_number) + ": non-numeric label '" +
                             token + "'");
        }
        int internal = -1;
        if (dataset.label_names.empty()) {
            internal = static_cast<int>(value);
        } else {
            for (std::size_t id = 0; id < dataset.label_names.size(); ++id) {
                if (dataset.label_names[id] == value) {
                    internal = static_cast<int>(id);
                    break;
                }
            }
        }
        if (internal < 0) {
            throw InputError(path + ": line " + std::to_string(line_number) + ": label value " + token +
                             " does not occur in the dataset");
        }
        labels.push_back(internal);
    }
    if (static_cast<int>(labels.size()) != dataset.size()) {
        throw ContractError("labels file covers " + std::to_string(labels.size()) + " of " +
                            std::to_string(dataset.size()) + " train instances: " + path);
    }
    return labels;
}

EvaluationReport run_evaluate(const PipelineConfig& config) {
    config.validate();
    if (config.test_path.empty()) {
        throw InputError("no test file given");
    }

    const std::filesystem::path dir(config.output_dir);
    std::string labels_path = config.labels_path;
    if (labels_path.empty() && std::filesystem::exists(dir / "labels.csv")) {
        labels_path = (dir / "labels.csv").string();
    }

    TimeSeriesDataset train;
    LabelVector generated;
    if (labels_path.empty()) {
        // No labels anywhere: produce them inline first.
        const LabelRun run = run_label_pipeline(config);
        write_label_artifacts(config, run);
        train = run.train;
        generated = run.correction.labels;
    } else {
        train = load_and_prepare(config, config.train_path, "load-train");
        if (!config.dataset_name.empty()) {
            train.name = config.dataset_name;
        }
        generated.labels = stage("load-labels", [&] { return read_labels_csv(labels_path, train); });
    }

    TimeSeriesDataset test = load_and_prepare(config, config.test_path, "load-test");
    test = stage("load-test", [&] { return align_labels(test, train.label_names); });

    EvaluationReport report = stage("evaluate", [&] {
        return evaluate_pipeline(train, test, generated, *train.labels, config.evaluation());
    });
    report.rep_fraction = config.rep_fraction;
    // Relative sibling reference, so reruns into different directories stay
    // byte-identical.
    if (std::filesystem::exists(dir / "iterations.json")) {
        report.iteration_log = "iterations.json";
    }

    stage("write-artifacts", [&] {
        std::filesystem::create_directories(config.output_dir);
        write_text_file((dir / "report.json").string(), report_json(report));
        write_text_file((dir / "run_meta.json").string(), run_meta_json(config, "evaluate"));
    });
    return report;
}

}  // namespace autolabel
