#include "autolabel/pipeline.hpp"

#include "autolabel/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

using autolabel::PipelineConfig;

struct CliOptions {
    PipelineConfig config;
    std::string linkage = "average";
};

void add_common_options(CLI::App& cmd, CliOptions& options) {
    cmd.add_option("--train", options.config.train_path, "Training TSV file or channel directory");
    cmd.add_option("--output-dir", options.config.output_dir, "Directory for run artifacts")
        ->capture_default_str();
    cmd.add_option("--dataset-name", options.config.dataset_name, "Override the dataset name in reports");
    cmd.add_option("--rep-fraction", options.config.rep_fraction,
                   "Fraction of the training set labeled by the expert")
        ->capture_default_str();
    cmd.add_option("--tau", options.config.tau, "Label saturation threshold")->capture_default_str();
    cmd.add_option("--compact-length", options.config.compact_length, "Bottleneck embedding length")
        ->capture_default_str();
    cmd.add_option("--seed", options.config.seed, "Master seed; all randomness derives from it")
        ->capture_default_str();
    cmd.add_option("--max-iterations", options.config.max_iterations, "Self-correction iteration cap")
        ->capture_default_str();
    cmd.add_option("--aecs-epochs", options.config.aecs_epochs, "Autoencoder training epochs")
        ->capture_default_str();
    cmd.add_option("--vae-epochs", options.config.vae_epochs, "Generator training epochs")
        ->capture_default_str();
    cmd.add_option("--vae-hidden", options.config.vae_hidden, "Generator hidden size")
        ->capture_default_str();
    cmd.add_option("--linkage", options.linkage, "Clustering linkage: single, complete, average")
        ->capture_default_str();
    cmd.add_flag("--normalize,!--no-normalize", options.config.normalize,
                 "Per-instance z-normalization (on by default)");
    cmd.add_flag("--merge-representatives,!--no-merge-representatives",
                 options.config.merge_representatives,
                 "Merge expert representatives into the clustered collection (on by default)");
    cmd.add_flag("--has-header", options.config.has_header, "Skip one header line in data files");
    cmd.add_flag("--dendrogram", options.config.dump_dendrogram, "Also write dendrogram.json");
}

void finalize(CliOptions& options) {
    options.config.linkage = autolabel::linkage_from_string(options.linkage);
}

int run_label(CliOptions& options) {
    finalize(options);
    const auto run = autolabel::run_label_pipeline(options.config);
    autolabel::write_label_artifacts(options.config, run);
    for (const auto& record : run.correction.log) {
        std::printf("iteration %d: pool=%d mismatch=%.6f reward=%d hubert=%.6f measure=%s\n",
                    record.iteration, record.pool_size, record.mismatch, record.reward, record.hubert,
                    autolabel::to_string(record.measure));
    }
    std::printf("wrote labels.csv, iterations.json, embedding.csv, run_meta.json to %s\n",
                options.config.output_dir.c_str());
    return 0;
}

int run_evaluate_cmd(CliOptions& options) {
    finalize(options);
    const auto report = autolabel::run_evaluate(options.config);
    std::printf("label_accuracy=%.6f\n", report.label_accuracy);
    for (const auto& score : report.classifiers) {
        std::printf("%s: generated=%.6f true=%.6f gap=%.6f\n", score.name.c_str(),
                    score.accuracy_generated, score.accuracy_true, score.gap);
    }
    std::printf("wrote report.json to %s\n", options.config.output_dir.c_str());
    return 0;
}

autolabel::AecsModel obtain_model(const CliOptions& options, const autolabel::TimeSeriesDataset& train) {
    if (!options.config.load_model_path.empty()) {
        auto model = autolabel::AecsModel::load(options.config.load_model_path);
        if (model.channels != train.channels()) {
            throw autolabel::ShapeError("checkpoint channel count does not match the dataset");
        }
        return model;
    }
    auto training_set = train;
    training_set.labels.reset();
    training_set.class_count.reset();
    return autolabel::train_aecs(training_set, options.config.aecs(), options.config.seed);
}

int run_encode(CliOptions& options) {
    finalize(options);
    options.config.validate();
    auto train = autolabel::load_dataset(options.config.train_path, options.config.has_header);
    if (options.config.normalize) {
        train = autolabel::znormalize(train);
    }
    const auto model = obtain_model(options, train);
    if (!options.config.save_model_path.empty()) {
        model.save(options.config.save_model_path);
    }
    std::filesystem::create_directories(options.config.output_dir);
    const std::filesystem::path dir(options.config.output_dir);
    const auto compact = autolabel::encode(model, train);
    autolabel::write_compact_csv(compact, (dir / "aecs.csv").string());
    autolabel::write_text_file((dir / "run_meta.json").string(),
                               autolabel::run_meta_json(options.config, "encode"));
    std::printf("wrote aecs.csv (%d x %d) to %s\n", train.size(), model.compact_length,
                options.config.output_dir.c_str());
    return 0;
}

int run_cluster(CliOptions& options) {
    finalize(options);
    options.config.validate();
    auto train = autolabel::load_dataset(options.config.train_path, options.config.has_header);
    if (options.config.normalize) {
        train = autolabel::znormalize(train);
    }
    if (!train.class_count) {
        throw autolabel::InputError("cluster: dataset carries no labels to derive the cluster count from");
    }
    const int k = *train.class_count;
    const auto model = obtain_model(options, train);
    const auto compact = autolabel::encode(model, train);
    const auto scored = autolabel::best_clustering_scored(compact.embeddings, k, options.config.linkage);

    std::filesystem::create_directories(options.config.output_dir);
    const std::filesystem::path dir(options.config.output_dir);

    std::string clusters = "instance_index,cluster\n";
    for (std::size_t i = 0; i < scored.best.assignments.size(); ++i) {
        clusters += std::to_string(i) + ',' + std::to_string(scored.best.assignments[i]) + '\n';
    }
    autolabel::write_text_file((dir / "clusters.csv").string(), clusters);

    nlohmann::json hubert;
    hubert["chebyshev"] = autolabel::round6(scored.scores[0]);
    hubert["manhattan"] = autolabel::round6(scored.scores[1]);
    hubert["mahalanobis"] = autolabel::round6(scored.scores[2]);
    hubert["best"] = autolabel::to_string(scored.best.measure.kind);
    hubert["clusters"] = k;
    autolabel::write_text_file((dir / "hubert.json").string(), hubert.dump(2) + "\n");
    if (options.config.dump_dendrogram) {
        autolabel::write_text_file((dir / "dendrogram.json").string(),
                                   autolabel::dendrogram_json(scored.best));
    }
    autolabel::write_text_file((dir / "run_meta.json").string(),
                               autolabel::run_meta_json(options.config, "cluster"));
    std::printf("best measure %s (hubert CH=%.6f MN=%.6f ML=%.6f)\n",
                autolabel::to_string(scored.best.measure.kind), scored.scores[0], scored.scores[1],
                scored.scores[2]);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"autolabel: label generation for unlabeled time-series collections from a small "
                 "expert-labeled subset. Set AUTOLABEL_THREADS to cap worker parallelism."};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "INI/TOML file with one [section] per subcommand; flags take precedence");

    CliOptions label_options, evaluate_options, encode_options, cluster_options;

    auto* label = app.add_subcommand("label", "Generate labels for a training collection");
    add_common_options(*label, label_options);

    auto* evaluate = app.add_subcommand("evaluate", "Score generated labels against a hidden test set");
    add_common_options(*evaluate, evaluate_options);
    evaluate->add_option("--test", evaluate_options.config.test_path, "Hidden test TSV file");
    evaluate->add_option("--labels", evaluate_options.config.labels_path,
                         "Existing labels.csv (defaults to <output-dir>/labels.csv, else labels inline)");
    evaluate->add_option("--classifier", evaluate_options.config.classifiers,
                         "Base classifiers to score: knn, dt (repeatable)");
    evaluate->add_option("--knn-k", evaluate_options.config.knn_k, "Neighbor count for knn")
        ->capture_default_str();
    evaluate->add_option("--tree-depth", evaluate_options.config.tree_depth, "Depth cap for dt")
        ->capture_default_str();

    auto* encode = app.add_subcommand("encode", "Dump the compact embedding of a collection");
    add_common_options(*encode, encode_options);
    encode->add_option("--save-model", encode_options.config.save_model_path,
                       "Write the trained autoencoder checkpoint here");
    encode->add_option("--load-model", encode_options.config.load_model_path,
                       "Reuse an existing autoencoder checkpoint");

    auto* cluster = app.add_subcommand("cluster", "Cluster a collection and report Hubert scores");
    add_common_options(*cluster, cluster_options);
    cluster->add_option("--load-model", cluster_options.config.load_model_path,
                        "Reuse an existing autoencoder checkpoint");

    CLI11_PARSE(app, argc, argv);

    try {
        if (label->parsed()) {
            return run_label(label_options);
        }
        if (evaluate->parsed()) {
            return run_evaluate_cmd(evaluate_options);
        }
        if (encode->parsed()) {
            return run_encode(encode_options);
        }
        if (cluster->parsed()) {
            return run_cluster(cluster_options);
        }
    } catch (const autolabel::InputError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    } catch (const autolabel::ContractError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 3;
    } catch (const autolabel::TrainingError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 4;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}
