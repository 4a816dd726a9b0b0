#include "autolabel/labeling.hpp"

#include "autolabel/io.hpp"
#include "autolabel/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace autolabel {

int mode_smallest(const std::vector<int>& values, int class_count) {
    if (values.empty()) {
        throw ContractError("mode of an empty multiset is undefined");
    }
    std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
    for (const int value : values) {
        if (value < 0 || value >= class_count) {
            throw ContractError("mode_smallest: label outside the class range");
        }
        ++counts[static_cast<std::size_t>(value)];
    }
    int best = 0;
    for (int c = 1; c < class_count; ++c) {
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) {
            best = c;
        }
    }
    return best;
}

std::vector<int> associate_clusters(const ClusteringResult& clustering, const Matrix& rep_embeddings,
                                    const std::vector<int>& rep_labels, AssociationTrace& trace) {
    const int k = clustering.cluster_count;
    const int m = static_cast<int>(rep_embeddings.rows());
    if (static_cast<int>(rep_labels.size()) != m) {
        throw ContractError("associate_clusters: one label per representative required");
    }

    trace.dist.resize(k, m);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < m; ++j) {
            trace.dist(i, j) =
                distance(clustering.measure, clustering.centroids.row(i), rep_embeddings.row(j));
        }
    }

    trace.rep_cluster.assign(static_cast<std::size_t>(m), 0);
    for (int j = 0; j < m; ++j) {
        int nearest = 0;
        for (int i = 1; i < k; ++i) {
            if (trace.dist(i, j) < trace.dist(nearest, j)) {
                nearest = i;
            }
        }
        trace.rep_cluster[static_cast<std::size_t>(j)] = nearest;
    }

    trace.labels_near_cluster.assign(static_cast<std::size_t>(k), {});
    for (int j = 0; j < m; ++j) {
        trace.labels_near_cluster[static_cast<std::size_t>(trace.rep_cluster[static_cast<std::size_t>(j)])]
            .push_back(rep_labels[static_cast<std::size_t>(j)]);
    }

    trace.class_of_cluster.assign(static_cast<std::size_t>(k), 0);
    trace.fallback_used.assign(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i) {
        const auto& nearby = trace.labels_near_cluster[static_cast<std::size_t>(i)];
        if (!nearby.empty()) {
            trace.class_of_cluster[static_cast<std::size_t>(i)] = mode_smallest(nearby, k);
            continue;
        }
        // No representative mapped here: take the class of the single nearest
        // representative to this centroid.
        int nearest_rep = 0;
        for (int j = 1; j < m; ++j) {
            if (trace.dist(i, j) < trace.dist(i, nearest_rep)) {
                nearest_rep = j;
            }
        }
        trace.class_of_cluster[static_cast<std::size_t>(i)] =
            rep_labels[static_cast<std::size_t>(nearest_rep)];
        trace.fallback_used[static_cast<std::size_t>(i)] = 1;
    }

    std::vector<int> labels(clustering.assignments.size());
    for (std::size_t row = 0; row < clustering.assignments.size(); ++row) {
        labels[row] =
            trace.class_of_cluster[static_cast<std::size_t>(clustering.assignments[row])];
    }
    return labels;
}

std::pair<LabelVector, AssociationTrace> cluster_class_associate(const TimeSeriesDataset& unlabeled,
                                                                 const RepresentativeSet& representatives,
                                                                 const AecsModel& model,
                                                                 const CcaOptions& options) {
    const int k = representatives.class_count();
    if (k < 2) {
        throw ContractError("cluster_class_associate: representatives cover fewer than 2 classes");
    }
    for (const int label : representatives.labels) {
        if (label < 0 || label >= k) {
            throw ContractError("cluster_class_associate: representative labels are not contiguous 0..k-1");
        }
    }

    const int m = representatives.size();
    Matrix rep_embeddings(m, model.compact_length);
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t j) {
        rep_embeddings.row(static_cast<Eigen::Index>(j)) =
            encode_series(model, representatives.instances[j]).transpose();
    });

    TimeSeriesDataset clustered = unlabeled;
    if (options.merge_representatives) {
        std::vector<TimeSeries> experts;
        for (int i = 0; i < m; ++i) {
            if (representatives.origins[static_cast<std::size_t>(i)] == Origin::Expert) {
                experts.push_back(representatives.instances[static_cast<std::size_t>(i)]);
            }
        }
        clustered = concat_instances(unlabeled, experts);
    }
    const CompactMatrix compact = encode(model, clustered);

    const auto scored = best_clustering_scored(compact.embeddings, k, options.linkage);

    AssociationTrace trace;
    trace.clustering = scored.best;
    trace.hubert_scores = scored.scores;
    const auto all_labels = associate_clusters(trace.clustering, rep_embeddings, representatives.labels, trace);

    LabelVector result;
    result.iteration = 1;
    result.labels.assign(all_labels.begin(), all_labels.begin() + unlabeled.size());
    return {std::move(result), std::move(trace)};
}

double label_mismatch(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw ContractError("label_mismatch: vectors differ in length");
    }
    if (a.empty()) {
        throw ContractError("label_mismatch: empty label vectors");
    }
    std::size_t differing = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        differing += (a[i] != b[i]) ? 1 : 0;
    }
    return static_cast<double>(differing) / static_cast<double>(a.size());
}

Reward label_discriminator(const LabelVector& current, const LabelVector* previous, double tau) {
    const double mismatch = (previous == nullptr) ? 1.0 : label_mismatch(current.labels, previous->labels);
    return Reward{mismatch <= tau ? 0 : 1};
}

std::string iteration_log_json(const std::vector<IterationRecord>& log) {
    nlohmann::json array = nlohmann::json::array();
    for (const auto& record : log) {
        array.push_back({{"iteration", record.iteration},
                         {"pool_size", record.pool_size},
                         {"mismatch", round6(record.mismatch)},
                         {"reward", record.reward},
                         {"hubert", round6(record.hubert)},
                         {"measure", to_string(record.measure)}});
    }
    return array.dump(2) + "\n";
}

namespace {

/// Synthetic instances per class for one iteration: expert_count/k each,
/// remainder to the smallest class ids so the total stays expert_count.
std::vector<int> per_class_counts(int expert_count, int class_count) {
    std::vector<int> counts(static_cast<std::size_t>(class_count), expert_count / class_count);
    for (int c = 0; c < expert_count % class_count; ++c) {
        ++counts[static_cast<std::size_t>(c)];
    }
    return counts;
}

}  // namespace

SelfCorrectResult self_correct(const TimeSeriesDataset& unlabeled, const RepresentativeSet& representatives,
                               const AecsModel& model, const SelfCorrectConfig& config) {
    if (config.max_iterations < 1) {
        throw ConfigError("max_iterations must be at least 1");
    }
    const int k = representatives.class_count();
    const int expert_count = representatives.expert_count();
    if (expert_count != representatives.size()) {
        throw ContractError("self_correct: the starting pool must be expert-only");
    }

    // Expert instances per class, the conditioning set for every generator.
    std::vector<std::vector<TimeSeries>> expert_by_class(static_cast<std::size_t>(k));
    for (int i = 0; i < representatives.size(); ++i) {
        expert_by_class[static_cast<std::size_t>(representatives.labels[static_cast<std::size_t>(i)])]
            .push_back(representatives.instances[static_cast<std::size_t>(i)]);
    }

    SelfCorrectResult result;
    result.pool = representatives;
    std::vector<VaeModel> generators;  // trained lazily before iteration 2

    LabelVector previous;
    bool have_previous = false;
    const auto counts = per_class_counts(expert_count, k);

    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        if (iteration > 1) {
            if (generators.empty()) {
                generators.resize(static_cast<std::size_t>(k));
                parallel_for(static_cast<std::size_t>(k), [&](std::size_t c) {
                    generators[c] = train_vae(representatives, static_cast<int>(c), config.vae,
                                              derive_seed(config.seed, "vae-train", c));
                });
            }
            for (int c = 0; c < k; ++c) {
                if (counts[static_cast<std::size_t>(c)] == 0) {
                    continue;
                }
                const auto samples = sample_vae(
                    generators[static_cast<std::size_t>(c)], expert_by_class[static_cast<std::size_t>(c)],
                    counts[static_cast<std::size_t>(c)],
                    derive_seed(config.seed, "vae-sample",
                                static_cast<std::uint64_t>(iteration) * static_cast<std::uint64_t>(k) +
                                    static_cast<std::uint64_t>(c)));
                for (const auto& series : samples) {
                    result.pool.instances.push_back(series);
                    result.pool.labels.push_back(c);
                    result.pool.origins.push_back(Origin::Synthetic);
                }
            }
        }

        auto [labels, trace] = cluster_class_associate(unlabeled, result.pool, model, config.cca);
        labels.iteration = iteration;

        const Reward reward = label_discriminator(labels, have_previous ? &previous : nullptr, config.tau);
        const double mismatch = have_previous ? label_mismatch(labels.labels, previous.labels) : 1.0;

        result.log.push_back({iteration, result.pool.size(), mismatch, reward.value,
                              trace.clustering.hubert, trace.clustering.measure.kind});
        result.labels = labels;
        result.last_trace = std::move(trace);
        previous = std::move(labels);
        have_previous = true;

        if (reward.value == 0) {
            break;
        }
    }
    return result;
}

SelfCorrectResult self_correct(const TimeSeriesDataset& unlabeled, const RepresentativeSet& representatives,
                               const AecsModel& model, double tau, int max_iterations) {
    SelfCorrectConfig config;
    config.tau = tau;
    config.max_iterations = max_iterations;
    return self_correct(unlabeled, representatives, model, config);
}

}  // namespace autolabel
