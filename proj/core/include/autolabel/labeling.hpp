#pragma once

#include "autolabel/aecs.hpp"
#include "autolabel/clustering.hpp"
#include "autolabel/dataset.hpp"
#include "autolabel/vae.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace autolabel {

/// Generated labels for the unlabeled collection, one per instance, versioned
/// by self-correction iteration.
struct LabelVector {
    std::vector<int> labels;
    int iteration = 1;

    int size() const { return static_cast<int>(labels.size()); }
};

struct AssociationTrace {
    /// Centroid-to-representative distances under the best measure (k x m).
    Matrix dist;
    /// Nearest cluster per representative (argmin over each dist column).
    std::vector<int> rep_cluster;
    /// Class assigned to each cluster (mode of the nearby representatives).
    std::vector<int> class_of_cluster;
    /// Representative label multiset gathered per cluster.
    std::vector<std::vector<int>> labels_near_cluster;
    /// Clusters that attracted no representative and fell back to the single
    /// nearest one.
    std::vector<std::uint8_t> fallback_used;
    ClusteringResult clustering;
    /// Hubert scores indexed Chebyshev, Manhattan, Mahalanobis.
    std::array<double, 3> hubert_scores{};
};

/// Deterministic multiset mode; ties break toward the smallest class id.
int mode_smallest(const std::vector<int>& values, int class_count);

/// Core of the cluster-class association given precomputed embeddings and a
/// clustering: builds the distance matrix, maps each representative to its
/// nearest cluster, assigns every cluster the modal class of its
/// representatives, and labels all clustered rows. Fills everything in
/// `trace` except the clustering itself.
std::vector<int> associate_clusters(const ClusteringResult& clustering, const Matrix& rep_embeddings,
                                    const std::vector<int>& rep_labels, AssociationTrace& trace);

struct CcaOptions {
    /// Merge the expert representatives into the clustered set (synthetic
    /// representatives never join it).
    bool merge_representatives = true;
    Linkage linkage = Linkage::Average;
};

/// Full cluster-class association: encodes representatives and the (merged)
/// collection, clusters at k = representative class count under the best
/// measure, and labels every unlabeled instance.
std::pair<LabelVector, AssociationTrace> cluster_class_associate(const TimeSeriesDataset& unlabeled,
                                                                 const RepresentativeSet& representatives,
                                                                 const AecsModel& model,
                                                                 const CcaOptions& options = {});

struct Reward {
    int value = 1;  // 0 = saturated, 1 = keep correcting
};

/// Fraction of positions where the label vectors differ.
double label_mismatch(const std::vector<int>& a, const std::vector<int>& b);

/// Reward 0 when the mismatch against the previous iteration is <= tau
/// (boundary inclusive); a missing previous iteration counts as mismatch 1.
Reward label_discriminator(const LabelVector& current, const LabelVector* previous, double tau);

struct IterationRecord {
    int iteration = 0;
    int pool_size = 0;
    double mismatch = 1.0;
    int reward = 1;
    double hubert = 0.0;
    DistanceKind measure = DistanceKind::Chebyshev;
};

std::string iteration_log_json(const std::vector<IterationRecord>& log);

struct SelfCorrectConfig {
    double tau = 0.05;
    int max_iterations = 10;
    VaeConfig vae;
    CcaOptions cca;
    std::uint64_t seed = 42;
};

struct SelfCorrectResult {
    LabelVector labels;
    std::vector<IterationRecord> log;
    /// Expert representatives plus every synthetic instance generated.
    RepresentativeSet pool;
    AssociationTrace last_trace;
};

/// Iterative label refinement: iteration 1 associates with the expert
/// representatives alone; each later iteration grows the pool by one expert
/// count of synthetic instances (spread over the classes), re-associates, and
/// stops once the discriminator reports saturation or the iteration cap is
/// reached.
SelfCorrectResult self_correct(const TimeSeriesDataset& unlabeled, const RepresentativeSet& representatives,
                               const AecsModel& model, const SelfCorrectConfig& config);

SelfCorrectResult self_correct(const TimeSeriesDataset& unlabeled, const RepresentativeSet& representatives,
                               const AecsModel& model, double tau, int max_iterations);

}  // namespace autolabel
