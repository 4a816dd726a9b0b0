#pragma once

#include "autolabel/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace autolabel {

enum class DistanceKind { Chebyshev, Manhattan, Mahalanobis };

const char* to_string(DistanceKind kind);
DistanceKind distance_kind_from_string(const std::string& name);

struct DistanceMeasure {
    DistanceKind kind = DistanceKind::Chebyshev;
    /// Symmetric positive-definite inverse covariance, Mahalanobis only.
    Matrix inverse_covariance;

    static DistanceMeasure chebyshev() { return {DistanceKind::Chebyshev, {}}; }
    static DistanceMeasure manhattan() { return {DistanceKind::Manhattan, {}}; }
    static DistanceMeasure mahalanobis(Matrix inverse_covariance) {
        return {DistanceKind::Mahalanobis, std::move(inverse_covariance)};
    }
};

/// Mahalanobis measure whose covariance is estimated from the rows of X
/// (sample covariance) with ridge regularization
/// sigma + lambda*I, lambda = 1e-6 * trace(sigma)/p. Throws NumericError when
/// the regularized matrix is still not positive definite.
DistanceMeasure mahalanobis_from_rows(const Matrix& X);

double distance(const DistanceMeasure& measure, const Vector& a, const Vector& b);

enum class Linkage { Single, Complete, Average };

const char* to_string(Linkage linkage);
Linkage linkage_from_string(const std::string& name);

/// One agglomeration step; cluster ids above n-1 refer to merged clusters in
/// creation order.
struct MergeStep {
    int step = 0;
    int left = 0;
    int right = 0;
    double height = 0.0;
};

struct ClusteringResult {
    std::vector<int> assignments;  // n entries in {0..k-1}
    Matrix centroids;              // k x p, arithmetic means of member rows
    DistanceMeasure measure;
    /// Modified Hubert score; 0 until scored (best_clustering fills it).
    double hubert = 0.0;
    int cluster_count = 0;
    std::vector<MergeStep> merges;
};

/// Agglomerative clustering of the rows of X cut at k clusters. Ties in the
/// merge scan break lexicographically on (min id, max id), so results are
/// platform independent. Final clusters are numbered by smallest member row.
ClusteringResult hierarchical_cluster(const Matrix& X, int k, const DistanceMeasure& measure,
                                      Linkage linkage = Linkage::Average);

/// Modified Hubert statistic: mean over unordered row pairs of
/// d(X_i,X_j) * d(c(i),c(j)) where both factors are Mahalanobis distances and
/// c(i) is the centroid of row i's cluster. The inverse covariance is
/// estimated from X unless one is supplied.
double modified_hubert(const Matrix& X, const ClusteringResult& result,
                       const Matrix* mahalanobis_inverse = nullptr);

/// Highest Hubert score wins; exact ties resolve Chebyshev > Manhattan >
/// Mahalanobis.
DistanceKind select_best(const std::array<double, 3>& scores);

struct ScoredClusterings {
    ClusteringResult best;
    /// Scores indexed Chebyshev, Manhattan, Mahalanobis.
    std::array<double, 3> scores{};
};

ScoredClusterings best_clustering_scored(const Matrix& X, int k, Linkage linkage = Linkage::Average);
ClusteringResult best_clustering(const Matrix& X, int k, Linkage linkage = Linkage::Average);

/// Dendrogram dump: JSON array of {step, left, right, height}.
std::string dendrogram_json(const ClusteringResult& result);

}  // namespace autolabel
