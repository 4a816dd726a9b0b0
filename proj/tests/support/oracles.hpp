#pragma once

#include "autolabel/types.hpp"

#include <functional>
#include <vector>

// Straight-line reference implementations, deliberately independent of the
// library code paths they check: plain nested vectors, Gauss-Jordan
// inversion, explicit double loops.
namespace autolabel::testsupport {

using Grid = std::vector<std::vector<double>>;

Grid to_grid(const Matrix& m);

/// Gauss-Jordan with partial pivoting.
Grid oracle_invert(Grid m);

/// Sample covariance of the rows with ridge 1e-6 * trace / p.
Grid oracle_regularized_covariance(const Grid& rows);

double oracle_mahalanobis(const std::vector<double>& a, const std::vector<double>& b, const Grid& inverse);
double oracle_chebyshev(const std::vector<double>& a, const std::vector<double>& b);
double oracle_manhattan(const std::vector<double>& a, const std::vector<double>& b);

/// Modified Hubert statistic via the full ordered double sum over i != j,
/// recomputing centroids and the metric from scratch.
double oracle_hubert(const Grid& rows, const std::vector<int>& assignments, int cluster_count);

/// Cluster-class association given an existing clustering: distance matrix,
/// per-representative argmin, per-cluster mode (smallest id on ties), and the
/// nearest-representative fallback for clusters nobody mapped to.
/// measure_kind: 0 = Chebyshev, 1 = Manhattan, 2 = Mahalanobis (uses inverse).
std::vector<int> oracle_cluster_class_association(const Grid& centroids, const std::vector<int>& assignments,
                                                  const Grid& rep_embeddings,
                                                  const std::vector<int>& rep_labels, int cluster_count,
                                                  int measure_kind, const Grid& inverse);

/// Exhaustive nearest-neighbor scan (k = 1).
std::vector<int> oracle_nearest_neighbor(const Grid& train_rows, const std::vector<int>& train_labels,
                                         const Grid& test_rows);

struct GradientCheckResult {
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
    std::ptrdiff_t worst_index = -1;
    bool passed = true;
};

/// Central finite differences of `loss` against `analytic`, coordinate by
/// coordinate over the given parameter storage. `stride` > 1 samples every
/// stride-th coordinate. Tolerance: |fd - g| <= max(1e-4, 1e-2 * |g|).
GradientCheckResult check_gradients(const std::function<double()>& loss,
                                    const std::vector<double*>& coords, const std::vector<double>& analytic,
                                    double epsilon = 1e-5, std::ptrdiff_t stride = 1);

}  // namespace autolabel::testsupport
