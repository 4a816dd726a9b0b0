#include "autolabel/clustering.hpp"

#include "autolabel/io.hpp"
#include "autolabel/parallel.hpp"

#include <Eigen/Cholesky>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace autolabel {

const char* to_string(DistanceKind kind) {
    switch (kind) {
        case DistanceKind::Chebyshev:
            return "chebyshev";
        case DistanceKind::Manhattan:
            return "manhattan";
        case DistanceKind::Mahalanobis:
            return "mahalanobis";
    }
    return "unknown";
}

DistanceKind distance_kind_from_string(const std::string& name) {
    if (name == "chebyshev") {
        return DistanceKind::Chebyshev;
    }
    if (name == "manhattan") {
        return DistanceKind::Manhattan;
    }
    if (name == "mahalanobis") {
        return DistanceKind::Mahalanobis;
    }
    throw ConfigError("unknown distance measure: " + name);
}

const char* to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::Single:
            return "single";
        case Linkage::Complete:
            return "complete";
        case Linkage::Average:
            return "average";
    }
    return "unknown";
}

Linkage linkage_from_string(const std::string& name) {
    if (name == "single") {
        return Linkage::Single;
    }
    if (name == "complete") {
        return Linkage::Complete;
    }
    if (name == "average") {
        return Linkage::Average;
    }
    throw ConfigError("unknown linkage: " + name);
}

DistanceMeasure mahalanobis_from_rows(const Matrix& X) {
    const auto n = X.rows();
    const auto p = X.cols();
    if (n < 2) {
        throw ContractError("mahalanobis_from_rows: need at least 2 rows");
    }
    const Vector mean = X.colwise().mean();
    const Matrix centered = X.rowwise() - mean.transpose();
    Matrix covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
    const double ridge = 1e-6 * covariance.trace() / static_cast<double>(p);
    covariance += ridge * Matrix::Identity(p, p);

    Eigen::LLT<Matrix> llt(covariance);
    if (llt.info() != Eigen::Success) {
        throw NumericError("covariance matrix is not positive definite");
    }
    Matrix inverse = llt.solve(Matrix::Identity(p, p));
    inverse = ((inverse + inverse.transpose()) * 0.5).eval();
    return DistanceMeasure::mahalanobis(std::move(inverse));
}

double distance(const DistanceMeasure& measure, const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw ShapeError("distance: vector lengths differ");
    }
    switch (measure.kind) {
        case DistanceKind::Chebyshev:
            return (a - b).cwiseAbs().maxCoeff();
        case DistanceKind::Manhattan:
            return (a - b).cwiseAbs().sum();
        case DistanceKind::Mahalanobis: {
            if (measure.inverse_covariance.rows() != a.size() ||
                measure.inverse_covariance.cols() != a.size()) {
                throw ContractError("distance: Mahalanobis measure has no matching inverse covariance");
            }
            const Vector diff = a - b;
            const double squared = diff.dot(measure.inverse_covariance * diff);
            return std::sqrt(std::max(0.0, squared));
        }
    }
    return 0.0;
}

namespace {

double lance_williams(Linkage linkage, double d_left, double d_right, int size_left, int size_right) {
    switch (linkage) {
        case Linkage::Single:
            return std::min(d_left, d_right);
        case Linkage::Complete:
            return std::max(d_left, d_right);
        case Linkage::Average:
            return (size_left * d_left + size_right * d_right) / static_cast<double>(size_left + size_right);
    }
    return 0.0;
}

}  // namespace

ClusteringResult hierarchical_cluster(const Matrix& X, int k, const DistanceMeasure& measure,
                                      Linkage linkage) {
    const int n = static_cast<int>(X.rows());
    if (k > n) {
        throw ConfigError("cluster count " + std::to_string(k) + " exceeds instance count " +
                          std::to_string(n));
    }
    if (k < 2) {
        throw ConfigError("cluster count must be at least 2");
    }

    // Pairwise distances, indexed by cluster id; merged clusters take fresh
    // ids n, n+1, ... so the matrix is sized for every id that can exist.
    const int capacity = 2 * n - k;
    Matrix dist = Matrix::Zero(capacity, capacity);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = distance(measure, X.row(i), X.row(j));
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }

    std::vector<int> active(static_cast<std::size_t>(n));
    std::iota(active.begin(), active.end(), 0);
    std::vector<std::vector<int>> members(static_cast<std::size_t>(capacity));
    std::vector<int> sizes(static_cast<std::size_t>(capacity), 0);
    for (int i = 0; i < n; ++i) {
        members[static_cast<std::size_t>(i)] = {i};
        sizes[static_cast<std::size_t>(i)] = 1;
    }

    ClusteringResult result;
    result.measure = measure;
    result.cluster_count = k;

    int next_id = n;
    int step = 0;
    while (static_cast<int>(active.size()) > k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_a = 0;
        std::size_t best_b = 1;
        for (std::size_t a = 0; a + 1 < active.size(); ++a) {
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double d = dist(active[a], active[b]);
                if (d < best) {
                    best = d;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        const int left = active[best_a];
        const int right = active[best_b];
        const int merged = next_id++;
        result.merges.push_back({step++, left, right, best});

        members[static_cast<std::size_t>(merged)] = members[static_cast<std::size_t>(left)];
        members[static_cast<std::size_t>(merged)].insert(members[static_cast<std::size_t>(merged)].end(),
                                                         members[static_cast<std::size_t>(right)].begin(),
                                                         members[static_cast<std::size_t>(right)].end());
        sizes[static_cast<std::size_t>(merged)] =
            sizes[static_cast<std::size_t>(left)] + sizes[static_cast<std::size_t>(right)];

        for (const int other : active) {
            if (other == left || other == right) {
                continue;
            }
            const double d = lance_williams(linkage, dist(left, other), dist(right, other),
                                            sizes[static_cast<std::size_t>(left)],
                                            sizes[static_cast<std::size_t>(right)]);
            dist(merged, other) = d;
            dist(other, merged) = d;
        }

        // erase the higher position first so indices stay valid
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_a));
        active.push_back(merged);
    }

    // Number the final clusters by their smallest member row.
    std::vector<std::pair<int, int>> order;  // (smallest member, cluster id)
    order.reserve(active.size());
    for (const int id : active) {
        order.emplace_back(*std::min_element(members[static_cast<std::size_t>(id)].begin(),
                                             members[static_cast<std::size_t>(id)].end()),
                           id);
    }
    std::sort(order.begin(), order.end());

    result.assignments.assign(static_cast<std::size_t>(n), -1);
    result.centroids = Matrix::Zero(k, X.cols());
    for (int cluster = 0; cluster < k; ++cluster) {
        const auto& member_rows = members[static_cast<std::size_t>(order[static_cast<std::size_t>(cluster)].second)];
        Vector centroid = Vector::Zero(X.cols());
        for (const int row : member_rows) {
            result.assignments[static_cast<std::size_t>(row)] = cluster;
            centroid += X.row(row).transpose();
        }
        result.centroids.row(cluster) = (centroid / static_cast<double>(member_rows.size())).transpose();
    }
    return result;
}

double modified_hubert(const Matrix& X, const ClusteringResult& result, const Matrix* mahalanobis_inverse) {
    const int n = static_cast<int>(X.rows());
    if (n < 2) {
        throw ContractError("modified_hubert: undefined for fewer than 2 instances");
    }
    if (static_cast<int>(result.assignments.size()) != n) {
        throw ContractError("modified_hubert: assignments do not cover the matrix");
    }

    Matrix inverse;
    if (mahalanobis_inverse != nullptr) {
        inverse = *mahalanobis_inverse;
    } else {
        inverse = mahalanobis_from_rows(X).inverse_covariance;
    }

    // Factor the metric so pair distances become plain Euclidean distances of
    // transformed rows: inv = L L^T  =>  d(x,y) = |L^T (x-y)|.
    Eigen::LLT<Matrix> llt(inverse);
    if (llt.info() != Eigen::Success) {
        throw NumericError("modified_hubert: inverse covariance is not positive definite");
    }
    const Matrix transform = llt.matrixL().transpose();
    const Matrix rows = X * transform.transpose();            // n x p
    const Matrix centers = result.centroids * transform.transpose();  // k x p

    const int k = result.cluster_count;
    Matrix center_dist = Matrix::Zero(k, k);
    for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
            const double d = (centers.row(a) - centers.row(b)).norm();
            center_dist(a, b) = d;
            center_dist(b, a) = d;
        }
    }

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const int ci = result.assignments[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) {
            const int cj = result.assignments[static_cast<std::size_t>(j)];
            if (ci == cj) {
                continue;  // center distance factor is zero
            }
            total += (rows.row(i) - rows.row(j)).norm() * center_dist(ci, cj);
        }
    }
    return 2.0 * total / (static_cast<double>(n) * (n - 1));
}

DistanceKind select_best(const std::array<double, 3>& scores) {
    // Scan order implements the Chebyshev > Manhattan > Mahalanobis tie rule.
    int best = 0;
    for (int i = 1; i < 3; ++i) {
        if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return static_cast<DistanceKind>(best);
}

ScoredClusterings best_clustering_scored(const Matrix& X, int k, Linkage linkage) {
    const DistanceMeasure mahalanobis = mahalanobis_from_rows(X);
    const std::array<DistanceMeasure, 3> measures = {DistanceMeasure::chebyshev(),
                                                     DistanceMeasure::manhattan(), mahalanobis};

    std::array<ClusteringResult, 3> results;
    parallel_for(3, [&](std::size_t i) {
        results[i] = hierarchical_cluster(X, k, measures[i], linkage);
        results[i].hubert = modified_hubert(X, results[i], &mahalanobis.inverse_covariance);
    });

    ScoredClusterings scored;
    for (std::size_t i = 0; i < 3; ++i) {
        scored.scores[i] = results[i].hubert;
    }
    scored.best = std::move(results[static_cast<std::size_t>(select_best(scored.scores))]);
    return scored;
}

ClusteringResult best_clustering(const Matrix& X, int k, Linkage linkage) {
    return best_clustering_scored(X, k, linkage).best;
}

std::string dendrogram_json(const ClusteringResult& result) {
    nlohmann::json array = nlohmann::json::array();
    for (const auto& merge : result.merges) {
        array.push_back({{"step", merge.step},
                         {"left", merge.left},
                         {"right", merge.right},
                         {"height", merge.height}});
    }
    return array.dump(2) + "\n";
}

}  // namespace autolabel
