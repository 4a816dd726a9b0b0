#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace autolabel::testsupport {

Grid to_grid(const Matrix& m) {
    Grid grid(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            grid[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
        }
    }
    return grid;
}

Grid oracle_invert(Grid m) {
    const std::size_t n = m.size();
    Grid inverse(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        inverse[i][i] = 1.0;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) {
                pivot = r;
            }
        }
        if (m[pivot][col] == 0.0) {
            throw std::runtime_error("oracle_invert: singular matrix");
        }
        std::swap(m[pivot], m[col]);
        std::swap(inverse[pivot], inverse[col]);
        const double scale = m[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            m[col][c] /= scale;
            inverse[col][c] /= scale;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || m[r][col] == 0.0) {
                continue;
            }
            const double factor = m[r][col];
            for (std::size_t c = 0; c < n; ++c) {
                m[r][c] -= factor * m[col][c];
                inverse[r][c] -= factor * inverse[col][c];
            }
        }
    }
    return inverse;
}

Grid oracle_regularized_covariance(const Grid& rows) {
    const std::size_t n = rows.size();
    const std::size_t p = rows.front().size();
    std::vector<double> mean(p, 0.0);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < p; ++j) {
            mean[j] += row[j];
        }
    }
    for (auto& value : mean) {
        value /= static_cast<double>(n);
    }
    Grid covariance(p, std::vector<double>(p, 0.0));
    for (const auto& row : rows) {
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) {
                covariance[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
            }
        }
    }
    for (auto& row : covariance) {
        for (auto& value : row) {
            value /= static_cast<double>(n - 1);
        }
    }
    double trace = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        trace += covariance[j][j];
    }
    const double ridge = 1e-6 * trace / static_cast<double>(p);
    for (std::size_t j = 0; j < p; ++j) {
        covariance[j][j] += ridge;
    }
    return covariance;
}

double oracle_mahalanobis(const std::vector<double>& a, const std::vector<double>& b, const Grid& inverse) {
    const std::size_t p = a.size();
    std::vector<double> diff(p);
    for (std::size_t j = 0; j < p; ++j) {
        diff[j] = a[j] - b[j];
    }
    double squared = 0.0;
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            squared += diff[r] * inverse[r][c] * diff[c];
        }
    }
    return std::sqrt(std::max(0.0, squared));
}

double oracle_chebyshev(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        worst = std::max(worst, std::abs(a[j] - b[j]));
    }
    return worst;
}

double oracle_manhattan(const std::vector<double>& a, const std::vector<double>& b) {
    double total = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        total += std::abs(a[j] - b[j]);
    }
    return total;
}

double oracle_hubert(const Grid& rows, const std::vector<int>& assignments, int cluster_count) {
    const std::size_t n = rows.size();
    const std::size_t p = rows.front().size();

    Grid centroids(static_cast<std::size_t>(cluster_count), std::vector<double>(p, 0.0));
    std::vector<int> sizes(static_cast<std::size_t>(cluster_count), 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto cluster = static_cast<std::size_t>(assignments[i]);
        ++sizes[cluster];
        for (std::size_t j = 0; j < p; ++j) {
            centroids[cluster][j] += rows[i][j];
        }
    }
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        for (std::size_t j = 0; j < p; ++j) {
            centroids[c][j] /= static_cast<double>(sizes[c]);
        }
    }

    const Grid inverse = oracle_invert(oracle_regularized_covariance(rows));

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            total += oracle_mahalanobis(rows[i], rows[j], inverse) *
                     oracle_mahalanobis(centroids[static_cast<std::size_t>(assignments[i])],
                                        centroids[static_cast<std::size_t>(assignments[j])], inverse);
        }
    }
    return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

namespace {

double oracle_distance(int measure_kind, const std::vector<double>& a, const std::vector<double>& b,
                       const Grid& inverse) {
    switch (measure_kind) {
        case 0:
            return oracle_chebyshev(a, b);
        case 1:
            return oracle_manhattan(a, b);
        default:
            return oracle_mahalanobis(a, b, inverse);
    }
}

}  // namespace

std::vector<int> oracle_cluster_class_association(const Grid& centroids, const std::vector<int>& assignments,
                                                  const Grid& rep_embeddings,
                                                  const std::vector<int>& rep_labels, int cluster_count,
                                                  int measure_kind, const Grid& inverse) {
    const std::size_t m = rep_embeddings.size();
    Grid dist(static_cast<std::size_t>(cluster_count), std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < static_cast<std::size_t>(cluster_count); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            dist[i][j] = oracle_distance(measure_kind, centroids[i], rep_embeddings[j], inverse);
        }
    }

    std::vector<int> rep_cluster(m, 0);
    for (std::size_t j = 0; j < m; ++j) {
        int nearest = 0;
        for (int i = 1; i < cluster_count; ++i) {
            if (dist[static_cast<std::size_t>(i)][j] < dist[static_cast<std::size_t>(nearest)][j]) {
                nearest = i;
            }
        }
        rep_cluster[j] = nearest;
    }

    std::vector<int> class_of_cluster(static_cast<std::size_t>(cluster_count), 0);
    for (int cluster = 0; cluster < cluster_count; ++cluster) {
        std::vector<int> counts(static_cast<std::size_t>(cluster_count), 0);
        int seen = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (rep_cluster[j] == cluster) {
                ++counts[static_cast<std::size_t>(rep_labels[j])];
                ++seen;
            }
        }
        if (seen > 0) {
            int mode = 0;
            for (int c = 1; c < cluster_count; ++c) {
                if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(mode)]) {
                    mode = c;
                }
            }
            class_of_cluster[static_cast<std::size_t>(cluster)] = mode;
        } else {
            std::size_t nearest_rep = 0;
            for (std::size_t j = 1; j < m; ++j) {
                if (dist[static_cast<std::size_t>(cluster)][j] <
                    dist[static_cast<std::size_t>(cluster)][nearest_rep]) {
                    nearest_rep = j;
                }
            }
            class_of_cluster[static_cast<std::size_t>(cluster)] = rep_labels[nearest_rep];
        }
    }

    std::vector<int> labels(assignments.size(), 0);
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        labels[i] = class_of_cluster[static_cast<std::size_t>(assignments[i])];
    }
    return labels;
}

std::vector<int> oracle_nearest_neighbor(const Grid& train_rows, const std::vector<int>& train_labels,
                                         const Grid& test_rows) {
    std::vector<int> predictions(test_rows.size(), 0);
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t winner = 0;
        for (std::size_t j = 0; j < train_rows.size(); ++j) {
            double squared = 0.0;
            for (std::size_t f = 0; f < train_rows[j].size(); ++f) {
                const double diff = train_rows[j][f] - test_rows[i][f];
                squared += diff * diff;
            }
            if (squared < best) {
                best = squared;
                winner = j;
            }
        }
        predictions[i] = train_labels[winner];
    }
    return predictions;
}

GradientCheckResult check_gradients(const std::function<double()>& loss, const std::vector<double*>& coords,
                                    const std::vector<double>& analytic, double epsilon,
                                    std::ptrdiff_t stride) {
    GradientCheckResult result;
    for (std::size_t i = 0; i < coords.size(); i += static_cast<std::size_t>(stride)) {
        double& parameter = *coords[i];
        const double saved = parameter;
        parameter = saved + epsilon;
        const double up = loss();
        parameter = saved - epsilon;
        const double down = loss();
        parameter = saved;
        const double fd = (up - down) / (2.0 * epsilon);
        const double g = analytic[i];
        const double error = std::abs(fd - g);
        const double tolerance = std::max(1e-4, 1e-2 * std::abs(g));
        if (error > result.max_abs_error) {
            result.max_abs_error = error;
            result.worst_index = static_cast<std::ptrdiff_t>(i);
        }
        if (std::abs(g) > 1e-12) {
            result.max_rel_error = std::max(result.max_rel_error, error / std::abs(g));
        }
        if (error > tolerance) {
            result.passed = false;
        }
    }
    return result;
}

}  // namespace autolabel::testsupport
