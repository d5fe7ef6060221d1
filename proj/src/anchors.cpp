#include "hsilp/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hsilp/errors.hpp"
#include "hsilp/parallel.hpp"

namespace hsilp {

namespace {

Eigen::VectorXd squared_norms(const Eigen::MatrixXd& rows) {
    return rows.rowwise().squaredNorm();
}

/// ||x_i - y_j||^2 for every pair, via the expanded product.
Eigen::MatrixXd pairwise_sq_dist(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    Eigen::MatrixXd d = -2.0 * (x * y.transpose());
    d.colwise() += squared_norms(x);
    d.rowwise() += squared_norms(y).transpose();
    return d.cwiseMax(0.0);  // rounding can push tiny distances below zero
}

}  // namespace

AnchorLabels AnchorLabels::one_hot(const std::vector<int>& class_ids, int num_classes) {
    if (num_classes < 1) throw Error(ErrorCode::invalid_argument, "need at least one class");
    AnchorLabels out;
    out.U = Eigen::MatrixXd::Zero(Eigen::Index(class_ids.size()), num_classes);
    for (std::size_t i = 0; i < class_ids.size(); ++i) {
        if (class_ids[i] < 0 || class_ids[i] >= num_classes)
            throw Error(ErrorCode::invalid_argument,
                        "class id " + std::to_string(class_ids[i]) + " outside [0, c)");
        out.U(Eigen::Index(i), class_ids[i]) = 1.0;
    }
    return out;
}

AnchorSet kmeans(const Eigen::MatrixXd& spectra, Eigen::Index m, const KmeansOptions& opts) {
    const Eigen::Index n = spectra.rows();
    if (m < 1 || m > n)
        throw Error(ErrorCode::invalid_argument, "anchor count must lie in [1, n]");

    std::mt19937_64 rng(opts.seed);
    Eigen::MatrixXd centroids(m, spectra.cols());

    // k-means++ seeding: first centroid uniform, the rest D^2-weighted.
    {
        std::uniform_int_distribution<Eigen::Index> uniform(0, n - 1);
        centroids.row(0) = spectra.row(uniform(rng));
        Eigen::VectorXd d2 =
            (spectra.rowwise() - centroids.row(0)).rowwise().squaredNorm();
        for (Eigen::Index j = 1; j < m; ++j) {
            const double total = d2.sum();
            Eigen::Index pick = 0;
            if (total > 0.0) {
                std::uniform_real_distribution<double> unit(0.0, total);
                double target = unit(rng);
                for (Eigen::Index i = 0; i < n; ++i) {
                    target -= d2(i);
                    if (target <= 0.0) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = uniform(rng);  // all points coincide with chosen centroids
            }
            centroids.row(j) = spectra.row(pick);
            d2 = d2.cwiseMin(
                (spectra.rowwise() - centroids.row(j)).rowwise().squaredNorm());
        }
    }

    std::vector<Eigen::Index> assign(std::size_t(n), 0);
    for (int iter = 0; iter < std::max(1, opts.max_iter); ++iter) {
        Eigen::MatrixXd dist = pairwise_sq_dist(spectra, centroids);
        bool changed = iter == 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            dist.row(i).minCoeff(&best);
            if (assign[std::size_t(i)] != best) {
                assign[std::size_t(i)] = best;
                changed = true;
            }
        }
        if (!changed) break;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, spectra.cols());
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(assign[std::size_t(i)]) += spectra.row(i);
            counts(assign[std::size_t(i)]) += 1.0;
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            if (counts(j) > 0.0) {
                centroids.row(j) = sums.row(j) / counts(j);
            } else {
                // Re-seed an empty cluster from the worst-fit point.
                Eigen::Index farthest = 0;
                double worst = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double d =
                        (spectra.row(i) - centroids.row(assign[std::size_t(i)])).squaredNorm();
                    if (d > worst) {
                        worst = d;
                        farthest = i;
                    }
                }
                centroids.row(j) = spectra.row(farthest);
                assign[std::size_t(farthest)] = j;
            }
        }
    }

    // Snap each centroid to its nearest dataset row; rows are used at most once
    // so the anchors stay distinct.
    AnchorSet out;
    out.features.resize(m, spectra.cols());
    out.source_rows.resize(std::size_t(m));
    std::vector<bool> used(std::size_t(n), false);
    Eigen::MatrixXd snap = pairwise_sq_dist(centroids, spectra);
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::Index best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (used[std::size_t(i)]) continue;
            if (snap(j, i) < best_d) {
                best_d = snap(j, i);
                best = i;
            }
        }
        used[std::size_t(best)] = true;
        out.source_rows[std::size_t(j)] = best;
        out.features.row(j) = spectra.row(best);
    }
    return out;
}

AnchorGraph build_anchor_graph(const Eigen::MatrixXd& spectra, const Eigen::MatrixXd& anchors,
                               double sigma2, int workers) {
    if (sigma2 <= 0.0) throw Error(ErrorCode::invalid_argument, "sigma^2 must be positive");
    if (spectra.cols() != anchors.cols())
        throw Error(ErrorCode::dimension_mismatch, "pixel/anchor feature dimensions differ");
    const Eigen::Index n = spectra.rows();
    const Eigen::Index m = anchors.rows();

    AnchorGraph graph;
    graph.sigma2 = sigma2;
    graph.Z.resize(n, m);

    const Eigen::VectorXd anchor_sq = squared_norms(anchors);
    std::vector<std::vector<Eigen::Index>> underflow_per_worker(
        std::size_t(std::max(1, workers)));
    parallel_for(std::size_t(n), workers, [&](std::size_t begin, std::size_t end) {
        // Chunk id recovers a private underflow list without locking.
        const std::size_t chunk =
            (std::size_t(n) + std::max(1, workers) - 1) / std::max(1, workers);
        auto& underflow = underflow_per_worker[begin / std::max<std::size_t>(1, chunk)];
        for (std::size_t i = begin; i < end; ++i) {
            const Eigen::Index row = Eigen::Index(i);
            Eigen::VectorXd d2 = anchor_sq - 2.0 * (anchors * spectra.row(row).transpose());
            d2.array() += spectra.row(row).squaredNorm();
            d2 = d2.cwiseMax(0.0);
            // Even the nearest anchor's kernel underflows past exp(-708);
            // Eigen's vectorized exp clamps there instead of flushing to zero,
            // so gate on the exponent itself.
            if (d2.minCoeff() / (2.0 * sigma2) > 708.0) {
                graph.Z.row(row).setConstant(1.0 / double(m));
                underflow.push_back(row);
                continue;
            }
            Eigen::VectorXd z = (-d2 / (2.0 * sigma2)).array().exp();
            graph.Z.row(row) = z.transpose() / z.sum();
        }
    });
    for (auto& list : underflow_per_worker)
        graph.underflow_rows.insert(graph.underflow_rows.end(), list.begin(), list.end());
    std::sort(graph.underflow_rows.begin(), graph.underflow_rows.end());
    graph.row_normalized = true;
    return graph;
}

Eigen::MatrixXd initial_labels(const AnchorGraph& graph, const AnchorLabels& labels) {
    if (graph.Z.cols() != labels.U.rows())
        throw Error(ErrorCode::dimension_mismatch, "anchor graph and label counts differ");
    return graph.Z * labels.U;
}

FactoredAffinity anchor_affinity(const AnchorGraph& graph) {
    if (!graph.row_normalized)
        throw Error(ErrorCode::invalid_argument,
                    "anchor affinity requires a row-normalized anchor graph");
    FactoredAffinity out;
    out.Z = &graph.Z;
    out.delta = graph.Z.colwise().sum();
    out.inv_delta.resize(out.delta.size());
    for (Eigen::Index j = 0; j < out.delta.size(); ++j) {
        if (out.delta(j) > 0.0) {
            out.inv_delta(j) = 1.0 / out.delta(j);
        } else {
            out.inv_delta(j) = 0.0;
            out.dropped_anchors.push_back(j);
        }
    }
    return out;
}

Eigen::VectorXd FactoredAffinity::row(Eigen::Index i) const {
    return row_block(i, i + 1).row(0);
}

Eigen::MatrixXd FactoredAffinity::row_block(Eigen::Index begin, Eigen::Index end) const {
    // (Z_rows * Delta^{-1}) * Z^T as one GEMM per block.
    Eigen::MatrixXd scaled =
        Z->middleRows(begin, end - begin) * inv_delta.asDiagonal();
    return scaled * Z->transpose();
}

Eigen::VectorXd FactoredAffinity::apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd t = Z->transpose() * v;
    t.array() *= inv_delta.array();
    return *Z * t;
}

Eigen::MatrixXd FactoredAffinity::dense() const {
    return row_block(0, Z->rows());
}

}  // namespace hsilp
