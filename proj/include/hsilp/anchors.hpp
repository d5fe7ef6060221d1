#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace hsilp {

/// Representative pixels selected by k-means and snapped onto dataset rows.
struct AnchorSet {
    Eigen::MatrixXd features;            // m x d, each row equals some dataset row
    std::vector<Eigen::Index> source_rows;  // distinct rows the anchors were snapped to

    Eigen::Index count() const { return features.rows(); }
};

/// Row-stochastic m x c anchor label matrix (one-hot when labels come from
/// ground truth or clustering).
struct AnchorLabels {
    Eigen::MatrixXd U;

    static AnchorLabels one_hot(const std::vector<int>& class_ids, int num_classes);
};

/// Pixel-to-anchor Gaussian-kernel similarities, row-normalized to sum to 1.
struct AnchorGraph {
    Eigen::MatrixXd Z;  // n x m
    double sigma2 = 0.0;
    bool row_normalized = false;
    std::vector<Eigen::Index> underflow_rows;  // rows whose kernel underflowed to uniform
};

/// W^a = Z * Delta^{-1} * Z^T kept in factored form; Delta holds the column
/// sums of Z. Columns with zero sum (unused anchors) are dropped from the
/// product by zeroing their inverse weight, which leaves row sums at 1.
struct FactoredAffinity {
    const Eigen::MatrixXd* Z = nullptr;
    Eigen::VectorXd delta;          // m column sums
    Eigen::VectorXd inv_delta;      // 0 where delta == 0
    std::vector<Eigen::Index> dropped_anchors;

    Eigen::Index order() const { return Z ? Z->rows() : 0; }

    /// Dense row i of W^a; O(n*m). Blocks of rows are cheaper via row_block.
    Eigen::VectorXd row(Eigen::Index i) const;

    /// Rows [begin, end) of W^a as a dense block.
    Eigen::MatrixXd row_block(Eigen::Index begin, Eigen::Index end) const;

    /// W^a * v without materializing the n x n product.
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

    Eigen::MatrixXd dense() const;  // tests and debugging only
};

struct KmeansOptions {
    int max_iter = 100;  // Lloyd iteration cap t1
    std::uint64_t seed = 0;
};

/// k-means++ seeding + Lloyd's algorithm, then each centroid snapped to its
/// nearest dataset row; duplicate snaps resolve to the next-nearest unused row.
/// Deterministic under (data, m, seed). Empty clusters are re-seeded from the
/// point farthest from its assigned centroid.
AnchorSet kmeans(const Eigen::MatrixXd& spectra, Eigen::Index m, const KmeansOptions& opts);

/// z_ij = exp(-||x_i - a_j||^2 / (2 sigma^2)), then each row normalized to
/// sum 1. Rows whose kernels all underflow to zero become uniform 1/m and are
/// reported in underflow_rows.
AnchorGraph build_anchor_graph(const Eigen::MatrixXd& spectra, const Eigen::MatrixXd& anchors,
                               double sigma2, int workers = 1);

/// First-stage propagation F0 = Z * U.
Eigen::MatrixXd initial_labels(const AnchorGraph& graph, const AnchorLabels& labels);

FactoredAffinity anchor_affinity(const AnchorGraph& graph);

}  // namespace hsilp
