#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "hsilp/anchors.hpp"

namespace hsilp {

/// CSR-style sparse non-negative affinity with per-row neighbor ids sorted in
/// strictly increasing order.
struct SparseAffinity {
    Eigen::Index order = 0;
    std::vector<std::size_t> row_offsets;   // order + 1
    std::vector<Eigen::Index> neighbor;     // column ids
    std::vector<double> weight;

    std::size_t nnz() const { return neighbor.size(); }
    std::size_t row_size(Eigen::Index i) const { return row_offsets[i + 1] - row_offsets[i]; }
    double at(Eigen::Index i, Eigen::Index j) const;  // 0 when edge absent

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& v, int workers = 1) const;
    Eigen::VectorXd row_sums() const;
    Eigen::MatrixXd dense() const;  // tests and debugging only
};

/// Directed top-k edge set per pixel row (self excluded), ties broken toward
/// the smaller column index.
struct EdgeSet {
    Eigen::Index order = 0;
    Eigen::Index k = 0;
    std::vector<Eigen::Index> neighbor;  // row i's targets at [i*k, (i+1)*k), ascending ids

    Eigen::Index target(Eigen::Index i, Eigen::Index slot) const { return neighbor[i * k + slot]; }
};

/// The four blocks of the full (m+n) affinity, anchors first. W_lu is Z^T and
/// W_ul is Z, stored once as Z.
struct AffinityBlocks {
    Eigen::MatrixXd W_ll;   // m x m, symmetric, unit diagonal
    Eigen::MatrixXd Z;      // n x m
    SparseAffinity W_uu;    // n x n, symmetric, zero diagonal

    Eigen::Index anchor_count() const { return W_ll.rows(); }
    Eigen::Index pixel_count() const { return Z.rows(); }
    Eigen::Index order() const { return anchor_count() + pixel_count(); }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd dense() const;  // tests and debugging only
};

/// S = D^{-1/2} W D^{-1/2} in factored form: the blocks plus the degree vector.
struct NormalizedGraph {
    AffinityBlocks blocks;
    Eigen::VectorXd degree;        // m+n row sums of W (after isolated-node repair)
    Eigen::VectorXd inv_sqrt_deg;
    std::vector<Eigen::Index> isolated_nodes;  // received a unit self-loop

    Eigen::Index order() const { return blocks.order(); }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& v, int workers = 1) const;
    Eigen::MatrixXd dense() const;  // tests and debugging only
};

/// For each pixel row of W^a, keeps the k largest off-diagonal entries,
/// computed from the factored form in row blocks. Requires 1 <= k < n.
EdgeSet topk_prune(const FactoredAffinity& affinity, Eigen::Index k, int workers = 1);

/// Recomputed Gaussian-kernel weights w^k_ij = exp(-||x_i - x_j||^2 / (2 sigma^2))
/// on the retained edges (the printed form of the kernel drops the minus sign;
/// the exponent here is negative).
SparseAffinity recompute_similarity(const Eigen::MatrixXd& spectra, const EdgeSet& edges,
                                    double sigma2, int workers = 1);

/// Entrywise product of W^a and W^k on the edge set, then symmetrized as
/// max(w_ij, w_ji) over the union of directed edges. Diagonal forced to zero.
SparseAffinity combine(const FactoredAffinity& affinity, const SparseAffinity& recomputed,
                       const EdgeSet& edges, int workers = 1);

/// Fully connected Gaussian-kernel graph over the anchors (unit self-kernel
/// diagonal), same sigma^2 as the pixel graph.
Eigen::MatrixXd anchor_block(const Eigen::MatrixXd& anchors, double sigma2);

AffinityBlocks assemble(Eigen::MatrixXd W_ll, Eigen::MatrixXd Z, SparseAffinity W_uu);

/// Symmetric normalization of the assembled blocks. Nodes with zero row sum
/// get a self-loop of weight 1 before normalization and are reported.
NormalizedGraph symmetric_normalize(AffinityBlocks blocks);

/// Text edge list "i j weight" of the assembled blocks, for debugging.
void dump_edge_list(const AffinityBlocks& blocks, const std::string& path);

}  // namespace hsilp
