#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace hsilp {

struct ClusterConfig {
    int c = 0;                // target cluster count, c < m
    double beta = 30.0;       // rank-penalty weight, > 0
    int h = 0;                // nonzeros per row of A, 1 <= h < m
    int max_iter = 50;        // outer iteration cap t2
    bool beta_adapt = true;
    std::uint64_t seed = 0;   // split-repair 2-means seed
    double zero_eig_rel_tol = 1e-8;  // relative to the largest eigenvalue

    void validate(Eigen::Index m) const;
};

/// Row-stochastic sparse similarity A with at most h nonzeros per row, plus
/// its Laplacian L_A = D_A - (A^T + A)/2.
struct ClusterGraph {
    Eigen::MatrixXd A;
    Eigen::MatrixXd laplacian() const;
};

/// m x c orthonormal spectral embedding.
struct SpectralEmbedding {
    Eigen::MatrixXd F;            // orthonormal columns
    Eigen::VectorXd eigenvalues;  // the c smallest, ascending
};

/// Columns are the eigenvectors of L_W = D_W - W for the c smallest
/// eigenvalues, with the PCA sign convention.
SpectralEmbedding init_embedding(const Eigen::MatrixXd& W_ll, int c);

/// Closed-form row update: e_ij = beta ||f_i - f_j||^2 - 2 w_ij,
/// rows land on the probability simplex with exactly h nonzeros. Degenerate
/// ties (denominator <= 1e-12) fall back to uniform 1/h over the h smallest.
struct UpdateAResult {
    ClusterGraph graph;
    std::vector<Eigen::Index> degenerate_rows;
};
UpdateAResult update_A(const Eigen::MatrixXd& W_ll, const SpectralEmbedding& embedding,
                       double beta, int h);

/// Eigenvectors of L_A for the c smallest eigenvalues.
SpectralEmbedding update_F(const ClusterGraph& graph, int c);

/// Full e_ij = beta ||f_i - f_j||^2 - 2 w_ij cost matrix (diagonal included).
Eigen::MatrixXd pair_costs(const Eigen::MatrixXd& W_ll, const SpectralEmbedding& embedding,
                           double beta);

/// Per-row regularizer weights implied by the exactly-h-sparse closed form:
/// 2 (gamma_i + 1) = h e_{i,(h+1)} - sum_{n<=h} e_{i,(n)} over ascending costs.
Eigen::VectorXd implicit_gammas(const Eigen::MatrixXd& costs, int h);

/// ||A - W||_F^2 + sum_i gamma_i ||A_i||^2 + 2 beta Tr(F^T L_A F).
double clustering_objective(const Eigen::MatrixXd& W_ll, const ClusterGraph& graph,
                            const SpectralEmbedding& embedding, double beta,
                            const Eigen::VectorXd& gammas);

struct ClusteringResult {
    std::vector<int> labels;          // cluster id per anchor, 0-based
    ClusterGraph graph;
    bool converged = false;           // zero-eigenvalue count reached c
    bool repaired = false;            // split/merge applied to reach exactly c
    int iterations = 0;
    double final_beta = 0.0;
    std::vector<double> objective_trace;    // full objective per outer iteration
    std::vector<std::string> warnings;
};

/// Alternates update_A / update_F until the count of near-zero eigenvalues of
/// L_A equals c or t2 is reached; labels are the connected components of A's
/// symmetrized support. Adaptive beta halves on too many components and
/// doubles on too few. Component repair (split largest via seeded 2-means /
/// merge nearest centroids) guarantees exactly c labels.
ClusteringResult run_clustering(const Eigen::MatrixXd& W_ll, const Eigen::MatrixXd& anchor_features,
                                const ClusterConfig& config);

/// One-hot U from cluster ids; requires every cluster 0..c-1 non-empty.
Eigen::MatrixXd pseudo_label_anchors(const std::vector<int>& cluster_ids, int c);

/// Connected components of the symmetrized support of A (entries > 0 off the
/// diagonal), via union-find. Returns 0-based component id per node.
std::vector<int> support_components(const Eigen::MatrixXd& A);

/// Number of eigenvalues below rel_tol * lambda_max (ascending input).
int count_zero_eigenvalues(const Eigen::VectorXd& eigenvalues_ascending, double rel_tol);

}  // namespace hsilp
