#include "hsilp/clustering.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hsilp/anchors.hpp"
#include "hsilp/errors.hpp"

namespace hsilp {

namespace {

/// Column signs pinned the same way as PCA components: largest-magnitude entry
/// non-negative, earlier entries winning near-ties.
void fix_column_signs(Eigen::MatrixXd& cols) {
    for (Eigen::Index c = 0; c < cols.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < cols.rows(); ++r) {
            const double mag = std::fabs(cols(r, c));
            if (mag > best + 1e-15) {
                best = mag;
                arg = r;
            }
        }
        if (cols(arg, c) < 0.0) cols.col(c) = -cols.col(c);
    }
}

SpectralEmbedding smallest_eigenvectors(const Eigen::MatrixXd& laplacian, int c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::solver_failure, "Laplacian eigendecomposition failed");
    SpectralEmbedding out;
    out.F = eig.eigenvectors().leftCols(c);
    out.eigenvalues = eig.eigenvalues().head(c);
    fix_column_signs(out.F);
    return out;
}

Eigen::MatrixXd laplacian_of(const Eigen::MatrixXd& W) {
    Eigen::MatrixXd sym = 0.5 * (W + W.transpose());
    Eigen::MatrixXd L = -sym;
    L.diagonal() += sym.rowwise().sum();
    return L;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(std::size_t(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[std::size_t(x)] != x) {
            parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
            x = parent[std::size_t(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::size_t(std::max(a, b))] = std::min(a, b);
    }
};

/// Drops support entries below 1e-9 of the row max and renormalizes, so the
/// combinatorial component count and the eigenvalue count see the same graph.
void sanitize_support(Eigen::MatrixXd& A) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double row_max = A.row(i).maxCoeff();
        if (row_max <= 0.0) continue;
        const double cutoff = 1e-9 * row_max;
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            if (A(i, j) < cutoff) A(i, j) = 0.0;
        const double sum = A.row(i).sum();
        if (sum > 0.0) A.row(i) /= sum;
    }
}

std::vector<std::vector<int>> group_members(const std::vector<int>& labels, int groups) {
    std::vector<std::vector<int>> members(static_cast<std::size_t>(groups));
    for (int i = 0; i < int(labels.size()); ++i)
        members[std::size_t(labels[std::size_t(i)])].push_back(i);
    return members;
}

Eigen::RowVectorXd centroid_of(const Eigen::MatrixXd& features, const std::vector<int>& rows) {
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(features.cols());
    for (int r : rows) c += features.row(r);
    return c / double(rows.size());
}

}  // namespace

void ClusterConfig::validate(Eigen::Index m) const {
    if (c < 1 || c >= m)
        throw Error(ErrorCode::invalid_argument, "cluster count must satisfy 1 <= c < m");
    if (h < 1 || h >= m)
        throw Error(ErrorCode::invalid_argument, "row support must satisfy 1 <= h < m");
    if (beta <= 0.0) throw Error(ErrorCode::invalid_argument, "beta must be positive");
    if (max_iter < 1) throw Error(ErrorCode::invalid_argument, "need at least one iteration");
}

Eigen::MatrixXd ClusterGraph::laplacian() const {
    return laplacian_of(A);
}

SpectralEmbedding init_embedding(const Eigen::MatrixXd& W_ll, int c) {
    if (W_ll.rows() != W_ll.cols())
        throw Error(ErrorCode::dimension_mismatch, "anchor graph must be square");
    if (c < 1 || c > W_ll.rows())
        throw Error(ErrorCode::invalid_argument, "embedding width outside [1, m]");
    // L_W uses W directly (symmetric input expected, symmetrized defensively).
    return smallest_eigenvectors(laplacian_of(W_ll), c);
}

SpectralEmbedding update_F(const ClusterGraph& graph, int c) {
    if (c < 1 || c > graph.A.rows())
        throw Error(ErrorCode::invalid_argument, "embedding width outside [1, m]");
    return smallest_eigenvectors(graph.laplacian(), c);
}

Eigen::MatrixXd pair_costs(const Eigen::MatrixXd& W_ll, const SpectralEmbedding& embedding,
                           double beta) {
    const Eigen::Index m = W_ll.rows();
    Eigen::MatrixXd costs(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        costs(i, i) = -2.0 * W_ll(i, i);
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double d2 = (embedding.F.row(i) - embedding.F.row(j)).squaredNorm();
            costs(i, j) = beta * d2 - 2.0 * W_ll(i, j);
            costs(j, i) = beta * d2 - 2.0 * W_ll(j, i);
        }
    }
    return costs;
}

Eigen::VectorXd implicit_gammas(const Eigen::MatrixXd& costs, int h) {
    const Eigen::Index m = costs.rows();
    if (h < 1 || h >= m)
        throw Error(ErrorCode::invalid_argument, "row support must satisfy 1 <= h < m");
    Eigen::VectorXd gammas(m);
    std::vector<double> row(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) row[std::size_t(j)] = costs(i, j);
        std::sort(row.begin(), row.end());
        const double head = std::accumulate(row.begin(), row.begin() + h, 0.0);
        gammas(i) = 0.5 * (double(h) * row[std::size_t(h)] - head) - 1.0;
    }
    return gammas;
}

double clustering_objective(const Eigen::MatrixXd& W_ll, const ClusterGraph& graph,
                            const SpectralEmbedding& embedding, double beta,
                            const Eigen::VectorXd& gammas) {
    double value = (graph.A - W_ll).squaredNorm();
    for (Eigen::Index i = 0; i < graph.A.rows(); ++i)
        value += gammas(i) * graph.A.row(i).squaredNorm();
    const Eigen::MatrixXd L = graph.laplacian();
    value += 2.0 * beta * (embedding.F.transpose() * L * embedding.F).trace();
    return value;
}

UpdateAResult update_A(const Eigen::MatrixXd& W_ll, const SpectralEmbedding& embedding,
                       double beta, int h) {
    const Eigen::Index m = W_ll.rows();
    if (embedding.F.rows() != m)
        throw Error(ErrorCode::dimension_mismatch, "embedding rows do not match anchor count");
    if (h < 1 || h >= m)
        throw Error(ErrorCode::invalid_argument, "row support must satisfy 1 <= h < m");

    const Eigen::MatrixXd costs = pair_costs(W_ll, embedding, beta);
    UpdateAResult result;
    result.graph.A = Eigen::MatrixXd::Zero(m, m);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        std::iota(order.begin(), order.end(), 0);
        // Ascending cost; index breaks exact ties deterministically.
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            if (costs(i, a) != costs(i, b)) return costs(i, a) < costs(i, b);
            return a < b;
        });
        const double e_next = costs(i, order[std::size_t(h)]);
        double head = 0.0;
        for (int s = 0; s < h; ++s) head += costs(i, order[std::size_t(s)]);
        const double denom = double(h) * e_next - head;
        if (denom <= 1e-12) {
            for (int s = 0; s < h; ++s)
                result.graph.A(i, order[std::size_t(s)]) = 1.0 / double(h);
            result.degenerate_rows.push_back(i);
        } else {
            for (int s = 0; s < h; ++s)
                result.graph.A(i, order[std::size_t(s)]) =
                    (e_next - costs(i, order[std::size_t(s)])) / denom;
        }
    }
    return result;
}

std::vector<int> support_components(const Eigen::MatrixXd& A) {
    const int m = int(A.rows());
    UnionFind uf(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j && (A(i, j) > 0.0 || A(j, i) > 0.0)) uf.unite(i, j);

    std::vector<int> labels(std::size_t(m), -1);
    int next = 0;
    for (int i = 0; i < m; ++i) {
        const int root = uf.find(i);
        if (labels[std::size_t(root)] == -1) labels[std::size_t(root)] = next++;
        labels[std::size_t(i)] = labels[std::size_t(root)];
    }
    return labels;
}

int count_zero_eigenvalues(const Eigen::VectorXd& eigenvalues_ascending, double rel_tol) {
    if (eigenvalues_ascending.size() == 0) return 0;
    const double lambda_max = eigenvalues_ascending(eigenvalues_ascending.size() - 1);
    if (lambda_max <= 0.0) return int(eigenvalues_ascending.size());
    const double cutoff = rel_tol * lambda_max;
    int count = 0;
    for (Eigen::Index i = 0; i < eigenvalues_ascending.size(); ++i)
        if (eigenvalues_ascending(i) < cutoff) ++count;
    return count;
}

Eigen::MatrixXd pseudo_label_anchors(const std::vector<int>& cluster_ids, int c) {
    if (c < 1) throw Error(ErrorCode::invalid_argument, "need at least one cluster");
    std::vector<int> sizes(std::size_t(c), 0);
    for (int id : cluster_ids) {
        if (id < 0 || id >= c)
            throw Error(ErrorCode::invalid_argument, "cluster id outside [0, c)");
        ++sizes[std::size_t(id)];
    }
    for (int s : sizes)
        if (s == 0) throw Error(ErrorCode::invalid_argument, "empty cluster in pseudo-labels");
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(Eigen::Index(cluster_ids.size()), c);
    for (std::size_t i = 0; i < cluster_ids.size(); ++i)
        U(Eigen::Index(i), cluster_ids[i]) = 1.0;
    return U;
}

ClusteringResult run_clustering(const Eigen::MatrixXd& W_ll, const Eigen::MatrixXd& anchor_features,
                                const ClusterConfig& config) {
    const Eigen::Index m = W_ll.rows();
    config.validate(m);
    if (anchor_features.rows() != m)
        throw Error(ErrorCode::dimension_mismatch, "anchor features do not match graph order");

    ClusteringResult result;
    result.final_beta = config.beta;
    double beta = config.beta;

    SpectralEmbedding embedding = init_embedding(W_ll, config.c);
    for (int t = 1; t <= config.max_iter; ++t) {
        UpdateAResult upd = update_A(W_ll, embedding, beta, config.h);
        if (!upd.degenerate_rows.empty())
            result.warnings.push_back("iteration " + std::to_string(t) + ": " +
                                      std::to_string(upd.degenerate_rows.size()) +
                                      " degenerate simplex rows fell back to uniform");
        const Eigen::VectorXd gammas = implicit_gammas(pair_costs(W_ll, embedding, beta), config.h);
        sanitize_support(upd.graph.A);
        result.graph = std::move(upd.graph);
        result.iterations = t;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(result.graph.laplacian());
        if (eig.info() != Eigen::Success)
            throw Error(ErrorCode::solver_failure, "Laplacian eigendecomposition failed");
        embedding.F = eig.eigenvectors().leftCols(config.c);
        embedding.eigenvalues = eig.eigenvalues().head(config.c);
        fix_column_signs(embedding.F);

        result.objective_trace.push_back(
            clustering_objective(W_ll, result.graph, embedding, beta, gammas));

        const int zeros = count_zero_eigenvalues(eig.eigenvalues(), config.zero_eig_rel_tol);
        if (zeros == config.c) {
            result.converged = true;
            break;
        }
        if (config.beta_adapt) {
            // Too many components: the rank penalty dominates, so soften it;
            // too few: strengthen it.
            beta = zeros > config.c ? beta * 0.5 : beta * 2.0;
        }
    }
    result.final_beta = beta;
    if (!result.converged)
        result.warnings.push_back("component count did not reach target within iteration cap");

    result.labels = support_components(result.graph.A);
    int groups = *std::max_element(result.labels.begin(), result.labels.end()) + 1;

    // Merge nearest / split largest until exactly c groups remain.
    std::uint64_t split_seed = config.seed;
    while (groups != config.c) {
        result.repaired = true;
        auto members = group_members(result.labels, groups);
        if (groups > config.c) {
            // Merge the two components with nearest centroids.
            int best_a = 0, best_b = 1;
            double best_d = std::numeric_limits<double>::infinity();
            std::vector<Eigen::RowVectorXd> centroids;
            centroids.reserve(members.size());
            for (const auto& g : members) centroids.push_back(centroid_of(anchor_features, g));
            for (int a = 0; a < groups; ++a) {
                for (int b = a + 1; b < groups; ++b) {
                    const double d = (centroids[std::size_t(a)] - centroids[std::size_t(b)]).squaredNorm();
                    if (d < best_d) {
                        best_d = d;
                        best_a = a;
                        best_b = b;
                    }
                }
            }
            for (auto& label : result.labels) {
                if (label == best_b) label = best_a;
                if (label > best_b) --label;
            }
            --groups;
        } else {
            // Split the largest component (ties toward the smaller id) with
            // seeded 2-means on its features.
            int target = 0;
            for (int g = 1; g < groups; ++g)
                if (members[std::size_t(g)].size() > members[std::size_t(target)].size()) target = g;
            const auto& rows = members[std::size_t(target)];
            if (rows.size() < 2)
                throw Error(ErrorCode::solver_failure,
                            "cannot split a singleton component");  // unreachable: c <= m
            Eigen::MatrixXd sub(Eigen::Index(rows.size()), anchor_features.cols());
            for (std::size_t r = 0; r < rows.size(); ++r)
                sub.row(Eigen::Index(r)) = anchor_features.row(rows[r]);
            KmeansOptions opts;
            opts.seed = split_seed++;
            const AnchorSet halves = kmeans(sub, 2, opts);
            std::vector<int> side(rows.size(), 0);
            int moved = 0;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const double d0 = (sub.row(Eigen::Index(r)) - halves.features.row(0)).squaredNorm();
                const double d1 = (sub.row(Eigen::Index(r)) - halves.features.row(1)).squaredNorm();
                side[r] = d1 < d0 ? 1 : 0;
                moved += side[r];
            }
            if (moved == 0) side[0] = 1;                    // duplicates collapsed
            if (moved == int(rows.size())) side[0] = 0;
            for (std::size_t r = 0; r < rows.size(); ++r)
                if (side[r] == 1) result.labels[std::size_t(rows[r])] = groups;
            ++groups;
        }
    }
    if (result.repaired)
        result.warnings.push_back("component repair adjusted the clustering to the target count");

    // Compact ids into first-appearance order for determinism.
    std::vector<int> remap(std::size_t(groups), -1);
    int next = 0;
    for (auto& label : result.labels) {
        if (remap[std::size_t(label)] == -1) remap[std::size_t(label)] = next++;
        label = remap[std::size_t(label)];
    }
    return result;
}

}  // namespace hsilp
