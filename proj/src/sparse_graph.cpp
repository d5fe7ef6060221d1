#include "hsilp/sparse_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "hsilp/errors.hpp"
#include "hsilp/parallel.hpp"

namespace hsilp {

namespace {

// Row-block width for streaming dense blocks of the factored affinity; bounds
// peak memory at block_rows * n doubles.
constexpr Eigen::Index kBlockRows = 256;

}  // namespace

double SparseAffinity::at(Eigen::Index i, Eigen::Index j) const {
    const auto begin = neighbor.begin() + std::ptrdiff_t(row_offsets[i]);
    const auto end = neighbor.begin() + std::ptrdiff_t(row_offsets[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return weight[std::size_t(it - neighbor.begin())];
}

Eigen::VectorXd SparseAffinity::apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(order);
    for (Eigen::Index i = 0; i < order; ++i) {
        double acc = 0.0;
        for (std::size_t s = row_offsets[i]; s < row_offsets[i + 1]; ++s)
            acc += weight[s] * v(neighbor[s]);
        out(i) = acc;
    }
    return out;
}

Eigen::MatrixXd SparseAffinity::apply(const Eigen::MatrixXd& v, int workers) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(order, v.cols());
    parallel_for(std::size_t(order), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto row = out.row(Eigen::Index(i));
            for (std::size_t s = row_offsets[i]; s < row_offsets[i + 1]; ++s)
                row += weight[s] * v.row(neighbor[s]);
        }
    });
    return out;
}

Eigen::VectorXd SparseAffinity::row_sums() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(order);
    for (Eigen::Index i = 0; i < order; ++i)
        out(i) = std::accumulate(weight.begin() + std::ptrdiff_t(row_offsets[i]),
                                 weight.begin() + std::ptrdiff_t(row_offsets[i + 1]), 0.0);
    return out;
}

Eigen::MatrixXd SparseAffinity::dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(order, order);
    for (Eigen::Index i = 0; i < order; ++i)
        for (std::size_t s = row_offsets[i]; s < row_offsets[i + 1]; ++s)
            out(i, neighbor[s]) = weight[s];
    return out;
}

EdgeSet topk_prune(const FactoredAffinity& affinity, Eigen::Index k, int workers) {
    const Eigen::Index n = affinity.order();
    if (k < 1 || k >= n)
        throw Error(ErrorCode::invalid_argument, "neighbor count must satisfy 1 <= k < n");

    EdgeSet edges;
    edges.order = n;
    edges.k = k;
    edges.neighbor.resize(std::size_t(n) * std::size_t(k));

    parallel_for(std::size_t(n), workers, [&](std::size_t begin, std::size_t end) {
        std::vector<Eigen::Index> order_idx(static_cast<std::size_t>(n));
        for (Eigen::Index block = Eigen::Index(begin); block < Eigen::Index(end);
             block += kBlockRows) {
            const Eigen::Index stop = std::min<Eigen::Index>(Eigen::Index(end), block + kBlockRows);
            const Eigen::MatrixXd rows = affinity.row_block(block, stop);
            for (Eigen::Index i = block; i < stop; ++i) {
                const auto row = rows.row(i - block);
                // Candidates exclude the diagonal; ties keep the smaller index.
                std::size_t count = 0;
                for (Eigen::Index j = 0; j < n; ++j)
                    if (j != i) order_idx[count++] = j;
                const auto better = [&](Eigen::Index a, Eigen::Index b) {
                    if (row(a) != row(b)) return row(a) > row(b);
                    return a < b;
                };
                std::nth_element(order_idx.begin(), order_idx.begin() + (k - 1),
                                 order_idx.begin() + std::ptrdiff_t(count), better);
                Eigen::Index* dst = edges.neighbor.data() + std::size_t(i) * std::size_t(k);
                std::copy(order_idx.begin(), order_idx.begin() + k, dst);
                std::sort(dst, dst + k);
            }
        }
    });
    return edges;
}

SparseAffinity recompute_similarity(const Eigen::MatrixXd& spectra, const EdgeSet& edges,
                                    double sigma2, int workers) {
    if (sigma2 <= 0.0) throw Error(ErrorCode::invalid_argument, "sigma^2 must be positive");
    if (spectra.rows() != edges.order)
        throw Error(ErrorCode::dimension_mismatch, "edge set order does not match spectra");

    SparseAffinity out;
    out.order = edges.order;
    out.row_offsets.resize(std::size_t(edges.order) + 1);
    for (Eigen::Index i = 0; i <= edges.order; ++i)
        out.row_offsets[std::size_t(i)] = std::size_t(i) * std::size_t(edges.k);
    out.neighbor = edges.neighbor;
    out.weight.resize(out.neighbor.size());

    parallel_for(std::size_t(edges.order), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (Eigen::Index slot = 0; slot < edges.k; ++slot) {
                const std::size_t s = i * std::size_t(edges.k) + std::size_t(slot);
                const Eigen::Index j = out.neighbor[s];
                const double d2 =
                    (spectra.row(Eigen::Index(i)) - spectra.row(j)).squaredNorm();
                out.weight[s] = std::exp(-d2 / (2.0 * sigma2));
            }
        }
    });
    return out;
}

SparseAffinity combine(const FactoredAffinity& affinity, const SparseAffinity& recomputed,
                       const EdgeSet& edges, int workers) {
    const Eigen::Index n = edges.order;
    if (recomputed.order != n || affinity.order() != n)
        throw Error(ErrorCode::dimension_mismatch, "operands disagree on pixel count");

    // Directed products wa_ij * wk_ij on the retained edges.
    std::vector<double> prod(edges.neighbor.size());
    parallel_for(std::size_t(n), workers, [&](std::size_t begin, std::size_t end) {
        for (Eigen::Index block = Eigen::Index(begin); block < Eigen::Index(end);
             block += kBlockRows) {
            const Eigen::Index stop = std::min<Eigen::Index>(Eigen::Index(end), block + kBlockRows);
            const Eigen::MatrixXd rows = affinity.row_block(block, stop);
            for (Eigen::Index i = block; i < stop; ++i) {
                for (Eigen::Index slot = 0; slot < edges.k; ++slot) {
                    const std::size_t s = std::size_t(i) * std::size_t(edges.k) + std::size_t(slot);
                    prod[s] = rows(i - block, edges.neighbor[s]) * recomputed.weight[s];
                }
            }
        }
    });

    // Reverse adjacency so each row can see the edges that point at it; source
    // ids come out ascending because rows are scanned in order.
    std::vector<std::size_t> rev_count(std::size_t(n) + 1, 0);
    for (Eigen::Index j : edges.neighbor) ++rev_count[std::size_t(j) + 1];
    std::partial_sum(rev_count.begin(), rev_count.end(), rev_count.begin());
    std::vector<Eigen::Index> rev_src(edges.neighbor.size());
    std::vector<double> rev_val(edges.neighbor.size());
    {
        std::vector<std::size_t> cursor(rev_count.begin(), rev_count.end() - 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index slot = 0; slot < edges.k; ++slot) {
                const std::size_t s = std::size_t(i) * std::size_t(edges.k) + std::size_t(slot);
                const std::size_t at = cursor[std::size_t(edges.neighbor[s])]++;
                rev_src[at] = i;
                rev_val[at] = prod[s];
            }
        }
    }

    // Merge forward and reverse lists per row, taking max where both exist.
    SparseAffinity out;
    out.order = n;
    out.row_offsets.assign(std::size_t(n) + 1, 0);
    std::vector<std::vector<Eigen::Index>> nbr(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> wgt(static_cast<std::size_t>(n));
    parallel_for(std::size_t(n), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t fb = i * std::size_t(edges.k), fe = fb + std::size_t(edges.k);
            const std::size_t rb = rev_count[i], re = rev_count[i + 1];
            auto& names = nbr[i];
            auto& vals = wgt[i];
            names.reserve((fe - fb) + (re - rb));
            vals.reserve((fe - fb) + (re - rb));
            std::size_t f = fb, r = rb;
            while (f < fe || r < re) {
                const Eigen::Index fj =
                    f < fe ? edges.neighbor[f] : std::numeric_limits<Eigen::Index>::max();
                const Eigen::Index rj =
                    r < re ? rev_src[r] : std::numeric_limits<Eigen::Index>::max();
                if (fj < rj) {
                    names.push_back(fj);
                    vals.push_back(prod[f++]);
                } else if (rj < fj) {
                    names.push_back(rj);
                    vals.push_back(rev_val[r++]);
                } else {
                    names.push_back(fj);
                    vals.push_back(std::max(prod[f++], rev_val[r++]));
                }
            }
        }
    });
    for (std::size_t i = 0; i < std::size_t(n); ++i)
        out.row_offsets[i + 1] = out.row_offsets[i] + nbr[i].size();
    out.neighbor.resize(out.row_offsets.back());
    out.weight.resize(out.row_offsets.back());
    for (std::size_t i = 0; i < std::size_t(n); ++i) {
        std::copy(nbr[i].begin(), nbr[i].end(), out.neighbor.begin() + std::ptrdiff_t(out.row_offsets[i]));
        std::copy(wgt[i].begin(), wgt[i].end(), out.weight.begin() + std::ptrdiff_t(out.row_offsets[i]));
    }
    return out;
}

Eigen::MatrixXd anchor_block(const Eigen::MatrixXd& anchors, double sigma2) {
    if (sigma2 <= 0.0) throw Error(ErrorCode::invalid_argument, "sigma^2 must be positive");
    const Eigen::Index m = anchors.rows();
    Eigen::MatrixXd W(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        W(i, i) = 1.0;  // kernel of zero distance
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double d2 = (anchors.row(i) - anchors.row(j)).squaredNorm();
            const double w = std::exp(-d2 / (2.0 * sigma2));
            W(i, j) = w;
            W(j, i) = w;  // mirrored, so symmetry is exact
        }
    }
    return W;
}

Eigen::VectorXd AffinityBlocks::apply(const Eigen::VectorXd& v) const {
    const Eigen::Index m = anchor_count();
    const Eigen::Index n = pixel_count();
    if (v.size() != m + n)
        throw Error(ErrorCode::dimension_mismatch, "vector does not match graph order");
    Eigen::VectorXd out(m + n);
    out.head(m) = W_ll * v.head(m) + Z.transpose() * v.tail(n);
    out.tail(n) = Z * v.head(m) + W_uu.apply(Eigen::VectorXd(v.tail(n)));
    return out;
}

Eigen::MatrixXd AffinityBlocks::dense() const {
    const Eigen::Index m = anchor_count();
    const Eigen::Index n = pixel_count();
    Eigen::MatrixXd out(m + n, m + n);
    out.topLeftCorner(m, m) = W_ll;
    out.topRightCorner(m, n) = Z.transpose();
    out.bottomLeftCorner(n, m) = Z;
    out.bottomRightCorner(n, n) = W_uu.dense();
    return out;
}

AffinityBlocks assemble(Eigen::MatrixXd W_ll, Eigen::MatrixXd Z, SparseAffinity W_uu) {
    if (W_ll.rows() != W_ll.cols())
        throw Error(ErrorCode::dimension_mismatch, "anchor block must be square");
    if (Z.cols() != W_ll.rows())
        throw Error(ErrorCode::dimension_mismatch, "Z anchor count does not match anchor block");
    if (W_uu.order != Z.rows())
        throw Error(ErrorCode::dimension_mismatch, "pixel block order does not match Z");
    const double asym = (W_ll - W_ll.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12)
        throw Error(ErrorCode::invalid_argument, "anchor block is not symmetric");

    AffinityBlocks blocks;
    blocks.W_ll = std::move(W_ll);
    blocks.Z = std::move(Z);
    blocks.W_uu = std::move(W_uu);
    return blocks;
}

NormalizedGraph symmetric_normalize(AffinityBlocks blocks) {
    NormalizedGraph graph;
    graph.blocks = std::move(blocks);
    const Eigen::Index m = graph.blocks.anchor_count();
    const Eigen::Index n = graph.blocks.pixel_count();

    graph.degree.resize(m + n);
    graph.degree.head(m) =
        graph.blocks.W_ll.rowwise().sum() + graph.blocks.Z.colwise().sum().transpose();
    graph.degree.tail(n) = graph.blocks.Z.rowwise().sum() + graph.blocks.W_uu.row_sums();

    for (Eigen::Index i = 0; i < m + n; ++i) {
        if (graph.degree(i) <= 0.0) {
            graph.isolated_nodes.push_back(i);
            graph.degree(i) = 1.0;  // unit self-loop keeps D invertible
        }
    }
    graph.inv_sqrt_deg = graph.degree.cwiseSqrt().cwiseInverse();
    return graph;
}

Eigen::VectorXd NormalizedGraph::apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd scaled = inv_sqrt_deg.cwiseProduct(v);
    Eigen::VectorXd out = blocks.apply(scaled);
    for (Eigen::Index i : isolated_nodes) out(i) += scaled(i);
    return out.cwiseProduct(inv_sqrt_deg);
}

Eigen::MatrixXd NormalizedGraph::apply(const Eigen::MatrixXd& v, int workers) const {
    const Eigen::Index m = blocks.anchor_count();
    const Eigen::Index n = blocks.pixel_count();
    Eigen::MatrixXd scaled = inv_sqrt_deg.asDiagonal() * v;
    Eigen::MatrixXd out(m + n, v.cols());
    out.topRows(m) =
        blocks.W_ll * scaled.topRows(m) + blocks.Z.transpose() * scaled.bottomRows(n);
    out.bottomRows(n) =
        blocks.Z * scaled.topRows(m) + blocks.W_uu.apply(Eigen::MatrixXd(scaled.bottomRows(n)), workers);
    for (Eigen::Index i : isolated_nodes) out.row(i) += scaled.row(i);
    return inv_sqrt_deg.asDiagonal() * out;
}

Eigen::MatrixXd NormalizedGraph::dense() const {
    Eigen::MatrixXd W = blocks.dense();
    for (Eigen::Index i : isolated_nodes) W(i, i) += 1.0;
    return inv_sqrt_deg.asDiagonal() * W * inv_sqrt_deg.asDiagonal();
}

void dump_edge_list(const AffinityBlocks& blocks, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path);
    out << std::setprecision(17);
    const Eigen::Index m = blocks.anchor_count();
    out << "# i j weight  (anchors 0.." << m - 1 << ", pixels " << m << "..)\n";
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i; j < m; ++j)
            if (blocks.W_ll(i, j) != 0.0) out << i << ' ' << j << ' ' << blocks.W_ll(i, j) << '\n';
    for (Eigen::Index p = 0; p < blocks.Z.rows(); ++p)
        for (Eigen::Index a = 0; a < m; ++a)
            if (blocks.Z(p, a) != 0.0) out << a << ' ' << m + p << ' ' << blocks.Z(p, a) << '\n';
    for (Eigen::Index i = 0; i < blocks.W_uu.order; ++i)
        for (std::size_t s = blocks.W_uu.row_offsets[i]; s < blocks.W_uu.row_offsets[i + 1]; ++s)
            if (blocks.W_uu.neighbor[s] >= i && blocks.W_uu.weight[s] != 0.0)
                out << m + i << ' ' << m + blocks.W_uu.neighbor[s] << ' '
                    << blocks.W_uu.weight[s] << '\n';
}

}  // namespace hsilp
