#include "hsilp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "hsilp/errors.hpp"

namespace hsilp {

namespace {

double pairs_of(double n) { return n * (n - 1.0) / 2.0; }

double safe_kappa(double p_o, double p_e) {
    if (1.0 - p_e <= 1e-15) return p_o >= 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

}  // namespace

ConfusionMatrix ConfusionMatrix::from_labels(const std::vector<int>& truth,
                                             const std::vector<int>& pred, int num_classes) {
    if (truth.size() != pred.size())
        throw Error(ErrorCode::dimension_mismatch, "label vectors differ in length");
    ConfusionMatrix cm;
    cm.counts = Eigen::MatrixXd::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= num_classes || pred[i] < 0 || pred[i] >= num_classes)
            throw Error(ErrorCode::invalid_argument, "class id outside [0, c)");
        cm.counts(truth[i], pred[i]) += 1.0;
    }
    return cm;
}

ClassificationMetrics classification_metrics(const std::vector<int>& pred,
                                             const std::vector<int>& truth,
                                             const std::vector<std::uint8_t>& mask,
                                             int num_classes) {
    if (pred.size() != truth.size() || pred.size() != mask.size())
        throw Error(ErrorCode::dimension_mismatch, "prediction/truth/mask lengths differ");
    std::vector<int> t, p;
    t.reserve(pred.size());
    p.reserve(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!mask[i]) continue;
        t.push_back(truth[i]);
        p.push_back(pred[i]);
    }
    if (t.empty()) throw Error(ErrorCode::invalid_argument, "empty evaluation mask");

    const ConfusionMatrix cm = ConfusionMatrix::from_labels(t, p, num_classes);
    const double total = cm.total();

    ClassificationMetrics out;
    out.per_class.resize(std::size_t(num_classes), 0.0);
    out.empty_class.resize(std::size_t(num_classes), false);
    double aa_sum = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        const double row = cm.counts.row(c).sum();
        if (row == 0.0) {
            out.empty_class[std::size_t(c)] = true;  // scored 0, still averaged
        } else {
            out.per_class[std::size_t(c)] = cm.counts(c, c) / row;
        }
        aa_sum += out.per_class[std::size_t(c)];
    }
    out.aa = aa_sum / double(num_classes);
    out.oa = cm.counts.trace() / total;
    double p_e = 0.0;
    for (int c = 0; c < num_classes; ++c)
        p_e += cm.counts.row(c).sum() * cm.counts.col(c).sum();
    p_e /= total * total;
    out.kappa = safe_kappa(out.oa, p_e);
    return out;
}

std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols())
        throw Error(ErrorCode::dimension_mismatch, "assignment needs a square cost matrix");
    const int n = int(cost.rows());
    if (n == 0) return {};

    // Shortest augmenting path with potentials (Jonker–Volgenant style),
    // 1-based with a virtual row/column 0.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(std::size_t(n) + 1, 0.0), v(std::size_t(n) + 1, 0.0);
    std::vector<int> match(std::size_t(n) + 1, 0), way(std::size_t(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(std::size_t(n) + 1, inf);
        std::vector<char> used(std::size_t(n) + 1, 0);
        do {
            used[std::size_t(j0)] = 1;
            const int i0 = match[std::size_t(j0)];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[std::size_t(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[std::size_t(i0)] - v[std::size_t(j)];
                if (cur < minv[std::size_t(j)]) {
                    minv[std::size_t(j)] = cur;
                    way[std::size_t(j)] = j0;
                }
                if (minv[std::size_t(j)] < delta) {
                    delta = minv[std::size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[std::size_t(j)]) {
                    u[std::size_t(match[std::size_t(j)])] += delta;
                    v[std::size_t(j)] -= delta;
                } else {
                    minv[std::size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[std::size_t(j0)] != 0);
        do {
            const int j1 = way[std::size_t(j0)];
            match[std::size_t(j0)] = match[std::size_t(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(std::size_t(n), -1);
    for (int j = 1; j <= n; ++j)
        if (match[std::size_t(j)] > 0) row_to_col[std::size_t(match[std::size_t(j)] - 1)] = j - 1;
    return row_to_col;
}

ClusteringMetrics clustering_metrics(const std::vector<int>& pred_clusters,
                                     const std::vector<int>& truth,
                                     const std::vector<std::uint8_t>& mask, int num_clusters,
                                     int num_classes) {
    if (pred_clusters.size() != truth.size() || pred_clusters.size() != mask.size())
        throw Error(ErrorCode::dimension_mismatch, "prediction/truth/mask lengths differ");

    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(num_clusters, num_classes);
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!mask[i]) continue;
        if (pred_clusters[i] < 0 || pred_clusters[i] >= num_clusters || truth[i] < 0 ||
            truth[i] >= num_classes)
            throw Error(ErrorCode::invalid_argument, "cluster or class id out of range");
        table(pred_clusters[i], truth[i]) += 1.0;
        total += 1.0;
    }
    if (total == 0.0) throw Error(ErrorCode::invalid_argument, "empty evaluation mask");

    ClusteringMetrics out;

    // Optimal one-to-one matching on the contingency table, padded square with
    // zero-weight dummies when cluster and class counts differ.
    const int q = std::max(num_clusters, num_classes);
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(q, q);
    cost.topLeftCorner(num_clusters, num_classes) = -table;
    const std::vector<int> row_to_col = hungarian_assignment(cost);
    out.assignment.assign(std::size_t(num_clusters), -1);
    double matched = 0.0;
    double p_e = 0.0;
    for (int g = 0; g < num_clusters; ++g) {
        const int cls = row_to_col[std::size_t(g)];
        if (cls < num_classes) {
            out.assignment[std::size_t(g)] = cls;
            matched += table(g, cls);
            p_e += table.row(g).sum() * table.col(cls).sum();
        }
    }
    out.acc = matched / total;
    out.kappa = safe_kappa(out.acc, p_e / (total * total));

    // NMI with arithmetic-mean normalization; natural logs cancel out.
    double h_cluster = 0.0, h_class = 0.0, mutual = 0.0;
    for (int g = 0; g < num_clusters; ++g) {
        const double pg = table.row(g).sum() / total;
        if (pg > 0.0) h_cluster -= pg * std::log(pg);
    }
    for (int c = 0; c < num_classes; ++c) {
        const double pc = table.col(c).sum() / total;
        if (pc > 0.0) h_class -= pc * std::log(pc);
    }
    for (int g = 0; g < num_clusters; ++g) {
        for (int c = 0; c < num_classes; ++c) {
            const double p = table(g, c) / total;
            if (p <= 0.0) continue;
            const double pg = table.row(g).sum() / total;
            const double pc = table.col(c).sum() / total;
            mutual += p * std::log(p / (pg * pc));
        }
    }
    const double h_mean = 0.5 * (h_cluster + h_class);
    out.nmi = h_mean > 0.0 ? mutual / h_mean : 1.0;  // two trivial partitions agree

    double purity = 0.0;
    for (int g = 0; g < num_clusters; ++g) purity += table.row(g).maxCoeff();
    out.purity = purity / total;

    // Pair counts feed both ARI and the pairwise F-score.
    double same_both = 0.0, same_cluster = 0.0, same_class = 0.0;
    for (int g = 0; g < num_clusters; ++g) {
        same_cluster += pairs_of(table.row(g).sum());
        for (int c = 0; c < num_classes; ++c) same_both += pairs_of(table(g, c));
    }
    for (int c = 0; c < num_classes; ++c) same_class += pairs_of(table.col(c).sum());
    const double all_pairs = pairs_of(total);
    const double expected = all_pairs > 0.0 ? same_cluster * same_class / all_pairs : 0.0;
    const double max_index = 0.5 * (same_cluster + same_class);
    out.ari = max_index - expected > 1e-15 ? (same_both - expected) / (max_index - expected) : 1.0;

    if (same_both > 0.0) {
        const double precision = same_both / same_cluster;
        const double recall = same_both / same_class;
        out.f_score = 2.0 * precision * recall / (precision + recall);
    } else {
        out.f_score = (same_cluster == 0.0 && same_class == 0.0) ? 1.0 : 0.0;
    }
    return out;
}

std::string format_classification_table(const ClassificationMetrics& metrics) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "class  recall\n";
    for (std::size_t c = 0; c < metrics.per_class.size(); ++c) {
        out << std::setw(5) << c + 1 << "  " << metrics.per_class[c];
        if (metrics.empty_class[c]) out << "  (no evaluated pixels)";
        out << '\n';
    }
    out << "OA     " << metrics.oa << '\n';
    out << "AA     " << metrics.aa << '\n';
    out << "Kappa  " << metrics.kappa << '\n';
    return out.str();
}

std::string format_clustering_table(const ClusteringMetrics& metrics) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "ACC     " << metrics.acc << '\n';
    out << "Kappa   " << metrics.kappa << '\n';
    out << "NMI     " << metrics.nmi << '\n';
    out << "Purity  " << metrics.purity << '\n';
    out << "ARI     " << metrics.ari << '\n';
    out << "F-score " << metrics.f_score << '\n';
    return out.str();
}

}  // namespace hsilp
