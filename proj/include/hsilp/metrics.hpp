#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace hsilp {

/// Row = true class, column = predicted class, both 0-based.
struct ConfusionMatrix {
    Eigen::MatrixXd counts;

    static ConfusionMatrix from_labels(const std::vector<int>& truth, const std::vector<int>& pred,
                                       int num_classes);
    double total() const { return counts.sum(); }
};

struct ClassificationMetrics {
    std::vector<double> per_class;        // recall per class
    std::vector<bool> empty_class;        // no evaluated pixels under the mask
    double aa = 0.0;
    double oa = 0.0;
    double kappa = 0.0;
};

/// OA = trace/total, AA = mean per-class recall (empty classes flagged and
/// scored 0), Cohen's kappa from the marginal products. `mask` selects the
/// evaluated positions of `pred`/`truth` (training and unlabeled excluded by
/// the caller). Labels are 0-based class indices.
ClassificationMetrics classification_metrics(const std::vector<int>& pred,
                                             const std::vector<int>& truth,
                                             const std::vector<std::uint8_t>& mask,
                                             int num_classes);

struct ClusteringMetrics {
    double acc = 0.0;     // after optimal cluster<->class matching
    double kappa = 0.0;   // on the matched confusion matrix
    double nmi = 0.0;     // arithmetic-mean normalization
    double purity = 0.0;
    double ari = 0.0;
    double f_score = 0.0; // pairwise F-score
    std::vector<int> assignment;  // cluster id -> matched class id (-1 for dummies)
};

/// Cluster ids are arbitrary; ACC and kappa apply maximum-weight one-to-one
/// matching (Hungarian) on the contingency table, padded with zero-weight
/// dummies when the cluster and class counts differ.
ClusteringMetrics clustering_metrics(const std::vector<int>& pred_clusters,
                                     const std::vector<int>& truth,
                                     const std::vector<std::uint8_t>& mask, int num_clusters,
                                     int num_classes);

/// Minimum-cost assignment on a square cost matrix; returns row -> column.
std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost);

/// Aligned-column text table mirroring the reported layout.
std::string format_classification_table(const ClassificationMetrics& metrics);
std::string format_clustering_table(const ClusteringMetrics& metrics);

}  // namespace hsilp
