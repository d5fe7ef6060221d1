#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace hsilp {

/// Principal-component projection fitted from the centered covariance.
/// Component rows are orthonormal, ordered by descending eigenvalue, and
/// sign-fixed so each row's largest-magnitude entry is non-negative.
struct PcaModel {
    Eigen::VectorXd mean;         // d0
    Eigen::MatrixXd components;   // d x d0, rows beyond effective_rank are zero
    Eigen::VectorXd eigenvalues;  // d, descending
    double total_variance = 0.0;  // trace of the covariance
    Eigen::Index effective_rank = 0;
    std::vector<std::string> warnings;

    Eigen::Index input_dim() const { return mean.size(); }
    Eigen::Index output_dim() const { return components.rows(); }

    /// Fraction of total variance captured by each retained component.
    Eigen::VectorXd explained_variance_ratio() const;

    Eigen::MatrixXd project(const Eigen::MatrixXd& spectra) const;
    Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& projected) const;
};

/// Fits the top-d eigenvectors of the centered covariance of `spectra`
/// (rows = samples). Requires d <= d0 <= n and finite input. A covariance of
/// rank < d zero-pads the trailing components and records a warning.
PcaModel pca_fit(const Eigen::MatrixXd& spectra, Eigen::Index d);

}  // namespace hsilp
