#include "hsilp/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "hsilp/errors.hpp"

namespace hsilp {

namespace {

/// Flips each row so its largest-magnitude entry is non-negative; earlier
/// columns win magnitude ties, which pins the sign even for symmetric rows.
void fix_signs(Eigen::MatrixXd& rows) {
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index c = 0; c < rows.cols(); ++c) {
            const double mag = std::fabs(rows(r, c));
            if (mag > best + 1e-15) {
                best = mag;
                arg = c;
            }
        }
        if (rows(r, arg) < 0.0) rows.row(r) = -rows.row(r);
    }
}

}  // namespace

Eigen::VectorXd PcaModel::explained_variance_ratio() const {
    if (total_variance <= 0.0) return Eigen::VectorXd::Zero(eigenvalues.size());
    return eigenvalues / total_variance;
}

Eigen::MatrixXd PcaModel::project(const Eigen::MatrixXd& spectra) const {
    if (spectra.cols() != input_dim())
        throw Error(ErrorCode::dimension_mismatch, "projection input dimension mismatch");
    return (spectra.rowwise() - mean.transpose()) * components.transpose();
}

Eigen::MatrixXd PcaModel::reconstruct(const Eigen::MatrixXd& projected) const {
    if (projected.cols() != output_dim())
        throw Error(ErrorCode::dimension_mismatch, "reconstruction input dimension mismatch");
    return (projected * components).rowwise() + mean.transpose();
}

PcaModel pca_fit(const Eigen::MatrixXd& spectra, Eigen::Index d) {
    const Eigen::Index n = spectra.rows();
    const Eigen::Index d0 = spectra.cols();
    if (n < 2) throw Error(ErrorCode::invalid_argument, "need at least two samples");
    if (d < 1 || d > d0)
        throw Error(ErrorCode::invalid_argument, "requested dimension outside [1, input_dim]");
    if (!spectra.allFinite())
        throw Error(ErrorCode::non_finite_values, "non-finite sample matrix");

    PcaModel model;
    model.mean = spectra.colwise().mean();
    Eigen::MatrixXd centered = spectra.rowwise() - model.mean.transpose();
    // Population covariance (1/n); the projection is scale-invariant either way.
    Eigen::MatrixXd cov = centered.transpose() * centered / double(n);

    model.total_variance = cov.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::solver_failure, "covariance eigendecomposition failed");

    // Eigen returns ascending order; take the top d in descending order.
    model.eigenvalues.resize(d);
    model.components = Eigen::MatrixXd::Zero(d, d0);
    const double lambda_max = std::max(0.0, eig.eigenvalues()(d0 - 1));
    const double rank_tol = lambda_max * 1e-12;
    model.effective_rank = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double lambda = std::max(0.0, eig.eigenvalues()(d0 - 1 - i));
        model.eigenvalues(i) = lambda;
        if (lambda > rank_tol) {
            model.components.row(i) = eig.eigenvectors().col(d0 - 1 - i).transpose();
            ++model.effective_rank;
        }
    }
    if (model.effective_rank < d)
        model.warnings.push_back("covariance rank " + std::to_string(model.effective_rank) +
                                 " below requested " + std::to_string(d) +
                                 "; trailing components zeroed");
    fix_signs(model.components);
    return model;
}

}  // namespace hsilp
