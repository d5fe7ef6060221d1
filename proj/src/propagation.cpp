#include "hsilp/propagation.hpp"

#include <cmath>

#include "hsilp/errors.hpp"

namespace hsilp {

namespace {

void check_alpha(double alpha, bool allow_zero) {
    const double lo = allow_zero ? 0.0 : std::nextafter(0.0, 1.0);
    if (!(alpha >= lo && alpha < 1.0))
        throw Error(ErrorCode::invalid_argument, "alpha must lie in [0, 1)");
}

LabelMatrix make_labels(Eigen::MatrixXd F) {
    LabelMatrix out;
    out.F = std::move(F);
    const HardenResult hard = harden(out.F);
    out.hardened = hard.labels;
    return out;
}

}  // namespace

Eigen::MatrixXd build_Y(const AnchorLabels& labels, const Eigen::MatrixXd& F0) {
    if (labels.U.cols() != F0.cols())
        throw Error(ErrorCode::dimension_mismatch, "anchor and pixel label widths differ");
    Eigen::MatrixXd Y(labels.U.rows() + F0.rows(), F0.cols());
    Y.topRows(labels.U.rows()) = labels.U;
    Y.bottomRows(F0.rows()) = F0;
    return Y;
}

PropagationResult propagate_iterative(const NormalizedGraph& graph, const Eigen::MatrixXd& Y,
                                      const PropagationConfig& config) {
    check_alpha(config.alpha, /*allow_zero=*/true);
    if (Y.rows() != graph.order())
        throw Error(ErrorCode::dimension_mismatch, "Y does not match graph order");
    if (config.tol <= 0.0) throw Error(ErrorCode::invalid_argument, "tol must be positive");

    PropagationResult result;
    Eigen::MatrixXd F = Y;
    result.converged = false;
    for (int t = 1; t <= config.max_iter; ++t) {
        Eigen::MatrixXd next =
            config.alpha * graph.apply(F, config.workers) + (1.0 - config.alpha) * Y;
        const double delta = (next - F).cwiseAbs().maxCoeff();
        F = std::move(next);
        result.iterations = t;
        if (delta < config.tol) {
            result.converged = true;
            break;
        }
    }
    result.labels = make_labels(std::move(F));
    return result;
}

CgResult cg_solve(const NormalizedGraph& graph, double alpha, const Eigen::MatrixXd& B,
                  const CgOptions& opts, int workers) {
    check_alpha(alpha, /*allow_zero=*/true);
    const Eigen::Index order = graph.order();
    const Eigen::Index cols = B.cols();
    if (B.rows() != order)
        throw Error(ErrorCode::dimension_mismatch, "right-hand side does not match graph order");

    const auto op = [&](const Eigen::MatrixXd& v) -> Eigen::MatrixXd {
        return v - alpha * graph.apply(v, workers);
    };

    CgResult result;
    result.X = Eigen::MatrixXd::Zero(order, cols);
    Eigen::MatrixXd R = B;  // residual of the zero start
    Eigen::MatrixXd P = R;
    Eigen::VectorXd rs = R.colwise().squaredNorm();
    Eigen::VectorXd b_norm = B.colwise().norm();
    for (Eigen::Index c = 0; c < cols; ++c)
        if (b_norm(c) == 0.0) b_norm(c) = 1.0;  // zero column: solution stays zero

    std::vector<bool> active(std::size_t(cols), true);
    for (Eigen::Index c = 0; c < cols; ++c)
        if (std::sqrt(rs(c)) / b_norm(c) <= opts.tol) active[std::size_t(c)] = false;

    const int max_iter = opts.max_iter > 0 ? opts.max_iter : int(10 * order);
    result.converged = true;
    int iter = 0;
    while (true) {
        bool any_active = false;
        for (bool a : active) any_active |= a;
        if (!any_active) break;
        if (iter >= max_iter) {
            result.converged = false;
            break;
        }
        ++iter;

        // One shared matvec; per-column scalar recurrences. Converged columns
        // freeze (their direction is zeroed so they no longer move).
        Eigen::MatrixXd AP = op(P);
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!active[std::size_t(c)]) continue;
            const double pAp = P.col(c).dot(AP.col(c));
            if (!(pAp > 0.0)) {
                // Loss of positive-definiteness in finite precision: stagnate.
                result.converged = false;
                active[std::size_t(c)] = false;
                P.col(c).setZero();
                continue;
            }
            const double a = rs(c) / pAp;
            result.X.col(c) += a * P.col(c);
            R.col(c) -= a * AP.col(c);
            const double rs_next = R.col(c).squaredNorm();
            if (std::sqrt(rs_next) / b_norm(c) <= opts.tol) {
                active[std::size_t(c)] = false;
                P.col(c).setZero();
            } else {
                P.col(c) = R.col(c) + (rs_next / rs(c)) * P.col(c);
            }
            rs(c) = rs_next;
        }
        if (opts.on_iterate) opts.on_iterate(iter, result.X, rs.cwiseSqrt());
    }
    result.iterations = iter;
    result.residuals = rs.cwiseSqrt().cwiseQuotient(b_norm);
    return result;
}

PropagationResult propagate_closed_form(const NormalizedGraph& graph, const Eigen::MatrixXd& Y,
                                        const PropagationConfig& config) {
    check_alpha(config.alpha, /*allow_zero=*/false);
    if (Y.rows() != graph.order())
        throw Error(ErrorCode::dimension_mismatch, "Y does not match graph order");

    CgOptions opts;
    opts.tol = config.cg_tol;
    CgResult cg = cg_solve(graph, config.alpha, Y, opts, config.workers);

    PropagationResult result;
    if (cg.converged) {
        result.iterations = cg.iterations;
        result.max_residual = cg.residuals.maxCoeff();
        result.labels = make_labels(std::move(cg.X));
        return result;
    }

    // Stagnated CG: fall back to the dynamic process. Its fixed point is the
    // same solution scaled by (1 - alpha), which hardens identically.
    PropagationResult fallback = propagate_iterative(graph, Y, config);
    fallback.used_fallback = true;
    fallback.max_residual = cg.residuals.maxCoeff();
    return fallback;
}

HardenResult harden(const Eigen::MatrixXd& F) {
    if (!F.allFinite()) throw Error(ErrorCode::non_finite_values, "label matrix not finite");
    HardenResult out;
    out.labels.resize(std::size_t(F.rows()));
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
        Eigen::Index arg = 0;
        double best = F(i, 0);
        for (Eigen::Index j = 1; j < F.cols(); ++j) {
            if (F(i, j) > best) {  // strict: earlier index wins ties
                best = F(i, j);
                arg = j;
            }
        }
        if (best == 0.0 && F.row(i).cwiseAbs().maxCoeff() == 0.0) {
            out.labels[std::size_t(i)] = -1;
            out.zero_rows.push_back(i);
        } else {
            out.labels[std::size_t(i)] = int(arg);
        }
    }
    return out;
}

}  // namespace hsilp
