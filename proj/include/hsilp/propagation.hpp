#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "hsilp/anchors.hpp"
#include "hsilp/sparse_graph.hpp"

namespace hsilp {

/// Soft labels for anchors-then-pixels rows plus the hardened argmax ids
/// (smallest index wins ties).
struct LabelMatrix {
    Eigen::MatrixXd F;              // (m+n) x c
    std::vector<int> hardened;      // per-row argmax, 0-based class index
};

enum class PropagationMode { iterative, closed_form };

struct PropagationConfig {
    double alpha = 0.99;            // balance in (0,1)
    PropagationMode mode = PropagationMode::closed_form;
    double tol = 1e-6;              // iterative convergence threshold (inf-norm)
    int max_iter = 1000;
    double cg_tol = 1e-8;           // per-column relative residual
    int workers = 1;
};

struct PropagationResult {
    LabelMatrix labels;
    int iterations = 0;             // iterative sweeps or max CG iterations over columns
    bool converged = true;
    bool used_fallback = false;     // CG stagnated, answer comes from iterative mode
    double max_residual = 0.0;      // closed form: worst per-column relative residual
};

/// Y = concat(U, F0): anchor rows first, then pixel rows.
Eigen::MatrixXd build_Y(const AnchorLabels& labels, const Eigen::MatrixXd& F0);

/// Dynamic process F(t+1) = alpha S F(t) + (1-alpha) Y with F(0) = Y, stopped
/// when the inf-norm update drops below tol. alpha may be 0 (returns Y).
PropagationResult propagate_iterative(const NormalizedGraph& graph, const Eigen::MatrixXd& Y,
                                      const PropagationConfig& config);

/// Closed form (I - alpha S) F* = Y solved by conjugate gradient per column
/// (columns share the block matvec). CG stagnation falls back to the iterative
/// mode with a flag.
PropagationResult propagate_closed_form(const NormalizedGraph& graph, const Eigen::MatrixXd& Y,
                                        const PropagationConfig& config);

struct HardenResult {
    std::vector<int> labels;               // 0-based class index per row, -1 for all-zero rows
    std::vector<Eigen::Index> zero_rows;   // rows hardened to "unclassified"
};

/// Row-wise argmax with smallest-index tie-break; all-zero rows map to -1
/// (exported as class id 0) and are reported.
HardenResult harden(const Eigen::MatrixXd& F);

// --- generic CG used by the closed-form solve (exposed for tests) ---

struct CgOptions {
    double tol = 1e-8;       // relative to ||b||
    int max_iter = 0;        // 0 -> 10 * n
    /// Called after every iteration with (iteration, current solution column
    /// block, per-column residual norms); test hook, may be null.
    std::function<void(int, const Eigen::MatrixXd&, const Eigen::VectorXd&)> on_iterate;
};

struct CgResult {
    Eigen::MatrixXd X;
    int iterations = 0;
    bool converged = true;
    Eigen::VectorXd residuals;  // final per-column relative residual norms
};

/// Block conjugate gradient for the SPD operator v -> v - alpha * S v (columns
/// of B solved simultaneously, each with its own scalar recurrences; a column
/// freezes once it converges).
CgResult cg_solve(const NormalizedGraph& graph, double alpha, const Eigen::MatrixXd& B,
                  const CgOptions& opts, int workers = 1);

}  // namespace hsilp
