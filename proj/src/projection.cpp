#include "gemqp/projection.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace gemqp {

namespace {

// Bounded number of single-constraint touch-up sweeps after recovery.
constexpr int kCleanupSweeps = 100;

// Each extra pass re-solves at the collapsed scale; the violation gate
// normally accepts after one or two.
constexpr int kMaxSolvePasses = 6;

void validate_options(const ProjectOptions& options) {
    if (options.feas_tol < 0.0)
        throw std::invalid_argument("feas_tol must be nonnegative");
    if (options.margin < 0.0)
        throw std::invalid_argument("margin must be nonnegative");
}

}  // namespace

GradientSet::GradientSet(VectorXd g_in, std::vector<VectorXd> memory_grads_in)
    : g(std::move(g_in)), memory_grads(std::move(memory_grads_in)) {
    if (g.size() < 1)
        throw std::invalid_argument("gradient must have at least one entry");
    if (!g.allFinite())
        throw std::invalid_argument("gradient contains non-finite values");
    for (std::size_t k = 0; k < memory_grads.size(); ++k) {
        if (memory_grads[k].size() != g.size()) {
            std::ostringstream msg;
            msg << "dimension mismatch: memory gradient " << k << " has length "
                << memory_grads[k].size() << ", expected " << g.size();
            throw std::invalid_argument(msg.str());
        }
        if (!memory_grads[k].allFinite()) {
            std::ostringstream msg;
            msg << "memory gradient " << k << " contains non-finite values";
            throw std::invalid_argument(msg.str());
        }
    }
}

std::vector<int> check_constraints(const GradientSet& gs, double tol,
                                   double margin) {
    if (tol < 0.0) throw std::invalid_argument("tol must be nonnegative");
    std::vector<int> violated;
    const double g_norm = gs.g.norm();
    for (Index k = 0; k < gs.num_memories(); ++k) {
        const VectorXd& gk = gs.memory_grads[static_cast<std::size_t>(k)];
        const double threshold = margin - tol * g_norm * gk.norm();
        if (gs.g.dot(gk) < threshold) violated.push_back(static_cast<int>(k));
    }
    return violated;
}

MatrixXd build_constraint_matrix(const std::vector<VectorXd>& memory_grads) {
    if (memory_grads.empty())
        throw std::invalid_argument(
            "build_constraint_matrix requires at least one memory gradient");
    const Index p = memory_grads.front().size();
    MatrixXd G(static_cast<Index>(memory_grads.size()), p);
    for (std::size_t k = 0; k < memory_grads.size(); ++k) {
        if (memory_grads[k].size() != p)
            throw std::invalid_argument(
                "dimension mismatch: memory gradients have unequal lengths");
        G.row(static_cast<Index>(k)) = -memory_grads[k].transpose();
    }
    return G;
}

NonnegQP build_dual(const VectorXd& g, const MatrixXd& G) {
    if (G.cols() != g.size())
        throw std::invalid_argument(
            "dimension mismatch: G columns must equal the gradient length");
    MatrixXd M = G * G.transpose();
    M = (0.5 * (M + M.transpose())).eval();
    return NonnegQP(std::move(M), -G * g);
}

VectorXd recover(const VectorXd& g, const MatrixXd& G, const VectorXd& v_star) {
    if (G.cols() != g.size())
        throw std::invalid_argument(
            "dimension mismatch: G columns must equal the gradient length");
    if (v_star.size() != G.rows())
        throw std::invalid_argument(
            "dimension mismatch: v_star length must equal the number of rows "
            "of G");
    return -G.transpose() * v_star + g;
}

ProjectionResult project(const GradientSet& gs, const ProjectOptions& options) {
    validate_options(options);
    const Index num_mem = gs.num_memories();

    ProjectionResult result;
    result.violated = check_constraints(gs, options.feas_tol, options.margin);
    if (result.violated.empty()) {
        result.g_tilde = gs.g;
        result.v_star = VectorXd::Zero(num_mem);
        return result;
    }

    // Solve on unit-normalized data: the feasible cone is invariant under
    // positive scaling of each g_k, and the absolute solver tolerance then
    // acts at a scale-free magnitude. Multipliers are rescaled afterwards.
    VectorXd row_scales(num_mem);
    std::vector<VectorXd> scaled_grads(static_cast<std::size_t>(num_mem));
    for (Index k = 0; k < num_mem; ++k) {
        const VectorXd& gk = gs.memory_grads[static_cast<std::size_t>(k)];
        double s = gk.norm();
        if (!(s > 0.0)) s = 1.0;
        row_scales(k) = s;
        scaled_grads[static_cast<std::size_t>(k)] = gk / s;
    }
    const MatrixXd G_scaled = build_constraint_matrix(scaled_grads);

    result.projected = true;
    result.v_star = VectorXd::Zero(num_mem);

    // The dual is solved at the scale of the current point and, when the
    // projection collapses by orders of magnitude, re-solved at the
    // collapsed scale: the absolute solver tolerance then stays a relative
    // one for the point actually returned, and the returned point passes
    // the violation gate it would face if projected again. A recovery at
    // solver-noise scale means the exact projection is the cone's apex,
    // which is returned exactly.
    VectorXd current = gs.g;
    for (int pass = 0; pass < kMaxSolvePasses; ++pass) {
        double scale = current.norm();
        if (!(scale > 0.0)) scale = 1.0;
        const VectorXd current_scaled = current / scale;

        NonnegQP dual = build_dual(current_scaled, G_scaled);
        if (options.margin > 0.0)
            dual.q.array() -= options.margin / (scale * row_scales.array());

        const SolverResult solved =
            options.method == DualMethod::projected_gradient
                ? solve_pg(dual, options.solver)
                : solve_active_set_bruteforce(dual);

        result.kkt_residual = solved.kkt_residual;
        result.iterations += solved.iterations;
        result.status = solved.status;
        result.v_star +=
            (solved.v_star.array() * (scale / row_scales.array())).matrix();

        VectorXd recovered = recover(current_scaled, G_scaled, solved.v_star);
        if (options.margin == 0.0 &&
            recovered.norm() <= std::max(1e-11, 10.0 * solved.kkt_residual))
            recovered.setZero();
        current = scale * recovered;

        if (solved.status == SolveStatus::max_iters_reached) {
            result.g_tilde = std::move(current);
            throw ProjectionAborted(std::move(result));
        }
        // A collapse spanning ten orders of magnitude is an apex in all but
        // the last bits; an ill-conditioned constraint matrix can otherwise
        // keep reproducing a noise-scale ghost with the same relative slack
        // pass after pass.
        if (options.margin == 0.0 && current.norm() <= 1e-10 * gs.g.norm()) {
            current.setZero();
            break;
        }
        if (check_constraints(GradientSet(current, gs.memory_grads),
                              options.feas_tol, options.margin)
                .empty())
            break;
    }
    result.g_tilde = std::move(current);

    // Touch up residual constraint slack so the returned point sits on or
    // inside the boundary where that costs only round-off.
    for (int sweep = 0; sweep < kCleanupSweeps; ++sweep) {
        bool adjusted = false;
        for (Index k = 0; k < num_mem; ++k) {
            const VectorXd& gk = gs.memory_grads[static_cast<std::size_t>(k)];
            const double norm_sq = gk.squaredNorm();
            if (norm_sq == 0.0) continue;
            const double inner = result.g_tilde.dot(gk);
            if (inner < options.margin) {
                result.g_tilde += ((options.margin - inner) / norm_sq) * gk;
                adjusted = true;
            }
        }
        if (!adjusted) break;
    }

    const double g_norm = gs.g.norm();
    for (Index k = 0; k < num_mem; ++k) {
        const VectorXd& gk = gs.memory_grads[static_cast<std::size_t>(k)];
        const double inner = result.g_tilde.dot(gk);
        const double bound =
            options.margin - options.feas_tol * g_norm * gk.norm();
        if (inner < bound) {
            std::ostringstream msg;
            msg << "recovered gradient violates constraint " << k << ": <g~, g_"
                << k << "> = " << inner << " < " << bound
                << " (tolerances are likely misconfigured)";
            throw std::logic_error(msg.str());
        }
    }
    return result;
}

}  // namespace gemqp
