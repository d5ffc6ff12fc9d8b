#pragma once

#include <stdexcept>
#include <vector>

#include "gemqp/nonneg_qp.hpp"

namespace gemqp {

/// A proposed gradient update g together with the memory gradients g_k of
/// the previously seen tasks, ordered by task index. The list may be empty
/// (first task). All vectors must share one length and be finite.
struct GradientSet {
    VectorXd g;
    std::vector<VectorXd> memory_grads;

    GradientSet(VectorXd g_in, std::vector<VectorXd> memory_grads_in);

    Index dim() const { return g.size(); }
    Index num_memories() const { return static_cast<Index>(memory_grads.size()); }
};

enum class DualMethod { projected_gradient, active_set_bruteforce };

struct ProjectOptions {
    SolverConfig solver;
    double feas_tol = 1e-8;  // relative: scaled by |g| |g_k| per constraint
    double margin = 0.0;     // require <g~, g_k> >= margin instead of >= 0
    DualMethod method = DualMethod::projected_gradient;
};

struct ProjectionResult {
    VectorXd g_tilde;
    VectorXd v_star;             // dual certificate, >= 0; zeros when no-op
    std::vector<int> violated;   // ascending indices that triggered the solve
    double kkt_residual = 0.0;   // dual residual of the solve (0 for no-op)
    bool projected = false;      // true iff the dual solve ran
    long iterations = 0;
    SolveStatus status = SolveStatus::converged;
};

/// Raised when the dual solve stops at max_iters; carries what was
/// recovered so far.
class ProjectionAborted : public std::runtime_error {
public:
    explicit ProjectionAborted(ProjectionResult partial_result)
        : std::runtime_error("projection dual solve reached max_iters"),
          partial(std::move(partial_result)) {}

    ProjectionResult partial;
};

/// Indices k with <g, g_k> < margin - tol * |g| |g_k|, ascending.
/// tol >= 0; tol = 0 is the strict sign test.
std::vector<int> check_constraints(const GradientSet& gs, double tol,
                                   double margin = 0.0);

/// Stacks -g_k as row k, so the constraint G z <= 0 reads <z, g_k> >= 0.
MatrixXd build_constraint_matrix(const std::vector<VectorXd>& memory_grads);

/// Dual data of the projection QP: M = G G^T (symmetrized), q = -G g.
NonnegQP build_dual(const VectorXd& g, const MatrixXd& G);

/// g~ = -G^T v_star + g.
VectorXd recover(const VectorXd& g, const MatrixXd& G, const VectorXd& v_star);

/// Projects g onto {z : <z, g_k> >= margin for all k}, the closest such
/// point in Euclidean norm.
///
/// When no constraint is violated (within feas_tol, relative) the input g
/// is returned unchanged, bit for bit, with projected = false. Otherwise
/// the dual over all t-1 constraints is solved on row-normalized data, the
/// multipliers are rescaled back, and the recovered g~ is verified to be
/// feasible within feas_tol.
ProjectionResult project(const GradientSet& gs, const ProjectOptions& options = {});

}  // namespace gemqp
