#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace gemqp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Quadratic program over the nonnegative orthant:
///
///   minimize_v  1/2 v^T M v + q^T v   subject to  v >= 0
///
/// with M symmetric positive semidefinite. Construction symmetrizes M and
/// rejects asymmetry beyond floating-point noise; m must be >= 1.
struct NonnegQP {
    MatrixXd M;
    VectorXd q;

    NonnegQP(MatrixXd M_in, VectorXd q_in);

    Index size() const { return q.size(); }
};

struct SolverConfig {
    long max_iters = 100000;
    double tol_kkt = 1e-10;  // absolute, on the KKT residual
    double ridge = 0.0;      // optional eps*I added to M for conditioning
    bool acceleration = true;
};

enum class SolveStatus { converged, max_iters_reached };

std::string to_string(SolveStatus status);

struct SolverResult {
    VectorXd v_star;  // >= 0 elementwise, exactly
    long iterations = 0;
    double kkt_residual = 0.0;
    SolveStatus status = SolveStatus::converged;
};

/// 1/2 v^T M v + q^T v.
double objective(const NonnegQP& problem, const VectorXd& v);

/// |min(v, M v + q)|_inf with the min taken elementwise. Zero exactly when
/// v satisfies the first-order conditions: stationarity where v > 0,
/// nonnegative gradient where v = 0, and complementarity. Requires v >= 0.
double kkt_residual(const NonnegQP& problem, const VectorXd& v);

/// Projected gradient from v0 = 0 with fixed step 1/trace(M), optionally
/// Nesterov-accelerated with a function-value restart so the objective
/// sequence is nonincreasing. The iterate is periodically refined by an
/// exact least-squares solve on the indicated support, accepted only when
/// it improves both objective and residual. Deterministic: identical
/// inputs and config give bit-identical results.
///
/// With ridge > 0 the iteration, the convergence test and the reported
/// residual all refer to the perturbed matrix M + ridge*I.
///
/// If objective_trace is non-null it receives the objective value at v0
/// followed by the value after every accepted update.
SolverResult solve_pg(const NonnegQP& problem, const SolverConfig& config = {},
                      std::vector<double>* objective_trace = nullptr);

/// Exact reference solver: enumerates all 2^m supports, solves each
/// support's subsystem by least squares (so singular PSD submatrices are
/// fine), keeps candidates that are primal and dual feasible up to slack,
/// and returns the feasible candidate with the smallest objective.
/// Requires m <= 16.
SolverResult solve_active_set_bruteforce(const NonnegQP& problem);

}  // namespace gemqp
