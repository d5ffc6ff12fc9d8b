#pragma once

#include <Eigen/Dense>

namespace gemqp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Inequality-constrained quadratic program
///
///   minimize_z  1/2 z^T C z + w^T z   subject to  A z <= b
///
/// with C symmetric positive definite. The constructor symmetrizes C
/// (rejecting anything asymmetric beyond floating-point noise), factorizes
/// it as L D L^T with positive pivots, and keeps the factors; an explicit
/// inverse of C is never formed. m = 0 (no constraints) is legal.
///
/// Immutable after construction; safe for concurrent reads.
class PrimalQP {
public:
    PrimalQP(MatrixXd C, VectorXd w, MatrixXd A, VectorXd b);

    Index dim() const { return w_.size(); }
    Index num_constraints() const { return b_.size(); }

    const MatrixXd& C() const { return C_; }
    const VectorXd& w() const { return w_; }
    const MatrixXd& A() const { return A_; }
    const VectorXd& b() const { return b_; }

    /// Solve C x = rhs through the stored factorization.
    VectorXd solve_C(const VectorXd& rhs) const;
    /// Column-wise variant of solve_C.
    MatrixXd solve_C(const MatrixXd& rhs) const;

private:
    MatrixXd C_;
    VectorXd w_;
    MatrixXd A_;
    VectorXd b_;
    MatrixXd chol_l_;  // unit lower triangular factor
    VectorXd chol_d_;  // positive pivots
};

/// Lagrangian dual data of a PrimalQP:
///
///   minimize_v  1/2 v^T M v + q^T v   subject to  v >= 0
///
/// with M = A C^-1 A^T and q = A C^-1 w + b. `constant` keeps the term
/// 1/2 w^T C^-1 w that the dual objective drops, so that true dual
/// function values (and hence exact duality gaps) can be recovered.
struct DualQP {
    MatrixXd M;
    VectorXd q;
    double constant = 0.0;

    Index size() const { return q.size(); }
};

/// 1/2 z^T C z + w^T z.
double primal_objective(const PrimalQP& qp, const VectorXd& z);

/// L(z, v) = 1/2 z^T C z + w^T z + v^T (A z - b).
double lagrangian(const PrimalQP& qp, const VectorXd& z, const VectorXd& v);

/// The unique minimizer of L(., v): z* = -C^-1 (A^T v + w).
/// Defined for every v, including negative entries.
VectorXd stationary_point(const PrimalQP& qp, const VectorXd& v);

/// Builds the dual QP data (M, q, constant) from the primal.
DualQP form_dual(const PrimalQP& qp);

/// Dual objective value -(1/2 v^T M v + q^T v) - constant for given dual data.
double dual_value(const DualQP& dual, const VectorXd& v);

/// g(v) = inf_z L(z, v), evaluated through form_dual. Equals
/// lagrangian(qp, stationary_point(qp, v), v) up to round-off.
double dual_function_value(const PrimalQP& qp, const VectorXd& v);

/// primal_objective(qp, z) - dual_function_value(qp, v).
///
/// Preconditions checked: v >= 0 and A z <= b + feas_tol elementwise;
/// a violated entry raises an error naming its index. Nonnegative (up to
/// round-off) by weak duality whenever the preconditions hold.
double duality_gap(const PrimalQP& qp, const VectorXd& z, const VectorXd& v,
                   double feas_tol = 1e-8);

/// Worst violation of the primal-dual optimality system at (z, v):
/// max of stationarity |C z + w + A^T v|_inf, constraint violation
/// max(0, A z - b), complementarity |v_i (A z - b)_i|, and multiplier
/// negativity max(0, -v_i). Zero exactly at an optimal pair.
double primal_dual_kkt_residual(const PrimalQP& qp, const VectorXd& z,
                                const VectorXd& v);

}  // namespace gemqp
