#include "gemqp/nonneg_qp.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gemqp {

namespace {

constexpr double kSymmetryTol = 1e-12;

// Oracle acceptance slacks: primal sign of the subsystem solution and the
// dual gradient off the support.
constexpr double kPrimalSlack = 1e-12;
constexpr double kDualSlack = 1e-9;

double residual_inf(const MatrixXd& M, const VectorXd& q, const VectorXd& v) {
    return v.cwiseMin(M * v + q).cwiseAbs().maxCoeff();
}

// Solves the stationarity system on the currently indicated support by
// least squares and adopts the result when it improves both the objective
// and the residual. Projected gradient identifies the optimal support
// quickly but can crawl toward the exact values on ill-conditioned or
// singular M; this lands on them directly. Supports with negative
// subsystem solutions are shrunk one coordinate at a time, as in the
// Lawson-Hanson inner loop, since a min-norm least-squares solution on a
// singular block may go negative even when a nonnegative one exists.
bool attempt_support_polish(const MatrixXd& M, const VectorXd& q, VectorXd& v,
                            double& f_v) {
    const Index m = v.size();
    const VectorXd grad = M * v + q;
    std::vector<Index> support;
    for (Index i = 0; i < m; ++i)
        if (v(i) > 0.0 || grad(i) < 0.0) support.push_back(i);

    VectorXd candidate = VectorXd::Zero(m);
    while (!support.empty()) {
        const Index s = static_cast<Index>(support.size());
        MatrixXd sub(s, s);
        VectorXd rhs(s);
        for (Index a = 0; a < s; ++a) {
            rhs(a) = -q(support[a]);
            for (Index b = 0; b < s; ++b) sub(a, b) = M(support[a], support[b]);
        }
        const VectorXd x = sub.completeOrthogonalDecomposition().solve(rhs);
        Index worst = -1;
        double worst_value = -kPrimalSlack;
        for (Index a = 0; a < s; ++a) {
            if (x(a) < worst_value) {
                worst_value = x(a);
                worst = a;
            }
        }
        if (worst < 0) {
            for (Index a = 0; a < s; ++a)
                candidate(support[a]) = std::max(x(a), 0.0);
            break;
        }
        support.erase(support.begin() + worst);
    }

    const double f_c = 0.5 * candidate.dot(M * candidate) + q.dot(candidate);
    if (!(f_c <= f_v)) return false;
    if (residual_inf(M, q, candidate) > residual_inf(M, q, v)) return false;
    v = std::move(candidate);
    f_v = f_c;
    return true;
}

constexpr long kPolishInterval = 25;

}  // namespace

NonnegQP::NonnegQP(MatrixXd M_in, VectorXd q_in)
    : M(std::move(M_in)), q(std::move(q_in)) {
    if (M.rows() != M.cols()) throw std::invalid_argument("M must be square");
    if (M.rows() < 1)
        throw std::invalid_argument("nonnegative QP needs at least one variable");
    if (q.size() != M.rows()) {
        std::ostringstream msg;
        msg << "dimension mismatch: q has length " << q.size() << ", expected "
            << M.rows();
        throw std::invalid_argument(msg.str());
    }
    if (!M.allFinite() || !q.allFinite())
        throw std::invalid_argument("QP data contains non-finite values");
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol) {
        std::ostringstream msg;
        msg << "M is asymmetric beyond tolerance: max |M - M^T| = " << asym;
        throw std::invalid_argument(msg.str());
    }
    M = (0.5 * (M + M.transpose())).eval();
}

std::string to_string(SolveStatus status) {
    return status == SolveStatus::converged ? "converged" : "max_iters_reached";
}

double objective(const NonnegQP& problem, const VectorXd& v) {
    if (v.size() != problem.size())
        throw std::invalid_argument("dimension mismatch: v");
    return 0.5 * v.dot(problem.M * v) + problem.q.dot(v);
}

double kkt_residual(const NonnegQP& problem, const VectorXd& v) {
    if (v.size() != problem.size())
        throw std::invalid_argument("dimension mismatch: v");
    for (Index i = 0; i < v.size(); ++i) {
        if (v(i) < 0.0) {
            std::ostringstream msg;
            msg << "kkt_residual: v[" << i << "] = " << v(i) << " is negative";
            throw std::invalid_argument(msg.str());
        }
    }
    return residual_inf(problem.M, problem.q, v);
}

SolverResult solve_pg(const NonnegQP& problem, const SolverConfig& config,
                      std::vector<double>* objective_trace) {
    if (config.max_iters < 1)
        throw std::invalid_argument("max_iters must be >= 1");
    if (!(config.tol_kkt > 0.0))
        throw std::invalid_argument("tol_kkt must be positive");
    if (config.ridge < 0.0)
        throw std::invalid_argument("ridge must be nonnegative");

    MatrixXd M = problem.M;
    if (config.ridge > 0.0) M.diagonal().array() += config.ridge;
    const VectorXd& q = problem.q;

    // trace(M) >= |M|_2 for PSD M, so 1/L is a safe descent step.
    double step_l = M.trace();
    if (!(step_l > 0.0)) step_l = 1.0;

    const Index m = problem.size();
    VectorXd v = VectorXd::Zero(m);
    VectorXd y = v;
    double f_v = 0.0;  // objective at v0 = 0
    double momentum = 1.0;

    if (objective_trace) {
        objective_trace->clear();
        objective_trace->push_back(f_v);
    }

    auto value = [&](const VectorXd& u) {
        return 0.5 * u.dot(M * u) + q.dot(u);
    };

    for (long iter = 0;; ++iter) {
        double res = residual_inf(M, q, v);
        if (res <= config.tol_kkt) {
            // One last refinement so the reported point is as tight as the
            // support system allows, not merely within tolerance.
            if (attempt_support_polish(M, q, v, f_v)) {
                if (objective_trace) objective_trace->push_back(f_v);
                res = residual_inf(M, q, v);
            }
            return {v, iter, res, SolveStatus::converged};
        }
        if (iter >= config.max_iters)
            return {v, iter, res, SolveStatus::max_iters_reached};

        if (iter > 0 && iter % kPolishInterval == 0 &&
            attempt_support_polish(M, q, v, f_v)) {
            y = v;
            momentum = 1.0;
            if (objective_trace) objective_trace->push_back(f_v);
            res = residual_inf(M, q, v);
            if (res <= config.tol_kkt)
                return {v, iter, res, SolveStatus::converged};
        }

        VectorXd next;
        double f_next = 0.0;
        bool accelerated = false;
        if (config.acceleration) {
            VectorXd trial = (y - (M * y + q) / step_l).cwiseMax(0.0);
            const double f_trial = value(trial);
            if (f_trial <= f_v) {
                next = std::move(trial);
                f_next = f_trial;
                accelerated = true;
            }
        }
        if (!accelerated) {
            // Plain projected-gradient step from v; cannot increase the
            // objective for step 1/L. Also serves as the momentum restart.
            next = (v - (M * v + q) / step_l).cwiseMax(0.0);
            f_next = value(next);
            momentum = 1.0;
        }

        if (accelerated) {
            const double momentum_next =
                0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            y = next + ((momentum - 1.0) / momentum_next) * (next - v);
            momentum = momentum_next;
        } else {
            y = next;
        }
        v = std::move(next);
        f_v = f_next;
        if (objective_trace) objective_trace->push_back(f_v);
    }
}

SolverResult solve_active_set_bruteforce(const NonnegQP& problem) {
    const Index m = problem.size();
    if (m > 16)
        throw std::invalid_argument(
            "active-set enumeration is limited to m <= 16");

    const MatrixXd& M = problem.M;
    const VectorXd& q = problem.q;

    bool found = false;
    double best_objective = std::numeric_limits<double>::infinity();
    VectorXd best_v;

    const unsigned long num_supports = 1ul << m;
    for (unsigned long mask = 0; mask < num_supports; ++mask) {
        std::vector<Index> support;
        for (Index i = 0; i < m; ++i)
            if (mask & (1ul << i)) support.push_back(i);

        VectorXd v = VectorXd::Zero(m);
        if (!support.empty()) {
            const Index s = static_cast<Index>(support.size());
            MatrixXd sub(s, s);
            VectorXd rhs(s);
            for (Index a = 0; a < s; ++a) {
                rhs(a) = -q(support[a]);
                for (Index b = 0; b < s; ++b) sub(a, b) = M(support[a], support[b]);
            }
            // Least squares keeps the enumeration total on singular PSD blocks.
            const VectorXd vs = sub.completeOrthogonalDecomposition().solve(rhs);
            if (vs.minCoeff() < -kPrimalSlack) continue;
            for (Index a = 0; a < s; ++a) v(support[a]) = std::max(vs(a), 0.0);
        }

        const VectorXd grad = M * v + q;
        bool dual_feasible = true;
        for (Index i = 0; i < m && dual_feasible; ++i) {
            if (!(mask & (1ul << i)) && grad(i) < -kDualSlack)
                dual_feasible = false;
        }
        if (!dual_feasible) continue;

        const double obj = 0.5 * v.dot(M * v) + q.dot(v);
        if (!found || obj < best_objective) {
            found = true;
            best_objective = obj;
            best_v = v;
        }
    }

    if (!found)
        throw std::logic_error(
            "active-set enumeration accepted no candidate; M is likely not "
            "positive semidefinite");

    return {best_v, static_cast<long>(num_supports),
            residual_inf(M, q, best_v), SolveStatus::converged};
}

}  // namespace gemqp
