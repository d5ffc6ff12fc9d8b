#include "gemqp/qp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gemqp {

namespace {

constexpr double kSymmetryTol = 1e-12;

// Square-root-free Cholesky C = L D L^T, L unit lower triangular.
// Throws unless every pivot is strictly positive.
void factorize_spd(const MatrixXd& C, MatrixXd& L, VectorXd& d) {
    const Index p = C.rows();
    L = MatrixXd::Identity(p, p);
    d = VectorXd::Zero(p);
    for (Index j = 0; j < p; ++j) {
        double dj = C(j, j);
        for (Index k = 0; k < j; ++k) dj -= L(j, k) * L(j, k) * d(k);
        if (!(dj > 0.0)) throw std::invalid_argument("C not positive definite");
        d(j) = dj;
        for (Index i = j + 1; i < p; ++i) {
            double s = C(i, j);
            for (Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k) * d(k);
            L(i, j) = s / dj;
        }
    }
}

void require_size(const VectorXd& x, Index n, const char* what) {
    if (x.size() != n) {
        std::ostringstream msg;
        msg << "dimension mismatch: " << what << " has length " << x.size()
            << ", expected " << n;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

PrimalQP::PrimalQP(MatrixXd C, VectorXd w, MatrixXd A, VectorXd b)
    : C_(std::move(C)), w_(std::move(w)), A_(std::move(A)), b_(std::move(b)) {
    if (C_.rows() != C_.cols())
        throw std::invalid_argument("C must be square");
    const Index p = C_.rows();
    if (p < 1) throw std::invalid_argument("C must have at least one row");
    require_size(w_, p, "w");
    if (A_.rows() == 0) {
        A_.resize(0, p);
    } else if (A_.cols() != p) {
        std::ostringstream msg;
        msg << "dimension mismatch: A has " << A_.cols() << " columns, expected "
            << p;
        throw std::invalid_argument(msg.str());
    }
    require_size(b_, A_.rows(), "b");
    if (!C_.allFinite() || !w_.allFinite() || !A_.allFinite() || !b_.allFinite())
        throw std::invalid_argument("QP data contains non-finite values");

    const double asym = (C_ - C_.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol) {
        std::ostringstream msg;
        msg << "C is asymmetric beyond tolerance: max |C - C^T| = " << asym;
        throw std::invalid_argument(msg.str());
    }
    C_ = (0.5 * (C_ + C_.transpose())).eval();
    factorize_spd(C_, chol_l_, chol_d_);
}

VectorXd PrimalQP::solve_C(const VectorXd& rhs) const {
    require_size(rhs, dim(), "rhs");
    VectorXd x = chol_l_.triangularView<Eigen::UnitLower>().solve(rhs);
    x.array() /= chol_d_.array();
    return chol_l_.transpose().triangularView<Eigen::UnitUpper>().solve(x);
}

MatrixXd PrimalQP::solve_C(const MatrixXd& rhs) const {
    if (rhs.rows() != dim())
        throw std::invalid_argument("dimension mismatch: rhs rows must equal p");
    MatrixXd x = chol_l_.triangularView<Eigen::UnitLower>().solve(rhs);
    x.array().colwise() /= chol_d_.array();
    return chol_l_.transpose().triangularView<Eigen::UnitUpper>().solve(x);
}

double primal_objective(const PrimalQP& qp, const VectorXd& z) {
    require_size(z, qp.dim(), "z");
    return 0.5 * z.dot(qp.C() * z) + qp.w().dot(z);
}

double lagrangian(const PrimalQP& qp, const VectorXd& z, const VectorXd& v) {
    require_size(z, qp.dim(), "z");
    require_size(v, qp.num_constraints(), "v");
    return primal_objective(qp, z) + v.dot(qp.A() * z - qp.b());
}

VectorXd stationary_point(const PrimalQP& qp, const VectorXd& v) {
    require_size(v, qp.num_constraints(), "v");
    return -qp.solve_C((qp.A().transpose() * v + qp.w()).eval());
}

DualQP form_dual(const PrimalQP& qp) {
    DualQP dual;
    const MatrixXd cinv_at = qp.solve_C(MatrixXd(qp.A().transpose()));
    dual.M = qp.A() * cinv_at;
    dual.M = (0.5 * (dual.M + dual.M.transpose())).eval();
    const VectorXd cinv_w = qp.solve_C(qp.w());
    dual.q = qp.A() * cinv_w + qp.b();
    dual.constant = 0.5 * qp.w().dot(cinv_w);
    return dual;
}

double dual_value(const DualQP& dual, const VectorXd& v) {
    require_size(v, dual.size(), "v");
    return -(0.5 * v.dot(dual.M * v) + dual.q.dot(v)) - dual.constant;
}

double dual_function_value(const PrimalQP& qp, const VectorXd& v) {
    return dual_value(form_dual(qp), v);
}

double duality_gap(const PrimalQP& qp, const VectorXd& z, const VectorXd& v,
                   double feas_tol) {
    require_size(z, qp.dim(), "z");
    require_size(v, qp.num_constraints(), "v");
    for (Index i = 0; i < v.size(); ++i) {
        if (v(i) < 0.0) {
            std::ostringstream msg;
            msg << "duality_gap: multiplier v[" << i << "] = " << v(i)
                << " is negative";
            throw std::invalid_argument(msg.str());
        }
    }
    const VectorXd slack = qp.A() * z - qp.b();
    for (Index i = 0; i < slack.size(); ++i) {
        if (slack(i) > feas_tol) {
            std::ostringstream msg;
            msg << "duality_gap: z violates constraint " << i << " by "
                << slack(i);
            throw std::invalid_argument(msg.str());
        }
    }
    return primal_objective(qp, z) - dual_function_value(qp, v);
}

double primal_dual_kkt_residual(const PrimalQP& qp, const VectorXd& z,
                                const VectorXd& v) {
    require_size(z, qp.dim(), "z");
    require_size(v, qp.num_constraints(), "v");
    double res =
        (qp.C() * z + qp.w() + qp.A().transpose() * v).cwiseAbs().maxCoeff();
    if (qp.num_constraints() > 0) {
        const VectorXd slack = qp.A() * z - qp.b();
        res = std::max(res, std::max(0.0, slack.maxCoeff()));
        res = std::max(res, v.cwiseProduct(slack).cwiseAbs().maxCoeff());
        res = std::max(res, std::max(0.0, -v.minCoeff()));
    }
    return res;
}

}  // namespace gemqp
