#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gemqp/qp.hpp"
#include "test_support.hpp"

using namespace gemqp;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
    VectorXd v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

MatrixXd identity2() { return MatrixXd::Identity(2, 2); }

// The 1-D instance min 1/2 z^2 - z s.t. z <= 0, optimal at z = 0, v = 1.
PrimalQP scalar_qp() {
    MatrixXd c(1, 1), a(1, 1);
    c << 1.0;
    a << 1.0;
    return PrimalQP(c, vec({-1.0}), a, vec({0.0}));
}

}  // namespace

TEST_CASE("construction symmetrizes C and rejects bad input") {
    MatrixXd c(2, 2);
    c << 1.0, 0.5 + 4e-13, 0.5, 1.0;
    const PrimalQP qp(c, VectorXd::Zero(2), MatrixXd(0, 2), VectorXd(0));
    CHECK(qp.C()(0, 1) == qp.C()(1, 0));

    c(0, 1) = 0.5 + 1e-6;  // genuinely asymmetric
    CHECK_THROWS_AS(PrimalQP(c, VectorXd::Zero(2), MatrixXd(0, 2), VectorXd(0)),
                    std::invalid_argument);

    MatrixXd zero(1, 1);
    zero << 0.0;
    CHECK_THROWS_WITH_AS(
        PrimalQP(zero, vec({0.0}), MatrixXd(0, 1), VectorXd(0)),
        "C not positive definite", std::invalid_argument);

    MatrixXd indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(
        PrimalQP(indefinite, VectorXd::Zero(2), MatrixXd(0, 2), VectorXd(0)),
        std::invalid_argument);

    MatrixXd a(1, 3);  // wrong column count
    a << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(PrimalQP(identity2(), VectorXd::Zero(2), a, vec({0.0})),
                    std::invalid_argument);
}

TEST_CASE("primal objective") {
    const PrimalQP qp(identity2(), VectorXd::Zero(2), MatrixXd(0, 2),
                      VectorXd(0));
    CHECK(primal_objective(qp, vec({0.0, 0.0})) == 0.0);
    CHECK(primal_objective(qp, vec({1.0, 0.0})) == 0.5);

    const PrimalQP qp2(2.0 * identity2(), vec({1.0, -1.0}), MatrixXd(0, 2),
                       VectorXd(0));
    CHECK(primal_objective(qp2, vec({1.0, 1.0})) == doctest::Approx(2.0));

    CHECK_THROWS_AS(primal_objective(qp, vec({1.0})), std::invalid_argument);
}

TEST_CASE("lagrangian") {
    const PrimalQP qp = scalar_qp();
    CHECK(lagrangian(qp, vec({1.0}), vec({1.0})) == doctest::Approx(0.5));
    // v = 0 reduces to the primal objective
    CHECK(lagrangian(qp, vec({0.7}), vec({0.0})) ==
          primal_objective(qp, vec({0.7})));
    CHECK_THROWS_AS(lagrangian(qp, vec({1.0}), vec({1.0, 2.0})),
                    std::invalid_argument);
}

TEST_CASE("stationary point") {
    MatrixXd a(1, 2);
    a << 1.0, 0.0;
    const PrimalQP qp(identity2(), VectorXd::Zero(2), a, vec({0.0}));
    CHECK(stationary_point(qp, vec({0.0})).isZero(0.0));

    MatrixXd a2(1, 2);
    a2 << 0.0, -1.0;
    const PrimalQP qp2(identity2(), vec({-1.0, 1.0}), a2, vec({0.0}));
    const VectorXd z = stationary_point(qp2, vec({1.0}));
    CHECK(z(0) == doctest::Approx(1.0));
    CHECK(z(1) == doctest::Approx(0.0));

    MatrixXd c3(1, 1), a3(1, 1);
    c3 << 2.0;
    a3 << 1.0;
    const PrimalQP qp3(c3, vec({0.0}), a3, vec({0.0}));
    CHECK(stationary_point(qp3, vec({2.0}))(0) == doctest::Approx(-1.0));
}

TEST_CASE("form_dual") {
    MatrixXd a(1, 2);
    a << 1.0, 0.0;
    const DualQP d1 =
        form_dual(PrimalQP(identity2(), VectorXd::Zero(2), a, vec({0.0})));
    CHECK(d1.M(0, 0) == doctest::Approx(1.0));
    CHECK(d1.q(0) == doctest::Approx(0.0));
    CHECK(d1.constant == doctest::Approx(0.0));

    MatrixXd a2(1, 2);
    a2 << 0.0, -1.0;
    const DualQP d2 =
        form_dual(PrimalQP(identity2(), vec({-1.0, 1.0}), a2, vec({0.0})));
    CHECK(d2.M(0, 0) == doctest::Approx(1.0));
    CHECK(d2.q(0) == doctest::Approx(-1.0));
    CHECK(d2.constant == doctest::Approx(1.0));

    MatrixXd a3(1, 2);
    a3 << 1.0, 1.0;
    const DualQP d3 =
        form_dual(PrimalQP(2.0 * identity2(), vec({2.0, 0.0}), a3, vec({1.0})));
    CHECK(d3.M(0, 0) == doctest::Approx(1.0));
    CHECK(d3.q(0) == doctest::Approx(2.0));
    CHECK(d3.constant == doctest::Approx(1.0));
}

TEST_CASE("dual function value") {
    MatrixXd a(1, 2);
    a << 1.0, 0.0;
    const PrimalQP zero_w(identity2(), VectorXd::Zero(2), a, vec({0.0}));
    CHECK(dual_function_value(zero_w, vec({0.0})) == doctest::Approx(0.0));

    const PrimalQP qp = scalar_qp();
    CHECK(dual_function_value(qp, vec({1.0})) == doctest::Approx(0.0));
    // v = 0 leaves the unconstrained minimum value -1/2 w^T C^-1 w
    CHECK(dual_function_value(qp, vec({0.0})) == doctest::Approx(-0.5));
}

TEST_CASE("duality gap") {
    const PrimalQP qp = scalar_qp();
    CHECK(duality_gap(qp, vec({0.0}), vec({1.0})) ==
          doctest::Approx(0.0).epsilon(1e-8));
    CHECK(duality_gap(qp, vec({0.0}), vec({0.0})) == doctest::Approx(0.5));

    CHECK_THROWS_WITH_AS(duality_gap(qp, vec({0.0}), vec({-1.0})),
                         doctest::Contains("v[0]"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(duality_gap(qp, vec({1.0}), vec({1.0})),
                         doctest::Contains("constraint 0"),
                         std::invalid_argument);
}

TEST_CASE("unconstrained problems are legal everywhere") {
    DeterministicRng rng(11);
    const PrimalQP qp(test::random_spd(rng, 3), rng.normal_vector(3),
                      MatrixXd(0, 3), VectorXd(0));
    const VectorXd empty(0);
    const DualQP dual = form_dual(qp);
    CHECK(dual.size() == 0);
    const VectorXd z = stationary_point(qp, empty);
    CHECK(dual_function_value(qp, empty) ==
          doctest::Approx(primal_objective(qp, z)));
    CHECK(duality_gap(qp, z, empty) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("weak duality over random instances") {
    DeterministicRng rng(101);
    int tested = 0;
    while (tested < 1000) {
        const Index p = rng.uniform_int(1, 10);
        const Index m = rng.uniform_int(0, 6);
        const PrimalQP qp = test::random_primal_qp(rng, p, m);

        VectorXd z;
        bool feasible = false;
        for (int attempt = 0; attempt < 2000 && !feasible; ++attempt) {
            z = rng.normal_vector(p);
            feasible = m == 0 || ((qp.A() * z - qp.b()).maxCoeff() <= 0.0);
        }
        if (!feasible) continue;

        VectorXd v = rng.normal_vector(m).cwiseAbs();
        const double gap = duality_gap(qp, z, v);
        const double bound = -1e-9 * (1.0 + std::abs(primal_objective(qp, z)));
        CHECK(gap >= bound);
        ++tested;
    }
}

TEST_CASE("stationarity and dual consistency for random multipliers") {
    DeterministicRng rng(202);
    for (int it = 0; it < 300; ++it) {
        const Index p = rng.uniform_int(1, 10);
        const Index m = rng.uniform_int(1, 6);
        const PrimalQP qp = test::random_primal_qp(rng, p, m);
        const VectorXd v = rng.normal_vector(m);  // negative entries included

        const VectorXd z = stationary_point(qp, v);
        const double stat =
            (qp.C() * z + qp.A().transpose() * v + qp.w()).cwiseAbs().maxCoeff();
        CHECK(stat <= 1e-9 * (1.0 + qp.w().cwiseAbs().maxCoeff()));

        const double through_dual = dual_function_value(qp, v);
        const double through_lagrangian = lagrangian(qp, z, v);
        CHECK(through_dual ==
              doctest::Approx(through_lagrangian).epsilon(1e-9));
    }
}

TEST_CASE("form_dual produces PSD M") {
    DeterministicRng rng(303);
    for (int it = 0; it < 200; ++it) {
        const Index p = rng.uniform_int(1, 10);
        const Index m = rng.uniform_int(1, 6);
        const DualQP dual = form_dual(test::random_primal_qp(rng, p, m));
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(dual.M);
        const double floor =
            -1e-10 * (1.0 + dual.M.cwiseAbs().maxCoeff());
        CHECK(eig.eigenvalues().minCoeff() >= floor);
    }
}

TEST_CASE("identity C gives the plain Gram dual") {
    DeterministicRng rng(404);
    for (int it = 0; it < 100; ++it) {
        const Index p = rng.uniform_int(1, 12);
        const Index m = rng.uniform_int(1, 6);
        const MatrixXd a = rng.normal_matrix(m, p);
        const PrimalQP qp(MatrixXd::Identity(p, p), rng.normal_vector(p), a,
                          rng.normal_vector(m));
        const DualQP dual = form_dual(qp);
        MatrixXd gram(m, m);
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j) gram(i, j) = a.row(i).dot(a.row(j));
        CHECK((dual.M - gram).cwiseAbs().maxCoeff() <= 1e-12);
    }
}
