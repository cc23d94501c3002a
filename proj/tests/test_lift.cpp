#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "regenstab/lift.hpp"
#include "regenstab/linalg.hpp"

using namespace regenstab;

TEST_CASE("lift_dimension matches the monomial count") {
    CHECK(lift_dimension(2, 2) == 3);
    CHECK(lift_dimension(3, 1) == 3);
    // Enumerate exponents of x1+x2+x3 at degree 2 by hand: 6.
    CHECK(lift_dimension(3, 2) == 6);
    CHECK(lift_dimension(2, 8) == 9);
    CHECK(lift_dimension(4, 4) == 35);
}

TEST_CASE("lift_dimension rejects unsupported degrees and overflow") {
    CHECK_THROWS_AS(lift_dimension(2, 0), DimensionError);
    CHECK_THROWS_AS(lift_dimension(2, 9), DimensionError);
    CHECK_THROWS_AS(lift_dimension(0, 2), ValidationError);
    CHECK_THROWS_AS(lift_dimension(100, 8), DimensionError);
}

TEST_CASE("basis is descending lexicographic with multinomial weights") {
    const LiftBasis basis(2, 2);
    REQUIRE(basis.size() == 3);
    CHECK(basis.index(0) == MultiIndex{2, 0});
    CHECK(basis.index(1) == MultiIndex{1, 1});
    CHECK(basis.index(2) == MultiIndex{0, 2});
    CHECK(basis.coeff(0) == doctest::Approx(1.0));
    CHECK(basis.coeff(1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(basis.coeff(2) == doctest::Approx(1.0));
    CHECK(basis.label(0) == "x1^2");
    CHECK(basis.label(1) == "x1*x2");
}

TEST_CASE("lift_vector on fixed points") {
    Eigen::Vector2d e1(1.0, 0.0);
    Eigen::VectorXd lifted = lift_vector(e1, 2);
    CHECK(lifted(0) == doctest::Approx(1.0));
    CHECK(lifted(1) == doctest::Approx(0.0));
    CHECK(lifted(2) == doctest::Approx(0.0));

    Eigen::Vector2d ones(1.0, 1.0);
    lifted = lift_vector(ones, 2);
    CHECK(lifted(0) == doctest::Approx(1.0));
    CHECK(lifted(1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(lifted(2) == doctest::Approx(1.0));
    CHECK(lifted.norm() == doctest::Approx(2.0));
}

TEST_CASE("norm identity |lift(x)| = |x|^m") {
    RngStream rng(11, 0);
    for (int n : {2, 3}) {
        for (int m = 1; m <= 4; ++m) {
            const LiftBasis basis(n, m);
            for (int rep = 0; rep < 50; ++rep) {
                const Eigen::VectorXd x = oracles::random_vector(rng, n, 2.0);
                const double lhs = lift_vector(x, basis).norm();
                const double rhs = std::pow(x.norm(), m);
                CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
            }
        }
    }
}

TEST_CASE("degree-3 norm identity in closed form") {
    RngStream rng(12, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        const Eigen::Vector2d x(a, b);
        const double expected = std::pow(a * a + b * b, 1.5);
        CHECK(lift_vector(x, 3).norm() == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("lift_matrix on fixed points") {
    CHECK(lift_matrix(Eigen::Matrix2d::Identity(), 2).mat.isApprox(Eigen::Matrix3d::Identity()));

    Eigen::Matrix2d D = Eigen::Vector2d(1.3, -0.7).asDiagonal();
    const Eigen::MatrixXd L = lift_matrix(D, 2).mat;
    Eigen::Vector3d expected(1.3 * 1.3, 1.3 * -0.7, 0.7 * 0.7);
    CHECK(L.isApprox(Eigen::MatrixXd(expected.asDiagonal()), 1e-14));
}

TEST_CASE("lift_matrix represents the lifted map") {
    RngStream rng(13, 0);
    for (int n : {2, 3}) {
        for (int m = 1; m <= 3; ++m) {
            const LiftBasis basis(n, m);
            for (int rep = 0; rep < 20; ++rep) {
                const Eigen::MatrixXd A = oracles::random_matrix(rng, n, n);
                const Eigen::VectorXd x = oracles::random_vector(rng, n);
                const Eigen::VectorXd direct = lift_vector((A * x).eval(), basis);
                const Eigen::VectorXd mapped = lift_matrix(A, basis).mat * lift_vector(x, basis);
                CHECK((direct - mapped).norm() <= 1e-10);
            }
        }
    }
}

TEST_CASE("lift_matrix is multiplicative") {
    RngStream rng(14, 0);
    for (int n : {2, 3}) {
        for (int m = 1; m <= 4; ++m) {
            for (int rep = 0; rep < 25; ++rep) {
                Eigen::MatrixXd A = oracles::random_matrix(rng, n, n);
                Eigen::MatrixXd B = oracles::random_matrix(rng, n, n);
                A /= A.norm();
                B /= B.norm();
                const Eigen::MatrixXd lhs = lift_matrix((A * B).eval(), m).mat;
                const Eigen::MatrixXd rhs = lift_matrix(A, m).mat * lift_matrix(B, m).mat;
                CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
            }
        }
    }
}

TEST_CASE("lift agrees with the compressed Kronecker power") {
    RngStream rng(15, 0);
    for (int n : {2, 3}) {
        for (int m : {2, 3}) {
            const Eigen::MatrixXd A = oracles::random_matrix(rng, n, n);
            const Eigen::MatrixXd direct = lift_matrix(A, m).mat;
            const Eigen::MatrixXd compressed = oracles::kronecker_lift(A, m);
            CHECK((direct - compressed).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("scaling homogeneity of the lifted vector") {
    RngStream rng(16, 0);
    for (int m = 1; m <= 4; ++m) {
        const Eigen::VectorXd x = oracles::random_vector(rng, 3);
        const double lambda = rng.uniform(-2, 2);
        const Eigen::VectorXd lhs = lift_vector((lambda * x).eval(), m);
        const Eigen::VectorXd rhs = std::pow(lambda, m) * lift_vector(x, m);
        CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("nonnegative vectors lift to nonnegative vectors") {
    RngStream rng(17, 0);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd x = oracles::random_vector(rng, 3).cwiseAbs();
        for (int m = 1; m <= 4; ++m) CHECK(lift_vector(x, m).minCoeff() >= 0.0);
    }
}

TEST_CASE("infinitesimal lift on fixed points") {
    CHECK(infinitesimal_lift(Eigen::Matrix2d::Zero(), 3).mat.isZero());

    // dx1/dt = x2 gives d(x1^2)/dt = 2 x1 x2 and d(sqrt2 x1 x2)/dt = sqrt2 x2^2.
    Eigen::Matrix2d N;
    N << 0, 1, 0, 0;
    Eigen::Matrix3d expected;
    const double s2 = std::sqrt(2.0);
    expected << 0, s2, 0, 0, 0, s2, 0, 0, 0;
    CHECK(infinitesimal_lift(N, 2).mat.isApprox(expected, 1e-14));
}

TEST_CASE("exp of the infinitesimal lift equals the lift of exp") {
    RngStream rng(18, 0);
    for (int n : {2, 3}) {
        for (int m = 1; m <= 4; ++m) {
            for (double t : {0.1, 1.0, 5.0}) {
                Eigen::MatrixXd A = oracles::random_matrix(rng, n, n);
                A /= A.norm();
                const Eigen::MatrixXd lhs = expm((infinitesimal_lift(A, m).mat * t).eval());
                const Eigen::MatrixXd rhs = lift_matrix(expm((A * t).eval()), m).mat;
                const double scale = std::max(1.0, rhs.norm());
                CHECK((lhs - rhs).norm() <= 1e-9 * scale);
            }
        }
    }
}

TEST_CASE("spectral radius of the lift is the m-th power") {
    RngStream rng(19, 0);
    for (int n : {2, 3}) {
        for (int m = 1; m <= 4; ++m) {
            for (int rep = 0; rep < 10; ++rep) {
                const Eigen::MatrixXd A = oracles::random_matrix(rng, n, n);
                const double rho = spectral_radius(A).radius;
                const double rho_lift = spectral_radius(lift_matrix(A, m).mat).radius;
                CHECK(std::abs(rho_lift - std::pow(rho, m)) <= 1e-8 * std::max(1e-12, std::pow(rho, m)));
            }
        }
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const LiftBasis basis(2, 2);
    Eigen::Vector3d wrong(1, 2, 3);
    CHECK_THROWS_AS(lift_vector(wrong, basis), ValidationError);
    CHECK_THROWS_AS(lift_matrix(Eigen::MatrixXd::Zero(2, 3), 2), ValidationError);
    CHECK_THROWS_AS(infinitesimal_lift(Eigen::MatrixXd::Zero(3, 3), basis), ValidationError);
}
