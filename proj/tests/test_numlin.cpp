#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "lsh/numlin.hpp"
#include "support.hpp"

using namespace lsh;

TEST_CASE("SymMatrix symmetrizes on construction") {
    MatrixXd m(2, 2);
    m << 1.0, 0.3, 0.1, 2.0;
    const SymMatrix s(m);
    CHECK(s(0, 1) == s(1, 0));
    CHECK(s(0, 1) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK_THROWS_AS(SymMatrix(MatrixXd::Zero(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(SymMatrix{MatrixXd()}, std::invalid_argument);
}

TEST_CASE("sym_eig on frozen instances") {
    CHECK(sym_eig(SymMatrix::identity(2)).eigenvalues.isApproxToConstant(1.0, 1e-14));

    MatrixXd d(2, 2);
    d << 3.0, 0.0, 0.0, 1.0;
    const Spectrum sd = sym_eig(SymMatrix(d));
    CHECK(sd.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sd.eigenvalues(1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(std::abs(sd.eigenvectors(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));

    MatrixXd c(2, 2);
    c << 1.0, 0.2, 0.2, 1.0;
    const Spectrum sc = sym_eig(SymMatrix(c));
    CHECK(sc.eigenvalues(0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(sc.eigenvalues(1) == doctest::Approx(1.2).epsilon(1e-14));
}

TEST_CASE("sym_eig properties against an independent solver") {
    std::mt19937_64 gen(11);
    for (int iter = 0; iter < 60; ++iter) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(iter % 6);
        const SymMatrix s(test::random_matrix(gen, n, n));
        const Spectrum spec = sym_eig(s);

        // eigenvalues ascending
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            CHECK(spec.eigenvalues(i) <= spec.eigenvalues(i + 1));
        }
        // orthonormality and reconstruction
        CHECK((spec.eigenvectors.transpose() * spec.eigenvectors - MatrixXd::Identity(n, n))
                  .norm() <= 1e-10);
        const MatrixXd rebuilt =
            spec.eigenvectors * spec.eigenvalues.asDiagonal() * spec.eigenvectors.transpose();
        CHECK(test::close_mat(rebuilt, s.mat(), 1e-9));
        // eigenvalue sum equals trace
        CHECK(test::close_rel(spec.eigenvalues.sum(), s.mat().trace(), 1e-10));

        // agreement with Eigen's solver
        Eigen::SelfAdjointEigenSolver<MatrixXd> ref(s.mat());
        CHECK((spec.eigenvalues - ref.eigenvalues()).norm() <= 1e-10 * (1.0 + s.mat().norm()));
    }
}

TEST_CASE("spd_sqrt frozen and roundtrip") {
    const SpdSqrt id = spd_sqrt(SymMatrix::identity(3));
    CHECK(test::close_mat(id.root.mat(), MatrixXd::Identity(3, 3), 1e-14));
    CHECK(test::close_mat(id.inv_root.mat(), MatrixXd::Identity(3, 3), 1e-14));

    MatrixXd d(2, 2);
    d << 4.0, 0.0, 0.0, 9.0;
    const SpdSqrt sd = spd_sqrt(SymMatrix(d));
    CHECK(sd.root(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sd.root(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(sd.inv_root(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sd.inv_root(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    const SpdSqrt scalar = spd_sqrt(SymMatrix(MatrixXd::Constant(1, 1, 4.0)));
    CHECK(scalar.root(0, 0) == doctest::Approx(2.0));
    CHECK(scalar.inv_root(0, 0) == doctest::Approx(0.5));

    std::mt19937_64 gen(12);
    for (int iter = 0; iter < 40; ++iter) {
        const SymMatrix s = test::random_spd(gen, 1 + iter % 5);
        const SpdSqrt r = spd_sqrt(s);
        CHECK((r.root.mat() * r.root.mat() - s.mat()).norm() <= 1e-10 * (1.0 + s.mat().norm()));
        CHECK((r.root.mat() * r.inv_root.mat() - MatrixXd::Identity(s.dim(), s.dim())).norm() <=
              1e-10);
    }

    CHECK_THROWS_AS(spd_sqrt(SymMatrix::zero(2)), NotPositiveDefinite);
}

TEST_CASE("is_positive_definite") {
    CHECK(is_positive_definite(SymMatrix::identity(3), 0.0));
    CHECK_FALSE(is_positive_definite(SymMatrix::zero(2), 0.0));
    MatrixXd m(2, 2);
    m << 1.0, 2.0, 2.0, 1.0;  // eigenvalues -1, 3
    CHECK_FALSE(is_positive_definite(SymMatrix(m), 0.0));
    CHECK_THROWS_AS(is_positive_definite(SymMatrix::identity(2), -1.0), std::invalid_argument);
}

TEST_CASE("solve_lyapunov frozen instances") {
    MatrixXd a(2, 2);
    a << 0.0, 1.0, -1.0, -1.0;
    MatrixXd v(2, 2);
    v << 0.0, 0.0, 0.0, 1.0;
    const SymMatrix x = solve_lyapunov(a, SymMatrix(v));
    CHECK(test::close_mat(x.mat(), 0.5 * MatrixXd::Identity(2, 2), 1e-12));

    MatrixXd a2(2, 2);
    a2 << 0.0, 1.0, -4.0, -2.0;
    const SymMatrix x2 = solve_lyapunov(a2, SymMatrix(v));
    MatrixXd expected(2, 2);
    expected << 1.0 / 16.0, 0.0, 0.0, 0.25;
    CHECK(test::close_mat(x2.mat(), expected, 1e-12));

    const SymMatrix x3 = solve_lyapunov(-MatrixXd::Identity(2, 2), SymMatrix::identity(2));
    CHECK(test::close_mat(x3.mat(), 0.5 * MatrixXd::Identity(2, 2), 1e-12));
}

TEST_CASE("solve_lyapunov rejects marginal spectra") {
    MatrixXd rot(2, 2);
    rot << 0.0, 1.0, -1.0, 0.0;  // undamped oscillation, eigenvalues +-i
    CHECK_THROWS_AS(solve_lyapunov(rot, SymMatrix::identity(2)), NoUniqueSolution);
}

TEST_CASE("solve_lyapunov residual and symmetry on random stable systems") {
    std::mt19937_64 gen(13);
    for (int iter = 0; iter < 60; ++iter) {
        const Eigen::Index n = 1 + iter % 5;
        // eigenvalues shifted left for stability
        const MatrixXd a =
            test::random_matrix(gen, n, n) - 2.0 * static_cast<double>(n) * MatrixXd::Identity(n, n);
        const SymMatrix v = test::random_spd(gen, n);
        const SymMatrix x = solve_lyapunov(a, v);
        CHECK((x.mat() - x.mat().transpose()).norm() == 0.0);
        const double res = (a * x.mat() + x.mat() * a.transpose() + v.mat()).norm();
        CHECK(res <= 1e-10 * (1.0 + v.mat().norm()));
    }
}

TEST_CASE("min_gen_eig frozen and congruence invariance") {
    CHECK(min_gen_eig(SymMatrix::identity(2), SymMatrix::identity(2)) == doctest::Approx(1.0));

    MatrixXd s(2, 2), q(2, 2);
    s << 0.4, 0.2, 0.2, 0.6;
    q << 1.0, 0.2, 0.2, 1.0;
    CHECK(min_gen_eig(SymMatrix(s), SymMatrix(q)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    std::mt19937_64 gen(14);
    const SymMatrix q2 = test::random_spd(gen, 3);
    CHECK(min_gen_eig(SymMatrix(2.0 * q2.mat()), q2) == doctest::Approx(2.0).epsilon(1e-12));

    for (int iter = 0; iter < 40; ++iter) {
        const Eigen::Index n = 2 + iter % 3;
        const SymMatrix sr(test::random_matrix(gen, n, n));
        const SymMatrix qr = test::random_spd(gen, n);
        MatrixXd t = test::random_matrix(gen, n, n) + 2.0 * MatrixXd::Identity(n, n);
        const double base = min_gen_eig(sr, qr);
        const double cong = min_gen_eig(SymMatrix(t.transpose() * sr.mat() * t),
                                        SymMatrix(t.transpose() * qr.mat() * t));
        CHECK(test::close_rel(base, cong, 1e-9));
    }

    CHECK_THROWS_AS(min_gen_eig(SymMatrix::identity(2), SymMatrix::zero(2)), NotPositiveDefinite);
}

TEST_CASE("matrix_exponential against known values") {
    const MatrixXd z = matrix_exponential(MatrixXd::Zero(3, 3));
    CHECK(test::close_mat(z, MatrixXd::Identity(3, 3), 1e-15));

    MatrixXd a(2, 2);
    a << 0.0, 1.0, 0.0, 0.0;  // nilpotent
    MatrixXd expected(2, 2);
    expected << 1.0, 1.0, 0.0, 1.0;
    CHECK(test::close_mat(matrix_exponential(a), expected, 1e-14));

    MatrixXd rot(2, 2);
    rot << 0.0, -1.0, 1.0, 0.0;
    MatrixXd rot_exp(2, 2);
    rot_exp << std::cos(1.0), -std::sin(1.0), std::sin(1.0), std::cos(1.0);
    CHECK(test::close_mat(matrix_exponential(rot), rot_exp, 1e-13));

    // semigroup property on a random matrix
    std::mt19937_64 gen(15);
    const MatrixXd r = test::random_matrix(gen, 4, 4);
    CHECK(test::close_mat(matrix_exponential(2.0 * r),
                          matrix_exponential(r) * matrix_exponential(r), 1e-11));
}
