#include <doctest.h>

#include "lsh/filter.hpp"
#include "support.hpp"

using namespace lsh;

namespace {
const LshSystem kCanonical = LshSystem::from_scalars(1.0, 1.0, 1.0, 1.0);
}

TEST_CASE("filter setup frozen instances") {
    const FilterSetup setup = filter_setup(kCanonical, invariant_covariance(kCanonical));
    CHECK(setup.qhat0_gain.norm() <= 1e-12);
    CHECK(setup.P0(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(setup.D(0, 0) == doctest::Approx(1.0));

    const LshSystem stiff = LshSystem::from_scalars(4.0, 1.0, 2.0, 1.0);
    const FilterSetup s2 = filter_setup(stiff, invariant_covariance(stiff));
    CHECK(s2.qhat0_gain.norm() <= 1e-12);
    CHECK(s2.P0(0, 0) == doctest::Approx(1.0 / 16.0).epsilon(1e-12));

    // rank-deficient coupling is rejected
    MatrixXd thin(1, 2);
    thin << 1.0, 0.0;
    const LshSystem deficient(SymMatrix::identity(2), SymMatrix::identity(2),
                              SymMatrix::identity(2), thin);
    CHECK_THROWS_AS(filter_setup(deficient, invariant_covariance(deficient)), HypothesisNotMet);
}

TEST_CASE("uncorrelated blocks give qhat0 = 0 and P0 = Pi11") {
    std::mt19937_64 gen(71);
    for (int iter = 0; iter < 20; ++iter) {
        const Eigen::Index n = 1 + iter % 4;
        const LshSystem sys = test::random_system(gen, n, n + 1);
        const InvariantMeasure meas = invariant_covariance(sys);
        if (meas.Pi12.norm() > 1e-10) continue;  // only the uncorrelated case
        const FilterSetup setup = filter_setup(sys, meas);
        CHECK(setup.qhat0_gain.norm() <= 1e-9);
        CHECK(test::close_mat(setup.P0.mat(), meas.Pi11, 1e-9));
    }
}

TEST_CASE("closed-form covariance frozen values") {
    const FilterSetup setup = filter_setup(kCanonical, invariant_covariance(kCanonical));
    CHECK(covariance_closed_form(setup, kCanonical.K, 0.0)(0, 0) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(covariance_closed_form(setup, kCanonical.K, 2.0)(0, 0) ==
          doctest::Approx(0.25).epsilon(1e-12));
    // t P(t) -> K^{-1} D K^{-1}
    const double t = 1e6;
    CHECK(t * covariance_closed_form(setup, kCanonical.K, t)(0, 0) ==
          doctest::Approx(1.0).epsilon(2e-6));
    CHECK_THROWS_AS(covariance_closed_form(setup, kCanonical.K, -1.0), std::invalid_argument);
}

TEST_CASE("closed form satisfies the Riccati ODE") {
    std::mt19937_64 gen(72);
    for (int iter = 0; iter < 10; ++iter) {
        const Eigen::Index n = 1 + iter % 3;
        const LshSystem sys = test::random_system(gen, n, n + 1);
        const FilterSetup setup = filter_setup(sys, invariant_covariance(sys));
        const MatrixXd kdk = sys.K.mat() * setup.D.mat().llt().solve(sys.K.mat());
        for (double t : {0.1, 0.5, 2.0}) {
            const double h = 1e-5;
            const MatrixXd dp = (covariance_closed_form(setup, sys.K, t + h).mat() -
                                 covariance_closed_form(setup, sys.K, t - h).mat()) /
                                (2.0 * h);
            const MatrixXd p = covariance_closed_form(setup, sys.K, t).mat();
            CHECK((dp + p * kdk * p).norm() <= 1e-6 * (1.0 + dp.norm()));
        }
    }
}

TEST_CASE("P(t) is nonincreasing in the semidefinite order") {
    std::mt19937_64 gen(73);
    const LshSystem sys = test::random_system(gen, 3, 4);
    const FilterSetup setup = filter_setup(sys, invariant_covariance(sys));
    double prev_t = 0.0;
    for (double t : {0.25, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        const MatrixXd gap = covariance_closed_form(setup, sys.K, prev_t).mat() -
                             covariance_closed_form(setup, sys.K, t).mat();
        CHECK(sym_eig(SymMatrix(gap)).min() >= -1e-12);
        prev_t = t;
    }
}

TEST_CASE("scalar asymptotic at a thousand time constants") {
    const FilterSetup setup = filter_setup(kCanonical, invariant_covariance(kCanonical));
    // the canonical A has eigenvalues -1/2 +- i sqrt(3)/2: time constant 2
    const double t = 1000.0 * 2.0;
    const double val = t * covariance_closed_form(setup, kCanonical.K, t)(0, 0);
    CHECK(std::abs(val - 1.0) <= 1e-3);
}

TEST_CASE("revealed initial position keeps the filter pinned to the truth") {
    // emulate P0 -> 0 with a tiny prior and truth-aligned qhat(0)
    FilterSetup setup = filter_setup(kCanonical, invariant_covariance(kCanonical));
    setup.P0 = SymMatrix(MatrixXd::Constant(1, 1, 1e-12));

    const std::vector<double> grid = uniform_grid(1.0, 1e-4);
    VectorXd x0(2);
    x0 << 0.8, -0.5;
    const Trajectory traj = simulate(kCanonical, ForceModel::standard_wiener(1), x0, grid, 5,
                                     Scheme::euler_maruyama);
    const VectorXd truth0 = x0.head(1);
    const FilterRun run = run_filter(kCanonical, traj, setup, nullptr, &truth0);
    CHECK(run.error.cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("monte carlo error variance matches the closed form") {
    const FilterSetup setup = filter_setup(kCanonical, invariant_covariance(kCanonical));
    const double dt = 1e-3;
    const std::vector<double> grid = uniform_grid(2.0, dt);
    const FilterGrid gains = filter_gains(setup, kCanonical, grid);
    const std::size_t paths = 10000;
    const std::vector<double> probes = {0.5, 1.0, 2.0};

    std::vector<double> sum(probes.size(), 0.0), sumsq(probes.size(), 0.0);
    std::vector<double> mean_e(probes.size(), 0.0), corr_ep(probes.size(), 0.0);
    const InitialCondition init = InitialCondition::stationary(kCanonical);
    // per-path slots: (e, p) pairs at each probe time
    std::vector<std::vector<std::pair<double, double>>> slots(paths);
    for_each_path(kCanonical, ForceModel::standard_wiener(1), init, grid, 31, paths,
                  Scheme::exact_linear, [&](std::size_t p, const Trajectory& traj) {
                      const FilterRun run = run_filter(kCanonical, traj, setup, &gains);
                      std::vector<std::pair<double, double>> vals;
                      for (double probe : probes) {
                          const auto k = static_cast<Eigen::Index>(std::llround(probe / dt));
                          vals.emplace_back(run.error(0, k), traj.states(1, k));
                      }
                      slots[p] = std::move(vals);
                  });
    for (std::size_t p = 0; p < paths; ++p) {
        for (std::size_t t = 0; t < probes.size(); ++t) {
            const double e = slots[p][t].first;
            sum[t] += e * e;
            sumsq[t] += e * e * e * e;
            mean_e[t] += e;
            corr_ep[t] += e * slots[p][t].second;
        }
    }
    for (std::size_t t = 0; t < probes.size(); ++t) {
        const double emp = sum[t] / static_cast<double>(paths);
        const double var_of_sq =
            sumsq[t] / static_cast<double>(paths) - emp * emp;
        const double se = std::sqrt(var_of_sq / static_cast<double>(paths));
        const double target = covariance_closed_form(setup, kCanonical.K, probes[t])(0, 0);
        CHECK(std::abs(emp - target) <= 5.0 * se);

        // unbiasedness and orthogonality to the observed momentum
        const double se_mean = std::sqrt(emp / static_cast<double>(paths));
        CHECK(std::abs(mean_e[t] / static_cast<double>(paths)) <= 4.0 * se_mean);
        const double se_corr = std::sqrt(emp * 0.5) / std::sqrt(static_cast<double>(paths));
        CHECK(std::abs(corr_ep[t] / static_cast<double>(paths)) <= 4.0 * se_corr);
    }
}

TEST_CASE("gain grid mismatch is rejected") {
    const FilterSetup setup = filter_setup(kCanonical, invariant_covariance(kCanonical));
    const std::vector<double> grid = uniform_grid(1.0, 0.1);
    const FilterGrid gains = filter_gains(setup, kCanonical, uniform_grid(1.0, 0.2));
    const Trajectory traj = simulate(kCanonical, ForceModel::standard_wiener(1), VectorXd::Zero(2),
                                     grid, 5, Scheme::exact_linear);
    CHECK_THROWS_AS(run_filter(kCanonical, traj, setup, &gains), std::invalid_argument);
}
