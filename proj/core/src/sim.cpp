#include "lsh/sim.hpp"

#include <cmath>
#include <string>

#include "lsh/parallel.hpp"

namespace lsh {

namespace {

MatrixXd psd_cholesky(MatrixXd s) {
    // Jitter floor keeps near-singular step covariances factorizable.
    const double jitter = 1e-14 * (1.0 + s.norm());
    s.diagonal().array() += jitter;
    Eigen::LLT<MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
        throw NumericError("psd_cholesky: factorization failed");
    }
    return llt.matrixL();
}

// Finite-horizon Gramian: integrates dSigma = A Sigma + Sigma A^T + V over
// [0, dt] with classical RK4, halving the substep until the result is stable.
MatrixXd step_gramian(const MatrixXd& a, const MatrixXd& v, double dt) {
    auto run = [&](int substeps) {
        const double h = dt / substeps;
        MatrixXd sigma = MatrixXd::Zero(a.rows(), a.cols());
        auto rate = [&](const MatrixXd& s) { return (a * s + s * a.transpose() + v).eval(); };
        for (int i = 0; i < substeps; ++i) {
            const MatrixXd k1 = rate(sigma);
            const MatrixXd k2 = rate(sigma + 0.5 * h * k1);
            const MatrixXd k3 = rate(sigma + 0.5 * h * k2);
            const MatrixXd k4 = rate(sigma + h * k3);
            sigma += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return sigma;
    };

    int substeps = 16;
    MatrixXd coarse = run(substeps);
    for (int iter = 0; iter < 10; ++iter) {
        substeps *= 2;
        MatrixXd fine = run(substeps);
        if ((fine - coarse).norm() <= 1e-12 * (1.0 + fine.norm())) return fine;
        coarse = std::move(fine);
    }
    throw NumericError("step_gramian: quadrature did not stabilize");
}

struct StepKernel {
    double dt;
    MatrixXd transition;   // e^{A dt}
    MatrixXd noise_chol;   // Cholesky factor of the step Gramian
};

// One exact-transition kernel per distinct step size on the grid. Built
// once, then shared read-only across all paths of an ensemble.
class KernelCache {
  public:
    KernelCache(const MatrixXd& a, const MatrixXd& bbt) : a_(a), bbt_(bbt) {}

    void prepare(const std::vector<double>& grid) {
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            const double dt = grid[k + 1] - grid[k];
            if (find(dt) == nullptr) {
                kernels_.push_back(StepKernel{dt, matrix_exponential(a_ * dt),
                                              psd_cholesky(step_gramian(a_, bbt_, dt))});
            }
        }
    }

    const StepKernel& at(double dt) const {
        const StepKernel* k = find(dt);
        if (k == nullptr) throw std::logic_error("KernelCache: step size not prepared");
        return *k;
    }

  private:
    const StepKernel* find(double dt) const {
        for (const auto& k : kernels_) {
            if (std::abs(k.dt - dt) <= 1e-12 * dt) return &k;
        }
        return nullptr;
    }

    MatrixXd a_;
    MatrixXd bbt_;
    std::vector<StepKernel> kernels_;
};

void require_grid(const std::vector<double>& grid) {
    if (grid.size() < 2) throw std::invalid_argument("simulate: grid needs >= 2 points");
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        if (!(grid[k + 1] > grid[k])) {
            throw std::invalid_argument("simulate: grid must be strictly increasing");
        }
    }
}

MatrixXd checked_mass(const NonlinearHamiltonianSystem& nlsys, const VectorXd& q,
                      const char* where, std::size_t step_index) {
    MatrixXd mass = nlsys.Mass(q);
    Eigen::LLT<MatrixXd> llt(mass);
    if (llt.info() != Eigen::Success) {
        throw NumericError(std::string(where) + ": mass matrix not positive definite at step " +
                           std::to_string(step_index));
    }
    return mass;
}

}  // namespace

NonlinearHamiltonianSystem from_linear(const LshSystem& sys) {
    NonlinearHamiltonianSystem nl;
    nl.n = sys.n;
    nl.m = sys.m;
    const MatrixXd k = sys.K.mat();
    const MatrixXd mass = sys.M.mat();
    const MatrixXd damping = sys.F.mat();
    const MatrixXd coupling = sys.N;
    const Eigen::Index n = sys.n;
    nl.V = [k](const VectorXd& q) { return 0.5 * q.dot(k * q); };
    nl.gradV = [k](const VectorXd& q) { return (k * q).eval(); };
    nl.Mass = [mass](const VectorXd&) { return mass; };
    nl.dMass = [n](const VectorXd&, Eigen::Index) { return MatrixXd::Zero(n, n).eval(); };
    nl.Damping = [damping](const VectorXd&) { return damping; };
    nl.L = [coupling](const VectorXd& q) { return (coupling * q).eval(); };
    nl.Ljac = [coupling](const VectorXd&) { return coupling; };
    return nl;
}

void check_consistency(const NonlinearHamiltonianSystem& nlsys,
                       const std::vector<VectorXd>& probe_points) {
    const double h = 1e-6;
    for (const VectorXd& q : probe_points) {
        if (q.size() != nlsys.n) {
            throw std::invalid_argument("check_consistency: probe dimension mismatch");
        }
        const VectorXd g = nlsys.gradV(q);
        const MatrixXd jac = nlsys.Ljac(q);
        for (Eigen::Index k = 0; k < nlsys.n; ++k) {
            VectorXd qp = q, qm = q;
            qp(k) += h;
            qm(k) -= h;
            const double fd = (nlsys.V(qp) - nlsys.V(qm)) / (2.0 * h);
            if (std::abs(fd - g(k)) > 1e-4 * (1.0 + std::abs(g(k)))) {
                throw std::invalid_argument("check_consistency: gradV disagrees with V at probe");
            }
            const VectorXd lfd = (nlsys.L(qp) - nlsys.L(qm)) / (2.0 * h);
            if ((lfd - jac.col(k)).norm() > 1e-4 * (1.0 + jac.col(k).norm())) {
                throw std::invalid_argument("check_consistency: Ljac disagrees with L at probe");
            }
        }
    }
}

double hamiltonian(const NonlinearHamiltonianSystem& nlsys, const VectorXd& x) {
    const VectorXd q = x.head(nlsys.n);
    const VectorXd p = x.tail(nlsys.n);
    const MatrixXd mass = checked_mass(nlsys, q, "hamiltonian", 0);
    return 0.5 * p.dot(mass.llt().solve(p)) + nlsys.V(q);
}

VectorXd drift(const NonlinearHamiltonianSystem& nlsys, const VectorXd& x) {
    const Eigen::Index n = nlsys.n;
    if (x.size() != 2 * n) throw std::invalid_argument("drift: state dimension mismatch");
    const VectorXd q = x.head(n);
    const VectorXd p = x.tail(n);

    const MatrixXd mass = checked_mass(nlsys, q, "drift", 0);
    Eigen::LLT<MatrixXd> llt(mass);
    const VectorXd qdot = llt.solve(p);

    VectorXd dh_dq = nlsys.gradV(q);
    for (Eigen::Index k = 0; k < n; ++k) {
        // centrifugal term: -(1/2) p^T M^{-1} (d_{q_k} M) M^{-1} p
        dh_dq(k) -= 0.5 * qdot.dot(nlsys.dMass(q, k) * qdot);
    }

    VectorXd out(2 * n);
    out.head(n) = qdot;
    out.tail(n) = -dh_dq - nlsys.Damping(q) * qdot;
    return out;
}

double poisson_bracket(const VectorXd& grad_phi, const VectorXd& grad_psi) {
    if (grad_phi.size() != grad_psi.size() || grad_phi.size() % 2 != 0) {
        throw std::invalid_argument("poisson_bracket: gradients must share even dimension");
    }
    const Eigen::Index n = grad_phi.size() / 2;
    return grad_phi.head(n).dot(grad_psi.tail(n)) - grad_phi.tail(n).dot(grad_psi.head(n));
}

InitialCondition InitialCondition::zero(Eigen::Index dim) {
    return InitialCondition{VectorXd::Zero(dim), MatrixXd()};
}

InitialCondition InitialCondition::point(VectorXd x0) {
    return InitialCondition{std::move(x0), MatrixXd()};
}

InitialCondition InitialCondition::gaussian(VectorXd mean, const SymMatrix& cov) {
    if (mean.size() != cov.dim()) throw std::invalid_argument("gaussian: dimension mismatch");
    return InitialCondition{std::move(mean), psd_cholesky(cov.mat())};
}

InitialCondition InitialCondition::stationary(const LshSystem& sys) {
    return gaussian(VectorXd::Zero(2 * sys.n), invariant_covariance(sys).Pi);
}

VectorXd InitialCondition::draw(const rng::PathStream& stream) const {
    if (chol.size() == 0) return mean;
    VectorXd z(chol.cols());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        z(j) = stream.normal(rng::kInitCounter, static_cast<std::uint64_t>(j));
    }
    return mean + chol * z;
}

MatrixXd exact_step_covariance(const LshSystem& sys, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("exact_step_covariance: dt must be > 0");
    const StateSpace ss = realize(sys);
    return step_gramian(ss.A, ss.B * ss.B.transpose(), dt);
}

std::vector<double> uniform_grid(double horizon, double dt) {
    if (!(horizon > 0.0) || !(dt > 0.0)) {
        throw std::invalid_argument("uniform_grid: horizon and dt must be > 0");
    }
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    std::vector<double> grid(std::max<std::size_t>(steps, 1) + 1);
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = static_cast<double>(k) * dt;
    return grid;
}

Trajectory simulate(const NonlinearHamiltonianSystem& nlsys, const ForceModel& model,
                    const VectorXd& x0, const std::vector<double>& grid, std::uint64_t seed,
                    Scheme scheme, std::uint64_t path) {
    if (scheme != Scheme::euler_maruyama) {
        throw std::invalid_argument("simulate: exact_linear requires an LshSystem");
    }
    require_grid(grid);
    if (x0.size() != 2 * nlsys.n) throw std::invalid_argument("simulate: x0 dimension mismatch");

    const std::size_t steps = grid.size() - 1;
    Trajectory traj;
    traj.times = grid;
    traj.seed = seed;
    traj.path_index = path;
    traj.scheme = scheme;
    traj.states.resize(2 * nlsys.n, static_cast<Eigen::Index>(steps + 1));
    traj.outputs.resize(nlsys.m, static_cast<Eigen::Index>(steps + 1));

    ForceSampler sampler(model, seed, path);
    ForcePath force;
    force.times = grid;
    force.increments.reserve(steps);
    force.wiener.reserve(steps);
    force.alphas.reserve(steps);
    force.betas.reserve(steps);
    force.sigmas.reserve(steps);

    VectorXd x = x0;
    traj.states.col(0) = x;
    traj.outputs.col(0) = nlsys.L(x.head(nlsys.n));
    for (std::size_t k = 0; k < steps; ++k) {
        const double dt = grid[k + 1] - grid[k];
        const VectorXd q = x.head(nlsys.n);
        checked_mass(nlsys, q, "simulate", k);

        auto s = sampler.step(k, grid[k], x, dt);
        const MatrixXd g = nlsys.Ljac(q).transpose();

        VectorXd next = x + drift(nlsys, x) * dt;
        next.tail(nlsys.n) += g * s.dW;
        x = std::move(next);

        traj.states.col(static_cast<Eigen::Index>(k + 1)) = x;
        traj.outputs.col(static_cast<Eigen::Index>(k + 1)) = nlsys.L(x.head(nlsys.n));

        force.increments.push_back(std::move(s.dW));
        force.wiener.push_back(std::move(s.domega));
        force.alphas.push_back(std::move(s.alpha));
        force.sigmas.push_back(s.beta * s.beta.transpose());
        force.betas.push_back(std::move(s.beta));
    }
    traj.force = std::move(force);
    return traj;
}

namespace {

Trajectory simulate_exact(const LshSystem& sys, const KernelCache& kernels, const VectorXd& x0,
                          const std::vector<double>& grid, std::uint64_t seed,
                          std::uint64_t path) {
    rng::PathStream stream(seed, path);

    const std::size_t steps = grid.size() - 1;
    Trajectory traj;
    traj.times = grid;
    traj.seed = seed;
    traj.path_index = path;
    traj.scheme = Scheme::exact_linear;
    traj.states.resize(2 * sys.n, static_cast<Eigen::Index>(steps + 1));
    traj.outputs.resize(sys.m, static_cast<Eigen::Index>(steps + 1));

    VectorXd x = x0;
    traj.states.col(0) = x;
    traj.outputs.col(0) = sys.N * x.head(sys.n);
    VectorXd z(2 * sys.n);
    for (std::size_t k = 0; k < steps; ++k) {
        const StepKernel& kernel = kernels.at(grid[k + 1] - grid[k]);
        for (Eigen::Index j = 0; j < z.size(); ++j) {
            z(j) = stream.normal(k, static_cast<std::uint64_t>(j));
        }
        x = kernel.transition * x + kernel.noise_chol * z;
        traj.states.col(static_cast<Eigen::Index>(k + 1)) = x;
        traj.outputs.col(static_cast<Eigen::Index>(k + 1)) = sys.N * x.head(sys.n);
    }
    return traj;
}

void require_exact_preconditions(const LshSystem& sys, const ForceModel& model,
                                 const VectorXd& x0) {
    if (x0.size() != 2 * sys.n) throw std::invalid_argument("simulate: x0 dimension mismatch");
    if (model.m != sys.m) throw std::invalid_argument("simulate: force channel count mismatch");
    if (model.kind != ForceKind::standard_wiener) {
        throw std::invalid_argument("simulate: exact_linear requires a standard Wiener force");
    }
}

}  // namespace

Trajectory simulate(const LshSystem& sys, const ForceModel& model, const VectorXd& x0,
                    const std::vector<double>& grid, std::uint64_t seed, Scheme scheme,
                    std::uint64_t path) {
    require_grid(grid);
    if (scheme == Scheme::euler_maruyama) {
        if (x0.size() != 2 * sys.n) throw std::invalid_argument("simulate: x0 dimension mismatch");
        if (model.m != sys.m) throw std::invalid_argument("simulate: force channel count mismatch");
        return simulate(from_linear(sys), model, x0, grid, seed, scheme, path);
    }
    require_exact_preconditions(sys, model, x0);
    const StateSpace ss = realize(sys);
    KernelCache kernels(ss.A, ss.B * ss.B.transpose());
    kernels.prepare(grid);
    return simulate_exact(sys, kernels, x0, grid, seed, path);
}

struct PathRunner::Impl {
    LshSystem sys;
    ForceModel model;
    InitialCondition init;
    std::vector<double> grid;
    std::uint64_t seed;
    Scheme scheme;
    std::optional<KernelCache> kernels;
};

PathRunner::PathRunner(LshSystem sys, ForceModel model, InitialCondition init,
                       std::vector<double> grid, std::uint64_t seed, Scheme scheme) {
    require_grid(grid);
    auto impl = std::make_unique<Impl>(Impl{std::move(sys), std::move(model), std::move(init),
                                            std::move(grid), seed, scheme, std::nullopt});
    if (scheme == Scheme::exact_linear) {
        require_exact_preconditions(impl->sys, impl->model, impl->init.mean);
        const StateSpace ss = realize(impl->sys);
        impl->kernels.emplace(ss.A, ss.B * ss.B.transpose());
        impl->kernels->prepare(impl->grid);
    }
    impl_ = std::move(impl);
}

PathRunner::~PathRunner() = default;
PathRunner::PathRunner(PathRunner&&) noexcept = default;

const std::vector<double>& PathRunner::grid() const { return impl_->grid; }

Trajectory PathRunner::operator()(std::size_t path) const {
    rng::PathStream stream(impl_->seed, path);
    const VectorXd x0 = impl_->init.draw(stream);
    if (impl_->scheme == Scheme::exact_linear) {
        return simulate_exact(impl_->sys, *impl_->kernels, x0, impl_->grid, impl_->seed, path);
    }
    return simulate(impl_->sys, impl_->model, x0, impl_->grid, impl_->seed, impl_->scheme, path);
}

void for_each_path(const LshSystem& sys, const ForceModel& model, const InitialCondition& init,
                   const std::vector<double>& grid, std::uint64_t seed, std::size_t paths,
                   Scheme scheme,
                   const std::function<void(std::size_t, const Trajectory&)>& consumer) {
    const PathRunner runner(sys, model, init, grid, seed, scheme);
    parallel_for(paths, [&](std::size_t p) { consumer(p, runner(p)); });
}

Ensemble simulate_ensemble(const LshSystem& sys, const ForceModel& model,
                           const InitialCondition& init, const std::vector<double>& grid,
                           std::uint64_t seed, std::size_t paths, Scheme scheme) {
    Ensemble ens;
    ens.times = grid;
    ens.paths.resize(paths);
    for_each_path(sys, model, init, grid, seed, paths, scheme,
                  [&](std::size_t p, const Trajectory& traj) { ens.paths[p] = traj; });
    return ens;
}

double energy_balance_residual(const Trajectory& traj, const NonlinearHamiltonianSystem& nlsys) {
    if (!traj.force.has_value()) {
        throw std::invalid_argument("energy_balance_residual: trajectory has no force path");
    }
    const ForcePath& force = *traj.force;
    const Eigen::Index n = nlsys.n;

    KahanSum flow;
    for (std::size_t k = 0; k < traj.steps(); ++k) {
        const double dt = force.dt(k);
        const VectorXd x = traj.state(k);
        const VectorXd q = x.head(n);
        const VectorXd p = x.tail(n);
        const MatrixXd mass = checked_mass(nlsys, q, "energy_balance_residual", k);
        Eigen::LLT<MatrixXd> llt(mass);
        const VectorXd qdot = llt.solve(p);
        const MatrixXd g = nlsys.Ljac(q).transpose();

        const double dissipation = -qdot.dot(nlsys.Damping(q) * qdot) * dt;
        const VectorXd zeta = force.betas[k] * force.wiener[k];
        const VectorXd gz = g * zeta;
        const double ito = 0.5 * gz.dot(llt.solve(gz));
        const double work = qdot.dot(g * force.increments[k]);
        flow.add(dissipation + ito + work);
    }
    return hamiltonian(nlsys, traj.state(traj.steps())) - hamiltonian(nlsys, traj.state(0)) -
           flow.sum;
}

double energy_balance_residual(const Trajectory& traj, const LshSystem& sys) {
    return energy_balance_residual(traj, from_linear(sys));
}

}  // namespace lsh
