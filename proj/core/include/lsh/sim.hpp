#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "lsh/force.hpp"
#include "lsh/invariant.hpp"

namespace lsh {

/// General stochastic Hamiltonian system with position-dependent mass,
/// damping and coupling. dMass(q, k) is the partial derivative of the mass
/// matrix in q_k; Ljac is the m x n Jacobian of the coupling map L.
struct NonlinearHamiltonianSystem {
    Eigen::Index n;
    Eigen::Index m;
    std::function<double(const VectorXd&)> V;
    std::function<VectorXd(const VectorXd&)> gradV;
    std::function<MatrixXd(const VectorXd&)> Mass;
    std::function<MatrixXd(const VectorXd&, Eigen::Index)> dMass;
    std::function<MatrixXd(const VectorXd&)> Damping;
    std::function<VectorXd(const VectorXd&)> L;
    std::function<MatrixXd(const VectorXd&)> Ljac;
};

/// Wraps an LSH quadruple as a constant-coefficient nonlinear system.
NonlinearHamiltonianSystem from_linear(const LshSystem& sys);

/// Finite-difference consistency probe of gradV against V and Ljac against L
/// at the supplied points; throws std::invalid_argument above 1e-4 relative.
void check_consistency(const NonlinearHamiltonianSystem& nlsys,
                       const std::vector<VectorXd>& probe_points);

/// Total energy H(q,p) = |p|^2_{M(q)^{-1}} / 2 + V(q).
double hamiltonian(const NonlinearHamiltonianSystem& nlsys, const VectorXd& x);

/// Drift of the state SDE: (M(q)^{-1} p, -d_q H - F(q) M(q)^{-1} p), where
/// d_q H carries the centrifugal terms from a position-dependent mass.
VectorXd drift(const NonlinearHamiltonianSystem& nlsys, const VectorXd& x);

/// gradPhi^T J gradPsi with the symplectic matrix J.
double poisson_bracket(const VectorXd& grad_phi, const VectorXd& grad_psi);

enum class Scheme { euler_maruyama, exact_linear };

/// One discretized sample path of (q, p, W) with outputs.
struct Trajectory {
    std::vector<double> times;
    MatrixXd states;   // 2n x (K+1), column k is x(t_k)
    MatrixXd outputs;  // m x (K+1)
    std::optional<ForcePath> force;  // absent for exact_linear
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    Scheme scheme = Scheme::euler_maruyama;

    std::size_t steps() const { return times.size() - 1; }
    VectorXd state(std::size_t k) const { return states.col(static_cast<Eigen::Index>(k)); }
};

struct Ensemble {
    std::vector<double> times;
    std::vector<Trajectory> paths;
};

/// Initial state sampler; per-path draws come from the path's counter stream.
struct InitialCondition {
    VectorXd mean;
    MatrixXd chol;  // empty => deterministic initial state

    static InitialCondition zero(Eigen::Index dim);
    static InitialCondition point(VectorXd x0);
    static InitialCondition gaussian(VectorXd mean, const SymMatrix& cov);
    static InitialCondition stationary(const LshSystem& sys);

    VectorXd draw(const rng::PathStream& stream) const;
};

/// times[k] = k * dt up to (and including) the last point at or beyond T.
std::vector<double> uniform_grid(double horizon, double dt);

/// Finite-horizon Gramian int_0^dt e^{sA} BB^T e^{sA^T} ds, the noise
/// covariance of one exact step.
MatrixXd exact_step_covariance(const LshSystem& sys, double dt);

Trajectory simulate(const NonlinearHamiltonianSystem& nlsys, const ForceModel& model,
                    const VectorXd& x0, const std::vector<double>& grid, std::uint64_t seed,
                    Scheme scheme = Scheme::euler_maruyama, std::uint64_t path = 0);

Trajectory simulate(const LshSystem& sys, const ForceModel& model, const VectorXd& x0,
                    const std::vector<double>& grid, std::uint64_t seed,
                    Scheme scheme = Scheme::exact_linear, std::uint64_t path = 0);

/// Per-ensemble generator: prepares shared state (exact-step kernels,
/// initial sampler) once, then produces any path on demand. Calls for
/// distinct paths are safe from concurrent threads and scheduling-independent.
class PathRunner {
  public:
    PathRunner(LshSystem sys, ForceModel model, InitialCondition init, std::vector<double> grid,
               std::uint64_t seed, Scheme scheme);
    ~PathRunner();
    PathRunner(PathRunner&&) noexcept;

    Trajectory operator()(std::size_t path) const;
    const std::vector<double>& grid() const;

  private:
    struct Impl;
    std::unique_ptr<const Impl> impl_;
};

/// Streams paths through `consumer`, in parallel over paths. Calls for
/// distinct path indices may run concurrently; results must be written to
/// per-path slots for deterministic reductions.
void for_each_path(const LshSystem& sys, const ForceModel& model, const InitialCondition& init,
                   const std::vector<double>& grid, std::uint64_t seed, std::size_t paths,
                   Scheme scheme,
                   const std::function<void(std::size_t, const Trajectory&)>& consumer);

Ensemble simulate_ensemble(const LshSystem& sys, const ForceModel& model,
                           const InitialCondition& init, const std::vector<double>& grid,
                           std::uint64_t seed, std::size_t paths,
                           Scheme scheme = Scheme::exact_linear);

/// Pathwise defect of the discretized energy balance
///   H(x_K) - H(x_0) - sum_k [ -|qdot_k|^2_F dt + <G^T M^{-1} G, zeta zeta^T>/2
///                             + qdot_k^T G dW_k ],
/// where zeta_k is the realized martingale increment beta_k domega_k (the
/// per-step quadratic-variation increment of W).
double energy_balance_residual(const Trajectory& traj, const NonlinearHamiltonianSystem& nlsys);
double energy_balance_residual(const Trajectory& traj, const LshSystem& sys);

}  // namespace lsh
