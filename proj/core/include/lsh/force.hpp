#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lsh/model.hpp"
#include "lsh/rng.hpp"

namespace lsh {

/// Parameters (gamma, Delta) of the quadratic uncertainty class: a force is
/// admissible when <Ntil Ntil^T, Sigma> + 2 x^T Gamma alpha <= gamma + |x|^2_Delta
/// pointwise along paths.
struct ClassParams {
    double gamma;
    SymMatrix Delta;
};

enum class ForceKind { standard_wiener, affine_uncertain, bounded_drift };

/// Driving Ito process dW = alpha(t,x) dt + beta(t,x) domega. Drift and
/// diffusion factor are evaluated at the left endpoint of each step.
struct ForceModel {
    ForceKind kind;
    Eigen::Index m;
    std::function<VectorXd(double, const VectorXd&)> alpha;
    std::function<MatrixXd(double, const VectorXd&)> beta;
    std::optional<ClassParams> class_params;

    static ForceModel standard_wiener(Eigen::Index m);

    /// alpha(t,x) = alpha0 + alpha_x * x, beta constant.
    static ForceModel affine_uncertain(VectorXd alpha0, MatrixXd alpha_x, MatrixXd beta0);

    /// alpha(t,x) = sat_a(gain * x) with |alpha| <= a by construction,
    /// beta = sqrt(sigma_max) * I so ||Sigma|| <= sigma_max.
    static ForceModel bounded_drift(double a, double sigma_max, MatrixXd gain);
};

/// One realized sample path of the force over a grid: increments
/// dW_k = alpha_k dt_k + beta_k domega_k plus the per-step records needed by
/// the energy and dissipation audits.
struct ForcePath {
    std::vector<double> times;            // grid, size K+1
    std::vector<VectorXd> increments;     // dW_k, size K
    std::vector<VectorXd> wiener;         // domega_k
    std::vector<VectorXd> alphas;         // alpha(t_k, x_k)
    std::vector<MatrixXd> betas;          // beta(t_k, x_k)
    std::vector<MatrixXd> sigmas;         // beta beta^T

    std::size_t steps() const { return increments.size(); }
    double dt(std::size_t k) const { return times[k + 1] - times[k]; }
};

/// Step-by-step sampler bound to one (seed, path) stream.
class ForceSampler {
  public:
    ForceSampler(const ForceModel& model, std::uint64_t seed, std::uint64_t path)
        : model_(&model), stream_(seed, path) {}

    struct Step {
        VectorXd dW;
        VectorXd domega;
        VectorXd alpha;
        MatrixXd beta;
    };

    Step step(std::uint64_t k, double t, const VectorXd& state, double dt) const;

    const rng::PathStream& stream() const { return stream_; }

  private:
    const ForceModel* model_;
    rng::PathStream stream_;
};

/// Batch sampling over a strictly increasing grid. `states` supplies the
/// left-endpoint state per step for state-dependent models; it may be empty,
/// in which case a zero state of dimension `state_dim` is used.
ForcePath sample_increments(const ForceModel& model, const std::vector<double>& grid,
                            const std::vector<VectorXd>& states, std::uint64_t seed,
                            std::uint64_t path = 0, Eigen::Index state_dim = 0);

/// Realized sum of |dW_k|^2 versus the predicted integral of trace Sigma.
struct QuadraticVariation {
    double realized;
    double predicted;
};
QuadraticVariation quadratic_variation(const ForcePath& path);

/// Certified class parameters for any force with |alpha| <= a and
/// ||Sigma|| <= sigma_max:
///   gamma = tr(Ntil Ntil^T) sigma_max + a^2 ||Gamma||_F^2 / delta,
///   Delta = delta I,
/// via Young's inequality 2 x^T Gamma alpha <= delta |x|^2 + |alpha|^2 ||Gamma||_F^2 / delta.
ClassParams bounded_drift_class_params(const LshSystem& sys, double eps, double a, double delta,
                                       double sigma_max);

}  // namespace lsh
