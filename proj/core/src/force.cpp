#include "lsh/force.hpp"

#include <cmath>

#include "lsh/robust.hpp"

namespace lsh {

ForceModel ForceModel::standard_wiener(Eigen::Index m) {
    if (m < 1) throw std::invalid_argument("standard_wiener: m >= 1 required");
    return ForceModel{
        ForceKind::standard_wiener, m,
        [m](double, const VectorXd&) { return VectorXd::Zero(m).eval(); },
        [m](double, const VectorXd&) { return MatrixXd::Identity(m, m).eval(); },
        std::nullopt};
}

ForceModel ForceModel::affine_uncertain(VectorXd alpha0, MatrixXd alpha_x, MatrixXd beta0) {
    const Eigen::Index m = alpha0.size();
    if (alpha_x.rows() != m || beta0.rows() != m || beta0.cols() != m) {
        throw std::invalid_argument("affine_uncertain: inconsistent channel dimensions");
    }
    return ForceModel{
        ForceKind::affine_uncertain, m,
        [alpha0, alpha_x](double, const VectorXd& x) {
            if (alpha_x.cols() == 0 || x.size() == 0) return alpha0.eval();
            if (x.size() != alpha_x.cols()) {
                throw std::invalid_argument("affine_uncertain: state dimension mismatch");
            }
            return (alpha0 + alpha_x * x).eval();
        },
        [beta0](double, const VectorXd&) { return beta0; },
        std::nullopt};
}

ForceModel ForceModel::bounded_drift(double a, double sigma_max, MatrixXd gain) {
    if (a < 0.0 || sigma_max < 0.0) {
        throw std::invalid_argument("bounded_drift: a and sigma_max must be >= 0");
    }
    const Eigen::Index m = gain.rows();
    if (m < 1) throw std::invalid_argument("bounded_drift: gain must have m >= 1 rows");
    const double scale = std::sqrt(sigma_max);
    return ForceModel{
        ForceKind::bounded_drift, m,
        [a, gain](double, const VectorXd& x) {
            if (x.size() != gain.cols()) {
                throw std::invalid_argument("bounded_drift: state dimension mismatch");
            }
            VectorXd v = gain * x;
            const double norm = v.norm();
            if (norm > a && norm > 0.0) v *= a / norm;
            return v.eval();
        },
        [m, scale](double, const VectorXd&) { return (scale * MatrixXd::Identity(m, m)).eval(); },
        std::nullopt};
}

ForceSampler::Step ForceSampler::step(std::uint64_t k, double t, const VectorXd& state,
                                      double dt) const {
    const Eigen::Index m = model_->m;
    Step s;
    s.domega.resize(m);
    const double sqdt = std::sqrt(dt);
    for (Eigen::Index j = 0; j < m; ++j) {
        s.domega(j) = sqdt * stream_.normal(k, static_cast<std::uint64_t>(j));
    }
    s.alpha = model_->alpha(t, state);
    s.beta = model_->beta(t, state);
    if (s.alpha.size() != m || s.beta.rows() != m || s.beta.cols() != m) {
        throw std::invalid_argument("ForceSampler: callback returned wrong dimensions");
    }
    s.dW = s.alpha * dt + s.beta * s.domega;
    return s;
}

ForcePath sample_increments(const ForceModel& model, const std::vector<double>& grid,
                            const std::vector<VectorXd>& states, std::uint64_t seed,
                            std::uint64_t path, Eigen::Index state_dim) {
    if (grid.size() < 2) throw std::invalid_argument("sample_increments: grid needs >= 2 points");
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        if (!(grid[k + 1] > grid[k])) {
            throw std::invalid_argument("sample_increments: grid must be strictly increasing");
        }
    }
    const std::size_t steps = grid.size() - 1;
    if (!states.empty() && states.size() < steps) {
        throw std::invalid_argument("sample_increments: need one state per step");
    }

    ForceSampler sampler(model, seed, path);
    const VectorXd zero_state = VectorXd::Zero(state_dim);

    ForcePath out;
    out.times = grid;
    out.increments.reserve(steps);
    out.wiener.reserve(steps);
    out.alphas.reserve(steps);
    out.betas.reserve(steps);
    out.sigmas.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const VectorXd& x = states.empty() ? zero_state : states[k];
        auto s = sampler.step(k, grid[k], x, grid[k + 1] - grid[k]);
        out.increments.push_back(std::move(s.dW));
        out.wiener.push_back(std::move(s.domega));
        out.alphas.push_back(std::move(s.alpha));
        out.sigmas.push_back(s.beta * s.beta.transpose());
        out.betas.push_back(std::move(s.beta));
    }
    return out;
}

QuadraticVariation quadratic_variation(const ForcePath& path) {
    if (path.steps() == 0) throw std::invalid_argument("quadratic_variation: empty path");
    QuadraticVariation qv{0.0, 0.0};
    for (std::size_t k = 0; k < path.steps(); ++k) {
        qv.realized += path.increments[k].squaredNorm();
        qv.predicted += path.sigmas[k].trace() * path.dt(k);
    }
    return qv;
}

ClassParams bounded_drift_class_params(const LshSystem& sys, double eps, double a, double delta,
                                       double sigma_max) {
    if (a < 0.0 || delta < 0.0 || sigma_max < 0.0) {
        throw std::invalid_argument("bounded_drift_class_params: parameters must be >= 0");
    }
    if (delta == 0.0 && a > 0.0) {
        throw std::invalid_argument(
            "bounded_drift_class_params: delta = 0 with a > 0 degenerates the Young bound");
    }
    const NormalizedSystem ns = normalize_mass(sys);
    const double trace_nn = (ns.Ntil * ns.Ntil.transpose()).trace();

    double gamma = trace_nn * sigma_max;
    if (a > 0.0) {
        const double gnorm2 = gamma_matrix(sys, eps).squaredNorm();
        gamma += a * a * gnorm2 / delta;
    }
    return ClassParams{gamma, SymMatrix(delta * MatrixXd::Identity(2 * sys.n, 2 * sys.n))};
}

}  // namespace lsh
