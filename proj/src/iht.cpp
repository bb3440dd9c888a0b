#include "robreg/iht.hpp"

#include "robreg/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace robreg {

namespace {

struct SparseOps {
    const VectorProblem& problem;
    Index sparsity;

    Vector residuals(const Vector& beta) const { return residuals_vec(problem, beta); }

    Vector subgradient(const LossSpec& loss, const Vector& resid) const {
        Vector psi(resid.size());
        for (Index i = 0; i < resid.size(); ++i) psi[i] = loss_subgrad(loss, resid[i]);
        return -(problem.design().transpose() * psi);
    }

    Vector step(const Vector& beta, const Vector& G, double eta) const {
        return hard_threshold(beta - eta * G, sparsity);
    }

    std::optional<double> rel_error(const Vector& beta) const {
        if (!problem.has_truth()) return std::nullopt;
        return error_to_truth(problem, beta).relative;
    }

    std::size_t support(const Vector& beta) const {
        return static_cast<std::size_t>((beta.array() != 0.0).count());
    }

    Index n() const { return problem.n(); }
};

}  // namespace

void IhtConfig::validate(Index dim) const {
    if (sparsity < 1 || sparsity > dim) {
        throw ParameterError("iht: sparsity " + std::to_string(sparsity) + " outside [1, " +
                             std::to_string(dim) + "]");
    }
    switch (eta0.kind) {
        case Eta0Kind::Explicit:
            if (!(eta0.value > 0)) throw ParameterError("iht: explicit eta0 must be positive");
            break;
        case Eta0Kind::Scaled:
            if (!(eta0.c0 > 0)) throw ParameterError("iht: c0 must be positive");
            if (eta0.distance && !(*eta0.distance > 0)) {
                throw ParameterError("iht: D0 override must be positive");
            }
            break;
    }
    schedule.validate();
}

double estimate_noise_scale_vec(const VectorProblem& problem, const Vector& beta) {
    return mean_abs(residuals_vec(problem, beta));
}

double resolve_iht_eta0(const VectorProblem& problem, const LossSpec& loss,
                        const IhtConfig& config, const Vector& beta0) {
    if (config.eta0.kind == Eta0Kind::Explicit) return config.eta0.value;
    const double gamma0 = estimate_noise_scale_vec(problem, beta0);
    // E|N(0, t^2)| = t sqrt(2/pi), so the residual mean rescaled by sqrt(pi/2)
    // tracks ||beta0 - beta*|| for Gaussian designs
    const double d0 = config.eta0.distance.value_or(gamma0 * std::sqrt(std::numbers::pi / 2.0));
    LossSpec scaled = loss;
    if (huber_auto_delta(scaled)) scaled.delta = gamma0 > 0 ? gamma0 : 1.0;
    const double eta0 = config.eta0.c0 * d0 /
                        (static_cast<double>(problem.n()) * loss_step_scale(scaled, gamma0));
    if (!(eta0 > 0) || !std::isfinite(eta0)) {
        throw ParameterError("iht: cannot derive eta0 from the data (residuals vanish at "
                             "beta0); pass an explicit eta0");
    }
    return eta0;
}

IhtResult iht_solve(const VectorProblem& problem, const LossSpec& loss, const IhtConfig& config,
                    const Vector& beta0) {
    config.validate(problem.dim());
    if (beta0.size() != problem.dim()) throw ParameterError("iht: beta0 has the wrong dimension");
    require_finite(beta0, "iht beta0");
    if ((beta0.array() != 0.0).count() > config.sparsity) {
        throw ParameterError("iht: beta0 has more nonzeros than the sparsity level");
    }
    const double eta0 = resolve_iht_eta0(problem, loss, config, beta0);
    SparseOps ops{problem, config.sparsity};
    auto run = run_two_phase<Vector>(beta0, loss, eta0, config.schedule, ops);
    return IhtResult{std::move(run.estimate), std::move(run.trace), run.switch_iter, eta0,
                     run.eta2};
}

IhtResult iht_solve(const VectorProblem& problem, const LossSpec& loss,
                    const IhtConfig& config) {
    return iht_solve(problem, loss, config, Vector::Zero(problem.dim()));
}

}  // namespace robreg
