#pragma once

// Iterative hard thresholding with robust losses: a projected sub-gradient
// method over s-sparse vectors, beta <- H_s(beta - eta_l G_l).

#include "robreg/losses.hpp"
#include "robreg/problem.hpp"
#include "robreg/schedule.hpp"

#include <optional>

namespace robreg {

enum class Eta0Kind {
    Explicit,  // value
    Scaled,    // c * D0 / n, D0 explicit or estimated from the initial residuals
};

struct IhtEta0Rule {
    Eta0Kind kind = Eta0Kind::Scaled;
    double value = 0.0;
    double c0 = 0.25;
    std::optional<double> distance;  // D0 override
};

struct IhtConfig {
    Index sparsity = 1;
    IhtEta0Rule eta0{};
    StepsizeSchedule schedule{};

    void validate(Index dim) const;
};

struct IhtResult {
    Vector beta;
    Trace trace;
    std::optional<std::size_t> switch_iter;
    double eta0 = 0.0;
    double eta2 = 0.0;
};

/// gamma_hat = n^-1 sum |Y_i - <beta, X_i>|.
double estimate_noise_scale_vec(const VectorProblem& problem, const Vector& beta);

/// Starting stepsize the config resolves to for this problem and start point.
double resolve_iht_eta0(const VectorProblem& problem, const LossSpec& loss,
                        const IhtConfig& config, const Vector& beta0);

IhtResult iht_solve(const VectorProblem& problem, const LossSpec& loss, const IhtConfig& config,
                    const Vector& beta0);

/// Starts from the zero vector.
IhtResult iht_solve(const VectorProblem& problem, const LossSpec& loss, const IhtConfig& config);

}  // namespace robreg
