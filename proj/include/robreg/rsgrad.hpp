#pragma once

// Riemannian sub-gradient descent over rank-r matrices. Each iteration
// projects a vanilla subgradient onto the tangent space at the current
// iterate, steps, and retracts back onto the rank-r manifold.

#include "robreg/linalg.hpp"
#include "robreg/losses.hpp"
#include "robreg/problem.hpp"
#include "robreg/schedule.hpp"

#include <optional>

namespace robreg {

enum class RsGradEta0Kind {
    Explicit,       // value
    OperatorNorm,   // c1 * ||M0||_op / n
    InitDistance,   // c1 * D0_hat / n, D0_hat = n^-1 sum |Y_i - <M0, X_i>|
};

struct RsGradEta0Rule {
    RsGradEta0Kind kind = RsGradEta0Kind::OperatorNorm;
    double value = 0.0;
    double c1 = 1.0;
};

struct RsGradConfig {
    Index rank = 1;
    LossSpec loss = LossSpec::absolute();
    RsGradEta0Rule eta0{};
    StepsizeSchedule schedule{};

    void validate() const;
};

struct RsGradResult {
    LowRankFactors estimate;
    Trace trace;
    std::optional<std::size_t> switch_iter;
    double eta0 = 0.0;
    double eta2 = 0.0;
    LossSpec final_loss{};
};

/// gamma_hat = n^-1 sum |Y_i - <M, X_i>|.
double estimate_noise_scale_mat(const MatrixProblem& problem, const Matrix& M);

double resolve_rsgrad_eta0(const MatrixProblem& problem, const RsGradConfig& config,
                           const LowRankFactors& M0);

RsGradResult rsgrad_solve(const MatrixProblem& problem, const RsGradConfig& config,
                          const LowRankFactors& M0);

/// Two-phase regularity constants: sharpness mu and subgradient bound L in the
/// far (comp) and near (stat) regions, and the radii separating them.
struct TheoryConstants {
    double mu_comp = 0.0;
    double L_comp = 0.0;
    double mu_stat = 0.0;
    double L_stat = 0.0;
    double tau_comp = 0.0;
    double tau_stat = 0.0;

    void validate() const;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct TheoryStepsizes {
    Interval eta0;
    Interval eta2;
};

/// Admissible stepsizes: eta0 in D0 mu_comp / L_comp^2 * [0.2, 0.3] and
/// eta in mu_stat / L_stat^2 * [0.125, 0.75].
TheoryStepsizes theory_stepsizes(const TheoryConstants& constants, double D0);

enum class NoiseRegime { Gaussian, HeavyTailed };

/// Regularity constants for a loss/noise pairing, with the O(.) factors in
/// tau_stat and L_stat set to `big_o`. For Gaussian noise pass sigma as
/// noise_scale (b0 and b1 are ignored); for heavy-tailed noise pass gamma
/// together with the density bounds b0, b1.
TheoryConstants regularity_constants(LossKind loss, NoiseRegime regime, double n, Index d1,
                                     Index r, double noise_scale, double b0 = 0.0,
                                     double b1 = 0.0, double huber_delta = 0.0,
                                     double big_o = 1.0);

}  // namespace robreg
