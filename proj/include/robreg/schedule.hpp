#pragma once

// Two-phase stepsize schedule shared by the sparse and low-rank solvers.
//
// Phase one takes geometrically decaying steps eta_l = q^l * eta_0. Once the
// switch rule fires, phase two keeps a constant step derived from the noise
// scale. Decay-only mode never switches and keeps decaying for the whole
// iteration budget.

#include "robreg/linalg.hpp"
#include "robreg/losses.hpp"
#include "robreg/trace.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace robreg {

enum class ScheduleMode { TwoPhase, DecayOnly };

std::string to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(std::string_view name);

enum class SwitchKind {
    StepsizeThreshold,  // phase-one stepsize drops below a threshold
    ObjectivePlateau,   // relative objective change over a window is tiny
    NoiseLevel,         // mean |residual| has reached the noise scale
};

struct SwitchRule {
    SwitchKind kind = SwitchKind::StepsizeThreshold;
    double stepsize_threshold = 1e-10;
    double plateau_tolerance = 1e-6;
    std::size_t plateau_window = 10;
    /// NoiseLevel: switch once mean |u_i| <= noise_factor * noise_gamma.
    double noise_gamma = 0.0;
    double noise_factor = 1.5;
};

enum class Eta2Kind {
    Explicit,     // value
    NoiseScaled,  // c2 * gamma_hat / n, gamma_hat = mean |u_i| at the switch
    NoiseKnown,   // c2 * gamma / n with a known gamma
};

struct Eta2Rule {
    Eta2Kind kind = Eta2Kind::NoiseScaled;
    double value = 0.0;
    double c2 = 1.0;
    double gamma = 0.0;
};

struct StepsizeSchedule {
    ScheduleMode mode = ScheduleMode::TwoPhase;
    double decay_q = 0.91;
    SwitchRule switch_rule{};
    Eta2Rule eta2{};
    std::size_t max_iters_phase1 = 1000;
    std::size_t max_iters_phase2 = 300;

    void validate() const;
};

/// Divides a raw stepsize by the loss's subgradient scale so the same tuning
/// constants work across losses: 1 for absolute, 2*delta for Huber,
/// max(delta, 1-delta) for quantile and 2*residual_scale for square loss.
double loss_step_scale(const LossSpec& loss, double residual_scale);

/// mean |u_i|
double mean_abs(const Vector& residuals);

namespace detail {

/// True when the objective has moved by less than tol (relative) over the
/// last `window` records.
bool objective_plateaued(const Trace& trace, std::size_t window, double tol);

}  // namespace detail

/// Huber with delta <= 0 means "pick delta from the data": gamma_hat at the
/// start for phase one and gamma_hat at the switch for phase two.
inline bool huber_auto_delta(const LossSpec& loss) {
    return loss.kind == LossKind::Huber && !(loss.delta > 0);
}

template <class State>
struct ScheduleResult {
    State estimate;
    Trace trace;
    std::optional<std::size_t> switch_iter;  // first phase-two iteration
    double eta2 = 0.0;
    LossSpec final_loss{};
};

/// Runs the two-phase iteration. `ops` supplies the problem-specific pieces:
///   Vector residuals(const State&)
///   auto   subgradient(const LossSpec&, const Vector& residuals)
///   State  step(const State&, const G&, double eta)
///   std::optional<double> rel_error(const State&)
///   std::size_t support(const State&)
///   Index  n()
/// `eta0` is the phase-one starting stepsize (already loss-normalized).
template <class State, class Ops>
ScheduleResult<State> run_two_phase(State state, LossSpec loss, double eta0,
                                    const StepsizeSchedule& schedule, Ops& ops) {
    schedule.validate();
    if (!(eta0 > 0) || !std::isfinite(eta0)) {
        throw ParameterError("initial stepsize must be positive and finite");
    }
    const double n = static_cast<double>(ops.n());

    Vector resid = ops.residuals(state);
    const bool auto_delta = huber_auto_delta(loss);
    if (auto_delta) {
        const double g = mean_abs(resid);
        loss.delta = g > 0 ? g : 1.0;
    }
    loss.validate();

    const double initial_objective = objective(loss, resid);
    const std::size_t budget = schedule.max_iters_phase1 + schedule.max_iters_phase2;

    ScheduleResult<State> out{state, {}, std::nullopt, 0.0, loss};
    out.trace.reserve(budget);

    int phase = 1;
    double eta = eta0;
    std::size_t phase_one_iters = 0;
    std::size_t phase_two_iters = 0;

    for (std::size_t it = 0; it < budget; ++it) {
        if (phase == 1 && schedule.mode == ScheduleMode::TwoPhase) {
            bool fire = phase_one_iters >= schedule.max_iters_phase1;
            const SwitchRule& rule = schedule.switch_rule;
            switch (rule.kind) {
                case SwitchKind::StepsizeThreshold:
                    fire = fire || eta < rule.stepsize_threshold;
                    break;
                case SwitchKind::ObjectivePlateau:
                    fire = fire || detail::objective_plateaued(out.trace, rule.plateau_window,
                                                               rule.plateau_tolerance);
                    break;
                case SwitchKind::NoiseLevel:
                    fire = fire || mean_abs(resid) <= rule.noise_factor * rule.noise_gamma;
                    break;
            }
            if (fire) {
                phase = 2;
                out.switch_iter = it + 1;
                const double gamma_hat = mean_abs(resid);
                if (auto_delta && gamma_hat > 0) loss.delta = gamma_hat;
                const double gamma =
                    schedule.eta2.kind == Eta2Kind::NoiseKnown ? schedule.eta2.gamma : gamma_hat;
                double eta2 = 0.0;
                if (schedule.eta2.kind == Eta2Kind::Explicit) {
                    eta2 = schedule.eta2.value;
                } else {
                    eta2 = schedule.eta2.c2 * gamma / (n * loss_step_scale(loss, gamma));
                }
                // a vanishing noise scale (noiseless data) keeps the last
                // phase-one step instead
                if (!(eta2 > 0) || !std::isfinite(eta2)) eta2 = eta;
                eta = eta2;
                out.eta2 = eta2;
            }
        }
        if (phase == 2 && phase_two_iters >= schedule.max_iters_phase2) break;
        if (!(eta > 0)) break;  // decay underflowed to zero

        const auto G = ops.subgradient(loss, resid);
        state = ops.step(state, G, eta);
        resid = ops.residuals(state);
        const double obj = objective(loss, resid);

        TraceRecord rec;
        rec.iter = it + 1;
        rec.phase = phase;
        rec.stepsize = eta;
        rec.objective = obj;
        rec.rel_error = ops.rel_error(state);
        rec.support_size = ops.support(state);
        out.trace.push_back(rec);

        if (!std::isfinite(obj) || !resid.allFinite()) {
            throw DivergedError("solver diverged: non-finite iterate at iteration " +
                                    std::to_string(it + 1),
                                std::move(out.trace));
        }
        if (initial_objective > 0 && obj > 1e6 * initial_objective) {
            throw DivergedError("solver diverged: objective exceeded 1e6 x its initial value at "
                                "iteration " + std::to_string(it + 1),
                                std::move(out.trace));
        }

        if (phase == 1) {
            ++phase_one_iters;
            eta *= schedule.decay_q;
        } else {
            ++phase_two_iters;
        }
    }
    out.estimate = std::move(state);
    out.final_loss = loss;
    return out;
}

}  // namespace robreg
