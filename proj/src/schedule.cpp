#include "robreg/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace robreg {

std::string to_string(ScheduleMode mode) {
    return mode == ScheduleMode::TwoPhase ? "two-phase" : "decay-only";
}

ScheduleMode parse_schedule_mode(std::string_view name) {
    if (name == "two-phase") return ScheduleMode::TwoPhase;
    if (name == "decay-only") return ScheduleMode::DecayOnly;
    throw ParameterError("unknown schedule mode '" + std::string(name) + "'");
}

void StepsizeSchedule::validate() const {
    if (!(decay_q > 0 && decay_q < 1)) throw ParameterError("decay_q must lie in (0, 1)");
    switch (switch_rule.kind) {
        case SwitchKind::StepsizeThreshold:
            if (!(switch_rule.stepsize_threshold > 0)) {
                throw ParameterError("switch threshold must be positive");
            }
            break;
        case SwitchKind::ObjectivePlateau:
            if (!(switch_rule.plateau_tolerance > 0) || switch_rule.plateau_window == 0) {
                throw ParameterError("plateau rule needs a positive tolerance and window");
            }
            break;
        case SwitchKind::NoiseLevel:
            if (!(switch_rule.noise_gamma > 0) || !(switch_rule.noise_factor > 0)) {
                throw ParameterError("noise-level switch needs a positive gamma and factor");
            }
            break;
    }
    switch (eta2.kind) {
        case Eta2Kind::Explicit:
            if (!(eta2.value > 0)) throw ParameterError("explicit phase-two stepsize must be positive");
            break;
        case Eta2Kind::NoiseScaled:
            if (!(eta2.c2 > 0)) throw ParameterError("phase-two constant c2 must be positive");
            break;
        case Eta2Kind::NoiseKnown:
            if (!(eta2.c2 > 0) || !(eta2.gamma > 0)) {
                throw ParameterError("known-noise phase-two rule needs c2 > 0 and gamma > 0");
            }
            break;
    }
}

double loss_step_scale(const LossSpec& loss, double residual_scale) {
    if (auto lip = loss.lipschitz()) return *lip;
    return 2.0 * residual_scale;
}

double mean_abs(const Vector& residuals) {
    return residuals.size() == 0 ? 0.0 : residuals.cwiseAbs().mean();
}

namespace detail {

bool objective_plateaued(const Trace& trace, std::size_t window, double tol) {
    if (trace.size() <= window) return false;
    const double now = trace.back().objective;
    const double then = trace[trace.size() - 1 - window].objective;
    const double scale = std::max(std::abs(then), 1e-300);
    return std::abs(now - then) / scale < tol;
}

}  // namespace detail

}  // namespace robreg
