#include "robreg/rsgrad.hpp"

#include "robreg/errors.hpp"

#include <cmath>
#include <string>

namespace robreg {

namespace {

struct LowRankOps {
    const MatrixProblem& problem;

    Vector residuals(const LowRankFactors& f) const {
        return residuals_mat(problem, f.reconstruct());
    }

    Matrix subgradient(const LossSpec& loss, const Vector& resid) const {
        return subgradient_from_residuals(loss, problem, resid);
    }

    LowRankFactors step(const LowRankFactors& f, const Matrix& G, double eta) const {
        return retract_fast(f, G, eta);
    }

    std::optional<double> rel_error(const LowRankFactors& f) const {
        if (!problem.has_truth()) return std::nullopt;
        return error_to_truth(problem, f.reconstruct()).relative;
    }

    std::size_t support(const LowRankFactors& f) const {
        if (f.s.size() == 0) return 0;
        const double cut = 1e-12 * std::max(f.s[0], 1e-300);
        return static_cast<std::size_t>((f.s.array() > cut).count());
    }

    Index n() const { return problem.n(); }
};

// Brings M0 to exactly r factor columns: pads with orthonormal directions and
// zero singular values, or drops trailing zero singular values.
LowRankFactors fit_to_rank(const LowRankFactors& m0, Index r) {
    const Index k = m0.s.size();
    if (k == r) return m0;
    if (k > r) {
        if ((m0.s.tail(k - r).array() > 1e-12 * std::max(m0.s.maxCoeff(), 1.0)).any()) {
            throw ParameterError("rsgrad: initial estimate has rank above " + std::to_string(r));
        }
        return {m0.U.leftCols(r), m0.s.head(r), m0.V.leftCols(r)};
    }
    // re-truncating the reconstruction gives orthonormal r-column factors
    return svd_top(m0.reconstruct(), r);
}

}  // namespace

void RsGradConfig::validate() const {
    if (rank < 1) throw ParameterError("rsgrad: rank must be at least 1");
    if (!huber_auto_delta(loss)) loss.validate();
    switch (eta0.kind) {
        case RsGradEta0Kind::Explicit:
            if (!(eta0.value > 0)) throw ParameterError("rsgrad: explicit eta0 must be positive");
            break;
        case RsGradEta0Kind::OperatorNorm:
        case RsGradEta0Kind::InitDistance:
            if (!(eta0.c1 > 0)) throw ParameterError("rsgrad: c1 must be positive");
            break;
    }
    schedule.validate();
}

double estimate_noise_scale_mat(const MatrixProblem& problem, const Matrix& M) {
    return mean_abs(residuals_mat(problem, M));
}

double resolve_rsgrad_eta0(const MatrixProblem& problem, const RsGradConfig& config,
                           const LowRankFactors& M0) {
    if (config.eta0.kind == RsGradEta0Kind::Explicit) return config.eta0.value;
    const double gamma0 = estimate_noise_scale_mat(problem, M0.reconstruct());
    LossSpec scaled = config.loss;
    if (huber_auto_delta(scaled)) scaled.delta = gamma0 > 0 ? gamma0 : 1.0;
    const double scale =
        config.eta0.kind == RsGradEta0Kind::OperatorNorm
            ? (M0.s.size() > 0 ? M0.s.maxCoeff() : 0.0)
            : gamma0;
    const double eta0 = config.eta0.c1 * scale /
                        (static_cast<double>(problem.n()) * loss_step_scale(scaled, gamma0));
    if (!(eta0 > 0) || !std::isfinite(eta0)) {
        throw ParameterError("rsgrad: cannot derive eta0 from M0 (zero estimate or vanishing "
                             "residuals); pass an explicit eta0");
    }
    return eta0;
}

RsGradResult rsgrad_solve(const MatrixProblem& problem, const RsGradConfig& config,
                          const LowRankFactors& M0) {
    config.validate();
    if (config.rank > std::min(problem.d1(), problem.d2())) {
        throw ParameterError("rsgrad: rank exceeds min(d1, d2)");
    }
    if (M0.rows() != problem.d1() || M0.cols() != problem.d2()) {
        throw ParameterError("rsgrad: initial estimate shape does not match the problem");
    }
    const LowRankFactors start = fit_to_rank(M0, config.rank);
    const double eta0 = resolve_rsgrad_eta0(problem, config, start);
    LowRankOps ops{problem};
    auto run = run_two_phase<LowRankFactors>(start, config.loss, eta0, config.schedule, ops);
    return RsGradResult{std::move(run.estimate), std::move(run.trace), run.switch_iter, eta0,
                        run.eta2, run.final_loss};
}

void TheoryConstants::validate() const {
    if (!(mu_comp > 0 && L_comp > 0 && mu_stat > 0 && L_stat > 0)) {
        throw ParameterError("theory constants: mu and L must be positive");
    }
    if (!(tau_comp > tau_stat && tau_stat > 0)) {
        throw ParameterError("theory constants: need tau_comp > tau_stat > 0");
    }
    if (L_comp < mu_comp || L_stat < mu_stat) {
        throw ParameterError("theory constants: subgradient bound below sharpness");
    }
}

TheoryStepsizes theory_stepsizes(const TheoryConstants& c, double D0) {
    c.validate();
    if (!(D0 > 0)) throw ParameterError("theory_stepsizes: D0 must be positive");
    const double comp = D0 * c.mu_comp / (c.L_comp * c.L_comp);
    const double stat = c.mu_stat / (c.L_stat * c.L_stat);
    return {{0.2 * comp, 0.3 * comp}, {0.125 * stat, 0.75 * stat}};
}

TheoryConstants regularity_constants(LossKind loss, NoiseRegime regime, double n, Index d1,
                                     Index r, double noise_scale, double b0, double b1,
                                     double huber_delta, double big_o) {
    if (!(n > 0) || d1 < 1 || r < 1 || !(noise_scale > 0) || !(big_o > 0)) {
        throw ParameterError("regularity_constants: invalid arguments");
    }
    const double root = std::sqrt(static_cast<double>(r * d1) / n);
    TheoryConstants c;
    if (regime == NoiseRegime::Gaussian) {
        if (loss != LossKind::Absolute) {
            throw ParameterError("regularity_constants: Gaussian row is tabulated for the "
                                 "absolute loss only");
        }
        const double sigma = noise_scale;
        c.tau_comp = sigma;
        c.tau_stat = big_o * sigma * root;
        c.mu_comp = n / 12.0;
        c.L_comp = 2.0 * n;
        c.mu_stat = n / (12.0 * sigma);
        c.L_stat = big_o * n / sigma;
        return c;
    }
    if (!(b0 > 0) || !(b1 > 0)) {
        throw ParameterError("regularity_constants: heavy-tailed rows need b0, b1 > 0");
    }
    const double gamma = noise_scale;
    c.tau_stat = big_o * b0 * root;
    switch (loss) {
        case LossKind::Absolute:
            c.tau_comp = 8.0 * gamma;
            c.mu_comp = n / 4.0;
            c.L_comp = 2.0 * n;
            c.mu_stat = n / (12.0 * b0);
            c.L_stat = big_o * n / b1;
            break;
        case LossKind::Huber:
            if (!(huber_delta > 0)) throw ParameterError("regularity_constants: huber delta");
            c.tau_comp = 8.0 * gamma + 2.0 * huber_delta;
            c.mu_comp = huber_delta * n / 2.0;
            c.L_comp = 4.0 * huber_delta * n;
            c.mu_stat = huber_delta * n / (3.0 * b0);
            c.L_stat = big_o * huber_delta * n / b1;
            break;
        case LossKind::Quantile:
            c.tau_comp = 8.0 * gamma;
            c.mu_comp = n / 8.0;
            c.L_comp = n;
            c.mu_stat = n / (24.0 * b0);
            c.L_stat = big_o * n / b1;
            break;
        case LossKind::Square:
            throw ParameterError("regularity_constants: no tabulated row for the square loss");
    }
    return c;
}

}  // namespace robreg
