#include "robreg/datagen.hpp"
#include "robreg/errors.hpp"
#include "robreg/iht.hpp"
#include "robreg/init.hpp"
#include "robreg/rsgrad.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace robreg;

namespace {

SparseInstance noiseless_sparse(std::uint64_t seed, std::size_t n = 200) {
    SparseTruthSpec truth;
    Vector beta = Vector::Zero(50);
    beta.head(3) << 16, 4, 1;
    truth.entries = beta;
    return gen_sparse_problem(truth, DesignSpec{}, NoiseSpec::none(), std::nullopt, n, seed);
}

LowRankInstance lowrank_instance(std::uint64_t seed, const NoiseSpec& noise, std::size_t n,
                                 Index d = 12, Index r = 2) {
    LowRankTruthSpec truth;
    truth.d1 = d;
    truth.d2 = d;
    truth.rank = r;
    return gen_lowrank_problem(truth, DesignSpec{}, noise, std::nullopt, n, seed);
}

void expect_trace_shape(const Trace& trace, double q, std::size_t max_support) {
    ASSERT_FALSE(trace.empty());
    int last_phase = 1;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const auto& rec = trace[k];
        EXPECT_EQ(rec.iter, k + 1);
        EXPECT_GE(rec.phase, last_phase);
        EXPECT_LE(rec.support_size, max_support);
        EXPECT_TRUE(std::isfinite(rec.objective));
        if (k > 0 && rec.phase == 1) {
            EXPECT_NEAR(rec.stepsize / trace[k - 1].stepsize, q, 1e-12);
        }
        if (k > 0 && rec.phase == 2 && trace[k - 1].phase == 2) {
            EXPECT_EQ(rec.stepsize, trace[k - 1].stepsize);
        }
        last_phase = rec.phase;
    }
}

}  // namespace

TEST(Iht, NoiselessRecovery) {
    const auto inst = noiseless_sparse(1);
    IhtConfig cfg;
    cfg.sparsity = 3;
    const auto res = iht_solve(inst.problem, LossSpec::absolute(), cfg);
    EXPECT_LT(error_to_truth(inst.problem, res.beta).relative, 1e-6);
    EXPECT_TRUE(res.switch_iter.has_value());
    expect_trace_shape(res.trace, 0.91, 3);
}

TEST(Iht, RecoversWithEveryRobustLoss) {
    const auto inst = noiseless_sparse(2);
    IhtConfig cfg;
    cfg.sparsity = 3;
    for (const auto& loss : {LossSpec::huber(0.0), LossSpec::huber(1.0), LossSpec::quantile(0.5),
                             LossSpec::quantile(0.3)}) {
        const auto res = iht_solve(inst.problem, loss, cfg);
        EXPECT_LT(error_to_truth(inst.problem, res.beta).relative, 1e-4) << to_string(loss.kind);
    }
}

TEST(Iht, TraceRecordsRelativeErrorOnlyWithTruth) {
    const auto inst = noiseless_sparse(3);
    const VectorProblem no_truth(inst.problem.design(), inst.problem.responses());
    IhtConfig cfg;
    cfg.sparsity = 3;
    cfg.schedule.max_iters_phase1 = 5;
    cfg.schedule.max_iters_phase2 = 5;
    EXPECT_TRUE(iht_solve(inst.problem, LossSpec::absolute(), cfg).trace[0].rel_error);
    EXPECT_FALSE(iht_solve(no_truth, LossSpec::absolute(), cfg).trace[0].rel_error);
}

TEST(Iht, DecayOnlySharesPhaseOnePrefix) {
    SparseTruthSpec truth;
    truth.dim = 40;
    truth.sparsity = 4;
    truth.magnitude_lo = 1;
    truth.magnitude_hi = 5;
    const auto sp = gen_sparse_problem(truth, DesignSpec{}, NoiseSpec::gaussian(0.5), std::nullopt,
                                       300, 4);
    IhtConfig cfg;
    cfg.sparsity = 4;
    const auto two = iht_solve(sp.problem, LossSpec::absolute(), cfg);
    cfg.schedule.mode = ScheduleMode::DecayOnly;
    const auto decay = iht_solve(sp.problem, LossSpec::absolute(), cfg);
    ASSERT_TRUE(two.switch_iter);
    EXPECT_FALSE(decay.switch_iter);
    EXPECT_EQ(decay.trace.size(), cfg.schedule.max_iters_phase1 + cfg.schedule.max_iters_phase2);
    for (std::size_t k = 0; k + 1 < *two.switch_iter; ++k) {
        EXPECT_EQ(two.trace[k].objective, decay.trace[k].objective);
        EXPECT_EQ(two.trace[k].stepsize, decay.trace[k].stepsize);
    }
    for (const auto& rec : decay.trace) EXPECT_EQ(rec.phase, 1);
    EXPECT_NE(error_to_truth(sp.problem, two.beta).absolute,
              error_to_truth(sp.problem, decay.beta).absolute);
}

TEST(Iht, ExplicitAndKnownNoisePhaseTwoStep) {
    SparseTruthSpec truth;
    truth.dim = 30;
    truth.sparsity = 3;
    truth.magnitude_lo = 1;
    truth.magnitude_hi = 3;
    const auto sp =
        gen_sparse_problem(truth, DesignSpec{}, NoiseSpec::gaussian(1.0), std::nullopt, 200, 5);
    IhtConfig cfg;
    cfg.sparsity = 3;
    cfg.schedule.eta2.kind = Eta2Kind::NoiseKnown;
    cfg.schedule.eta2.gamma = 0.8;
    cfg.schedule.eta2.c2 = 0.5;
    auto res = iht_solve(sp.problem, LossSpec::absolute(), cfg);
    EXPECT_DOUBLE_EQ(res.eta2, 0.5 * 0.8 / 200.0);
    EXPECT_EQ(res.trace.back().stepsize, res.eta2);

    cfg.schedule.eta2.kind = Eta2Kind::Explicit;
    cfg.schedule.eta2.value = 1e-4;
    res = iht_solve(sp.problem, LossSpec::absolute(), cfg);
    EXPECT_EQ(res.eta2, 1e-4);

    // the square loss is normalized by twice the residual scale
    cfg.schedule.eta2.kind = Eta2Kind::NoiseKnown;
    cfg.schedule.eta2.c2 = 1.0;
    res = iht_solve(sp.problem, LossSpec::square(), cfg);
    EXPECT_DOUBLE_EQ(res.eta2, 1.0 / (2.0 * 200.0));
}

TEST(Iht, PlateauAndNoiseLevelSwitchRules) {
    const auto inst = noiseless_sparse(6);
    IhtConfig cfg;
    cfg.sparsity = 3;
    cfg.schedule.switch_rule.kind = SwitchKind::ObjectivePlateau;
    auto res = iht_solve(inst.problem, LossSpec::absolute(), cfg);
    ASSERT_TRUE(res.switch_iter);
    EXPECT_LT(*res.switch_iter, 1000u);

    cfg.schedule.switch_rule.kind = SwitchKind::NoiseLevel;
    cfg.schedule.switch_rule.noise_gamma = 1.0;
    res = iht_solve(inst.problem, LossSpec::absolute(), cfg);
    ASSERT_TRUE(res.switch_iter);
    EXPECT_GT(*res.switch_iter, 1u);
}

TEST(Iht, PhaseOneCapForcesSwitch) {
    const auto inst = noiseless_sparse(7);
    IhtConfig cfg;
    cfg.sparsity = 3;
    cfg.schedule.max_iters_phase1 = 10;
    cfg.schedule.max_iters_phase2 = 4;
    const auto res = iht_solve(inst.problem, LossSpec::absolute(), cfg);
    EXPECT_EQ(res.switch_iter, std::optional<std::size_t>(11));
    EXPECT_EQ(res.trace.size(), 14u);
}

TEST(Iht, Validation) {
    const auto inst = noiseless_sparse(8);
    IhtConfig cfg;
    cfg.sparsity = 0;
    EXPECT_THROW(iht_solve(inst.problem, LossSpec::absolute(), cfg), ParameterError);
    cfg.sparsity = 51;
    EXPECT_THROW(iht_solve(inst.problem, LossSpec::absolute(), cfg), ParameterError);
    cfg.sparsity = 2;
    EXPECT_THROW(iht_solve(inst.problem, LossSpec::absolute(), cfg, Vector::Ones(50)),
                 ParameterError);
    EXPECT_THROW(iht_solve(inst.problem, LossSpec::quantile(2.0), cfg), ParameterError);
    cfg.schedule.decay_q = 1.0;
    EXPECT_THROW(iht_solve(inst.problem, LossSpec::absolute(), cfg), ParameterError);
}

TEST(Iht, DivergenceCarriesTrace) {
    const auto inst = noiseless_sparse(9);
    IhtConfig cfg;
    cfg.sparsity = 3;
    cfg.eta0.kind = Eta0Kind::Explicit;
    cfg.eta0.value = 10.0;
    cfg.schedule.decay_q = 0.999;
    try {
        iht_solve(inst.problem, LossSpec::square(), cfg);
        FAIL() << "expected divergence";
    } catch (const DivergedError& e) {
        EXPECT_FALSE(e.trace().empty());
    }
}

TEST(Iht, ScaledStartingStep) {
    const auto inst = noiseless_sparse(10);
    IhtConfig cfg;
    cfg.sparsity = 3;
    cfg.eta0.distance = 2.0;
    cfg.eta0.c0 = 0.5;
    EXPECT_DOUBLE_EQ(resolve_iht_eta0(inst.problem, LossSpec::absolute(), cfg, Vector::Zero(50)),
                     0.5 * 2.0 / 200.0);
}

TEST(RsGrad, NoiselessRecovery) {
    const auto inst = lowrank_instance(11, NoiseSpec::none(), 300);
    RsGradConfig cfg;
    cfg.rank = 2;
    const auto m0 = spectral_init(inst.problem, 2, Covariance::identity());
    const auto res = rsgrad_solve(inst.problem, cfg, m0);
    EXPECT_LT(error_to_truth(inst.problem, res.estimate.reconstruct()).relative, 1e-6);
    expect_trace_shape(res.trace, 0.91, 2);
    EXPECT_EQ(res.estimate.rank_bound(), 2);
    const Matrix& U = res.estimate.U;
    EXPECT_LT((U.transpose() * U - Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(RsGrad, HuberAutoDeltaTracksNoise) {
    const auto inst = lowrank_instance(12, NoiseSpec::gaussian(0.05), 400);
    RsGradConfig cfg;
    cfg.rank = 2;
    cfg.loss = LossSpec::huber(0.0);
    const auto m0 = spectral_init(inst.problem, 2, Covariance::identity());
    const auto res = rsgrad_solve(inst.problem, cfg, m0);
    EXPECT_GT(res.final_loss.delta, 0.0);
    EXPECT_LT(res.final_loss.delta, 1.0);
    EXPECT_LT(error_to_truth(inst.problem, res.estimate.reconstruct()).relative, 0.1);
}

TEST(RsGrad, AcceptsLowerRankStartAndRejectsHigher) {
    const auto inst = lowrank_instance(13, NoiseSpec::none(), 300);
    RsGradConfig cfg;
    cfg.rank = 2;
    cfg.schedule.max_iters_phase1 = 3;
    cfg.schedule.max_iters_phase2 = 1;
    const auto m1 = spectral_init(inst.problem, 1, Covariance::identity());
    EXPECT_NO_THROW(rsgrad_solve(inst.problem, cfg, m1));
    cfg.rank = 1;
    const auto m3 = spectral_init(inst.problem, 3, Covariance::identity());
    EXPECT_THROW(rsgrad_solve(inst.problem, cfg, m3), ParameterError);
    cfg.rank = 13;
    EXPECT_THROW(rsgrad_solve(inst.problem, cfg, m1), ParameterError);
}

TEST(RsGrad, StartingStepRules) {
    const auto inst = lowrank_instance(14, NoiseSpec::none(), 200);
    const auto m0 = spectral_init(inst.problem, 2, Covariance::identity());
    RsGradConfig cfg;
    cfg.rank = 2;
    cfg.eta0.c1 = 2.0;
    EXPECT_DOUBLE_EQ(resolve_rsgrad_eta0(inst.problem, cfg, m0), 2.0 * m0.s[0] / 200.0);
    cfg.eta0.kind = RsGradEta0Kind::InitDistance;
    EXPECT_DOUBLE_EQ(resolve_rsgrad_eta0(inst.problem, cfg, m0),
                     2.0 * estimate_init_distance(inst.problem, m0.reconstruct()) / 200.0);
    cfg.eta0.kind = RsGradEta0Kind::Explicit;
    cfg.eta0.value = 0.125;
    EXPECT_EQ(resolve_rsgrad_eta0(inst.problem, cfg, m0), 0.125);
}

TEST(TheoryConstants, TabulatedRows) {
    const double n = 1000, sigma = 2.0;
    const auto g = regularity_constants(LossKind::Absolute, NoiseRegime::Gaussian, n, 10, 2, sigma);
    EXPECT_DOUBLE_EQ(g.tau_comp, sigma);
    EXPECT_DOUBLE_EQ(g.tau_stat, sigma * std::sqrt(20.0 / n));
    EXPECT_DOUBLE_EQ(g.mu_comp, n / 12);
    EXPECT_DOUBLE_EQ(g.L_comp, 2 * n);
    EXPECT_DOUBLE_EQ(g.mu_stat, n / (12 * sigma));
    EXPECT_DOUBLE_EQ(g.L_stat, n / sigma);

    const double gamma = 1.5, b0 = 1.2, b1 = 0.9, delta = 0.4;
    const auto a = regularity_constants(LossKind::Absolute, NoiseRegime::HeavyTailed, n, 10, 2,
                                        gamma, b0, b1);
    EXPECT_DOUBLE_EQ(a.tau_comp, 8 * gamma);
    EXPECT_DOUBLE_EQ(a.mu_comp, n / 4);
    EXPECT_DOUBLE_EQ(a.mu_stat, n / (12 * b0));
    EXPECT_DOUBLE_EQ(a.L_stat, n / b1);
    const auto h = regularity_constants(LossKind::Huber, NoiseRegime::HeavyTailed, n, 10, 2, gamma,
                                        b0, b1, delta);
    EXPECT_DOUBLE_EQ(h.tau_comp, 8 * gamma + 2 * delta);
    EXPECT_DOUBLE_EQ(h.mu_comp, delta * n / 2);
    EXPECT_DOUBLE_EQ(h.L_comp, 4 * delta * n);
    EXPECT_DOUBLE_EQ(h.mu_stat, delta * n / (3 * b0));
    const auto q = regularity_constants(LossKind::Quantile, NoiseRegime::HeavyTailed, n, 10, 2,
                                        gamma, b0, b1);
    EXPECT_DOUBLE_EQ(q.mu_comp, n / 8);
    EXPECT_DOUBLE_EQ(q.L_comp, n);
    EXPECT_DOUBLE_EQ(q.mu_stat, n / (24 * b0));
    EXPECT_THROW(regularity_constants(LossKind::Square, NoiseRegime::HeavyTailed, n, 10, 2, gamma,
                                      b0, b1),
                 ParameterError);
}

TEST(TheoryConstants, StepsizeIntervals) {
    const auto c = regularity_constants(LossKind::Absolute, NoiseRegime::Gaussian, 1000, 10, 2, 1.0);
    const auto s = theory_stepsizes(c, 3.0);
    const double comp = 3.0 * (1000.0 / 12) / (2000.0 * 2000.0);
    EXPECT_DOUBLE_EQ(s.eta0.lo, 0.2 * comp);
    EXPECT_DOUBLE_EQ(s.eta0.hi, 0.3 * comp);
    const double stat = (1000.0 / 12) / (1000.0 * 1000.0);
    EXPECT_DOUBLE_EQ(s.eta2.lo, 0.125 * stat);
    EXPECT_DOUBLE_EQ(s.eta2.hi, 0.75 * stat);
    TheoryConstants bad = c;
    bad.tau_stat = bad.tau_comp * 2;
    EXPECT_THROW(theory_stepsizes(bad, 1.0), ParameterError);
    EXPECT_THROW(theory_stepsizes(c, 0.0), ParameterError);
}

TEST(SpectralInit, MomentMatrixApproachesTruthWithSamples) {
    const auto small = lowrank_instance(15, NoiseSpec::none(), 200);
    const auto large = lowrank_instance(15, NoiseSpec::none(), 3200);
    auto err = [](const LowRankInstance& inst) {
        const Matrix m0 = spectral_init(inst.problem, 2, Covariance::identity()).reconstruct();
        return error_to_truth(inst.problem, m0).relative;
    };
    EXPECT_LT(err(large), err(small));
    EXPECT_LT(err(large), 0.5);
}

TEST(SpectralInit, DiagonalCovarianceIsUndone) {
    LowRankTruthSpec truth;
    truth.d1 = 8;
    truth.d2 = 8;
    truth.rank = 1;
    DesignSpec design;
    design.kind = DesignKind::DiagonalCovariance;
    design.cl = 0.25;
    design.cu = 4.0;
    const auto inst =
        gen_lowrank_problem(truth, design, NoiseSpec::none(), std::nullopt, 20000, 16);
    ASSERT_TRUE(inst.design_variances);
    const Matrix whitened =
        moment_matrix(inst.problem, Covariance::diagonal(*inst.design_variances));
    const Matrix naive = moment_matrix(inst.problem, Covariance::identity());
    const Matrix& t = *inst.problem.truth();
    EXPECT_LT((whitened - t).norm(), (naive - t).norm());
    EXPECT_LT((whitened - t).norm() / t.norm(), 0.15);
}

TEST(SpectralInit, DenseMatchesDiagonal) {
    const auto inst = lowrank_instance(17, NoiseSpec::none(), 100, 4, 1);
    Vector var = Vector::LinSpaced(16, 0.5, 2.0);
    const Matrix a = moment_matrix(inst.problem, Covariance::diagonal(var));
    const Matrix b = moment_matrix(inst.problem, Covariance::dense(var.asDiagonal()));
    EXPECT_LT((a - b).norm(), 1e-12);
    EXPECT_THROW(moment_matrix(inst.problem, Covariance::diagonal(Vector::Zero(16))),
                 ParameterError);
    EXPECT_THROW(moment_matrix(inst.problem, Covariance::dense(Matrix::Zero(16, 16))),
                 ParameterError);
    EXPECT_THROW(moment_matrix(inst.problem, Covariance::diagonal(Vector::Ones(3))),
                 ParameterError);
}
