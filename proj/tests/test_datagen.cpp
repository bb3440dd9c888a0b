#include "oracles.hpp"

#include "robreg/datagen.hpp"
#include "robreg/errors.hpp"
#include "robreg/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace robreg;

namespace {

double mean_abs_draws(const NoiseSpec& noise, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) acc += std::abs(noise.sample(rng));
    return acc / static_cast<double>(count);
}

SparseTruthSpec small_sparse() {
    SparseTruthSpec t;
    t.dim = 20;
    t.sparsity = 3;
    t.magnitude_lo = 1;
    t.magnitude_hi = 2;
    return t;
}

}  // namespace

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 10; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        EXPECT_NE(x, c.normal());
    }
}

TEST(Rng, SubstreamsDependOnNameOnly) {
    const Rng root(7);
    Rng consumed(7);
    for (int i = 0; i < 100; ++i) consumed.uniform();
    Rng s1 = root.substream("noise");
    Rng s2 = consumed.substream("noise");
    Rng s3 = root.substream("design");
    const double v = s1.uniform();
    EXPECT_EQ(v, s2.uniform());
    EXPECT_NE(v, s3.uniform());
}

TEST(Rng, UniformAndSignRanges) {
    Rng rng(1);
    int plus = 0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform(-2, 3);
        EXPECT_GE(u, -2);
        EXPECT_LT(u, 3);
        const double s = rng.sign();
        EXPECT_TRUE(s == 1.0 || s == -1.0);
        plus += s > 0;
    }
    EXPECT_NEAR(plus / 10000.0, 0.5, 0.03);
}

TEST(Noise, StudentTAbsMeanMatchesQuadrature) {
    for (double nu : {1.5, 2.0, 3.0, 5.0, 30.0}) {
        EXPECT_NEAR(student_t_abs_mean(nu), oracle::student_t_abs_mean_quadrature(nu), 2e-4)
            << "nu=" << nu;
    }
    EXPECT_NEAR(student_t_abs_mean(2.0), std::sqrt(2.0), 1e-12);
    EXPECT_THROW(student_t_abs_mean(1.0), ParameterError);
}

TEST(Noise, GammaFormulas) {
    EXPECT_NEAR(NoiseSpec::gaussian(2.0).gamma(), 2.0 * std::sqrt(2.0 / std::numbers::pi), 1e-15);
    EXPECT_NEAR(NoiseSpec::student_t(2.0, 3.0).gamma(), 3.0 * std::sqrt(2.0), 1e-12);
    // symmetrized Lomax: E|xi| = scale / (alpha - 1), checked against quadrature of the
    // survival function
    const double alpha = 3.0, scale = 2.0;
    const double quad = oracle::simpson(
        [&](double x) { return std::pow(1.0 + x / scale, -alpha); }, 0.0, 2e4, 2000000);
    EXPECT_NEAR(NoiseSpec::symmetric_pareto(alpha, scale).gamma(), quad, 1e-4);
    EXPECT_EQ(NoiseSpec::none().gamma(), 0.0);
}

TEST(Noise, CalibrationHitsTarget) {
    for (auto kind : {NoiseKind::Gaussian, NoiseKind::StudentT, NoiseKind::SymmetricPareto}) {
        for (double gamma : {0.1, 1.0, 10.0}) {
            const NoiseSpec spec = calibrate_noise(kind, gamma, 3.0);
            EXPECT_NEAR(spec.gamma(), gamma, 1e-12 * gamma);
            EXPECT_NEAR(mean_abs_draws(spec, 200000, 3), gamma, 0.03 * gamma)
                << to_string(kind) << " gamma=" << gamma;
        }
    }
    EXPECT_THROW(calibrate_noise(NoiseKind::Gaussian, 0.0), ParameterError);
    EXPECT_THROW(calibrate_noise(NoiseKind::None, 1.0), ParameterError);
    EXPECT_THROW(calibrate_noise(NoiseKind::SymmetricPareto, 1.0, 1.0), ParameterError);
}

TEST(Noise, ParseNames) {
    EXPECT_EQ(parse_noise_kind("t2"), NoiseKind::StudentT);
    EXPECT_EQ(parse_noise_kind("student-t"), NoiseKind::StudentT);
    EXPECT_EQ(parse_noise_kind("gaussian"), NoiseKind::Gaussian);
    EXPECT_EQ(parse_noise_kind("pareto"), NoiseKind::SymmetricPareto);
    EXPECT_EQ(parse_noise_kind("none"), NoiseKind::None);
    EXPECT_THROW(parse_noise_kind("cauchy"), ParameterError);
}

TEST(Snr, InvertsDefinition) {
    EXPECT_NEAR(snr_to_gamma(40.0, 10.0), 0.1, 1e-15);
    const double g = snr_to_gamma(23.0, 3.0);
    EXPECT_NEAR(20 * std::log10(3.0 / g), 23.0, 1e-12);
    EXPECT_THROW(snr_to_gamma(40.0, 0.0), ParameterError);
}

TEST(Contamination, CountIsCeiling) {
    EXPECT_EQ((ContaminationSpec{0.1, ContaminationModel::LargeUniform}.count(300)), 30u);
    EXPECT_EQ((ContaminationSpec{0.1, ContaminationModel::LargeUniform}.count(301)), 31u);
    EXPECT_EQ((ContaminationSpec{0.0, ContaminationModel::LargeUniform}.count(50)), 0u);
    EXPECT_EQ((ContaminationSpec{0.07, ContaminationModel::LargeUniform}.count(100)), 7u);
    EXPECT_THROW((ContaminationSpec{1.0, ContaminationModel::LargeUniform}.count(10)),
                 ParameterError);
}

TEST(Contamination, ModelsCorruptOnlyChosenRows) {
    const auto clean =
        gen_sparse_problem(small_sparse(), DesignSpec{}, NoiseSpec::none(), std::nullopt, 100, 5);
    const auto flip = gen_sparse_problem(small_sparse(), DesignSpec{}, NoiseSpec::none(),
                                         ContaminationSpec{0.1, ContaminationModel::SignFlipScale},
                                         100, 5);
    const auto unif = gen_sparse_problem(small_sparse(), DesignSpec{}, NoiseSpec::none(),
                                         ContaminationSpec{0.1, ContaminationModel::LargeUniform},
                                         100, 5);
    ASSERT_EQ(flip.corrupted.size(), 10u);
    EXPECT_TRUE(std::is_sorted(flip.corrupted.begin(), flip.corrupted.end()));
    EXPECT_EQ(flip.corrupted, unif.corrupted);
    const Vector& y = clean.problem.responses();
    const double A = 100 * y.cwiseAbs().maxCoeff();
    std::vector<bool> hit(100, false);
    for (Index i : flip.corrupted) {
        hit[static_cast<std::size_t>(i)] = true;
        EXPECT_DOUBLE_EQ(flip.problem.responses()[i], -10 * y[i]);
        EXPECT_LE(std::abs(unif.problem.responses()[i]), A);
    }
    for (Index i = 0; i < 100; ++i) {
        if (!hit[static_cast<std::size_t>(i)]) {
            EXPECT_EQ(flip.problem.responses()[i], y[i]);
        }
    }
    EXPECT_EQ(flip.problem.design(), clean.problem.design());
}

TEST(Generators, DeterministicAndStreamsSeparated) {
    const auto a = gen_sparse_problem(small_sparse(), DesignSpec{}, NoiseSpec::gaussian(1.0),
                                      std::nullopt, 50, 9);
    const auto b = gen_sparse_problem(small_sparse(), DesignSpec{}, NoiseSpec::gaussian(1.0),
                                      std::nullopt, 50, 9);
    const auto c = gen_sparse_problem(small_sparse(), DesignSpec{}, NoiseSpec::student_t(2, 1),
                                      std::nullopt, 50, 9);
    EXPECT_EQ(a.problem.design(), b.problem.design());
    EXPECT_EQ(a.problem.responses(), b.problem.responses());
    // changing the noise leaves truth and design untouched
    EXPECT_EQ(a.problem.design(), c.problem.design());
    EXPECT_EQ(*a.problem.truth(), *c.problem.truth());
    EXPECT_NE(a.problem.responses(), c.problem.responses());
}

TEST(Generators, SparseTruthShape) {
    Rng rng(10);
    const Vector beta = make_sparse_truth(small_sparse(), rng);
    EXPECT_EQ(beta.size(), 20);
    EXPECT_EQ((beta.array() != 0.0).count(), 3);
    for (Index j = 0; j < 20; ++j) {
        if (beta[j] != 0) {
            EXPECT_GE(std::abs(beta[j]), 1.0);
            EXPECT_LE(std::abs(beta[j]), 2.0);
        }
    }
}

TEST(Generators, LowRankTruthSpectrum) {
    LowRankTruthSpec spec;
    spec.d1 = 10;
    spec.d2 = 7;
    spec.rank = 3;
    spec.kappa = 4;
    spec.sigma_r = 0.5;
    const Vector s = spec.singular_values();
    EXPECT_NEAR(s[0], 2.0, 1e-12);
    EXPECT_NEAR(s[1], 1.0, 1e-12);
    EXPECT_NEAR(s[2], 0.5, 1e-12);
    Rng rng(11);
    const auto f = make_lowrank_truth(spec, rng);
    const auto ref = oracle::jacobi_svd(f.reconstruct());
    for (Index k = 0; k < 3; ++k) EXPECT_NEAR(ref.s[k], s[k], 1e-10);
    EXPECT_NEAR(ref.s[3], 0.0, 1e-10);
    spec.kappa = 0.5;
    EXPECT_THROW(spec.validate(), ParameterError);
}

TEST(Generators, DiagonalDesignVariances) {
    DesignSpec design;
    design.kind = DesignKind::DiagonalCovariance;
    design.cl = 0.5;
    design.cu = 2.0;
    const auto inst =
        gen_sparse_problem(small_sparse(), design, NoiseSpec::none(), std::nullopt, 20000, 12);
    ASSERT_TRUE(inst.design_variances);
    const Matrix& X = inst.problem.design();
    for (Index j = 0; j < 20; ++j) {
        const double v = (*inst.design_variances)[j];
        EXPECT_GE(v, 0.5);
        EXPECT_LE(v, 2.0);
        EXPECT_NEAR(X.col(j).squaredNorm() / 20000.0, v, 0.06 * v);
    }
    design.cl = 3.0;
    EXPECT_THROW(design.validate(), ParameterError);
}

TEST(Smoothing, CurveMatchesDirectSums) {
    const std::vector<double> xi = {-1.0, 0.0, 2.0};
    const auto rows = smoothing_curve(xi, {-2.0, 0.0, 0.5});
    EXPECT_DOUBLE_EQ(rows[0].value, (1.0 + 2.0 + 4.0) / 3);
    EXPECT_DOUBLE_EQ(rows[0].subgrad, -1.0);
    EXPECT_DOUBLE_EQ(rows[1].value, (1.0 + 0.0 + 2.0) / 3);
    EXPECT_DOUBLE_EQ(rows[1].subgrad, 0.0);  // sign(0) = 0 at the middle draw
    EXPECT_DOUBLE_EQ(rows[2].subgrad, 1.0 / 3);
}

TEST(Smoothing, LargerNoiseFlattensSubgradient) {
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(-1.0 + 0.02 * k);
    auto max_jump = [&](double tau) {
        const auto rows = smoothing_demo(NoiseSpec::gaussian(tau), 1000, grid, 0);
        double m = 0;
        for (std::size_t k = 1; k < rows.size(); ++k)
            m = std::max(m, std::abs(rows[k].subgrad - rows[k - 1].subgrad));
        return m;
    };
    EXPECT_LT(max_jump(10.0), max_jump(0.1));
}
