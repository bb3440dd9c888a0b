#include "oracles.hpp"

#include "robreg/errors.hpp"
#include "robreg/losses.hpp"
#include "robreg/problem.hpp"
#include "robreg/rng.hpp"

#include <gtest/gtest.h>

using namespace robreg;

namespace {

const std::vector<LossSpec> kLosses = {LossSpec::absolute(), LossSpec::huber(0.7),
                                       LossSpec::quantile(0.3), LossSpec::square()};

}  // namespace

TEST(Losses, HandValues) {
    EXPECT_DOUBLE_EQ(loss_value(LossSpec::absolute(), -2.5), 2.5);
    EXPECT_DOUBLE_EQ(loss_value(LossSpec::square(), -3.0), 9.0);
    // quadratic inside, slope 2*delta outside, continuous at |u| = delta
    EXPECT_DOUBLE_EQ(loss_value(LossSpec::huber(1.0), 0.5), 0.25);
    EXPECT_DOUBLE_EQ(loss_value(LossSpec::huber(1.0), 3.0), 5.0);
    EXPECT_DOUBLE_EQ(loss_value(LossSpec::huber(1.0), 1.0), 1.0);
    EXPECT_DOUBLE_EQ(loss_value(LossSpec::quantile(0.25), 4.0), 1.0);
    EXPECT_DOUBLE_EQ(loss_value(LossSpec::quantile(0.25), -4.0), 3.0);
}

TEST(Losses, SubgradientAtKinksIsZero) {
    EXPECT_EQ(loss_subgrad(LossSpec::absolute(), 0.0), 0.0);
    EXPECT_EQ(loss_subgrad(LossSpec::quantile(0.2), 0.0), 0.0);
    EXPECT_EQ(loss_subgrad(LossSpec::huber(0.5), 0.0), 0.0);
    EXPECT_EQ(loss_subgrad(LossSpec::absolute(), -1e-300), -1.0);
}

TEST(Losses, SubgradientBoundedByLipschitz) {
    Rng rng(5);
    for (const auto& loss : kLosses) {
        const auto lip = loss.lipschitz();
        if (!lip) continue;
        for (int i = 0; i < 1000; ++i) {
            const double u = 10 * rng.normal();
            EXPECT_LE(std::abs(loss_subgrad(loss, u)), *lip + 1e-15);
        }
    }
    EXPECT_FALSE(LossSpec::square().lipschitz());
}

TEST(Losses, ScalarDerivativeMatchesFiniteDifference) {
    Rng rng(6);
    for (const auto& loss : kLosses) {
        for (int i = 0; i < 200; ++i) {
            double u = 3 * rng.normal();
            if (std::abs(u) < 1e-3 || std::abs(std::abs(u) - loss.delta) < 1e-3) continue;
            const double h = 1e-6;
            const double fd = (loss_value(loss, u + h) - loss_value(loss, u - h)) / (2 * h);
            EXPECT_NEAR(loss_subgrad(loss, u), fd, 1e-6) << to_string(loss.kind) << " at " << u;
        }
    }
}

TEST(Losses, ConvexityOnRandomTriples) {
    Rng rng(7);
    for (const auto& loss : kLosses) {
        for (int i = 0; i < 500; ++i) {
            const double a = 5 * rng.normal(), b = 5 * rng.normal(), t = rng.uniform();
            const double mid = loss_value(loss, t * a + (1 - t) * b);
            EXPECT_LE(mid, t * loss_value(loss, a) + (1 - t) * loss_value(loss, b) + 1e-12);
        }
    }
}

TEST(Losses, SubgradientInequality) {
    // rho(v) >= rho(u) + psi(u) (v - u) for any subgradient psi(u)
    Rng rng(8);
    for (const auto& loss : kLosses) {
        for (int i = 0; i < 500; ++i) {
            const double u = 4 * rng.normal(), v = 4 * rng.normal();
            EXPECT_GE(loss_value(loss, v),
                      loss_value(loss, u) + loss_subgrad(loss, u) * (v - u) - 1e-12);
        }
    }
}

TEST(Losses, Validation) {
    EXPECT_THROW(LossSpec::huber(0.0).validate(), ParameterError);
    EXPECT_THROW(LossSpec::huber(-1.0).validate(), ParameterError);
    EXPECT_THROW(LossSpec::quantile(1.5).validate(), ParameterError);
    EXPECT_THROW(LossSpec::quantile(0.0).validate(), ParameterError);
    EXPECT_NO_THROW(LossSpec::quantile(0.5).validate());
    EXPECT_THROW(loss_value(LossSpec::quantile(1.0), 1.0), ParameterError);
}

TEST(Losses, ParseNames) {
    EXPECT_EQ(parse_loss_kind("l1"), LossKind::Absolute);
    EXPECT_EQ(parse_loss_kind("absolute"), LossKind::Absolute);
    EXPECT_EQ(parse_loss_kind("l2"), LossKind::Square);
    EXPECT_EQ(parse_loss_kind("huber"), LossKind::Huber);
    EXPECT_EQ(parse_loss_kind("quantile"), LossKind::Quantile);
    EXPECT_THROW(parse_loss_kind("cauchy"), ParameterError);
    for (auto k : {LossKind::Absolute, LossKind::Huber, LossKind::Quantile, LossKind::Square}) {
        EXPECT_EQ(parse_loss_kind(to_string(k)), k);
    }
}

TEST(Objective, SumsLossValues) {
    Vector u(3);
    u << -1, 2, 0.5;
    EXPECT_DOUBLE_EQ(objective(LossSpec::absolute(), u), 3.5);
    EXPECT_DOUBLE_EQ(objective(LossSpec::square(), u), 5.25);
}

TEST(FullSubgradient, VectorMatchesExplicitSum) {
    Rng rng(9);
    Matrix X(20, 4);
    Vector y(20), beta(4);
    for (Index i = 0; i < 20; ++i) {
        y[i] = rng.normal();
        for (Index j = 0; j < 4; ++j) X(i, j) = rng.normal();
    }
    for (Index j = 0; j < 4; ++j) beta[j] = rng.normal();
    const VectorProblem p(X, y);
    for (const auto& loss : kLosses) {
        Vector want = Vector::Zero(4);
        for (Index i = 0; i < 20; ++i) {
            const double u = y[i] - X.row(i).dot(beta);
            want -= loss_subgrad(loss, u) * X.row(i).transpose();
        }
        EXPECT_LT((full_subgradient_vec(loss, p, beta) - want).norm(), 1e-12);
    }
}

TEST(FullSubgradient, MatrixMatchesExplicitSum) {
    Rng rng(10);
    std::vector<Matrix> xs;
    Vector y(15);
    for (int i = 0; i < 15; ++i) {
        Matrix x(3, 4);
        for (Index a = 0; a < 3; ++a)
            for (Index b = 0; b < 4; ++b) x(a, b) = rng.normal();
        xs.push_back(x);
        y[i] = rng.normal();
    }
    const auto p = MatrixProblem::from_measurements(xs, y);
    Matrix M(3, 4);
    for (Index a = 0; a < 3; ++a)
        for (Index b = 0; b < 4; ++b) M(a, b) = rng.normal();
    for (const auto& loss : kLosses) {
        Matrix want = Matrix::Zero(3, 4);
        for (int i = 0; i < 15; ++i) {
            const double u = y[i] - (xs[i].array() * M.array()).sum();
            want -= loss_subgrad(loss, u) * xs[i];
        }
        EXPECT_LT((full_subgradient_mat(loss, p, M) - want).norm(), 1e-12);
    }
}

TEST(FullSubgradient, MatchesFiniteDifferencesOfObjective) {
    Rng rng(11);
    Matrix X(30, 5);
    Vector y(30), beta(5);
    for (Index i = 0; i < 30; ++i) {
        y[i] = 2 * rng.normal();
        for (Index j = 0; j < 5; ++j) X(i, j) = rng.normal();
    }
    for (Index j = 0; j < 5; ++j) beta[j] = rng.normal();
    const VectorProblem p(X, y);
    for (const auto& loss : kLosses) {
        const Vector g = full_subgradient_vec(loss, p, beta);
        auto f = [&](const Vector& b) { return objective(loss, residuals_vec(p, b)); };
        for (Index j = 0; j < 5; ++j) {
            const double fd = oracle::central_difference(f, beta, j, 1e-7);
            EXPECT_NEAR(g[j], fd, 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}
