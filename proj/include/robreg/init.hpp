#pragma once

// Spectral initialization for low-rank regression and the initial-distance
// estimate used to scale the first stepsize.

#include "robreg/linalg.hpp"
#include "robreg/problem.hpp"

#include <optional>

namespace robreg {

/// Covariance of vec(X_i), shared by all samples: identity, diagonal
/// (variances of the d1*d2 entries) or a dense SPD matrix.
class Covariance {
public:
    static Covariance identity() { return Covariance(Kind::Identity, {}, {}); }
    static Covariance diagonal(Vector variances) {
        return Covariance(Kind::Diagonal, std::move(variances), {});
    }
    static Covariance dense(Matrix sigma) { return Covariance(Kind::Dense, {}, std::move(sigma)); }

    bool is_identity() const { return kind_ == Kind::Identity; }

    /// Sigma^{-1} v for v = vec(X); throws ParameterError when Sigma is
    /// singular or has the wrong size.
    Matrix apply_inverse_rows(const Matrix& rows) const;

private:
    enum class Kind { Identity, Diagonal, Dense };
    Covariance(Kind kind, Vector diag, Matrix dense)
        : kind_(kind), diag_(std::move(diag)), dense_(std::move(dense)) {}

    Kind kind_;
    Vector diag_;
    Matrix dense_;
};

/// n^-1 sum_i mat(Sigma^-1 vec(X_i)) Y_i, the unbiased moment estimate of M*.
Matrix moment_matrix(const MatrixProblem& problem, const Covariance& covariance);

/// SVD_r of the moment matrix. With no covariance given the identity is
/// assumed and a warning is printed once per process.
LowRankFactors spectral_init(const MatrixProblem& problem, Index r,
                             const std::optional<Covariance>& covariance = std::nullopt);

/// n^-1 sum |Y_i - <M0, X_i>|, which tracks ||M0 - M*||_F up to a constant
/// under Gaussian designs.
double estimate_init_distance(const MatrixProblem& problem, const Matrix& M0);

}  // namespace robreg
