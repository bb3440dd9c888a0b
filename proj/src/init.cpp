#include "robreg/init.hpp"

#include "robreg/errors.hpp"
#include "robreg/schedule.hpp"

#include <iostream>
#include <mutex>

namespace robreg {

Matrix Covariance::apply_inverse_rows(const Matrix& rows) const {
    switch (kind_) {
        case Kind::Identity:
            return rows;
        case Kind::Diagonal: {
            if (diag_.size() != rows.cols()) {
                throw ParameterError("covariance: diagonal has the wrong length");
            }
            if ((diag_.array() <= 0.0).any() || !diag_.allFinite()) {
                throw ParameterError("covariance: singular or non-positive diagonal");
            }
            return rows * diag_.cwiseInverse().asDiagonal();
        }
        case Kind::Dense: {
            if (dense_.rows() != rows.cols() || dense_.cols() != rows.cols()) {
                throw ParameterError("covariance: dense matrix has the wrong size");
            }
            Eigen::LLT<Matrix> llt(dense_);
            if (llt.info() != Eigen::Success) {
                throw ParameterError("covariance: matrix is singular or not positive definite");
            }
            // rows are vec(X_i)^T, so solve Sigma Z^T = rows^T
            return llt.solve(rows.transpose()).transpose();
        }
    }
    return rows;
}

Matrix moment_matrix(const MatrixProblem& problem, const Covariance& covariance) {
    const Matrix whitened = covariance.apply_inverse_rows(problem.design());
    const Vector flat = whitened.transpose() * problem.responses() / static_cast<double>(problem.n());
    return Eigen::Map<const Matrix>(flat.data(), problem.d1(), problem.d2());
}

LowRankFactors spectral_init(const MatrixProblem& problem, Index r,
                             const std::optional<Covariance>& covariance) {
    if (!covariance) {
        static std::once_flag warned;
        std::call_once(warned, [] {
            std::cerr << "warning: design covariance unknown, assuming identity for spectral "
                         "initialization\n";
        });
    }
    return svd_top(moment_matrix(problem, covariance.value_or(Covariance::identity())), r);
}

double estimate_init_distance(const MatrixProblem& problem, const Matrix& M0) {
    return mean_abs(residuals_mat(problem, M0));
}

}  // namespace robreg
