#include "robreg/problem.hpp"

#include "robreg/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace robreg {

namespace {

TruthError make_error(double absolute, double truth_norm) {
    TruthError e;
    e.absolute = absolute;
    if (truth_norm > 0) {
        e.relative = absolute / truth_norm;
    } else {
        e.relative = absolute > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return e;
}

}  // namespace

VectorProblem::VectorProblem(Matrix design, Vector responses, std::optional<Vector> truth)
    : design_(std::move(design)), responses_(std::move(responses)), truth_(std::move(truth)) {
    if (design_.rows() < 1) throw ParameterError("vector problem: needs at least one row");
    if (responses_.size() != design_.rows()) {
        throw ParameterError("vector problem: " + std::to_string(responses_.size()) +
                             " responses for " + std::to_string(design_.rows()) + " rows");
    }
    require_finite(design_, "vector problem design");
    require_finite(responses_, "vector problem responses");
    if (truth_) {
        if (truth_->size() != design_.cols()) {
            throw ParameterError("vector problem: truth dimension does not match design");
        }
        require_finite(*truth_, "vector problem truth");
    }
}

VectorProblem VectorProblem::subset(const std::vector<Index>& rows) const {
    Matrix design(static_cast<Index>(rows.size()), dim());
    Vector responses(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Index i = rows[k];
        if (i < 0 || i >= n()) throw ParameterError("vector problem: row index out of range");
        design.row(static_cast<Index>(k)) = design_.row(i);
        responses[static_cast<Index>(k)] = responses_[i];
    }
    return VectorProblem(std::move(design), std::move(responses), truth_);
}

MatrixProblem::MatrixProblem(Index d1, Index d2, Matrix design, Vector responses,
                             std::optional<Matrix> truth)
    : d1_(d1), d2_(d2), design_(std::move(design)), responses_(std::move(responses)),
      truth_(std::move(truth)) {
    if (d1_ < 1 || d2_ < 1) throw ParameterError("matrix problem: empty dimensions");
    if (design_.rows() < 1) throw ParameterError("matrix problem: needs at least one measurement");
    if (design_.cols() != d1_ * d2_) {
        throw ParameterError("matrix problem: measurement width does not equal d1*d2");
    }
    if (responses_.size() != design_.rows()) {
        throw ParameterError("matrix problem: response count does not match measurements");
    }
    require_finite(design_, "matrix problem measurements");
    require_finite(responses_, "matrix problem responses");
    if (truth_) {
        if (truth_->rows() != d1_ || truth_->cols() != d2_) {
            throw ParameterError("matrix problem: truth shape does not match measurements");
        }
        require_finite(*truth_, "matrix problem truth");
    }
}

MatrixProblem MatrixProblem::from_measurements(const std::vector<Matrix>& measurements,
                                               Vector responses, std::optional<Matrix> truth) {
    if (measurements.empty()) throw ParameterError("matrix problem: no measurements");
    const Index d1 = measurements.front().rows();
    const Index d2 = measurements.front().cols();
    Matrix design(static_cast<Index>(measurements.size()), d1 * d2);
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        const Matrix& X = measurements[i];
        if (X.rows() != d1 || X.cols() != d2) {
            throw ParameterError("matrix problem: measurement " + std::to_string(i) +
                                 " has a different shape");
        }
        design.row(static_cast<Index>(i)) = Eigen::Map<const Vector>(X.data(), d1 * d2);
    }
    return MatrixProblem(d1, d2, std::move(design), std::move(responses), std::move(truth));
}

Matrix MatrixProblem::measurement(Index i) const {
    const Vector row = design_.row(i).transpose();
    return Eigen::Map<const Matrix>(row.data(), d1_, d2_);
}

Vector residuals_vec(const VectorProblem& problem, const Vector& beta) {
    if (beta.size() != problem.dim()) {
        throw ParameterError("residuals: estimate has dimension " + std::to_string(beta.size()) +
                             ", problem has " + std::to_string(problem.dim()));
    }
    return problem.responses() - problem.design() * beta;
}

Vector residuals_mat(const MatrixProblem& problem, const Matrix& M) {
    if (M.rows() != problem.d1() || M.cols() != problem.d2()) {
        throw ParameterError("residuals: estimate shape does not match the problem");
    }
    return problem.responses() -
           problem.design() * Eigen::Map<const Vector>(M.data(), M.size());
}

TruthError error_to_truth(const VectorProblem& problem, const Vector& estimate) {
    if (!problem.has_truth()) throw StateError("error_to_truth: problem has no truth");
    const Vector& truth = *problem.truth();
    if (estimate.size() != truth.size()) throw ParameterError("error_to_truth: dimension mismatch");
    return make_error((estimate - truth).norm(), truth.norm());
}

TruthError error_to_truth(const MatrixProblem& problem, const Matrix& estimate) {
    if (!problem.has_truth()) throw StateError("error_to_truth: problem has no truth");
    const Matrix& truth = *problem.truth();
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw ParameterError("error_to_truth: shape mismatch");
    }
    return make_error((estimate - truth).norm(), truth.norm());
}

double holdout_mae(const VectorProblem& train, const VectorProblem& test, const Vector& beta) {
    if (train.dim() != test.dim()) {
        throw ParameterError("holdout_mae: train and test have different feature counts");
    }
    if (test.n() == 0) throw ParameterError("holdout_mae: empty test set");
    return residuals_vec(test, beta).cwiseAbs().mean();
}

}  // namespace robreg
