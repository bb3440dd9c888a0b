#pragma once

// Containers for the linear model Y_i = <X_i, T*> + xi_i, vector and matrix
// flavours, plus residual and error helpers.

#include "robreg/linalg.hpp"

#include <optional>
#include <vector>

namespace robreg {

class VectorProblem {
public:
    /// design is n x d with rows X_i^T.
    VectorProblem(Matrix design, Vector responses, std::optional<Vector> truth = std::nullopt);

    Index n() const { return design_.rows(); }
    Index dim() const { return design_.cols(); }
    const Matrix& design() const { return design_; }
    const Vector& responses() const { return responses_; }
    const std::optional<Vector>& truth() const { return truth_; }
    bool has_truth() const { return truth_.has_value(); }

    /// Copy with rows selected by `rows` (in that order).
    VectorProblem subset(const std::vector<Index>& rows) const;

private:
    Matrix design_;
    Vector responses_;
    std::optional<Vector> truth_;
};

/// Measurements are stored as an n x (d1*d2) matrix whose i-th row is
/// vec(X_i) in column-major order, so <M, X_i> = row_i . vec(M).
class MatrixProblem {
public:
    MatrixProblem(Index d1, Index d2, Matrix design, Vector responses,
                  std::optional<Matrix> truth = std::nullopt);

    static MatrixProblem from_measurements(const std::vector<Matrix>& measurements,
                                           Vector responses,
                                           std::optional<Matrix> truth = std::nullopt);

    Index n() const { return design_.rows(); }
    Index d1() const { return d1_; }
    Index d2() const { return d2_; }
    const Matrix& design() const { return design_; }
    const Vector& responses() const { return responses_; }
    const std::optional<Matrix>& truth() const { return truth_; }
    bool has_truth() const { return truth_.has_value(); }

    Matrix measurement(Index i) const;

private:
    Index d1_;
    Index d2_;
    Matrix design_;
    Vector responses_;
    std::optional<Matrix> truth_;
};

struct TruthError {
    double absolute = 0.0;
    double relative = 0.0;
};

/// u_i = Y_i - <beta, X_i>.
Vector residuals_vec(const VectorProblem& problem, const Vector& beta);
/// u_i = Y_i - <M, X_i>.
Vector residuals_mat(const MatrixProblem& problem, const Matrix& M);

/// l2 / Frobenius distance to the planted truth and its ratio to the truth's
/// norm. Throws StateError when the problem carries no truth.
TruthError error_to_truth(const VectorProblem& problem, const Vector& estimate);
TruthError error_to_truth(const MatrixProblem& problem, const Matrix& estimate);

/// Mean absolute prediction error of beta on the rows of `test`.
double holdout_mae(const VectorProblem& train, const VectorProblem& test, const Vector& beta);

}  // namespace robreg
