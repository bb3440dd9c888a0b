#pragma once

#include "robreg/linalg.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace robreg {

class VectorProblem;
class MatrixProblem;

enum class LossKind { Absolute, Huber, Quantile, Square };

/// A robust loss rho and its parameter. Huber needs delta > 0 and quantile
/// needs delta in (0, 1); the other kinds ignore delta.
struct LossSpec {
    LossKind kind = LossKind::Absolute;
    double delta = 0.0;

    static LossSpec absolute() { return {LossKind::Absolute, 0.0}; }
    static LossSpec huber(double delta) { return {LossKind::Huber, delta}; }
    static LossSpec quantile(double delta) { return {LossKind::Quantile, delta}; }
    static LossSpec square() { return {LossKind::Square, 0.0}; }

    void validate() const;

    /// Lipschitz constant of rho; nullopt for the square loss.
    std::optional<double> lipschitz() const;
};

std::string to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

double loss_value(const LossSpec& spec, double u);

/// An element of the subdifferential of rho at u. Kinks resolve to 0
/// (sign(0) = 0 for the absolute loss, 0 for the quantile loss at the origin).
double loss_subgrad(const LossSpec& spec, double u);

/// Sum of rho(u_i). Residuals are u = Y - prediction.
double objective(const LossSpec& spec, const Vector& residuals);

/// -sum_i psi(u_i) X_i with u_i = Y_i - <beta, X_i>.
Vector full_subgradient_vec(const LossSpec& spec, const VectorProblem& problem,
                            const Vector& beta);

/// Matrix analogue: -sum_i psi(u_i) X_i with u_i = Y_i - <M, X_i>.
Matrix full_subgradient_mat(const LossSpec& spec, const MatrixProblem& problem,
                            const Matrix& M);

/// Same as full_subgradient_mat but from precomputed residuals.
Matrix subgradient_from_residuals(const LossSpec& spec, const MatrixProblem& problem,
                                  const Vector& residuals);

}  // namespace robreg
