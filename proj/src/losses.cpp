#include "robreg/losses.hpp"

#include "robreg/errors.hpp"
#include "robreg/problem.hpp"

#include <algorithm>
#include <cmath>

namespace robreg {

namespace {

double sign(double u) { return (u > 0) - (u < 0); }

}  // namespace

void LossSpec::validate() const {
    switch (kind) {
        case LossKind::Huber:
            if (!(delta > 0) || !std::isfinite(delta)) {
                throw ParameterError("huber loss needs delta > 0");
            }
            break;
        case LossKind::Quantile:
            if (!(delta > 0 && delta < 1)) {
                throw ParameterError("quantile loss needs 0 < delta < 1");
            }
            break;
        case LossKind::Absolute:
        case LossKind::Square:
            break;
    }
}

std::optional<double> LossSpec::lipschitz() const {
    switch (kind) {
        case LossKind::Absolute: return 1.0;
        case LossKind::Huber: return 2.0 * delta;
        case LossKind::Quantile: return std::max(delta, 1.0 - delta);
        case LossKind::Square: return std::nullopt;
    }
    return std::nullopt;
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Absolute: return "absolute";
        case LossKind::Huber: return "huber";
        case LossKind::Quantile: return "quantile";
        case LossKind::Square: return "square";
    }
    return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
    if (name == "absolute" || name == "l1") return LossKind::Absolute;
    if (name == "huber") return LossKind::Huber;
    if (name == "quantile") return LossKind::Quantile;
    if (name == "square" || name == "l2") return LossKind::Square;
    throw ParameterError("unknown loss '" + std::string(name) + "'");
}

double loss_value(const LossSpec& spec, double u) {
    spec.validate();
    switch (spec.kind) {
        case LossKind::Absolute: return std::abs(u);
        case LossKind::Huber: {
            const double a = std::abs(u);
            return a <= spec.delta ? u * u : 2.0 * spec.delta * a - spec.delta * spec.delta;
        }
        case LossKind::Quantile: return u >= 0 ? spec.delta * u : (spec.delta - 1.0) * u;
        case LossKind::Square: return u * u;
    }
    return 0.0;
}

double loss_subgrad(const LossSpec& spec, double u) {
    spec.validate();
    switch (spec.kind) {
        case LossKind::Absolute: return sign(u);
        case LossKind::Huber:
            return std::abs(u) <= spec.delta ? 2.0 * u : 2.0 * spec.delta * sign(u);
        case LossKind::Quantile:
            if (u > 0) return spec.delta;
            if (u < 0) return spec.delta - 1.0;
            return 0.0;
        case LossKind::Square: return 2.0 * u;
    }
    return 0.0;
}

double objective(const LossSpec& spec, const Vector& residuals) {
    spec.validate();
    double total = 0.0;
    for (Index i = 0; i < residuals.size(); ++i) total += loss_value(spec, residuals[i]);
    return total;
}

namespace {

Vector psi_weights(const LossSpec& spec, const Vector& residuals) {
    spec.validate();
    Vector w(residuals.size());
    for (Index i = 0; i < residuals.size(); ++i) w[i] = loss_subgrad(spec, residuals[i]);
    return w;
}

}  // namespace

Vector full_subgradient_vec(const LossSpec& spec, const VectorProblem& problem,
                            const Vector& beta) {
    const Vector u = residuals_vec(problem, beta);
    return -(problem.design().transpose() * psi_weights(spec, u));
}

Matrix subgradient_from_residuals(const LossSpec& spec, const MatrixProblem& problem,
                                  const Vector& residuals) {
    if (residuals.size() != problem.n()) {
        throw ParameterError("subgradient: residual count does not match the problem");
    }
    const Vector g = -(problem.design().transpose() * psi_weights(spec, residuals));
    return Eigen::Map<const Matrix>(g.data(), problem.d1(), problem.d2());
}

Matrix full_subgradient_mat(const LossSpec& spec, const MatrixProblem& problem,
                            const Matrix& M) {
    return subgradient_from_residuals(spec, problem, residuals_mat(problem, M));
}

}  // namespace robreg
