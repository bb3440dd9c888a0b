#include "robreg/linalg.hpp"

#include "robreg/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace robreg {

namespace {

void check_factors(const LowRankFactors& f) {
    if (f.U.cols() != f.s.size() || f.V.cols() != f.s.size()) {
        throw ParameterError("low-rank factors: U, s and V disagree on the rank");
    }
}

// Eigen returns arbitrary columns for zero singular values; they are
// orthonormal in practice but not guaranteed to be. Repair if needed.
void reorthonormalize(Matrix& Q) {
    const Index k = Q.cols();
    if (k == 0) return;
    const Matrix gram = Q.transpose() * Q;
    if ((gram - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-12) return;
    Matrix filled = Q;
    for (Index j = 0; j < k; ++j) {
        if (filled.col(j).norm() < 0.5) {
            filled.col(j).setZero();
            filled(j % filled.rows(), j) = 1.0;
        }
    }
    Eigen::HouseholderQR<Matrix> qr(filled);
    Matrix basis = qr.householderQ() * Matrix::Identity(Q.rows(), k);
    // keep the orientation of the columns that were already fine
    for (Index j = 0; j < k; ++j) {
        if (basis.col(j).dot(Q.col(j)) < 0) basis.col(j) *= -1.0;
    }
    Q = std::move(basis);
}

}  // namespace

Matrix LowRankFactors::reconstruct() const {
    return U * s.asDiagonal() * V.transpose();
}

LowRankFactors LowRankFactors::zeros(Index d1, Index d2, Index r) {
    if (r < 1 || r > std::min(d1, d2)) {
        throw ParameterError("zero factors: rank " + std::to_string(r) + " out of range");
    }
    return {Matrix::Identity(d1, r), Vector::Zero(r), Matrix::Identity(d2, r)};
}

void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite()) {
        throw InputError(std::string(what) + ": non-finite entry");
    }
}

void require_finite(const Vector& v, std::string_view what) {
    if (!v.allFinite()) {
        throw InputError(std::string(what) + ": non-finite entry");
    }
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
    return (a - b).norm();
}

SvdTriple svd_top(const Matrix& m, Index r) {
    const Index k = std::min(m.rows(), m.cols());
    if (r < 1 || r > k) {
        throw ParameterError("svd_top: rank " + std::to_string(r) + " outside [1, " +
                             std::to_string(k) + "]");
    }
    require_finite(m, "svd_top");
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdTriple out{svd.matrixU().leftCols(r), svd.singularValues().head(r),
                  svd.matrixV().leftCols(r)};
    reorthonormalize(out.U);
    reorthonormalize(out.V);
    return out;
}

QrResult qr_thin(const Matrix& a) {
    if (a.rows() < a.cols()) {
        throw ParameterError("qr_thin: needs rows >= cols, got " + std::to_string(a.rows()) +
                             "x" + std::to_string(a.cols()));
    }
    require_finite(a, "qr_thin");
    Eigen::HouseholderQR<Matrix> qr(a);
    const Index n = a.cols();
    QrResult out;
    out.Q = qr.householderQ() * Matrix::Identity(a.rows(), n);
    out.R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    // positive diagonal makes the factorization unique for full-rank input
    for (Index j = 0; j < n; ++j) {
        if (out.R(j, j) < 0) {
            out.R.row(j) *= -1.0;
            out.Q.col(j) *= -1.0;
        }
    }
    return out;
}

std::vector<Index> hard_threshold_support(const Vector& v, Index k) {
    const Index d = v.size();
    if (k < 0 || k > d) {
        throw ParameterError("hard_threshold: k = " + std::to_string(k) + " outside [0, " +
                             std::to_string(d) + "]");
    }
    std::vector<Index> idx(static_cast<std::size_t>(d));
    std::iota(idx.begin(), idx.end(), Index{0});
    auto before = [&v](Index a, Index b) {
        const double fa = std::abs(v[a]);
        const double fb = std::abs(v[b]);
        return fa > fb || (fa == fb && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + k, idx.end(), before);
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
}

Vector hard_threshold(const Vector& v, Index k) {
    Vector out = Vector::Zero(v.size());
    for (Index i : hard_threshold_support(v, k)) out[i] = v[i];
    return out;
}

Matrix tangent_project(const Matrix& U, const Matrix& V, const Matrix& G) {
    if (U.cols() != V.cols() || G.rows() != U.rows() || G.cols() != V.rows()) {
        throw ParameterError("tangent_project: dimension mismatch");
    }
    const Matrix UtG = U.transpose() * G;
    const Matrix GV = G * V;
    return U * UtG + GV * V.transpose() - U * (UtG * V) * V.transpose();
}

LowRankFactors retract_dense(const LowRankFactors& current, const Matrix& G, double eta) {
    check_factors(current);
    if (!(eta > 0)) throw ParameterError("retract: eta must be positive");
    const Matrix stepped =
        current.reconstruct() - eta * tangent_project(current.U, current.V, G);
    return svd_top(stepped, current.rank_bound());
}

LowRankFactors retract_fast(const LowRankFactors& current, const Matrix& G, double eta) {
    check_factors(current);
    if (!(eta > 0)) throw ParameterError("retract: eta must be positive");
    const Matrix& U = current.U;
    const Matrix& V = current.V;
    const Index r = current.rank_bound();
    const Index d1 = U.rows();
    const Index d2 = V.rows();
    if (G.rows() != d1 || G.cols() != d2) {
        throw ParameterError("retract: gradient shape does not match the factors");
    }
    if (2 * r > d1 || 2 * r > d2) return retract_dense(current, G, eta);

    const Matrix GV = G * V;
    const Matrix GtU = G.transpose() * U;
    const Matrix UtGV = U.transpose() * GV;
    // components of G V and G^T U orthogonal to the current column/row spaces
    const Matrix left_perp = GV - U * UtGV;
    const Matrix right_perp = GtU - V * UtGV.transpose();

    // M - eta P_T(G) = [U L] K [V R]^T with
    //   K = [[S - eta U^T G V, -eta I], [-eta I, 0]]
    Matrix left_panel(d1, 2 * r);
    left_panel << U, left_perp;
    Matrix right_panel(d2, 2 * r);
    right_panel << V, right_perp;
    const QrResult ql = qr_thin(left_panel);
    const QrResult qrr = qr_thin(right_panel);

    Matrix K = Matrix::Zero(2 * r, 2 * r);
    K.topLeftCorner(r, r) = Matrix(current.s.asDiagonal()) - eta * UtGV;
    K.topRightCorner(r, r) = -eta * Matrix::Identity(r, r);
    K.bottomLeftCorner(r, r) = -eta * Matrix::Identity(r, r);

    const Matrix core = ql.R * K * qrr.R.transpose();
    const SvdTriple small = svd_top(core, r);
    LowRankFactors out{ql.Q * small.U, small.s, qrr.Q * small.V};
    return out;
}

}  // namespace robreg
