#pragma once

// Dense linear-algebra primitives used by the solvers: truncated SVD, thin QR,
// hard thresholding, tangent-space projection onto the fixed-rank manifold and
// the fixed-rank retraction.

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>
#include <vector>

namespace robreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Factored rank-r matrix U diag(s) V^T. U and V have orthonormal columns and
/// s is nonnegative and sorted in descending order.
struct LowRankFactors {
    Matrix U;
    Vector s;
    Matrix V;

    Index rows() const { return U.rows(); }
    Index cols() const { return V.rows(); }
    Index rank_bound() const { return s.size(); }

    Matrix reconstruct() const;

    /// Zero matrix of shape d1 x d2 carried by r orthonormal coordinate columns.
    static LowRankFactors zeros(Index d1, Index d2, Index r);
};

/// Top-k singular triple; same layout and invariants as LowRankFactors.
using SvdTriple = LowRankFactors;

struct QrResult {
    Matrix Q;  // rows x cols, orthonormal columns
    Matrix R;  // cols x cols, upper triangular
};

/// Throws InputError when any entry is NaN or infinite. `what` names the
/// argument in the message.
void require_finite(const Matrix& m, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

double frobenius_distance(const Matrix& a, const Matrix& b);

/// Best rank-r approximation in Frobenius norm (Eckart-Young).
SvdTriple svd_top(const Matrix& m, Index r);

QrResult qr_thin(const Matrix& a);

/// Keeps the k entries of largest magnitude and zeros the rest. Among equal
/// magnitudes the lowest index is kept first.
Vector hard_threshold(const Vector& v, Index k);

/// Indices of the entries hard_threshold(v, k) keeps, in ascending order.
std::vector<Index> hard_threshold_support(const Vector& v, Index k);

/// Projection onto the tangent space at U S V^T of the rank-r manifold:
/// U U^T G + G V V^T - U U^T G V V^T.
Matrix tangent_project(const Matrix& U, const Matrix& V, const Matrix& G);

/// SVD_r(M - eta * P_T(G)) where M = current.reconstruct(). Works on the
/// factored form: two QR decompositions of d x 2r panels and one SVD of a
/// 2r x 2r core. Falls back to retract_dense when 2r exceeds a dimension.
LowRankFactors retract_fast(const LowRankFactors& current, const Matrix& G, double eta);

/// Reference path for retract_fast: materializes M - eta * P_T(G) and
/// truncates it with svd_top.
LowRankFactors retract_dense(const LowRankFactors& current, const Matrix& G, double eta);

}  // namespace robreg
