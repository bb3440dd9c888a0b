#pragma once

// Synthetic instances for sparse and low-rank regression: Gaussian designs,
// planted truths, heavy-tailed noise calibrated to a target E|xi|, and Huber
// epsilon-contamination of the responses.

#include "robreg/linalg.hpp"
#include "robreg/problem.hpp"
#include "robreg/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace robreg {

enum class DesignKind { IidStandardNormal, DiagonalCovariance };

/// Rows of the design are N(0, Sigma). For the diagonal kind the variances are
/// drawn once per instance, uniformly in [cl, cu].
struct DesignSpec {
    DesignKind kind = DesignKind::IidStandardNormal;
    double cl = 1.0;
    double cu = 1.0;

    void validate() const;
};

enum class NoiseKind { None, Gaussian, StudentT, SymmetricPareto };

/// Noise model. `scale` is sigma for Gaussian, the multiplier of a standard
/// t_nu variate for Student-t, and the Lomax scale for the symmetric Pareto
/// (random sign times scale * (U^{-1/alpha} - 1)). b0/b1 are density bounds
/// kept only for theory-driven stepsizes.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::None;
    double scale = 1.0;
    double nu = 2.0;
    double alpha = 2.0;
    std::optional<double> b0;
    std::optional<double> b1;

    static NoiseSpec none() { return {}; }
    static NoiseSpec gaussian(double sigma) {
        NoiseSpec s;
        s.kind = NoiseKind::Gaussian;
        s.scale = sigma;
        return s;
    }
    static NoiseSpec student_t(double nu, double scale) {
        NoiseSpec s;
        s.kind = NoiseKind::StudentT;
        s.scale = scale;
        s.nu = nu;
        return s;
    }
    static NoiseSpec symmetric_pareto(double alpha, double scale) {
        NoiseSpec s;
        s.kind = NoiseKind::SymmetricPareto;
        s.scale = scale;
        s.alpha = alpha;
        return s;
    }

    void validate() const;
    /// E|xi| (0 for no noise).
    double gamma() const;
    double sample(Rng& rng) const;
    std::string describe() const;
};

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view name);

/// E|T| for a standard Student-t with nu > 1 degrees of freedom.
double student_t_abs_mean(double nu);

enum class ContaminationModel {
    LargeUniform,   // Y_i <- Uniform(-A, A), A = 100 max_j |Y_j| before corruption
    SignFlipScale,  // Y_i <- -10 Y_i
};

struct ContaminationSpec {
    double epsilon = 0.0;
    ContaminationModel model = ContaminationModel::LargeUniform;

    void validate() const;
    /// ceil(epsilon * n)
    std::size_t count(std::size_t n) const;
};

std::string to_string(ContaminationModel model);
ContaminationModel parse_contamination_model(std::string_view name);

/// Planted sparse vector: either explicit entries, or `sparsity` nonzeros at
/// random positions with magnitudes uniform in [lo, hi] and random signs.
struct SparseTruthSpec {
    std::optional<Vector> entries;
    Index dim = 0;
    Index sparsity = 0;
    double magnitude_lo = 1.0;
    double magnitude_hi = 1.0;

    void validate() const;
    Index dimension() const { return entries ? entries->size() : dim; }
};

/// Planted rank-r matrix U diag(spectrum) V^T with Haar-random U, V. Without
/// an explicit spectrum the singular values are geometric from kappa*sigma_r
/// down to sigma_r.
struct LowRankTruthSpec {
    Index d1 = 0;
    Index d2 = 0;
    Index rank = 1;
    std::optional<std::vector<double>> spectrum;
    double kappa = 1.0;
    double sigma_r = 1.0;

    void validate() const;
    Vector singular_values() const;
};

struct SparseInstance {
    VectorProblem problem;
    std::vector<Index> corrupted;  // ascending
    std::optional<Vector> design_variances;
};

struct LowRankInstance {
    MatrixProblem problem;
    LowRankFactors truth_factors;
    std::vector<Index> corrupted;  // ascending
    std::optional<Vector> design_variances;  // of vec(X_i)
};

Vector make_sparse_truth(const SparseTruthSpec& spec, Rng& rng);
LowRankFactors make_lowrank_truth(const LowRankTruthSpec& spec, Rng& rng);

SparseInstance gen_sparse_problem(const SparseTruthSpec& truth, const DesignSpec& design,
                                  const NoiseSpec& noise,
                                  const std::optional<ContaminationSpec>& contamination,
                                  std::size_t n, std::uint64_t seed);

LowRankInstance gen_lowrank_problem(const LowRankTruthSpec& truth, const DesignSpec& design,
                                    const NoiseSpec& noise,
                                    const std::optional<ContaminationSpec>& contamination,
                                    std::size_t n, std::uint64_t seed);

/// gamma = truth_fro / 10^(snr_db / 20), the inverse of
/// SNR = 20 log10(||truth||_F / E|xi|).
double snr_to_gamma(double snr_db, double truth_fro);

/// Noise spec of the requested kind with E|xi| = target_gamma. `shape` is nu
/// for Student-t and alpha for Pareto (ignored for Gaussian).
NoiseSpec calibrate_noise(NoiseKind kind, double target_gamma, double shape = 2.0);

struct SmoothingRow {
    double t = 0.0;
    double value = 0.0;     // n^-1 sum |xi_i - t|
    double subgrad = 0.0;   // n^-1 sum sign(t - xi_i), sign(0) = 0
};

/// Empirical smoothing of the absolute loss by noise: evaluates
/// g(t) = n^-1 sum |xi_i - t| and its subgradient over `grid`.
std::vector<SmoothingRow> smoothing_demo(const NoiseSpec& noise, std::size_t n,
                                         const std::vector<double>& grid, std::uint64_t seed);

/// Same, over caller-supplied noise draws.
std::vector<SmoothingRow> smoothing_curve(const std::vector<double>& xi,
                                          const std::vector<double>& grid);

}  // namespace robreg
