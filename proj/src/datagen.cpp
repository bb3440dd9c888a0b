#include "robreg/datagen.hpp"

#include "robreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace robreg {

void DesignSpec::validate() const {
    if (kind == DesignKind::DiagonalCovariance && !(cl > 0 && cl <= cu && std::isfinite(cu))) {
        throw ParameterError("design: need 0 < cl <= cu");
    }
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::None: return "none";
        case NoiseKind::Gaussian: return "gaussian";
        case NoiseKind::StudentT: return "student-t";
        case NoiseKind::SymmetricPareto: return "pareto";
    }
    return "unknown";
}

NoiseKind parse_noise_kind(std::string_view name) {
    if (name == "none") return NoiseKind::None;
    if (name == "gaussian" || name == "normal") return NoiseKind::Gaussian;
    if (name == "student-t" || name == "t" || name == "t2") return NoiseKind::StudentT;
    if (name == "pareto") return NoiseKind::SymmetricPareto;
    throw ParameterError("unknown noise kind '" + std::string(name) + "'");
}

double student_t_abs_mean(double nu) {
    if (!(nu > 1)) throw ParameterError("student-t: E|T| is finite only for nu > 1");
    // 2 sqrt(nu) Gamma((nu+1)/2) / (sqrt(pi) (nu-1) Gamma(nu/2))
    const double log_ratio = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0);
    return 2.0 * std::sqrt(nu) * std::exp(log_ratio) / (std::sqrt(std::numbers::pi) * (nu - 1.0));
}

void NoiseSpec::validate() const {
    switch (kind) {
        case NoiseKind::None: return;
        case NoiseKind::Gaussian:
            if (!(scale > 0)) throw ParameterError("gaussian noise: sigma must be positive");
            return;
        case NoiseKind::StudentT:
            if (!(nu > 1)) throw ParameterError("student-t noise: nu must exceed 1");
            if (!(scale > 0)) throw ParameterError("student-t noise: scale must be positive");
            return;
        case NoiseKind::SymmetricPareto:
            if (!(alpha > 1)) throw ParameterError("pareto noise: alpha must exceed 1");
            if (!(scale > 0)) throw ParameterError("pareto noise: scale must be positive");
            return;
    }
}

double NoiseSpec::gamma() const {
    validate();
    switch (kind) {
        case NoiseKind::None: return 0.0;
        case NoiseKind::Gaussian: return scale * std::sqrt(2.0 / std::numbers::pi);
        case NoiseKind::StudentT: return scale * student_t_abs_mean(nu);
        case NoiseKind::SymmetricPareto: return scale / (alpha - 1.0);
    }
    return 0.0;
}

double NoiseSpec::sample(Rng& rng) const {
    switch (kind) {
        case NoiseKind::None: return 0.0;
        case NoiseKind::Gaussian: return scale * rng.normal();
        case NoiseKind::StudentT:
            return scale * std::student_t_distribution<double>(nu)(rng.engine());
        case NoiseKind::SymmetricPareto: {
            const double u = 1.0 - rng.uniform();  // (0, 1]
            return rng.sign() * scale * (std::pow(u, -1.0 / alpha) - 1.0);
        }
    }
    return 0.0;
}

std::string NoiseSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind);
    switch (kind) {
        case NoiseKind::None: break;
        case NoiseKind::Gaussian: os << " sigma=" << scale; break;
        case NoiseKind::StudentT: os << " nu=" << nu << " scale=" << scale; break;
        case NoiseKind::SymmetricPareto: os << " alpha=" << alpha << " scale=" << scale; break;
    }
    return os.str();
}

void ContaminationSpec::validate() const {
    if (!(epsilon >= 0 && epsilon < 1)) throw ParameterError("contamination: epsilon must lie in [0, 1)");
}

std::size_t ContaminationSpec::count(std::size_t n) const {
    validate();
    // guard against epsilon*n landing a rounding error above an integer
    const double raw = epsilon * static_cast<double>(n);
    return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

std::string to_string(ContaminationModel model) {
    return model == ContaminationModel::LargeUniform ? "large-uniform" : "sign-flip-scale";
}

ContaminationModel parse_contamination_model(std::string_view name) {
    if (name == "large-uniform") return ContaminationModel::LargeUniform;
    if (name == "sign-flip-scale") return ContaminationModel::SignFlipScale;
    throw ParameterError("unknown contamination model '" + std::string(name) + "'");
}

void SparseTruthSpec::validate() const {
    if (entries) {
        if (entries->size() < 1) throw ParameterError("sparse truth: empty vector");
        require_finite(*entries, "sparse truth");
        return;
    }
    if (dim < 1 || sparsity < 0 || sparsity > dim) {
        throw ParameterError("sparse truth: need 0 <= sparsity <= dim");
    }
    if (!(magnitude_lo >= 0 && magnitude_lo <= magnitude_hi)) {
        throw ParameterError("sparse truth: bad magnitude range");
    }
}

void LowRankTruthSpec::validate() const {
    if (d1 < 1 || d2 < 1 || rank < 1 || rank > std::min(d1, d2)) {
        throw ParameterError("low-rank truth: need 1 <= rank <= min(d1, d2)");
    }
    if (spectrum) {
        if (static_cast<Index>(spectrum->size()) != rank) {
            throw ParameterError("low-rank truth: spectrum length must equal the rank");
        }
        for (double s : *spectrum) {
            if (!(s > 0) || !std::isfinite(s)) {
                throw ParameterError("low-rank truth: spectrum must be positive");
            }
        }
    } else if (!(kappa >= 1) || !(sigma_r > 0)) {
        throw ParameterError("low-rank truth: need kappa >= 1 and sigma_r > 0");
    }
}

Vector LowRankTruthSpec::singular_values() const {
    validate();
    Vector s(rank);
    if (spectrum) {
        for (Index i = 0; i < rank; ++i) s[i] = (*spectrum)[static_cast<std::size_t>(i)];
        std::sort(s.data(), s.data() + s.size(), std::greater<>());
        return s;
    }
    for (Index i = 0; i < rank; ++i) {
        const double frac = rank == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(rank - 1);
        s[i] = sigma_r * std::pow(kappa, 1.0 - frac);
    }
    return s;
}

Vector make_sparse_truth(const SparseTruthSpec& spec, Rng& rng) {
    spec.validate();
    if (spec.entries) return *spec.entries;
    std::vector<Index> idx(static_cast<std::size_t>(spec.dim));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    Vector beta = Vector::Zero(spec.dim);
    for (Index k = 0; k < spec.sparsity; ++k) {
        beta[idx[static_cast<std::size_t>(k)]] =
            rng.sign() * rng.uniform(spec.magnitude_lo, spec.magnitude_hi);
    }
    return beta;
}

namespace {

Matrix haar_orthonormal(Index d, Index r, Rng& rng) {
    Matrix g(d, r);
    for (Index j = 0; j < r; ++j)
        for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
    return qr_thin(g).Q;
}

Matrix gaussian_rows(Index n, Index p, const std::optional<Vector>& variances, Rng& rng) {
    Matrix x(n, p);
    // row-major fill order so the i-th sample only depends on draws up to i
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    if (variances) x = x * variances->cwiseSqrt().asDiagonal();
    return x;
}

std::optional<Vector> draw_variances(const DesignSpec& design, Index p, Rng& rng) {
    design.validate();
    if (design.kind == DesignKind::IidStandardNormal) return std::nullopt;
    Vector v(p);
    for (Index j = 0; j < p; ++j) v[j] = rng.uniform(design.cl, design.cu);
    return v;
}

std::vector<Index> contaminate(Vector& y, const std::optional<ContaminationSpec>& spec, Rng rng) {
    if (!spec) return {};
    const std::size_t n = static_cast<std::size_t>(y.size());
    const std::size_t m = spec->count(n);
    if (m == 0) return {};
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index{0});
    for (std::size_t k = 0; k < m; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, n - 1);
        std::swap(idx[k], idx[pick(rng.engine())]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    const double A = 100.0 * y.cwiseAbs().maxCoeff();
    for (Index i : idx) {
        if (spec->model == ContaminationModel::LargeUniform) {
            y[i] = A > 0 ? rng.uniform(-A, A) : 0.0;
        } else {
            y[i] = -10.0 * y[i];
        }
    }
    return idx;
}

Vector draw_noise(const NoiseSpec& noise, std::size_t n, Rng rng) {
    noise.validate();
    Vector xi(static_cast<Index>(n));
    for (Index i = 0; i < xi.size(); ++i) xi[i] = noise.sample(rng);
    return xi;
}

}  // namespace

LowRankFactors make_lowrank_truth(const LowRankTruthSpec& spec, Rng& rng) {
    spec.validate();
    LowRankFactors f;
    f.U = haar_orthonormal(spec.d1, spec.rank, rng);
    f.V = haar_orthonormal(spec.d2, spec.rank, rng);
    f.s = spec.singular_values();
    return f;
}

SparseInstance gen_sparse_problem(const SparseTruthSpec& truth, const DesignSpec& design,
                                  const NoiseSpec& noise,
                                  const std::optional<ContaminationSpec>& contamination,
                                  std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ParameterError("gen_sparse_problem: n must be positive");
    if (contamination) contamination->validate();
    const Rng root(seed);
    Rng truth_rng = root.substream("truth");
    Rng design_rng = root.substream("design");

    Vector beta = make_sparse_truth(truth, truth_rng);
    const Index d = beta.size();
    auto variances = draw_variances(design, d, design_rng);
    Matrix x = gaussian_rows(static_cast<Index>(n), d, variances, design_rng);
    Vector y = x * beta + draw_noise(noise, n, root.substream("noise"));
    auto corrupted = contaminate(y, contamination, root.substream("contamination"));
    return SparseInstance{VectorProblem(std::move(x), std::move(y), std::move(beta)),
                          std::move(corrupted), std::move(variances)};
}

LowRankInstance gen_lowrank_problem(const LowRankTruthSpec& truth, const DesignSpec& design,
                                    const NoiseSpec& noise,
                                    const std::optional<ContaminationSpec>& contamination,
                                    std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ParameterError("gen_lowrank_problem: n must be positive");
    if (contamination) contamination->validate();
    const Rng root(seed);
    Rng truth_rng = root.substream("truth");
    Rng design_rng = root.substream("design");

    LowRankFactors factors = make_lowrank_truth(truth, truth_rng);
    Matrix m = factors.reconstruct();
    const Index p = truth.d1 * truth.d2;
    auto variances = draw_variances(design, p, design_rng);
    Matrix x = gaussian_rows(static_cast<Index>(n), p, variances, design_rng);
    Vector y = x * Eigen::Map<const Vector>(m.data(), p) +
               draw_noise(noise, n, root.substream("noise"));
    auto corrupted = contaminate(y, contamination, root.substream("contamination"));
    return LowRankInstance{
        MatrixProblem(truth.d1, truth.d2, std::move(x), std::move(y), std::move(m)),
        std::move(factors), std::move(corrupted), std::move(variances)};
}

double snr_to_gamma(double snr_db, double truth_fro) {
    if (!(truth_fro > 0)) throw ParameterError("snr_to_gamma: truth norm must be positive");
    if (!std::isfinite(snr_db)) throw ParameterError("snr_to_gamma: SNR must be finite");
    return truth_fro / std::pow(10.0, snr_db / 20.0);
}

NoiseSpec calibrate_noise(NoiseKind kind, double target_gamma, double shape) {
    if (!(target_gamma > 0) || !std::isfinite(target_gamma)) {
        throw ParameterError("calibrate_noise: target gamma must be positive (use noise 'none' "
                             "for noiseless data)");
    }
    switch (kind) {
        case NoiseKind::Gaussian:
            return NoiseSpec::gaussian(target_gamma * std::sqrt(std::numbers::pi / 2.0));
        case NoiseKind::StudentT:
            return NoiseSpec::student_t(shape, target_gamma / student_t_abs_mean(shape));
        case NoiseKind::SymmetricPareto:
            if (!(shape > 1)) throw ParameterError("calibrate_noise: pareto alpha must exceed 1");
            return NoiseSpec::symmetric_pareto(shape, target_gamma * (shape - 1.0));
        case NoiseKind::None:
            break;
    }
    throw ParameterError("calibrate_noise: cannot calibrate noise kind '" + to_string(kind) + "'");
}

std::vector<SmoothingRow> smoothing_curve(const std::vector<double>& xi,
                                          const std::vector<double>& grid) {
    if (grid.empty()) throw ParameterError("smoothing demo: empty grid");
    if (xi.empty()) throw ParameterError("smoothing demo: no noise draws");
    const double n = static_cast<double>(xi.size());
    std::vector<SmoothingRow> rows;
    rows.reserve(grid.size());
    for (double t : grid) {
        double value = 0.0;
        double sub = 0.0;
        for (double x : xi) {
            value += std::abs(x - t);
            sub += (t > x) - (t < x);
        }
        rows.push_back({t, value / n, sub / n});
    }
    return rows;
}

std::vector<SmoothingRow> smoothing_demo(const NoiseSpec& noise, std::size_t n,
                                         const std::vector<double>& grid, std::uint64_t seed) {
    if (n < 1) throw ParameterError("smoothing demo: n must be positive");
    const Vector draws = draw_noise(noise, n, Rng(seed).substream("noise"));
    return smoothing_curve(std::vector<double>(draws.data(), draws.data() + draws.size()), grid);
}

}  // namespace robreg
