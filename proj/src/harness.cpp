#include "robreg/harness.hpp"

#include "robreg/csv.hpp"
#include "robreg/errors.hpp"
#include "robreg/init.hpp"
#include "robreg/instance_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace robreg {

MethodSpec parse_method(const std::string& name) {
    std::string base = name;
    ScheduleMode mode = ScheduleMode::TwoPhase;
    const std::string suffix = "-decay";
    if (base.size() > suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
        base.resize(base.size() - suffix.size());
        mode = ScheduleMode::DecayOnly;
    }
    LossSpec loss;
    if (base == "l1") {
        loss = LossSpec::absolute();
    } else if (base == "l2") {
        loss = LossSpec::square();
    } else if (base == "huber") {
        loss = LossSpec{LossKind::Huber, 0.0};  // delta picked from the data
    } else if (base == "quantile") {
        loss = LossSpec::quantile(0.5);
    } else {
        throw ParameterError("unknown method '" + name +
                             "' (expected l1, l2, huber or quantile, optionally with -decay)");
    }
    return {name, loss, mode};
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw ParameterError("experiment: trial count must be at least 1");
    if (methods.empty()) throw ParameterError("experiment: no methods configured");
    if (n < 1) throw ParameterError("experiment: n must be positive");
    if (!(epsilon >= 0 && epsilon < 1)) throw ParameterError("experiment: epsilon must lie in [0, 1)");
    if (kind == ProblemKind::Sparse) {
        if (!beta && (sparsity < 1 || sparsity > dim)) {
            throw ParameterError("experiment: sparsity outside [1, dim]");
        }
    } else if (rank < 1 || rank > std::min(d1, d2)) {
        throw ParameterError("experiment: rank outside [1, min(d1, d2)]");
    }
    design.validate();
}

ExperimentConfig scenario_config(const std::string& name) {
    ExperimentConfig c;
    c.scenario = name;
    if (name == "conv-gaussian" || name == "conv-t2") {
        c.kind = ProblemKind::LowRank;
        c.n = static_cast<std::size_t>(10 * c.rank * c.d1);
        c.noise = name == "conv-t2" ? NoiseKind::StudentT : NoiseKind::Gaussian;
        c.methods = {parse_method("l1"), parse_method("l1-decay"), parse_method("huber")};
        return c;
    }
    if (name == "acc-sparse") {
        c.kind = ProblemKind::Sparse;
        c.beta = std::vector<double>(50, 0.0);
        (*c.beta)[0] = 16;
        (*c.beta)[1] = 4;
        (*c.beta)[2] = 1;
        c.dim = 50;
        c.sparsity = 3;
        c.n = 300;
        c.noise = NoiseKind::StudentT;
        c.snr_db.reset();
        c.noise_scale = 1.0;
        c.methods = {parse_method("l1"), parse_method("l2")};
        c.trials = 50;
        return c;
    }
    if (name == "acc-lowrank") {
        c.kind = ProblemKind::LowRank;
        c.n = static_cast<std::size_t>(10 * c.rank * c.d1);
        c.noise = NoiseKind::StudentT;
        c.methods = {parse_method("l1"), parse_method("l2")};
        c.trials = 20;
        return c;
    }
    if (name == "contam-sparse") {
        c = scenario_config("acc-sparse");
        c.scenario = name;
        c.noise = NoiseKind::Gaussian;
        c.snr_db = 40.0;
        c.trials = 30;
        c.known_noise = true;
        return c;
    }
    throw ParameterError("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() {
    return {"conv-gaussian", "conv-t2", "acc-sparse", "acc-lowrank", "contam-sparse"};
}

namespace {

NoiseSpec make_noise(const ExperimentConfig& c, double truth_norm) {
    if (c.noise == NoiseKind::None) return NoiseSpec::none();
    if (c.snr_db) return calibrate_noise(c.noise, snr_to_gamma(*c.snr_db, truth_norm), c.noise_shape);
    switch (c.noise) {
        case NoiseKind::Gaussian: return NoiseSpec::gaussian(c.noise_scale);
        case NoiseKind::StudentT: return NoiseSpec::student_t(c.noise_shape, c.noise_scale);
        case NoiseKind::SymmetricPareto: return NoiseSpec::symmetric_pareto(c.noise_shape, c.noise_scale);
        case NoiseKind::None: break;
    }
    return NoiseSpec::none();
}

std::optional<ContaminationSpec> make_contamination(const ExperimentConfig& c) {
    if (c.epsilon <= 0) return std::nullopt;
    return ContaminationSpec{c.epsilon, c.contamination};
}

StepsizeSchedule make_schedule(const ExperimentConfig& c, const MethodSpec& m, double gamma) {
    StepsizeSchedule s;
    s.mode = m.mode;
    s.decay_q = c.decay_q;
    s.switch_rule.stepsize_threshold = c.switch_threshold;
    s.max_iters_phase1 = c.max_iters_phase1;
    s.max_iters_phase2 = c.max_iters_phase2;
    s.eta2.c2 = c.c2;
    if (c.known_noise && gamma > 0) {
        s.eta2.kind = Eta2Kind::NoiseKnown;
        s.eta2.gamma = gamma;
    }
    return s;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

void warn_failure(const MethodSpec& m, std::uint64_t seed, const std::exception& e) {
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::cerr << "warning: method " << m.name << " failed on seed " << seed << ": " << e.what()
              << '\n';
}

SparseInstance gen_sparse(const ExperimentConfig& c, std::uint64_t seed, NoiseSpec& noise) {
    SparseTruthSpec ts;
    if (c.beta) {
        ts.entries = Eigen::Map<const Vector>(c.beta->data(), static_cast<Index>(c.beta->size()));
    } else {
        ts.dim = c.dim;
        ts.sparsity = c.sparsity;
        ts.magnitude_lo = c.magnitude_lo;
        ts.magnitude_hi = c.magnitude_hi;
        // the generator draws the truth from this same substream
        Rng truth_rng = Rng(seed).substream("truth");
        ts.entries = make_sparse_truth(ts, truth_rng);
    }
    noise = make_noise(c, ts.entries->norm());
    return gen_sparse_problem(ts, c.design, noise, make_contamination(c), c.n, seed);
}

LowRankInstance gen_lowrank(const ExperimentConfig& c, std::uint64_t seed, NoiseSpec& noise) {
    LowRankTruthSpec ts;
    ts.d1 = c.d1;
    ts.d2 = c.d2;
    ts.rank = c.rank;
    ts.kappa = c.kappa;
    ts.sigma_r = c.sigma_r;
    noise = make_noise(c, ts.singular_values().norm());
    return gen_lowrank_problem(ts, c.design, noise, make_contamination(c), c.n, seed);
}

std::vector<MethodRun> run_sparse_trial(const ExperimentConfig& c, const SparseInstance& inst,
                                        const NoiseSpec& noise, std::uint64_t seed) {
    const std::uint64_t hash = instance_fingerprint(inst.problem.design(), inst.problem.responses());
    const Index sparsity =
        c.beta ? static_cast<Index>((inst.problem.truth()->array() != 0.0).count()) : c.sparsity;

    std::vector<MethodRun> out;
    for (const auto& m : c.methods) {
        IhtConfig cfg;
        cfg.sparsity = std::max<Index>(sparsity, 1);
        cfg.eta0.c0 = c.c0;
        cfg.schedule = make_schedule(c, m, noise.kind == NoiseKind::None ? 0.0 : noise.gamma());
        MethodRun run;
        run.result.method = m.name;
        run.result.seed = seed;
        run.result.instance_hash = hash;
        const auto start = std::chrono::steady_clock::now();
        try {
            auto res = iht_solve(inst.problem, m.loss, cfg);
            run.result.wall_ms = elapsed_ms(start);
            run.result.final_error = error_to_truth(inst.problem, res.beta).absolute;
            run.result.iters = res.trace.size();
            run.trace = std::move(res.trace);
        } catch (const DivergedError& e) {
            warn_failure(m, seed, e);
            run.result.wall_ms = elapsed_ms(start);
            run.result.final_error = std::numeric_limits<double>::infinity();
            run.result.iters = e.trace().size();
            run.trace = e.trace();
        }
        out.push_back(std::move(run));
    }
    return out;
}

std::vector<MethodRun> run_lowrank_trial(const ExperimentConfig& c, const LowRankInstance& inst,
                                         const NoiseSpec& noise, std::uint64_t seed) {
    const std::uint64_t hash = instance_fingerprint(inst.problem.design(), inst.problem.responses());
    const Covariance cov = inst.design_variances ? Covariance::diagonal(*inst.design_variances)
                                                 : Covariance::identity();
    const LowRankFactors m0 = spectral_init(inst.problem, c.rank, cov);

    std::vector<MethodRun> out;
    for (const auto& m : c.methods) {
        RsGradConfig cfg;
        cfg.rank = c.rank;
        cfg.loss = m.loss;
        cfg.eta0.c1 = c.c1;
        cfg.schedule = make_schedule(c, m, noise.kind == NoiseKind::None ? 0.0 : noise.gamma());
        MethodRun run;
        run.result.method = m.name;
        run.result.seed = seed;
        run.result.instance_hash = hash;
        const auto start = std::chrono::steady_clock::now();
        try {
            auto res = rsgrad_solve(inst.problem, cfg, m0);
            run.result.wall_ms = elapsed_ms(start);
            run.result.final_error =
                error_to_truth(inst.problem, res.estimate.reconstruct()).absolute;
            run.result.iters = res.trace.size();
            run.trace = std::move(res.trace);
        } catch (const DivergedError& e) {
            warn_failure(m, seed, e);
            run.result.wall_ms = elapsed_ms(start);
            run.result.final_error = std::numeric_limits<double>::infinity();
            run.result.iters = e.trace().size();
            run.trace = e.trace();
        }
        out.push_back(std::move(run));
    }
    return out;
}

// Runs job(i) for i in [0, count) on a small worker pool; the first exception
// is rethrown after all workers finish.
template <class Job>
void parallel_for(std::size_t count, std::size_t threads, Job job) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<TrialResult> collect_trials(const ExperimentConfig& config) {
    config.validate();
    std::vector<std::vector<MethodRun>> per_trial(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t t) {
        per_trial[t] = run_trial(config, config.seed_base + t);
    });
    std::vector<TrialResult> rows;
    for (auto& runs : per_trial)
        for (auto& r : runs) rows.push_back(std::move(r.result));
    std::sort(rows.begin(), rows.end(), [](const TrialResult& a, const TrialResult& b) {
        return a.method != b.method ? a.method < b.method : a.seed < b.seed;
    });
    return rows;
}

}  // namespace

GeneratedInstance generate_instance(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    NoiseSpec noise;
    if (config.kind == ProblemKind::Sparse) {
        auto inst = gen_sparse(config, seed, noise);
        return {std::move(inst), noise};
    }
    auto inst = gen_lowrank(config, seed, noise);
    return {std::move(inst), noise};
}

std::vector<MethodRun> run_trial(const ExperimentConfig& config, std::uint64_t seed) {
    const GeneratedInstance g = generate_instance(config, seed);
    if (const auto* s = std::get_if<SparseInstance>(&g.data)) {
        return run_sparse_trial(config, *s, g.noise, seed);
    }
    return run_lowrank_trial(config, std::get<LowRankInstance>(g.data), g.noise, seed);
}

ConvergenceOutput run_convergence(const ExperimentConfig& config) {
    auto runs = run_trial(config, config.seed_base);
    ConvergenceOutput out;
    for (auto& r : runs) {
        if (!config.output_dir.empty()) {
            const auto path = config.output_dir / (config.scenario + "_" + r.result.method + ".csv");
            write_trace_csv(path, r.trace);
            out.files[r.result.method] = path;
        }
        out.traces[r.result.method] = std::move(r.trace);
    }
    return out;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& rows) {
    out << kTrialsHeader << '\n';
    for (const auto& r : rows) {
        out << r.method << ',' << r.seed << ',' << format_double(r.final_error) << ',' << r.iters
            << ',' << format_double(r.wall_ms) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << kSweepHeader << '\n';
    for (const auto& r : rows) {
        out << format_double(r.epsilon) << ',' << r.method << ',' << format_double(r.median_error)
            << '\n';
    }
}

std::vector<TrialResult> run_accuracy(const ExperimentConfig& config) {
    auto rows = collect_trials(config);
    if (!config.output_dir.empty()) {
        auto out = open_output(config.output_dir / (config.scenario + "_trials.csv"));
        write_trials_csv(out, rows);
    }
    return rows;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ParameterError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<SweepRow> run_contamination_sweep(const ExperimentConfig& config,
                                              const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw ParameterError("sweep: empty epsilon list");
    std::vector<double> levels;
    for (double eps : eps_list) {
        if (!(eps >= 0)) throw ParameterError("sweep: epsilon must be non-negative");
        if (eps > 0.5) {
            throw ParameterError("sweep: epsilon " + format_double(eps) +
                                 " exceeds 0.5; the guarantees need a small corruption rate");
        }
        if (eps > 0.3) {
            std::cerr << "warning: epsilon " << eps << " capped at 0.3\n";
            eps = 0.3;
        }
        levels.push_back(eps);
    }
    std::vector<SweepRow> out;
    for (double eps : levels) {
        ExperimentConfig c = config;
        c.epsilon = eps;
        c.output_dir.clear();
        const auto rows = collect_trials(c);
        for (const auto& m : config.methods) {
            std::vector<double> errs;
            for (const auto& r : rows)
                if (r.method == m.name) errs.push_back(r.final_error);
            out.push_back({eps, m.name, median(errs)});
        }
    }
    if (!config.output_dir.empty()) {
        auto f = open_output(config.output_dir / (config.scenario + "_sweep.csv"));
        write_sweep_csv(f, out);
    }
    return out;
}

std::vector<EvalRow> eval_holdout(const VectorProblem& train, const VectorProblem& test,
                                  const LossSpec& loss, const IhtConfig& base,
                                  const std::vector<Index>& grid) {
    if (grid.empty()) throw ParameterError("eval: empty sparsity grid");
    if (train.dim() != test.dim()) {
        throw ParameterError("eval: train and test have different feature counts");
    }
    std::vector<EvalRow> rows;
    for (Index s : grid) {
        IhtConfig cfg = base;
        cfg.sparsity = s;
        const auto res = iht_solve(train, loss, cfg);
        EvalRow row;
        row.sparsity = s;
        row.test_mae = holdout_mae(train, test, res.beta);
        for (Index j = 0; j < res.beta.size(); ++j)
            if (res.beta[j] != 0.0) row.support.push_back(j);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<EvalRow> eval_csv(const std::filesystem::path& train_csv,
                              const std::filesystem::path& test_csv, const LossSpec& loss,
                              const IhtConfig& base, const std::vector<Index>& grid) {
    const VectorProblem train = read_regression_csv_file(train_csv);
    const VectorProblem test = read_regression_csv_file(test_csv);
    return eval_holdout(train, test, loss, base, grid);
}

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
    out << "sparsity,test_mae,support\n";
    for (const auto& r : rows) {
        out << r.sparsity << ',' << format_double(r.test_mae) << ',';
        for (std::size_t k = 0; k < r.support.size(); ++k) {
            if (k) out << ';';
            out << r.support[k];
        }
        out << '\n';
    }
}

}  // namespace robreg
