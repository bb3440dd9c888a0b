#include "robreg/cli.hpp"

#include "robreg/csv.hpp"
#include "robreg/datagen.hpp"
#include "robreg/errors.hpp"
#include "robreg/harness.hpp"
#include "robreg/iht.hpp"
#include "robreg/init.hpp"
#include "robreg/instance_io.hpp"
#include "robreg/rsgrad.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace robreg {
namespace {

constexpr const char* kUsage =
    "usage: robreg [--seed N] [-o PATH] [--config FILE] <command> [options]\n"
    "commands: gen sparse|lowrank, solve-sparse, solve-lowrank, bench, demo-smoothing, "
    "eval-csv\n";

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string out;
};

struct GenOpts {
    std::size_t n = 0;
    std::string noise = "gaussian";
    std::optional<double> snr;
    double noise_scale = 1.0;
    double shape = 2.0;
    double eps = 0.0;
    std::string contamination = "large-uniform";
    std::optional<double> cl;
    std::optional<double> cu;
    // sparse
    Index d = 50;
    Index s = 3;
    std::vector<double> beta;
    double mag_lo = 1.0;
    double mag_hi = 10.0;
    // low-rank
    Index d1 = 40;
    Index d2 = 40;
    Index r = 3;
    double kappa = 1.0;
    double sigma_r = 1.0;
};

struct SolveOpts {
    std::string in;
    std::optional<Index> size;  // sparsity or rank
    std::string loss = "l1";
    std::optional<double> delta;
    std::string mode = "two-phase";
    std::optional<double> eta0;
    double c0 = 0.25;
    double c1 = 1.0;
    double c2 = 1.0;
    std::optional<double> eta2;
    double q = 0.91;
    double switch_threshold = 1e-10;
    std::size_t max1 = 1000;
    std::size_t max2 = 300;
    std::string trace;
};

struct BenchOpts {
    std::string scenario;
    std::string kind;  // convergence, accuracy, sweep
    std::optional<std::size_t> trials;
    std::optional<std::size_t> n;
    std::size_t threads = 0;
    std::vector<std::string> methods;
    std::vector<double> eps = {0.0, 0.05, 0.1, 0.2};
    std::optional<double> c0;
    std::optional<double> c1;
    std::optional<double> c2;
};

struct SmoothingOpts {
    std::vector<double> tau = {0.1, 1.0, 10.0};
    std::size_t n = 1000;
    double lo = -2.0;
    double hi = 2.0;
    std::size_t points = 201;
};

struct EvalOpts {
    std::string train;
    std::string test;
    std::vector<Index> grid = {1, 2, 3, 5, 10};
    std::string loss = "l1";
    std::optional<double> delta;
    std::string mode = "two-phase";
    double c0 = 0.25;
    double c2 = 1.0;
    double q = 0.91;
    std::size_t max1 = 1000;
    std::size_t max2 = 300;
};

class UsageError : public Error {
public:
    using Error::Error;
};

LossSpec make_loss(const std::string& name, const std::optional<double>& delta) {
    LossSpec loss;
    loss.kind = parse_loss_kind(name);
    switch (loss.kind) {
        case LossKind::Huber:
            loss.delta = delta.value_or(0.0);  // 0 picks delta from the residuals
            if (delta && !(*delta > 0)) throw ParameterError("huber delta must be positive");
            return loss;
        case LossKind::Quantile:
            loss.delta = delta.value_or(0.5);
            break;
        case LossKind::Absolute:
        case LossKind::Square:
            if (delta) throw ParameterError("--delta only applies to huber and quantile losses");
            break;
    }
    loss.validate();
    return loss;
}

StepsizeSchedule make_schedule(const std::string& mode, double q, double threshold,
                               std::size_t max1, std::size_t max2, double c2,
                               const std::optional<double>& eta2) {
    StepsizeSchedule s;
    s.mode = parse_schedule_mode(mode);
    s.decay_q = q;
    s.switch_rule.stepsize_threshold = threshold;
    s.max_iters_phase1 = max1;
    s.max_iters_phase2 = max2;
    s.eta2.c2 = c2;
    if (eta2) {
        s.eta2.kind = Eta2Kind::Explicit;
        s.eta2.value = *eta2;
    }
    s.validate();
    return s;
}

std::string fmt_opt(const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string("none");
}

void add_gen_common(CLI::App* cmd, GenOpts& o) {
    cmd->add_option("--n", o.n, "Number of samples")->required();
    cmd->add_option("--noise", o.noise, "none, gaussian, t2 (student-t) or pareto")
        ->capture_default_str();
    cmd->add_option("--snr", o.snr, "SNR in dB; sets E|noise| = ||truth||_F / 10^(snr/20)");
    cmd->add_option("--noise-scale", o.noise_scale, "Noise scale when --snr is absent")
        ->capture_default_str();
    cmd->add_option("--shape", o.shape, "Student-t nu or Pareto alpha")->capture_default_str();
    cmd->add_option("--eps", o.eps, "Fraction of corrupted responses")->capture_default_str();
    cmd->add_option("--contamination", o.contamination, "large-uniform or sign-flip-scale")
        ->capture_default_str();
    cmd->add_option("--cl", o.cl, "Lower bound of diagonal design variances");
    cmd->add_option("--cu", o.cu, "Upper bound of diagonal design variances");
}

ExperimentConfig gen_config(const GenOpts& o, ProblemKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    c.n = o.n;
    c.noise = parse_noise_kind(o.noise);
    c.noise_shape = o.shape;
    c.snr_db = o.snr;
    c.noise_scale = o.noise_scale;
    c.epsilon = o.eps;
    c.contamination = parse_contamination_model(o.contamination);
    if (o.cl || o.cu) {
        c.design.kind = DesignKind::DiagonalCovariance;
        c.design.cl = o.cl.value_or(1.0);
        c.design.cu = o.cu.value_or(1.0);
    }
    if (kind == ProblemKind::Sparse) {
        c.dim = o.d;
        c.sparsity = o.s;
        if (!o.beta.empty()) c.beta = o.beta;
        c.magnitude_lo = o.mag_lo;
        c.magnitude_hi = o.mag_hi;
    } else {
        c.d1 = o.d1;
        c.d2 = o.d2;
        c.rank = o.r;
        c.kappa = o.kappa;
        c.sigma_r = o.sigma_r;
    }
    c.methods = {parse_method("l1")};  // unused, keeps validate() happy
    return c;
}

int cmd_gen(const GenOpts& o, ProblemKind kind, const GlobalOpts& g, std::ostream& out) {
    if (g.out.empty()) throw UsageError("gen needs an output file (-o)");
    const ExperimentConfig c = gen_config(o, kind);
    const GeneratedInstance inst = generate_instance(c, g.seed);
    InstanceFile file{{}, inst.data};
    file.header.emplace_back("seed", std::to_string(g.seed));
    file.header.emplace_back("noise", inst.noise.describe());
    file.header.emplace_back("noise_gamma", format_double(inst.noise.gamma()));
    if (o.snr) file.header.emplace_back("snr_db", format_double(*o.snr));
    file.header.emplace_back("epsilon", format_double(o.eps));
    file.header.emplace_back("contamination", to_string(c.contamination));
    if (kind == ProblemKind::Sparse) {
        const auto& truth = *std::get<SparseInstance>(inst.data).problem.truth();
        file.header.emplace_back("sparsity",
                                 std::to_string((truth.array() != 0.0).count()));
    }
    save_instance(g.out, file);
    out << "wrote " << g.out << '\n';
    return 0;
}

Document estimate_header(const std::string& kind, const SolveOpts& o, const LossSpec& loss,
                         std::size_t iters, const std::optional<std::size_t>& switch_iter,
                         double eta0, double eta2) {
    Document doc;
    doc.set("kind", kind);
    doc.set("source", o.in);
    doc.set("loss", to_string(loss.kind));
    doc.set("delta", format_double(loss.delta));
    doc.set("mode", o.mode);
    doc.set("iters", std::to_string(iters));
    doc.set("switch_iter", fmt_opt(switch_iter));
    doc.set("eta0", format_double(eta0));
    doc.set("eta2", format_double(eta2));
    return doc;
}

void report(std::ostream& out, const std::optional<TruthError>& err, std::size_t iters,
            const std::optional<std::size_t>& switch_iter, double eta0, double eta2) {
    if (err) {
        out << "final_rel_error=" << format_double(err->relative) << '\n';
        out << "final_abs_error=" << format_double(err->absolute) << '\n';
    }
    out << "iters=" << iters << '\n';
    out << "switch_iter=" << fmt_opt(switch_iter) << '\n';
    out << "eta0=" << format_double(eta0) << '\n';
    out << "eta2=" << format_double(eta2) << '\n';
}

Index header_index(const InstanceFile& f, const std::string& key) {
    for (const auto& [k, v] : f.header)
        if (k == key) return static_cast<Index>(std::stoll(v));
    throw UsageError("instance has no '" + key + "' entry; pass it explicitly");
}

int cmd_solve_sparse(const SolveOpts& o, const GlobalOpts& g, std::ostream& out) {
    const LossSpec loss = make_loss(o.loss, o.delta);
    IhtConfig cfg;
    cfg.schedule = make_schedule(o.mode, o.q, o.switch_threshold, o.max1, o.max2, o.c2, o.eta2);
    cfg.eta0.c0 = o.c0;
    if (o.eta0) {
        cfg.eta0.kind = Eta0Kind::Explicit;
        cfg.eta0.value = *o.eta0;
    }
    const InstanceFile f = load_instance(o.in);
    if (!f.is_sparse()) throw UsageError(o.in + " is not a sparse instance");
    const VectorProblem& p = f.sparse().problem;
    cfg.sparsity = o.size ? *o.size : header_index(f, "sparsity");

    const IhtResult res = iht_solve(p, loss, cfg);
    std::optional<TruthError> err;
    if (p.has_truth()) err = error_to_truth(p, res.beta);
    report(out, err, res.trace.size(), res.switch_iter, res.eta0, res.eta2);
    if (!o.trace.empty()) write_trace_csv(std::filesystem::path(o.trace), res.trace);
    if (!g.out.empty()) {
        Document doc = estimate_header("sparse-estimate", o, loss, res.trace.size(),
                                       res.switch_iter, res.eta0, res.eta2);
        doc.blocks.push_back({"beta", res.beta});
        save_document(g.out, doc);
    }
    return 0;
}

int cmd_solve_lowrank(const SolveOpts& o, const GlobalOpts& g, std::ostream& out) {
    RsGradConfig cfg;
    cfg.loss = make_loss(o.loss, o.delta);
    cfg.schedule = make_schedule(o.mode, o.q, o.switch_threshold, o.max1, o.max2, o.c2, o.eta2);
    cfg.eta0.c1 = o.c1;
    if (o.eta0) {
        cfg.eta0.kind = RsGradEta0Kind::Explicit;
        cfg.eta0.value = *o.eta0;
    }
    const InstanceFile f = load_instance(o.in);
    if (f.is_sparse()) throw UsageError(o.in + " is not a low-rank instance");
    const LowRankInstance& inst = f.lowrank();
    cfg.rank = o.size ? *o.size : header_index(f, "rank");

    const Covariance cov = inst.design_variances ? Covariance::diagonal(*inst.design_variances)
                                                 : Covariance::identity();
    const LowRankFactors m0 = spectral_init(inst.problem, cfg.rank, cov);
    const RsGradResult res = rsgrad_solve(inst.problem, cfg, m0);
    const Matrix est = res.estimate.reconstruct();
    std::optional<TruthError> err;
    if (inst.problem.has_truth()) err = error_to_truth(inst.problem, est);
    report(out, err, res.trace.size(), res.switch_iter, res.eta0, res.eta2);
    if (!o.trace.empty()) write_trace_csv(std::filesystem::path(o.trace), res.trace);
    if (!g.out.empty()) {
        Document doc = estimate_header("lowrank-estimate", o, res.final_loss, res.trace.size(),
                                       res.switch_iter, res.eta0, res.eta2);
        doc.blocks.push_back({"U", res.estimate.U});
        doc.blocks.push_back({"s", res.estimate.s});
        doc.blocks.push_back({"V", res.estimate.V});
        doc.blocks.push_back({"estimate", est});
        save_document(g.out, doc);
    }
    return 0;
}

int cmd_bench(const BenchOpts& o, const GlobalOpts& g, std::ostream& out) {
    ExperimentConfig c = scenario_config(o.scenario);
    c.seed_base = g.seed;
    c.output_dir = g.out.empty() ? std::filesystem::path("results") : std::filesystem::path(g.out);
    c.threads = o.threads;
    if (o.trials) c.trials = *o.trials;
    if (o.n) c.n = *o.n;
    if (o.c0) c.c0 = *o.c0;
    if (o.c1) c.c1 = *o.c1;
    if (o.c2) c.c2 = *o.c2;
    if (!o.methods.empty()) {
        c.methods.clear();
        for (const auto& m : o.methods) c.methods.push_back(parse_method(m));
    }
    std::string kind = o.kind;
    if (kind.empty()) {
        kind = o.scenario.rfind("conv-", 0) == 0     ? "convergence"
               : o.scenario.rfind("contam-", 0) == 0 ? "sweep"
                                                      : "accuracy";
    }
    if (kind == "convergence") {
        const auto res = run_convergence(c);
        for (const auto& [method, path] : res.files) {
            const auto& tr = res.traces.at(method);
            out << method << ": " << path.string() << " iters=" << tr.size();
            if (!tr.empty() && tr.back().rel_error) {
                out << " final_rel_error=" << format_double(*tr.back().rel_error);
            }
            out << '\n';
        }
    } else if (kind == "accuracy") {
        const auto rows = run_accuracy(c);
        std::map<std::string, std::vector<double>> errs;
        for (const auto& r : rows) errs[r.method].push_back(r.final_error);
        for (const auto& [m, v] : errs) {
            out << m << ": median_error=" << format_double(median(v)) << '\n';
        }
        out << "wrote " << (c.output_dir / (c.scenario + "_trials.csv")).string() << '\n';
    } else if (kind == "sweep") {
        const auto rows = run_contamination_sweep(c, o.eps);
        write_sweep_csv(out, rows);
        out << "wrote " << (c.output_dir / (c.scenario + "_sweep.csv")).string() << '\n';
    } else {
        throw UsageError("--kind must be convergence, accuracy or sweep");
    }
    return 0;
}

int cmd_demo_smoothing(const SmoothingOpts& o, const GlobalOpts& g, std::ostream& out) {
    if (o.points < 2) throw UsageError("--points must be at least 2");
    if (!(o.hi > o.lo)) throw UsageError("--grid-hi must exceed --grid-lo");
    std::vector<double> grid(o.points);
    for (std::size_t k = 0; k < o.points; ++k) {
        grid[k] = o.lo + (o.hi - o.lo) * static_cast<double>(k) / static_cast<double>(o.points - 1);
    }
    std::ofstream file;
    std::ostream* dst = &out;
    if (!g.out.empty()) {
        file = open_output(g.out);
        dst = &file;
    }
    *dst << "tau,t,g,subgrad\n";
    for (double tau : o.tau) {
        const auto rows = smoothing_demo(NoiseSpec::gaussian(tau), o.n, grid, g.seed);
        for (const auto& r : rows) {
            *dst << format_double(tau) << ',' << format_double(r.t) << ','
                 << format_double(r.value) << ',' << format_double(r.subgrad) << '\n';
        }
    }
    if (!g.out.empty()) out << "wrote " << g.out << '\n';
    return 0;
}

int cmd_eval_csv(const EvalOpts& o, const GlobalOpts& g, std::ostream& out) {
    const LossSpec loss = make_loss(o.loss, o.delta);
    IhtConfig base;
    base.eta0.c0 = o.c0;
    base.schedule = make_schedule(o.mode, o.q, 1e-10, o.max1, o.max2, o.c2, std::nullopt);
    const auto rows = eval_csv(o.train, o.test, loss, base, o.grid);
    if (g.out.empty()) {
        write_eval_csv(out, rows);
    } else {
        auto f = open_output(g.out);
        write_eval_csv(f, rows);
        out << "wrote " << g.out << '\n';
    }
    return 0;
}

void add_solve_options(CLI::App* cmd, SolveOpts& o, const std::string& size_flag,
                       const std::string& size_help) {
    cmd->add_option("--in", o.in, "Instance file")->required();
    cmd->add_option(size_flag, o.size, size_help);
    cmd->add_option("--loss", o.loss, "absolute (l1), huber, quantile or square (l2)")
        ->capture_default_str();
    cmd->add_option("--delta", o.delta, "Huber threshold or quantile level");
    cmd->add_option("--mode", o.mode, "two-phase or decay-only")->capture_default_str();
    cmd->add_option("--eta0", o.eta0, "Explicit starting stepsize");
    cmd->add_option("--c2", o.c2, "Phase-two constant: eta = c2 * gamma_hat / n")
        ->capture_default_str();
    cmd->add_option("--eta2", o.eta2, "Explicit phase-two stepsize");
    cmd->add_option("--q", o.q, "Phase-one decay factor")->capture_default_str();
    cmd->add_option("--switch", o.switch_threshold, "Switch once the stepsize drops below this")
        ->capture_default_str();
    cmd->add_option("--max1", o.max1, "Phase-one iteration cap")->capture_default_str();
    cmd->add_option("--max2", o.max2, "Phase-two iteration count")->capture_default_str();
    cmd->add_option("--trace", o.trace, "Write the iteration trace CSV here");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust sparse and low-rank regression with two-phase subgradient solvers",
                 "robreg"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags win");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "RNG seed (default 0)")->capture_default_str();
    app.add_option("-o,--out", g.out, "Output file (directory for bench)");

    GenOpts gen_opts;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic instance file");
    gen->require_subcommand(1);
    auto* gen_sparse = gen->add_subcommand("sparse", "Sparse linear regression instance");
    add_gen_common(gen_sparse, gen_opts);
    gen_sparse->add_option("--d", gen_opts.d, "Dimension")->capture_default_str();
    gen_sparse->add_option("--s", gen_opts.s, "Number of nonzeros")->capture_default_str();
    gen_sparse->add_option("--beta", gen_opts.beta, "Explicit truth, comma separated")
        ->delimiter(',');
    gen_sparse->add_option("--mag-lo", gen_opts.mag_lo, "Smallest nonzero magnitude")
        ->capture_default_str();
    gen_sparse->add_option("--mag-hi", gen_opts.mag_hi, "Largest nonzero magnitude")
        ->capture_default_str();
    auto* gen_lowrank = gen->add_subcommand("lowrank", "Low-rank matrix regression instance");
    add_gen_common(gen_lowrank, gen_opts);
    gen_lowrank->add_option("--d1", gen_opts.d1, "Rows")->capture_default_str();
    gen_lowrank->add_option("--d2", gen_opts.d2, "Columns")->capture_default_str();
    gen_lowrank->add_option("--r", gen_opts.r, "Rank")->capture_default_str();
    gen_lowrank->add_option("--kappa", gen_opts.kappa, "Condition number")->capture_default_str();
    gen_lowrank->add_option("--sigma-r", gen_opts.sigma_r, "Smallest singular value")
        ->capture_default_str();

    SolveOpts sparse_opts;
    auto* solve_sparse = app.add_subcommand("solve-sparse", "Run IHT on a sparse instance");
    add_solve_options(solve_sparse, sparse_opts, "--s", "Sparsity level (default: instance)");
    solve_sparse->add_option("--c0", sparse_opts.c0, "eta0 = c0 * D0 / n")->capture_default_str();

    SolveOpts lowrank_opts;
    auto* solve_lowrank =
        app.add_subcommand("solve-lowrank", "Run Riemannian subgradient descent on a low-rank instance");
    add_solve_options(solve_lowrank, lowrank_opts, "--r", "Rank (default: instance)");
    solve_lowrank->add_option("--c1", lowrank_opts.c1, "eta0 = c1 * ||M0|| / n")
        ->capture_default_str();

    BenchOpts bench_opts;
    auto* bench = app.add_subcommand("bench", "Run a built-in experiment scenario");
    std::string scenarios;
    for (const auto& s : scenario_names()) scenarios += (scenarios.empty() ? "" : ", ") + s;
    bench->add_option("--scenario", bench_opts.scenario, "One of: " + scenarios)->required();
    bench->add_option("--kind", bench_opts.kind, "convergence, accuracy or sweep");
    bench->add_option("--trials", bench_opts.trials, "Number of seeds");
    bench->add_option("--n", bench_opts.n, "Sample size override");
    bench->add_option("--threads", bench_opts.threads, "Worker threads (0 = all cores)");
    bench->add_option("--methods", bench_opts.methods, "Methods, e.g. l1,l2,huber,l1-decay")
        ->delimiter(',');
    bench->add_option("--eps", bench_opts.eps, "Contamination levels for sweeps")
        ->delimiter(',');
    bench->add_option("--c0", bench_opts.c0, "Sparse starting stepsize constant");
    bench->add_option("--c1", bench_opts.c1, "Low-rank starting stepsize constant");
    bench->add_option("--c2", bench_opts.c2, "Phase-two stepsize constant");

    SmoothingOpts smooth_opts;
    auto* smooth = app.add_subcommand("demo-smoothing",
                                      "Tabulate g(t) = mean |xi - t| for Gaussian noise levels");
    smooth->add_option("--tau", smooth_opts.tau, "Noise standard deviations")->delimiter(',');
    smooth->add_option("--n", smooth_opts.n, "Noise draws per level")->capture_default_str();
    smooth->add_option("--grid-lo", smooth_opts.lo, "Grid start")->capture_default_str();
    smooth->add_option("--grid-hi", smooth_opts.hi, "Grid end")->capture_default_str();
    smooth->add_option("--points", smooth_opts.points, "Grid points")->capture_default_str();

    EvalOpts eval_opts;
    auto* eval = app.add_subcommand("eval-csv", "Fit IHT on a training CSV and score a test CSV");
    eval->add_option("--train", eval_opts.train, "Training CSV (first column y)")->required();
    eval->add_option("--test", eval_opts.test, "Test CSV (same columns)")->required();
    eval->add_option("--s", eval_opts.grid, "Sparsity grid")->delimiter(',');
    eval->add_option("--loss", eval_opts.loss, "Loss")->capture_default_str();
    eval->add_option("--delta", eval_opts.delta, "Huber threshold or quantile level");
    eval->add_option("--mode", eval_opts.mode, "two-phase or decay-only")->capture_default_str();
    eval->add_option("--c0", eval_opts.c0, "eta0 = c0 * D0 / n")->capture_default_str();
    eval->add_option("--c2", eval_opts.c2, "Phase-two constant")->capture_default_str();
    eval->add_option("--q", eval_opts.q, "Phase-one decay factor")->capture_default_str();
    eval->add_option("--max1", eval_opts.max1, "Phase-one iteration cap")->capture_default_str();
    eval->add_option("--max2", eval_opts.max2, "Phase-two iteration count")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return 0;
        err << kUsage;
        return 2;
    }

    try {
        if (gen_sparse->parsed()) return cmd_gen(gen_opts, ProblemKind::Sparse, g, out);
        if (gen_lowrank->parsed()) return cmd_gen(gen_opts, ProblemKind::LowRank, g, out);
        if (solve_sparse->parsed()) return cmd_solve_sparse(sparse_opts, g, out);
        if (solve_lowrank->parsed()) return cmd_solve_lowrank(lowrank_opts, g, out);
        if (bench->parsed()) return cmd_bench(bench_opts, g, out);
        if (smooth->parsed()) return cmd_demo_smoothing(smooth_opts, g, out);
        if (eval->parsed()) return cmd_eval_csv(eval_opts, g, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n' << kUsage;
        return 2;
    } catch (const ParameterError& e) {
        // bad flag values surface as parameter errors
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << kUsage;
    return 2;
}

}  // namespace robreg
