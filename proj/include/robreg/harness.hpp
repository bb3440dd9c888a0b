#pragma once

// Experiment drivers: convergence traces, repeated accuracy trials,
// contamination sweeps and holdout evaluation on CSV data. All methods in one
// trial see the same generated instance.

#include "robreg/datagen.hpp"
#include "robreg/iht.hpp"
#include "robreg/losses.hpp"
#include "robreg/rsgrad.hpp"
#include "robreg/schedule.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace robreg {

enum class ProblemKind { Sparse, LowRank };

/// A solver variant: loss plus schedule mode. Names look like "l1",
/// "l1-decay", "huber", "quantile", "l2" (see parse_method).
struct MethodSpec {
    std::string name;
    LossSpec loss;
    ScheduleMode mode = ScheduleMode::TwoPhase;
};

MethodSpec parse_method(const std::string& name);

struct ExperimentConfig {
    std::string scenario = "custom";
    ProblemKind kind = ProblemKind::LowRank;

    // sparse problems
    Index dim = 50;
    Index sparsity = 3;
    std::optional<std::vector<double>> beta;  // explicit truth; overrides dim/sparsity
    double magnitude_lo = 1.0;
    double magnitude_hi = 10.0;

    // low-rank problems
    Index d1 = 40;
    Index d2 = 40;
    Index rank = 3;
    double kappa = 1.0;
    double sigma_r = 1.0;

    std::size_t n = 1200;
    NoiseKind noise = NoiseKind::Gaussian;
    double noise_shape = 2.0;             // nu (Student-t) or alpha (Pareto)
    std::optional<double> snr_db = 40.0;  // calibrates E|xi|; without it noise_scale is used
    double noise_scale = 1.0;
    DesignSpec design{};
    double epsilon = 0.0;
    ContaminationModel contamination = ContaminationModel::LargeUniform;

    std::vector<MethodSpec> methods;
    std::size_t trials = 1;
    std::uint64_t seed_base = 0;
    std::size_t threads = 0;  // 0 = hardware concurrency
    std::filesystem::path output_dir;

    // solver knobs shared by all methods
    double decay_q = 0.91;
    double switch_threshold = 1e-10;
    std::size_t max_iters_phase1 = 1000;
    std::size_t max_iters_phase2 = 300;
    double c0 = 0.25;  // sparse eta0 = c0 * D0 / n
    double c1 = 1.0;   // low-rank eta0 = c1 * ||M0|| / n
    double c2 = 1.0;   // phase two eta = c2 * gamma / n
    bool known_noise = false;  // phase two uses the true E|xi| instead of gamma_hat

    void validate() const;
};

/// Built-in scenarios: conv-gaussian, conv-t2, acc-sparse, acc-lowrank,
/// contam-sparse.
ExperimentConfig scenario_config(const std::string& name);
std::vector<std::string> scenario_names();

struct GeneratedInstance {
    std::variant<SparseInstance, LowRankInstance> data;
    NoiseSpec noise;  // inlier noise actually used (after SNR calibration)
};

/// The instance a trial with this seed runs on.
GeneratedInstance generate_instance(const ExperimentConfig& config, std::uint64_t seed);

struct TrialResult {
    std::string method;
    std::uint64_t seed = 0;
    double final_error = 0.0;  // ||estimate - truth|| (l2 or Frobenius)
    std::size_t iters = 0;
    double wall_ms = 0.0;
    std::uint64_t instance_hash = 0;
};

struct MethodRun {
    TrialResult result;
    Trace trace;
};

/// Generates the instance for `seed` and runs every configured method on it.
std::vector<MethodRun> run_trial(const ExperimentConfig& config, std::uint64_t seed);

struct ConvergenceOutput {
    std::map<std::string, Trace> traces;
    std::map<std::string, std::filesystem::path> files;
};

/// One instance (seed_base); writes <output_dir>/<scenario>_<method>.csv per
/// method when output_dir is set.
ConvergenceOutput run_convergence(const ExperimentConfig& config);

/// `trials` instances; rows sorted by (method, seed). Writes
/// <output_dir>/<scenario>_trials.csv when output_dir is set.
std::vector<TrialResult> run_accuracy(const ExperimentConfig& config);

struct SweepRow {
    double epsilon = 0.0;
    std::string method;
    double median_error = 0.0;
};

/// Epsilon above 0.5 is rejected; values in (0.3, 0.5] are capped at 0.3 with a
/// warning. Writes <output_dir>/<scenario>_sweep.csv when output_dir is set.
std::vector<SweepRow> run_contamination_sweep(const ExperimentConfig& config,
                                              const std::vector<double>& eps_list);

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

double median(std::vector<double> values);

struct EvalRow {
    Index sparsity = 0;
    double test_mae = 0.0;
    std::vector<Index> support;
};

/// Fits IHT on `train` for each sparsity in the grid and reports the test MAE
/// and the selected features (0-based, feature columns after `y`).
std::vector<EvalRow> eval_holdout(const VectorProblem& train, const VectorProblem& test,
                                  const LossSpec& loss, const IhtConfig& base,
                                  const std::vector<Index>& grid);

std::vector<EvalRow> eval_csv(const std::filesystem::path& train_csv,
                              const std::filesystem::path& test_csv, const LossSpec& loss,
                              const IhtConfig& base, const std::vector<Index>& grid);

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows);

}  // namespace robreg
