#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pass/baselines.hpp"
#include "pass/benchmarks.hpp"
#include "pass/drift.hpp"
#include "pass/explore.hpp"
#include "pass/exploit.hpp"
#include "pass/monitor.hpp"
#include "pass/predictor.hpp"

namespace pass::simlab {

struct DriftConfig {
    DriftKind kind = DriftKind::abrupt;
    double delta_sigma = 0.0;  // shift magnitude in noise-sigma multiples
    double volume_ratio = 0.01;
    long onset = 30;
    long ramp_end = 60;
};

struct ModelConfig {
    std::optional<FeatureKind> kind;   // default: per-function
    int knots_per_axis = 0;            // 0: per-function default
    int spline_degree = 3;
    double ridge_penalty = -1.0;       // negative: 1e-3 for splines, 0 for identity
};

struct TurbulenceConfig {
    std::optional<double> h0;     // default: min drift width / 2, capped at g_min
    std::optional<double> h_min;  // default: h_max / 100
    std::optional<double> h_max;  // default: smallest exploration cell width
    double rho = 1.0;
};

enum class CalibrationMethod { mc, bootstrap };

struct CalibrationConfig {
    CalibrationMethod method = CalibrationMethod::mc;
    long n_runs = 1000;
    long horizon = 0;  // 0: 10 * arl0_target
    double quantile = 0.995;
    long n_boot = 1000;
};

// One Monte-Carlo experiment. Member defaults follow the simulation study;
// zero-valued sizes resolve to per-function defaults via resolved().
struct ExperimentConfig {
    BenchmarkId function = BenchmarkId::branin;
    baselines::SamplingPolicy policy{baselines::PolicyKind::pass, 0.2};
    long budget_per_step = 20;               // M
    std::vector<std::size_t> grid_bins;      // empty: function default
    DriftConfig drift;
    double lambda = 0.2;
    int top_r = 0;                            // 0: M / 2
    bool chart_a = false;
    bool chart_v = true;
    double arl0_target = 200.0;
    long n_replications = 100;
    long phase1_batches = 50;
    long d0_size = 0;                         // 0: function default
    ModelConfig model;
    TurbulenceConfig turbulence;
    CalibrationConfig calibration;
    long exploit_window = 0;                  // 0: full history
    long horizon = 0;                         // 0: onset + 20 * arl0_target
    bool collect_history = false;
    std::optional<double> noise_sigma;        // override the published noise level
    std::uint64_t seed = 0;

    ExperimentConfig resolved() const;  // fills defaults, validates
    long resolved_r() const { return top_r > 0 ? top_r : budget_per_step / 2; }
    long resolved_horizon() const {
        return horizon > 0 ? horizon
                           : drift.onset + 20 * static_cast<long>(arl0_target);
    }
};

// Everything Phase I produces: the frozen model, in-control targets, the
// noise-scale estimate, and calibrated control limits. Shared by all
// replications of an experiment.
struct Baseline {
    FittedModel model;
    Dataset d0;
    std::vector<double> d0_residuals;
    double sigma_hat = 0.0;
    double theta0_a = 0.0;
    double theta0_v = 0.0;
    monitor::EwmaChart chart_a;
    monitor::EwmaChart chart_v;
    // score_adaptive policy only:
    Eigen::MatrixXd score_cov0;
    double score_sigma2 = 0.0;
    double mewma_ucl = 0.0;
    // resolved turbulence schedule
    exploit::TurbulenceSchedule turbulence;
};

// Seed-stream layout (master = RngStream(config.seed)): child(1) draws and
// labels D0, child(2) drives Phase I, child(3) seeds calibration runs,
// child(4) is reserved for fresh validation runs, and replication k uses
// child(16 + k); false-alarm redraws continue the counter past
// n_replications.
Baseline build_baseline(const ExperimentConfig& config, int parallelism = 1);

enum class SampleSource { exploit, explore };

struct HistoryRecord {
    long t = 0;
    Point x;
    double y = 0.0;
    SampleSource source = SampleSource::explore;
    bool in_drift_region = false;
};

struct RunResult {
    long alarm_time = -1;  // -1 when censored at the horizon
    bool censored = false;
    bool false_alarm = false;
    long run_length = 0;  // post-onset batches counted from the onset step
    std::vector<HistoryRecord> sampling_history;
};

RunResult run_once(const ExperimentConfig& config, const Baseline& baseline, RngStream& rng);

struct ArlSummary {
    double mean = 0.0;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    long n_effective = 0;
    long censored_count = 0;
    long discarded_false_alarms = 0;
};

ArlSummary summarize_run_lengths(std::span<const double> run_lengths, long censored_count,
                                 long discarded);

// Replications with per-replication child streams; false-alarm runs are
// discarded and redrawn so n_effective == n_replications. More than 50%
// censored runs raises UnstableConfigurationError.
ArlSummary run_experiment(const ExperimentConfig& config, const Baseline& baseline,
                          int parallelism = 1);
ArlSummary run_experiment(const ExperimentConfig& config, int parallelism = 1);

struct SweepCell {
    BenchmarkId function = BenchmarkId::branin;
    baselines::PolicyKind policy = baselines::PolicyKind::pass;
    double epsilon = 0.2;
    double pi_d = 0.01;
    double delta = 1.0;
    DriftKind kind = DriftKind::abrupt;
};

struct SweepResult {
    SweepCell cell;
    ArlSummary summary;
};

ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell);

// One ArlSummary per cell; baselines/calibrations are cached across cells
// that share them. Cells are evaluated in grid order.
std::vector<SweepResult> sweep(const ExperimentConfig& base, std::span<const SweepCell> cells,
                               int parallelism = 1);

std::string results_csv_header();
std::string results_csv_row(const SweepResult& result);

// Sampling-history CSV for one run: t,x1..xd,y,source,in_drift_region.
void write_history_csv(std::ostream& os, std::span<const HistoryRecord> history,
                       std::size_t dim);

// In-control batch generator replaying the configured sampling loop with no
// drift (used for MC calibration and for ARL0 validation).
monitor::InControlGenerator in_control_generator(const ExperimentConfig& config,
                                                 const Baseline& baseline);

// Measured in-control ARL of the baseline's calibrated monitor over fresh
// runs seeded from master.child(4).
double measure_arl0(const ExperimentConfig& config, const Baseline& baseline, long n_runs,
                    int parallelism = 1);

}  // namespace pass::simlab
