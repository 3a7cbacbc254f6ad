#include "pass/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pass/csv.hpp"
#include "pass/parallel.hpp"

namespace pass::simlab {

namespace {

std::vector<std::size_t> default_bins(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::branin:
            return {20, 20};
        case BenchmarkId::ishigami:
            return {10, 10, 10};
        case BenchmarkId::friedman:
            return {6, 6, 6, 6, 6};
        case BenchmarkId::linkletter:
            return {4, 4, 4, 4, 4, 4, 4, 4};
    }
    throw InvalidInput("unknown benchmark id");
}

// Baseline sizes and spline resolutions are chosen so the Phase-I residual
// scale sigma_hat lands within ~10% of each function's noise level: the
// out-of-sample residual variance is sigma^2 + approximation bias^2 +
// estimation variance of order sigma^2 * p / n.
long default_d0(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::branin:
            return 2000;
        case BenchmarkId::ishigami:
            return 2500;
        case BenchmarkId::friedman:
            return 4000;
        case BenchmarkId::linkletter:
            return 500;
    }
    throw InvalidInput("unknown benchmark id");
}

int default_knots(BenchmarkId id) { return id == BenchmarkId::friedman ? 3 : 7; }

}  // namespace

ExperimentConfig ExperimentConfig::resolved() const {
    ExperimentConfig cfg = *this;
    if (cfg.budget_per_step < 2) throw InvalidInput("config: budget_per_step must be >= 2");
    if (!(cfg.lambda > 0.0 && cfg.lambda <= 1.0)) {
        throw InvalidInput("config: lambda must lie in (0, 1]");
    }
    if (!(cfg.policy.epsilon >= 0.0 && cfg.policy.epsilon <= 1.0)) {
        throw InvalidInput("config: epsilon must lie in [0, 1]");
    }
    if (cfg.drift.onset < 1) throw InvalidInput("config: drift onset must be >= 1");
    if (cfg.drift.ramp_end < cfg.drift.onset) {
        throw InvalidInput("config: ramp_end must be >= onset");
    }
    if (cfg.drift.delta_sigma < 0.0) throw InvalidInput("config: delta must be nonnegative");
    if (cfg.drift.delta_sigma > 0.0 &&
        !(cfg.drift.volume_ratio > 0.0 && cfg.drift.volume_ratio < 1.0)) {
        throw InvalidInput("config: drift volume ratio must lie in (0, 1)");
    }
    if (cfg.arl0_target <= 1.0) throw InvalidInput("config: arl0_target must exceed 1");
    if (cfg.n_replications < 1) throw InvalidInput("config: need at least one replication");
    if (cfg.phase1_batches < 1) throw InvalidInput("config: need at least one Phase-I batch");

    if (cfg.grid_bins.empty()) cfg.grid_bins = default_bins(cfg.function);
    if (cfg.d0_size == 0) cfg.d0_size = default_d0(cfg.function);
    if (!cfg.model.kind.has_value()) {
        cfg.model.kind = cfg.function == BenchmarkId::linkletter
                             ? FeatureKind::identity
                             : FeatureKind::spline_interactions;
    }
    if (cfg.model.knots_per_axis == 0) cfg.model.knots_per_axis = default_knots(cfg.function);
    if (cfg.model.ridge_penalty < 0.0) {
        cfg.model.ridge_penalty = *cfg.model.kind == FeatureKind::identity ? 0.0 : 1e-3;
    }
    if (cfg.top_r == 0) cfg.top_r = static_cast<int>(cfg.budget_per_step / 2);
    if (cfg.top_r < 1 || cfg.top_r > cfg.budget_per_step) {
        throw InvalidInput("config: top_r must lie in [1, budget_per_step]");
    }
    if (cfg.policy.kind != baselines::PolicyKind::score_adaptive && !cfg.chart_a &&
        !cfg.chart_v) {
        throw InvalidInput("config: at least one chart must be active");
    }
    if (cfg.calibration.horizon == 0) {
        cfg.calibration.horizon = 10 * static_cast<long>(cfg.arl0_target);
    }
    return cfg;
}

namespace {

struct SimParams {
    ExperimentConfig cfg;  // resolved
    const BenchmarkInfo* info = nullptr;
    Domain domain;
    explore::GridSpec grid;
    const FittedModel* model = nullptr;
    const Dataset* d0 = nullptr;
    const std::vector<double>* d0_residuals = nullptr;
    exploit::TurbulenceSchedule turbulence;
    double noise_sigma = 0.0;
    double score_sigma2 = 1.0;
};

SimParams make_params(const ExperimentConfig& resolved_cfg, const Baseline& baseline) {
    SimParams params;
    params.cfg = resolved_cfg;
    params.info = &benchmark(resolved_cfg.function);
    params.domain = params.info->standard_domain();
    params.grid = explore::GridSpec(params.domain, resolved_cfg.grid_bins);
    params.model = &baseline.model;
    params.d0 = &baseline.d0;
    params.d0_residuals = &baseline.d0_residuals;
    params.turbulence = baseline.turbulence;
    params.noise_sigma = resolved_cfg.noise_sigma.value_or(params.info->noise_sigma);
    params.score_sigma2 = baseline.score_sigma2 > 0.0 ? baseline.score_sigma2 : 1.0;
    return params;
}

// One monitored sampling process: budget split, exploitation, exploration,
// labeling, residuals. Charts are owned by the caller; commit() appends the
// step's labels to the exploitation history (the no-alarm branch).
class LoopRunner {
public:
    LoopRunner(const SimParams& params, DriftSpec drift)
        : params_(&params),
          drift_(std::move(drift)),
          exploit_state_(static_cast<std::size_t>(params.cfg.exploit_window)),
          features_(params.model->feature_map),
          h_(params.turbulence.h0) {
        const auto& cfg = params.cfg;
        if (cfg.policy.kind == baselines::PolicyKind::random) {
            m_x_ = 0;
            m_e_ = 0;
        } else {
            std::tie(m_x_, m_e_) =
                baselines::split_budget(cfg.budget_per_step, cfg.policy.epsilon);
        }
        for (std::size_t i = 0; i < params.d0->size(); ++i) {
            exploit_state_.add((*params.d0)[i].x, (*params.d0_residuals)[i]);
        }
        const auto m = static_cast<std::size_t>(cfg.budget_per_step);
        batch_.reserve(m);
        sources_.reserve(m);
        batch_y_.reserve(m);
        residuals_.reserve(m);
        if (cfg.policy.kind == baselines::PolicyKind::score_adaptive) {
            score_mean_.setZero(params.model->coefficients.size());
        }
    }

    long t() const { return t_; }
    const std::vector<double>& residual_batch() const { return residuals_; }
    const Eigen::VectorXd& batch_mean_score() const { return score_mean_; }
    const std::vector<Point>& batch() const { return batch_; }
    const std::vector<SampleSource>& sources() const { return sources_; }
    const std::vector<double>& labels() const { return batch_y_; }
    const DriftSpec& drift() const { return drift_; }

    void advance(RngStream& rng) {
        const auto& cfg = params_->cfg;
        ++t_;
        if (t_ > 1) h_ = exploit::update_h(h_, params_->turbulence);
        batch_.clear();
        sources_.clear();
        if (cfg.policy.kind == baselines::PolicyKind::random) {
            batch_ = baselines::random_sample(params_->domain, cfg.budget_per_step, rng);
            sources_.assign(batch_.size(), SampleSource::explore);
        } else {
            auto exploit_pts = exploit_state_.sample(m_x_, h_, params_->domain, rng);
            auto explore_pts = explore::exploration_sample(params_->grid, visits_, t_, m_e_,
                                                           exploit_pts, rng);
            for (auto& x : exploit_pts) {
                batch_.push_back(std::move(x));
                sources_.push_back(SampleSource::exploit);
            }
            for (auto& x : explore_pts) {
                batch_.push_back(std::move(x));
                sources_.push_back(SampleSource::explore);
            }
        }

        batch_y_.clear();
        residuals_.clear();
        const bool want_scores = cfg.policy.kind == baselines::PolicyKind::score_adaptive;
        if (want_scores) score_mean_.setZero();
        for (const Point& x : batch_) {
            const double y =
                sample_label(params_->info->eval, drift_, NoiseSpec{params_->noise_sigma},
                             x, t_, rng);
            const Eigen::VectorXd& phi = features_(x);
            const double e = y - phi.dot(params_->model->coefficients);
            batch_y_.push_back(y);
            residuals_.push_back(e);
            if (want_scores) score_mean_ += phi * (e / params_->score_sigma2);
        }
        if (want_scores) score_mean_ /= static_cast<double>(batch_.size());
    }

    void commit() {
        for (std::size_t i = 0; i < batch_.size(); ++i) {
            exploit_state_.add(batch_[i], residuals_[i]);
        }
    }

private:
    const SimParams* params_;
    DriftSpec drift_;
    long m_x_ = 0;
    long m_e_ = 0;
    exploit::ExploitationState exploit_state_;
    explore::LastVisitMap visits_;
    FeatureEvaluator features_;
    double h_;
    long t_ = 0;
    std::vector<Point> batch_;
    std::vector<SampleSource> sources_;
    std::vector<double> batch_y_;
    std::vector<double> residuals_;
    Eigen::VectorXd score_mean_;
};

DriftSpec realize_drift(const ExperimentConfig& cfg, const BenchmarkInfo& info,
                        const Domain& domain, RngStream& rng) {
    if (cfg.drift.delta_sigma == 0.0) return DriftSpec::none();
    DriftSpec spec;
    spec.kind = cfg.drift.kind;
    spec.delta = cfg.drift.delta_sigma * cfg.noise_sigma.value_or(info.noise_sigma);
    spec.volume_ratio = cfg.drift.volume_ratio;
    spec.onset = cfg.drift.onset;
    spec.ramp_end = cfg.drift.kind == DriftKind::abrupt ? cfg.drift.onset : cfg.drift.ramp_end;
    spec.region = make_drift_region(domain, cfg.drift.volume_ratio, rng);
    return spec;
}

exploit::TurbulenceSchedule resolve_turbulence(const ExperimentConfig& cfg,
                                               const explore::GridSpec& grid) {
    const auto& t = cfg.turbulence;
    exploit::TurbulenceSchedule sched;
    sched.rho = t.rho;
    sched.h_max = t.h_max.value_or(grid.min_cell_width());
    if (t.h0.has_value()) {
        sched.h0 = *t.h0;
    } else {
        // Sized for drift regions down to 1% of the domain volume: half the
        // per-axis half-width such a region would have, capped by the grid
        // cell so proposals stay local to one exploration cell.
        const std::size_t d = grid.domain.dim();
        double width_min = grid.domain.width(0);
        for (std::size_t j = 1; j < d; ++j) width_min = std::min(width_min, grid.domain.width(j));
        const double half_width = 0.5 * std::pow(0.01, 1.0 / static_cast<double>(d)) * width_min;
        sched.h0 = std::min(0.5 * half_width, sched.h_max);
    }
    sched.h_min = t.h_min.value_or(sched.h0 / 100.0);
    sched.validate();
    return sched;
}

monitor::EwmaChart make_chart_a(const ExperimentConfig& cfg, double theta0) {
    monitor::EwmaChart chart;
    chart.statistic = monitor::ChartStatistic::top_r_abs_mean;
    chart.lambda = cfg.lambda;
    chart.theta0 = theta0;
    chart.r = static_cast<int>(cfg.resolved_r());
    return chart;
}

monitor::EwmaChart make_chart_v(const ExperimentConfig& cfg, double theta0) {
    monitor::EwmaChart chart;
    chart.statistic = monitor::ChartStatistic::log_variance;
    chart.lambda = cfg.lambda;
    chart.theta0 = theta0;
    return chart;
}

// Bootstrap limit: replay the baseline period by resampling Phase-I batch
// statistics with replacement, track each replay's chart maximum, and take
// the configured quantile of the maxima.
double bootstrap_chart_ucl(const monitor::EwmaChart& chart_template,
                           std::span<const double> theta_pool, long n_boot, long horizon,
                           double quantile, RngStream& rng) {
    std::vector<double> maxima;
    maxima.reserve(static_cast<std::size_t>(n_boot));
    for (long b = 0; b < n_boot; ++b) {
        monitor::EwmaChart chart = chart_template;
        chart.reset();
        double peak = 0.0;
        for (long t = 0; t < horizon; ++t) {
            const double theta =
                theta_pool[rng.uniform_below(theta_pool.size())];
            monitor::ewma_update(chart, theta);
            peak = std::max(peak, chart.z);
        }
        maxima.push_back(peak);
    }
    return monitor::calibrate_ucl_bootstrap(maxima, quantile);
}

}  // namespace

monitor::InControlGenerator in_control_generator(const ExperimentConfig& config,
                                                 const Baseline& baseline) {
    const ExperimentConfig cfg = config.resolved();
    return [cfg, &baseline](RngStream& rng, long horizon, const monitor::BatchSink& sink) {
        const SimParams params = make_params(cfg, baseline);
        LoopRunner loop(params, DriftSpec::none());
        for (long t = 0; t < horizon; ++t) {
            loop.advance(rng);
            sink(loop.residual_batch());
            loop.commit();
        }
    };
}

Baseline build_baseline(const ExperimentConfig& config, int parallelism) {
    const ExperimentConfig cfg = config.resolved();
    const BenchmarkInfo& info = benchmark(cfg.function);
    const Domain domain = info.standard_domain();
    const explore::GridSpec grid(domain, cfg.grid_bins);
    const RngStream master(cfg.seed);

    Baseline baseline;
    baseline.turbulence = resolve_turbulence(cfg, grid);

    // D0: uniform in-control labels at t = 0.
    const double sigma = cfg.noise_sigma.value_or(info.noise_sigma);
    {
        RngStream d0_rng = master.child(1);
        for (long i = 0; i < cfg.d0_size; ++i) {
            Point x(domain.dim());
            for (std::size_t j = 0; j < domain.dim(); ++j) {
                x[j] = d0_rng.uniform(domain.lower[j], domain.upper[j]);
            }
            const double y = sample_label(info.eval, DriftSpec::none(), NoiseSpec{sigma}, x, 0,
                                          d0_rng);
            baseline.d0.append(LabeledSample{std::move(x), y, 0});
        }
    }

    FeatureMap map;
    map.kind = *cfg.model.kind;
    map.domain = domain;
    map.knots_per_axis = cfg.model.knots_per_axis;
    map.spline_degree = cfg.model.spline_degree;
    if (cfg.d0_size < static_cast<long>(map.dimension())) {
        throw InvalidInput("build_baseline: d0_size must be at least the feature dimension (" +
                           std::to_string(map.dimension()) + ")");
    }
    baseline.model = fit(baseline.d0, map, cfg.model.ridge_penalty);
    baseline.d0_residuals = residuals(baseline.model, baseline.d0);

    // Phase I: run the configured loop in-control and estimate the chart
    // targets from fresh batches.
    const bool score_policy = cfg.policy.kind == baselines::PolicyKind::score_adaptive;
    std::vector<double> a_stats, s2_stats;
    std::vector<Eigen::VectorXd> weighted_features;  // phi * e, scaled later
    {
        SimParams params = make_params(cfg, baseline);
        params.score_sigma2 = 1.0;
        LoopRunner loop(params, DriftSpec::none());
        RngStream phase1_rng = master.child(2);
        FeatureEvaluator features(baseline.model.feature_map);
        for (long b = 0; b < cfg.phase1_batches; ++b) {
            loop.advance(phase1_rng);
            const auto& res = loop.residual_batch();
            a_stats.push_back(monitor::top_r_mean(res, static_cast<int>(cfg.resolved_r())));
            const double mean =
                std::accumulate(res.begin(), res.end(), 0.0) / static_cast<double>(res.size());
            double ss = 0.0;
            for (double e : res) ss += (e - mean) * (e - mean);
            s2_stats.push_back(ss / static_cast<double>(res.size() - 1));
            if (score_policy) {
                for (std::size_t i = 0; i < res.size(); ++i) {
                    weighted_features.push_back(features(loop.batch()[i]) * res[i]);
                }
            }
            loop.commit();
        }
    }
    baseline.theta0_a =
        std::accumulate(a_stats.begin(), a_stats.end(), 0.0) / static_cast<double>(a_stats.size());
    const double sigma2_hat =
        std::accumulate(s2_stats.begin(), s2_stats.end(), 0.0) /
        static_cast<double>(s2_stats.size());
    if (!(sigma2_hat > 0.0)) {
        throw DegenerateBatchError("build_baseline: Phase-I residual variance is zero");
    }
    baseline.sigma_hat = std::sqrt(sigma2_hat);
    baseline.theta0_v =
        monitor::log_s2_moments(sigma2_hat, cfg.budget_per_step).mean;

    baseline.chart_a = make_chart_a(cfg, baseline.theta0_a);
    baseline.chart_v = make_chart_v(cfg, baseline.theta0_v);

    if (score_policy) {
        baseline.score_sigma2 = sigma2_hat;
        std::vector<Eigen::VectorXd> scores;
        scores.reserve(weighted_features.size());
        for (auto& w : weighted_features) scores.push_back(w / sigma2_hat);
        baseline.score_cov0 = baselines::estimate_score_cov(scores);
    }

    // Control limits.
    const long cal_horizon = cfg.calibration.horizon;
    const RngStream cal_rng = master.child(3);
    if (score_policy) {
        const auto generator = [&cfg, &baseline](RngStream& rng, long horizon,
                                                 const monitor::ScalarSink& sink) {
            const SimParams params = make_params(cfg, baseline);
            LoopRunner loop(params, DriftSpec::none());
            baselines::MewmaChart chart(cfg.lambda, baseline.score_cov0, cfg.budget_per_step);
            for (long t = 0; t < horizon; ++t) {
                loop.advance(rng);
                sink(chart.step(loop.batch_mean_score()).first);
                loop.commit();
            }
        };
        if (cfg.calibration.method == CalibrationMethod::mc) {
            const auto records = monitor::simulate_scalar_records(
                generator, cfg.calibration.n_runs, cal_horizon, cal_rng, parallelism);
            baseline.mewma_ucl =
                monitor::calibrate_from_records(records, cfg.arl0_target, cal_horizon);
        } else {
            // Bootstrap over Phase-I batch-mean T2 replays is not meaningful
            // without the chart recursion; reuse the MC path with the
            // bootstrap run count.
            const auto records = monitor::simulate_scalar_records(
                generator, cfg.calibration.n_boot, cal_horizon, cal_rng, parallelism);
            baseline.mewma_ucl =
                monitor::calibrate_from_records(records, cfg.arl0_target, cal_horizon);
        }
        return baseline;
    }

    if (cfg.calibration.method == CalibrationMethod::mc) {
        const auto generator = in_control_generator(cfg, baseline);
        if (cfg.chart_a && cfg.chart_v) {
            const auto [ucl_a, ucl_v] = monitor::calibrate_joint_ucl_mc(
                generator, baseline.chart_a, baseline.chart_v, cfg.arl0_target,
                cfg.calibration.n_runs, cal_horizon, cal_rng, parallelism);
            baseline.chart_a.ucl = ucl_a;
            baseline.chart_v.ucl = ucl_v;
        } else if (cfg.chart_a) {
            baseline.chart_a.ucl =
                monitor::calibrate_ucl_mc(generator, baseline.chart_a, cfg.arl0_target,
                                          cfg.calibration.n_runs, cal_horizon, cal_rng,
                                          parallelism);
        } else {
            baseline.chart_v.ucl =
                monitor::calibrate_ucl_mc(generator, baseline.chart_v, cfg.arl0_target,
                                          cfg.calibration.n_runs, cal_horizon, cal_rng,
                                          parallelism);
        }
    } else {
        std::vector<double> v_stats;
        v_stats.reserve(s2_stats.size());
        for (double s2 : s2_stats) v_stats.push_back(std::log(s2));
        RngStream boot_rng = cal_rng;
        if (cfg.chart_a) {
            baseline.chart_a.ucl = bootstrap_chart_ucl(baseline.chart_a, a_stats,
                                                       cfg.calibration.n_boot,
                                                       cfg.phase1_batches,
                                                       cfg.calibration.quantile, boot_rng);
        }
        if (cfg.chart_v) {
            baseline.chart_v.ucl = bootstrap_chart_ucl(baseline.chart_v, v_stats,
                                                       cfg.calibration.n_boot,
                                                       cfg.phase1_batches,
                                                       cfg.calibration.quantile, boot_rng);
        }
    }
    return baseline;
}

RunResult run_once(const ExperimentConfig& config, const Baseline& baseline, RngStream& rng) {
    const ExperimentConfig cfg = config.resolved();
    const SimParams params = make_params(cfg, baseline);
    const DriftSpec drift = realize_drift(cfg, *params.info, params.domain, rng);
    LoopRunner loop(params, drift);

    monitor::EwmaChart chart_a = baseline.chart_a;
    monitor::EwmaChart chart_v = baseline.chart_v;
    chart_a.reset();
    chart_v.reset();
    const bool score_policy = cfg.policy.kind == baselines::PolicyKind::score_adaptive;
    baselines::MewmaChart mewma;
    if (score_policy) {
        mewma = baselines::MewmaChart(cfg.lambda, baseline.score_cov0, cfg.budget_per_step);
        mewma.set_ucl(baseline.mewma_ucl);
    }

    const long horizon = cfg.resolved_horizon();
    const long onset = cfg.drift.onset;
    RunResult result;
    for (long t = 1; t <= horizon; ++t) {
        loop.advance(rng);
        if (cfg.collect_history) {
            for (std::size_t i = 0; i < loop.batch().size(); ++i) {
                result.sampling_history.push_back(HistoryRecord{
                    t, loop.batch()[i], loop.labels()[i], loop.sources()[i],
                    drift.region.contains(loop.batch()[i])});
            }
        }
        bool alarm = false;
        if (score_policy) {
            alarm = mewma.step(loop.batch_mean_score()).second;
        } else {
            const auto reading = monitor::two_chart_step(cfg.chart_a ? &chart_a : nullptr,
                                                         cfg.chart_v ? &chart_v : nullptr,
                                                         loop.residual_batch());
            alarm = reading.alarm;
        }
        if (alarm) {
            result.alarm_time = t;
            result.false_alarm = t < onset;
            result.run_length = t >= onset ? t - onset + 1 : 0;
            return result;
        }
        loop.commit();
    }
    result.censored = true;
    result.run_length = horizon - onset + 1;  // lower bound
    return result;
}

ArlSummary summarize_run_lengths(std::span<const double> run_lengths, long censored_count,
                                 long discarded) {
    if (run_lengths.size() < 2) {
        throw InvalidInput("summarize_run_lengths: need at least two observations");
    }
    const auto n = static_cast<double>(run_lengths.size());
    const double mean =
        std::accumulate(run_lengths.begin(), run_lengths.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : run_lengths) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (n - 1.0) / n);
    ArlSummary summary;
    summary.mean = mean;
    summary.se = se;
    summary.ci_lo = mean - 1.96 * se;
    summary.ci_hi = mean + 1.96 * se;
    summary.n_effective = static_cast<long>(run_lengths.size());
    summary.censored_count = censored_count;
    summary.discarded_false_alarms = discarded;
    return summary;
}

ArlSummary run_experiment(const ExperimentConfig& config, const Baseline& baseline,
                          int parallelism) {
    const ExperimentConfig cfg = config.resolved();
    if (cfg.n_replications < 2) {
        throw InvalidInput("run_experiment: need at least two replications");
    }
    const RngStream master(cfg.seed);

    std::vector<double> run_lengths;
    run_lengths.reserve(static_cast<std::size_t>(cfg.n_replications));
    long censored_count = 0;
    long discarded = 0;
    long next_key = 0;

    // Waves keep redraw seeds deterministic under parallel execution:
    // replication k uses master.child(16 + k); false alarms burn their key
    // and draw the next one in the following wave.
    std::vector<long> pending(static_cast<std::size_t>(cfg.n_replications));
    for (auto& k : pending) k = next_key++;
    while (!pending.empty()) {
        std::vector<RunResult> results(pending.size());
        parallel_for(static_cast<long>(pending.size()), parallelism, [&](long i) {
            RngStream rng =
                master.child(static_cast<std::uint64_t>(16 + pending[static_cast<std::size_t>(i)]));
            results[static_cast<std::size_t>(i)] = run_once(cfg, baseline, rng);
        });
        std::vector<long> redraw;
        for (const auto& res : results) {
            if (res.false_alarm) {
                ++discarded;
                redraw.push_back(next_key++);
                continue;
            }
            if (res.censored) ++censored_count;
            run_lengths.push_back(static_cast<double>(res.run_length));
        }
        pending = std::move(redraw);
    }

    if (2 * censored_count > cfg.n_replications) {
        throw UnstableConfigurationError(
            "run_experiment: more than half of the replications were censored at the horizon");
    }
    return summarize_run_lengths(run_lengths, censored_count, discarded);
}

ArlSummary run_experiment(const ExperimentConfig& config, int parallelism) {
    const Baseline baseline = build_baseline(config, parallelism);
    return run_experiment(config, baseline, parallelism);
}

ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell) {
    ExperimentConfig cfg = base;
    if (cfg.function != cell.function) {
        // Function-shaped defaults must re-resolve for the cell's function.
        cfg.grid_bins.clear();
        cfg.d0_size = 0;
        cfg.model.kind.reset();
        cfg.model.knots_per_axis = 0;
        cfg.model.ridge_penalty = -1.0;
        cfg.turbulence = TurbulenceConfig{};
    }
    cfg.function = cell.function;
    cfg.policy.kind = cell.policy;
    cfg.policy.epsilon = cell.epsilon;
    cfg.drift.volume_ratio = cell.pi_d;
    cfg.drift.delta_sigma = cell.delta;
    cfg.drift.kind = cell.kind;
    return cfg;
}

namespace {

std::string baseline_key(const ExperimentConfig& cfg) {
    std::ostringstream key;
    key << benchmark(cfg.function).name << '|' << static_cast<int>(cfg.policy.kind) << '|'
        << cfg.policy.epsilon << '|' << cfg.budget_per_step << '|' << cfg.lambda << '|'
        << cfg.resolved_r() << '|' << cfg.chart_a << cfg.chart_v << '|' << cfg.d0_size << '|'
        << cfg.phase1_batches << '|' << cfg.model.knots_per_axis << '|'
        << cfg.model.spline_degree << '|' << cfg.model.ridge_penalty << '|'
        << static_cast<int>(cfg.calibration.method) << '|' << cfg.calibration.n_runs << '|'
        << cfg.calibration.horizon << '|' << cfg.exploit_window << '|' << cfg.seed;
    for (std::size_t b : cfg.grid_bins) key << ',' << b;
    return key.str();
}

}  // namespace

std::vector<SweepResult> sweep(const ExperimentConfig& base, std::span<const SweepCell> cells,
                               int parallelism) {
    if (cells.empty()) throw InvalidInput("sweep: empty cell grid");
    std::map<std::string, Baseline> baselines;
    std::vector<SweepResult> results;
    results.reserve(cells.size());
    for (const SweepCell& cell : cells) {
        const ExperimentConfig cfg = cell_config(base, cell).resolved();
        const std::string key = baseline_key(cfg);
        auto it = baselines.find(key);
        if (it == baselines.end()) {
            it = baselines.emplace(key, build_baseline(cfg, parallelism)).first;
        }
        SweepResult result;
        result.cell = cell;
        result.summary = run_experiment(cfg, it->second, parallelism);
        results.push_back(std::move(result));
    }
    return results;
}

std::string results_csv_header() {
    return "function,policy,epsilon,pi_d,delta,kind,arl1_mean,arl1_se,ci_lo,ci_hi,n,"
           "censored,discarded_false_alarms";
}

std::string results_csv_row(const SweepResult& result) {
    const char* policy = result.cell.policy == baselines::PolicyKind::pass ? "pass"
                         : result.cell.policy == baselines::PolicyKind::random
                             ? "random"
                             : "score_adaptive";
    std::ostringstream row;
    row << benchmark(result.cell.function).name << ',' << policy << ','
        << csv::format_number(result.cell.epsilon) << ','
        << csv::format_number(result.cell.pi_d) << ','
        << csv::format_number(result.cell.delta) << ','
        << (result.cell.kind == DriftKind::abrupt ? "abrupt" : "incremental") << ','
        << csv::format_number(result.summary.mean) << ','
        << csv::format_number(result.summary.se) << ','
        << csv::format_number(result.summary.ci_lo) << ','
        << csv::format_number(result.summary.ci_hi) << ',' << result.summary.n_effective << ','
        << result.summary.censored_count << ',' << result.summary.discarded_false_alarms;
    return row.str();
}

void write_history_csv(std::ostream& os, std::span<const HistoryRecord> history,
                       std::size_t dim) {
    os << "t";
    for (std::size_t j = 1; j <= dim; ++j) os << ",x" << j;
    os << ",y,source,in_drift_region\n";
    for (const auto& rec : history) {
        os << rec.t;
        for (double c : rec.x) os << ',' << csv::format_number(c);
        os << ',' << csv::format_number(rec.y) << ','
           << (rec.source == SampleSource::exploit ? "exploit" : "explore") << ','
           << (rec.in_drift_region ? 1 : 0) << '\n';
    }
}

double measure_arl0(const ExperimentConfig& config, const Baseline& baseline, long n_runs,
                    int parallelism) {
    const ExperimentConfig cfg = config.resolved();
    const RngStream fresh = RngStream(cfg.seed).child(4);
    const long horizon = cfg.calibration.horizon;
    const bool score_policy = cfg.policy.kind == baselines::PolicyKind::score_adaptive;

    std::vector<long> alarm_times(static_cast<std::size_t>(n_runs));
    parallel_for(n_runs, parallelism, [&](long i) {
        RngStream rng = fresh.child(static_cast<std::uint64_t>(i));
        const SimParams params = make_params(cfg, baseline);
        LoopRunner loop(params, DriftSpec::none());
        monitor::EwmaChart chart_a = baseline.chart_a;
        monitor::EwmaChart chart_v = baseline.chart_v;
        chart_a.reset();
        chart_v.reset();
        baselines::MewmaChart mewma;
        if (score_policy) {
            mewma = baselines::MewmaChart(cfg.lambda, baseline.score_cov0, cfg.budget_per_step);
            mewma.set_ucl(baseline.mewma_ucl);
        }
        long alarm = horizon;
        for (long t = 1; t <= horizon; ++t) {
            loop.advance(rng);
            bool fired = false;
            if (score_policy) {
                fired = mewma.step(loop.batch_mean_score()).second;
            } else {
                fired = monitor::two_chart_step(cfg.chart_a ? &chart_a : nullptr,
                                                cfg.chart_v ? &chart_v : nullptr,
                                                loop.residual_batch())
                            .alarm;
            }
            if (fired) {
                alarm = t;
                break;
            }
            loop.commit();
        }
        alarm_times[static_cast<std::size_t>(i)] = alarm;
    });
    double total = 0.0;
    for (long t : alarm_times) total += static_cast<double>(t);
    return total / static_cast<double>(n_runs);
}

}  // namespace pass::simlab
