#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "pass/simlab.hpp"

using namespace pass;
using namespace pass::simlab;

namespace {

ExperimentConfig quick_branin_config() {
    ExperimentConfig cfg;
    cfg.function = BenchmarkId::branin;
    cfg.policy = {baselines::PolicyKind::pass, 0.2};
    cfg.chart_a = false;
    cfg.chart_v = true;
    cfg.calibration.n_runs = 300;
    cfg.n_replications = 100;
    cfg.exploit_window = 600;
    cfg.seed = 12345;
    return cfg.resolved();
}

const Baseline& quick_branin_baseline() {
    static const Baseline baseline = build_baseline(quick_branin_config(), 2);
    return baseline;
}

}  // namespace

TEST_CASE("config resolution fills per-function defaults") {
    ExperimentConfig cfg;
    cfg.function = BenchmarkId::friedman;
    const auto resolved = cfg.resolved();
    CHECK(resolved.grid_bins == std::vector<std::size_t>{6, 6, 6, 6, 6});
    CHECK(resolved.d0_size == 4000);
    CHECK(*resolved.model.kind == FeatureKind::spline_interactions);
    CHECK(resolved.model.knots_per_axis == 3);
    CHECK(resolved.model.ridge_penalty == 1e-3);
    CHECK(resolved.resolved_r() == 10);
    CHECK(resolved.calibration.horizon == 2000);
    CHECK(resolved.resolved_horizon() == 30 + 20 * 200);

    ExperimentConfig link;
    link.function = BenchmarkId::linkletter;
    const auto rl = link.resolved();
    CHECK(*rl.model.kind == FeatureKind::identity);
    CHECK(rl.model.ridge_penalty == 0.0);
    CHECK(rl.grid_bins.size() == 8);

    ExperimentConfig bad;
    bad.policy.epsilon = 1.5;
    CHECK_THROWS_AS(bad.resolved(), InvalidInput);
}

TEST_CASE("noise-free linkletter baseline has near-zero residual scale") {
    ExperimentConfig cfg;
    cfg.function = BenchmarkId::linkletter;
    cfg.noise_sigma = 0.0;
    cfg.calibration.method = CalibrationMethod::bootstrap;
    cfg.calibration.n_boot = 100;
    cfg.seed = 7;
    const auto baseline = build_baseline(cfg, 1);
    CHECK(baseline.sigma_hat < 1e-8);
    CHECK(std::abs(baseline.theta0_a) < 1e-8);
}

TEST_CASE("branin baseline recovers the noise scale") {
    const auto& baseline = quick_branin_baseline();
    CHECK(baseline.sigma_hat == doctest::Approx(11.32).epsilon(0.15));
    CHECK(std::isfinite(baseline.chart_v.ucl));
    CHECK(baseline.chart_v.ucl > 0.0);
}

TEST_CASE("baseline construction is reproducible") {
    ExperimentConfig cfg;
    cfg.function = BenchmarkId::linkletter;
    cfg.calibration.method = CalibrationMethod::bootstrap;
    cfg.calibration.n_boot = 200;
    cfg.seed = 99;
    const auto b1 = build_baseline(cfg, 1);
    const auto b2 = build_baseline(cfg, 2);
    CHECK(b1.chart_v.ucl == b2.chart_v.ucl);
    CHECK(b1.theta0_v == b2.theta0_v);
    CHECK(b1.sigma_hat == b2.sigma_hat);
}

TEST_CASE("run_once labels exactly M points per step with the configured split") {
    ExperimentConfig cfg = quick_branin_config();
    cfg.collect_history = true;
    cfg.drift.delta_sigma = 3.0;
    cfg.drift.volume_ratio = 0.01;

    RngStream rng(5);
    const auto result = run_once(cfg, quick_branin_baseline(), rng);
    REQUIRE(result.alarm_time > 0);
    const Domain domain = benchmark(BenchmarkId::branin).standard_domain();
    std::map<long, std::pair<long, long>> counts;  // t -> (exploit, explore)
    for (const auto& rec : result.sampling_history) {
        CHECK(domain.contains(rec.x));
        auto& [mx, me] = counts[rec.t];
        (rec.source == SampleSource::exploit ? mx : me)++;
    }
    CHECK(counts.size() == static_cast<std::size_t>(result.alarm_time));
    for (const auto& [t, split] : counts) {
        CHECK(split.first == 16);
        CHECK(split.second == 4);
    }
}

TEST_CASE("run_once is deterministic under a fixed stream") {
    ExperimentConfig cfg = quick_branin_config();
    cfg.collect_history = true;
    cfg.drift.delta_sigma = 2.0;
    RngStream a(17), b(17);
    const auto ra = run_once(cfg, quick_branin_baseline(), a);
    const auto rb = run_once(cfg, quick_branin_baseline(), b);
    CHECK(ra.alarm_time == rb.alarm_time);
    CHECK(ra.run_length == rb.run_length);
    REQUIRE(ra.sampling_history.size() == rb.sampling_history.size());
    for (std::size_t i = 0; i < ra.sampling_history.size(); ++i) {
        CHECK(ra.sampling_history[i].x == rb.sampling_history[i].x);
        CHECK(ra.sampling_history[i].y == rb.sampling_history[i].y);
    }
}

TEST_CASE("an overwhelming shift alarms almost immediately") {
    ExperimentConfig cfg = quick_branin_config();
    cfg.drift.delta_sigma = 50.0;
    cfg.drift.volume_ratio = 0.5;

    const RngStream master(cfg.seed);
    long quick = 0, kept = 0, key = 0;
    while (kept < 100) {
        RngStream rng = master.child(static_cast<std::uint64_t>(16 + key++));
        const auto result = run_once(cfg, quick_branin_baseline(), rng);
        if (result.false_alarm) continue;
        ++kept;
        if (!result.censored && result.run_length <= 3) ++quick;
    }
    CHECK(quick >= 99);
}

TEST_CASE("exploitation queries concentrate inside the drift region before the alarm") {
    ExperimentConfig cfg = quick_branin_config();
    cfg.collect_history = true;
    cfg.drift.delta_sigma = 3.0;
    cfg.drift.volume_ratio = 0.01;

    long in_control_hits = 0, in_control_total = 0;
    long pre_alarm_hits = 0, pre_alarm_total = 0;
    int used = 0;
    for (int seed = 0; used < 20 && seed < 60; ++seed) {
        RngStream rng = RngStream(cfg.seed).child(static_cast<std::uint64_t>(500 + seed));
        const auto result = run_once(cfg, quick_branin_baseline(), rng);
        if (result.false_alarm || result.censored) continue;
        ++used;
        const long alarm = result.alarm_time;
        for (const auto& rec : result.sampling_history) {
            if (rec.source != SampleSource::exploit) continue;
            if (rec.t < cfg.drift.onset) {
                ++in_control_total;
                if (rec.in_drift_region) ++in_control_hits;
            } else if (rec.t > alarm - 10) {
                ++pre_alarm_total;
                if (rec.in_drift_region) ++pre_alarm_hits;
            }
        }
    }
    REQUIRE(used == 20);
    const double baseline_frac =
        static_cast<double>(in_control_hits) / static_cast<double>(in_control_total);
    const double alarm_frac =
        static_cast<double>(pre_alarm_hits) / static_cast<double>(pre_alarm_total);
    CHECK(alarm_frac >= 3.0 * baseline_frac);
}

TEST_CASE("run_experiment keeps the replication count and reports the summary") {
    ExperimentConfig cfg = quick_branin_config();
    cfg.drift.delta_sigma = 50.0;
    cfg.drift.volume_ratio = 0.5;
    cfg.n_replications = 50;
    const auto summary = run_experiment(cfg, quick_branin_baseline(), 2);
    CHECK(summary.n_effective == 50);
    CHECK(summary.censored_count == 0);
    CHECK(summary.mean >= 1.0);
    CHECK(summary.mean <= 3.0);
    CHECK(summary.ci_lo == doctest::Approx(summary.mean - 1.96 * summary.se));
    CHECK(summary.ci_hi == doctest::Approx(summary.mean + 1.96 * summary.se));

    // Same config and seed, same summary.
    const auto again = run_experiment(cfg, quick_branin_baseline(), 1);
    CHECK(again.mean == summary.mean);
    CHECK(again.se == summary.se);
    CHECK(again.discarded_false_alarms == summary.discarded_false_alarms);
}

TEST_CASE("a chart that cannot alarm yields an unstable-configuration error") {
    ExperimentConfig cfg = quick_branin_config();
    cfg.drift.delta_sigma = 1.0;
    cfg.n_replications = 4;
    cfg.horizon = 40;
    Baseline silent = quick_branin_baseline();
    silent.chart_v.ucl = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(run_experiment(cfg, silent, 1), UnstableConfigurationError);
}

TEST_CASE("sweep shares baselines and emits CSV rows") {
    ExperimentConfig base;
    base.function = BenchmarkId::linkletter;
    base.policy = {baselines::PolicyKind::pass, 0.5};
    base.calibration.method = CalibrationMethod::bootstrap;
    base.calibration.n_boot = 200;
    base.n_replications = 10;
    base.horizon = 60;
    base.seed = 31;

    const std::vector<SweepCell> cells = {
        {BenchmarkId::linkletter, baselines::PolicyKind::pass, 0.5, 0.3, 50.0,
         DriftKind::abrupt},
        {BenchmarkId::linkletter, baselines::PolicyKind::pass, 0.5, 0.3, 50.0,
         DriftKind::incremental},
    };
    const auto results = sweep(base, cells, 2);
    REQUIRE(results.size() == 2);
    for (const auto& r : results) {
        CHECK(r.summary.n_effective == 10);
        CHECK(r.summary.mean >= 1.0);
    }
    // Incremental drift of the same magnitude is slower to detect.
    CHECK(results[1].summary.mean >= results[0].summary.mean);

    const std::string row = results_csv_row(results[0]);
    CHECK(row.find("linkletter,pass,0.5,") == 0);
    CHECK(results_csv_header().find("arl1_mean") != std::string::npos);

    const auto rerun = sweep(base, cells, 1);
    CHECK(rerun[0].summary.mean == results[0].summary.mean);
    CHECK(rerun[1].summary.mean == results[1].summary.mean);
}

TEST_CASE("history CSV round trip and results CSV parse") {
    const std::vector<HistoryRecord> history = {
        {1, {0.25, 0.5}, 1.5, SampleSource::exploit, true},
        {2, {0.75, 0.1}, -0.25, SampleSource::explore, false},
    };
    std::ostringstream os;
    write_history_csv(os, history, 2);
    CHECK(os.str() ==
          "t,x1,x2,y,source,in_drift_region\n"
          "1,0.25,0.5,1.5,exploit,1\n"
          "2,0.75,0.10000000000000001,-0.25,explore,0\n");
}
