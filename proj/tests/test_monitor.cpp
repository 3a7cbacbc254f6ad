#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <numeric>

#include "pass/monitor.hpp"
#include "support/stat_oracles.hpp"

using namespace pass;
using namespace pass::monitor;

TEST_CASE("top_r_mean against a full-sort oracle") {
    CHECK(top_r_mean(std::vector<double>{3.0, -1.0, 2.0, 0.5}, 2) == doctest::Approx(2.5));
    {
        const std::vector<double> e{3.0, -1.0, 2.0, 0.5};
        double mean_abs = 0.0;
        for (double v : e) mean_abs += std::abs(v);
        CHECK(top_r_mean(e, 4) == doctest::Approx(mean_abs / 4.0));
    }
    CHECK_THROWS_AS(top_r_mean(std::vector<double>{1.0}, 0), InvalidInput);
    CHECK_THROWS_AS(top_r_mean(std::vector<double>{1.0}, 2), InvalidInput);

    RngStream rng(19);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_below(30));
        std::vector<double> e(n);
        for (auto& v : e) v = rng.normal(0.0, 3.0);
        const int r = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
        std::vector<double> sorted(n);
        std::transform(e.begin(), e.end(), sorted.begin(),
                       [](double v) { return std::abs(v); });
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        const double expected =
            std::accumulate(sorted.begin(), sorted.begin() + r, 0.0) / r;
        CHECK(top_r_mean(e, r) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("log_variance basics and scaling identity") {
    CHECK(log_variance(std::vector<double>{1.0, 2.0, 3.0}) == doctest::Approx(0.0));
    CHECK(log_variance(std::vector<double>{0.0, 2.0}) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(log_variance(std::vector<double>{1.0}), InvalidInput);
    CHECK_THROWS_AS(log_variance(std::vector<double>{2.0, 2.0, 2.0}), DegenerateBatchError);

    RngStream rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_below(20));
        std::vector<double> e(n), scaled(n);
        const double c = std::exp(rng.uniform(-2.0, 2.0));
        for (int i = 0; i < n; ++i) {
            e[i] = rng.normal();
            scaled[i] = c * e[i];
        }
        CHECK(log_variance(scaled) ==
              doctest::Approx(log_variance(e) + 2.0 * std::log(c)).epsilon(1e-10));
    }
}

TEST_CASE("digamma and trigamma special values") {
    constexpr double gamma = 0.57721566490153286;
    CHECK(digamma(1.0) == doctest::Approx(-gamma).epsilon(1e-12));
    CHECK(trigamma(1.0) ==
          doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-12));
    CHECK(digamma(0.5) == doctest::Approx(-gamma - 2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(trigamma(0.5) ==
          doctest::Approx(std::numbers::pi * std::numbers::pi / 2.0).epsilon(1e-12));
    // Recurrence identity psi(x+1) = psi(x) + 1/x at a non-integer point.
    CHECK(digamma(4.7) == doctest::Approx(digamma(3.7) + 1.0 / 3.7).epsilon(1e-12));
    CHECK_THROWS_AS(digamma(0.0), InvalidInput);
}

TEST_CASE("log_s2_moments matches Monte Carlo at n in {5, 20, 100}") {
    RngStream rng(2024);
    for (const long n : {5L, 20L, 100L}) {
        const auto moments = log_s2_moments(1.0, n);
        const long batches = 1000000;
        double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
        std::vector<double> batch(static_cast<std::size_t>(n));
        std::vector<double> values;
        values.reserve(batches);
        for (long b = 0; b < batches; ++b) {
            for (auto& v : batch) v = rng.normal();
            values.push_back(log_variance(batch));
        }
        for (double v : values) sum += v;
        const double mean = sum / batches;
        for (double v : values) {
            const double d = v - mean;
            sum2 += d * d;
            sum3 += d * d * d;
            sum4 += d * d * d * d;
        }
        const double var = sum2 / (batches - 1);
        const double m4 = sum4 / batches;

        const double se_mean = std::sqrt(var / batches);
        CHECK(std::abs(mean - moments.mean) <= 3.0 * se_mean);

        const double se_var = std::sqrt(std::max(m4 - var * var, 0.0) / batches);
        CHECK(std::abs(var - moments.variance) <= 3.0 * se_var);
    }
}

TEST_CASE("log_s2_moments asymptotics in n") {
    CHECK(std::abs(log_s2_moments(1.0, 20).mean) < 0.06);
    CHECK(std::abs(log_s2_moments(1.0, 200).mean) < 0.01);
    const double s2 = 7.3;
    CHECK(std::abs(log_s2_moments(s2, 200).mean - std::log(s2)) < 0.01);
}

TEST_CASE("truncated one-sided EWMA recursion") {
    EwmaChart chart;
    chart.lambda = 0.2;
    chart.theta0 = 1.0;

    for (int i = 0; i < 100; ++i) ewma_update(chart, 0.5);
    CHECK(chart.z == 0.0);
    CHECK(chart.t == 100);

    chart.reset();
    ewma_update(chart, 2.0);  // theta - theta0 = 1
    CHECK(chart.z == doctest::Approx(0.2));

    EwmaChart memoryless;
    memoryless.lambda = 1.0;
    memoryless.theta0 = 0.0;
    RngStream rng(4);
    for (int i = 0; i < 100; ++i) {
        const double theta = rng.normal();
        ewma_update(memoryless, theta);
        CHECK(memoryless.z == std::max(0.0, theta));
    }
}

TEST_CASE("EWMA z stays nonnegative and replays bitwise") {
    RngStream rng(8);
    for (int seq = 0; seq < 100000; ++seq) {
        EwmaChart chart;
        chart.lambda = rng.uniform(0.05, 1.0);
        chart.theta0 = rng.normal();
        const int len = 1 + static_cast<int>(rng.uniform_below(20));
        for (int i = 0; i < len; ++i) {
            ewma_update(chart, rng.normal(0.0, 10.0));
            CHECK(chart.z >= 0.0);
        }
    }

    // Bitwise replay of a recorded sequence.
    std::vector<double> thetas(500);
    RngStream gen(9);
    for (auto& v : thetas) v = gen.normal();
    std::vector<double> z_first;
    EwmaChart chart;
    chart.lambda = 0.2;
    for (double v : thetas) {
        ewma_update(chart, v);
        z_first.push_back(chart.z);
    }
    chart.reset();
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        ewma_update(chart, thetas[i]);
        CHECK(chart.z == z_first[i]);
    }
}

TEST_CASE("pointwise larger theta sequences give pointwise larger z") {
    RngStream rng(10);
    for (int trial = 0; trial < 2000; ++trial) {
        EwmaChart lo_chart, hi_chart;
        lo_chart.lambda = hi_chart.lambda = rng.uniform(0.05, 1.0);
        lo_chart.theta0 = hi_chart.theta0 = rng.normal();
        for (int i = 0; i < 30; ++i) {
            const double theta = rng.normal();
            ewma_update(lo_chart, theta);
            ewma_update(hi_chart, theta + rng.uniform());
            CHECK(hi_chart.z >= lo_chart.z);
        }
    }
}

TEST_CASE("analytic control limit") {
    CHECK(analytic_ucl(3.0, 2.0, 0.0, 0.2, 10) == 3.0);
    const double factor = analytic_ucl(0.0, 1.0, 1.0, 0.2, 1);
    CHECK(factor == doctest::Approx(0.2));
    CHECK(analytic_ucl(1.0, 2.0, 3.0, 0.2, 100000) ==
          doctest::Approx(steady_state_ucl(1.0, 2.0, 3.0, 0.2)));
    CHECK(steady_state_ucl(0.0, 1.0, 1.0, 0.2) ==
          doctest::Approx(std::sqrt(0.2 / 1.8)));
}

TEST_CASE("empirical quantile with interpolation") {
    CHECK(empirical_quantile(std::vector<double>{5.0, 5.0, 5.0}, 0.5) == 5.0);
    CHECK(empirical_quantile(std::vector<double>{5.0, 5.0, 5.0}, 0.995) == 5.0);
    CHECK(empirical_quantile(std::vector<double>{1.0, 2.0}, 0.5) == doctest::Approx(1.5));

    RngStream rng(12);
    std::vector<double> u(1000);
    for (auto& v : u) v = rng.uniform();
    CHECK(std::abs(calibrate_ucl_bootstrap(u, 0.995) - 0.995) < 0.01);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), InvalidInput);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{1.0}, 1.0), InvalidInput);
}

TEST_CASE("two_chart_step OR rule and single-chart composition") {
    RngStream rng(21);
    EwmaChart a;
    a.statistic = ChartStatistic::top_r_abs_mean;
    a.lambda = 0.2;
    a.theta0 = 1.0;
    a.r = 3;
    a.ucl = 0.5;
    EwmaChart v;
    v.statistic = ChartStatistic::log_variance;
    v.lambda = 0.2;
    v.theta0 = 0.0;
    v.ucl = 0.4;

    // V-only run matches running chart V alone bit for bit.
    EwmaChart v_pair = v, v_alone = v;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> batch(10);
        for (auto& e : batch) e = rng.normal();
        const auto reading = two_chart_step(nullptr, &v_pair, batch);
        ewma_update(v_alone, log_variance(batch));
        REQUIRE(reading.z_v.has_value());
        CHECK(*reading.z_v == v_alone.z);
        CHECK(!reading.z_a.has_value());
        CHECK(reading.alarm == (reading.v_alarm));
    }

    // A huge sustained shift alarms within three steps.
    EwmaChart a2 = a, v2 = v;
    int steps_to_alarm = 0;
    for (int i = 1; i <= 10; ++i) {
        std::vector<double> batch(10);
        for (auto& e : batch) e = rng.normal(50.0, 1.0);  // theta - theta0 huge
        const auto reading = two_chart_step(&a2, &v2, batch);
        if (reading.alarm) {
            steps_to_alarm = i;
            break;
        }
    }
    CHECK(steps_to_alarm >= 1);
    CHECK(steps_to_alarm <= 3);

    // Degenerate batch propagates from the V statistic.
    EwmaChart v3 = v;
    const std::vector<double> constant(5, 1.0);
    CHECK_THROWS_AS(two_chart_step(nullptr, &v3, constant), DegenerateBatchError);
}

namespace {

// In-control generator: batches of 20 standard Gaussians.
InControlGenerator gaussian_batches(int batch_size) {
    return [batch_size](RngStream& rng, long horizon, const BatchSink& sink) {
        std::vector<double> batch(static_cast<std::size_t>(batch_size));
        for (long t = 0; t < horizon; ++t) {
            for (auto& v : batch) v = rng.normal();
            sink(batch);
        }
    };
}

}  // namespace

TEST_CASE("MC-calibrated UCL matches the geometric-ARL oracle at lambda 1") {
    // Chart: top-1 absolute value of a single Gaussian, lambda = 1, theta0 = 0.
    // Alarm iff |Z| > u, so ARL(u) = 1 / P(|Z| > u) and the target-200 limit
    // is the 1 - 1/400 normal quantile.
    EwmaChart chart;
    chart.statistic = ChartStatistic::top_r_abs_mean;
    chart.lambda = 1.0;
    chart.theta0 = 0.0;
    chart.r = 1;
    const RngStream rng(31);
    const double ucl = calibrate_ucl_mc(gaussian_batches(1), chart, 200.0, 4000, 2000, rng, 2);
    const double expected = oracle::normal_quantile(1.0 - 1.0 / 400.0);
    CHECK(std::abs(ucl - expected) / expected < 0.05);
}

TEST_CASE("calibration hits the target ARL and is reproducible") {
    EwmaChart chart;
    chart.statistic = ChartStatistic::log_variance;
    chart.lambda = 0.2;
    chart.theta0 = log_s2_moments(1.0, 20).mean;
    const RngStream rng(77);
    const double ucl = calibrate_ucl_mc(gaussian_batches(20), chart, 200.0, 4000, 2000, rng, 2);
    const double ucl_again =
        calibrate_ucl_mc(gaussian_batches(20), chart, 200.0, 4000, 2000, RngStream(77), 2);
    CHECK(ucl == ucl_again);

    // Fresh-sample ARL at the calibrated limit lands within +-10% of target.
    EwmaChart measured = chart;
    measured.ucl = ucl;
    const auto scalar_gen = [&](RngStream& run_rng, long horizon, const ScalarSink& sink) {
        EwmaChart c = measured;
        c.reset();
        std::vector<double> batch(20);
        for (long t = 0; t < horizon; ++t) {
            for (auto& v : batch) v = run_rng.normal();
            ewma_update(c, log_variance(batch));
            sink(c.z);
        }
    };
    const auto records = simulate_scalar_records(scalar_gen, 4000, 2000, RngStream(991), 2);
    const double arl = arl_for_ucl(records, ucl, 2000);
    CHECK(arl > 180.0);
    CHECK(arl < 220.0);

    // ARL increases strictly across doubled limits (the largest one is
    // mostly censored at the horizon, which still ranks above the target).
    const double arl_half = arl_for_ucl(records, 0.5 * ucl, 2000);
    const double arl2 = arl_for_ucl(records, 2.0 * ucl, 2000);
    CHECK(arl_half < arl);
    CHECK(arl < arl2);
}

TEST_CASE("joint calibration hits the target for the OR rule") {
    EwmaChart a;
    a.statistic = ChartStatistic::top_r_abs_mean;
    a.lambda = 0.2;
    a.r = 10;
    a.theta0 = 1.12;  // approximate mean of top-10 |N(0,1)| of 20
    EwmaChart v;
    v.statistic = ChartStatistic::log_variance;
    v.lambda = 0.2;
    v.theta0 = log_s2_moments(1.0, 20).mean;

    const RngStream rng(5);
    const auto [ucl_a, ucl_v] =
        calibrate_joint_ucl_mc(gaussian_batches(20), a, v, 200.0, 800, 2000, rng, 2);
    CHECK(ucl_a > 0.0);
    CHECK(ucl_v > 0.0);

    // Measure the joint ARL on fresh runs.
    long total = 0;
    const long n_runs = 500;
    RngStream fresh(333);
    for (long run = 0; run < n_runs; ++run) {
        RngStream run_rng = fresh.child(static_cast<std::uint64_t>(run));
        EwmaChart ca = a, cv = v;
        ca.ucl = ucl_a;
        cv.ucl = ucl_v;
        long alarm = 2000;
        std::vector<double> batch(20);
        for (long t = 1; t <= 2000; ++t) {
            for (auto& e : batch) e = run_rng.normal();
            const auto reading = two_chart_step(&ca, &cv, batch);
            if (reading.alarm) {
                alarm = t;
                break;
            }
        }
        total += alarm;
    }
    const double joint_arl = static_cast<double>(total) / n_runs;
    CHECK(joint_arl > 170.0);  // 200 +- sampling error at 500 runs
    CHECK(joint_arl < 230.0);
}

TEST_CASE("chart snapshot JSON round trip") {
    EwmaChart chart;
    chart.statistic = ChartStatistic::top_r_abs_mean;
    chart.lambda = 0.25;
    chart.theta0 = 1.5;
    chart.z = 0.125;
    chart.ucl = 2.75;
    chart.r = 4;
    chart.t = 99;
    const auto restored = chart_from_json(chart_to_json(chart));
    CHECK(restored.statistic == chart.statistic);
    CHECK(restored.lambda == chart.lambda);
    CHECK(restored.theta0 == chart.theta0);
    CHECK(restored.z == chart.z);
    CHECK(restored.ucl == chart.ucl);
    CHECK(restored.r == chart.r);
    CHECK(restored.t == chart.t);
}
