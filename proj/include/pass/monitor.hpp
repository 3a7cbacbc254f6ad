#pragma once

#include <functional>
#include <limits>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pass/errors.hpp"
#include "pass/rng.hpp"

namespace pass::monitor {

enum class ChartStatistic { top_r_abs_mean, log_variance };

// One upper one-sided truncated EWMA chart:
//   z_t = lambda * max{0, theta_t - theta0} + (1 - lambda) * z_{t-1},  z_0 = 0.
// Only upward deviations accumulate, so z >= 0 always.
struct EwmaChart {
    ChartStatistic statistic = ChartStatistic::log_variance;
    double lambda = 0.2;
    double theta0 = 0.0;
    double z = 0.0;
    double ucl = std::numeric_limits<double>::infinity();
    int r = 1;  // top-r charts only
    long t = 0;

    void reset() { z = 0.0; t = 0; }
    bool in_alarm() const { return z > ucl; }
};

struct ChartReading {
    std::optional<double> stat_a;
    std::optional<double> stat_v;
    std::optional<double> z_a;
    std::optional<double> z_v;
    bool a_alarm = false;
    bool v_alarm = false;
    bool alarm = false;
};

// Mean of the r largest |e|.
double top_r_mean(std::span<const double> residuals, int r);

// ln s^2 with the unbiased (n-1) sample variance. Zero variance raises
// DegenerateBatchError.
double log_variance(std::span<const double> residuals);

double digamma(double x);
double trigamma(double x);

// Gaussian-batch moments of ln s^2 for batch size n and variance sigma2:
//   mean = ln sigma2 - ln(n-1) + psi(k/2) + ln 2,  variance = psi_1(k/2),
// with k = n-1.
struct LogS2Moments {
    double mean;
    double variance;
};
LogS2Moments log_s2_moments(double sigma2, long n);

// One truncated-EWMA step; increments chart.t.
void ewma_update(EwmaChart& chart, double theta);

// Time-varying two-sided EWMA limit at step t; steady_state_ucl is the
// t -> infinity value.
double analytic_ucl(double theta0, double sigma_theta, double L, double lambda, long t);
double steady_state_ucl(double theta0, double sigma_theta, double L, double lambda);

// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::span<const double> values, double q);

// UCL as the empirical quantile of simulated baseline chart statistics
// (bootstrap protocol; the replay machinery lives with the callers).
double calibrate_ucl_bootstrap(std::span<const double> baseline_stats, double quantile);

// Computes the active statistics from the batch, updates whichever charts
// are present, and reports the OR-rule alarm.
ChartReading two_chart_step(EwmaChart* chart_a, EwmaChart* chart_v,
                            std::span<const double> residual_batch);

// ---------------------------------------------------------------------------
// Monte-Carlo control-limit calibration.
//
// A run's alarm statistic trajectory is reduced to its strictly increasing
// prefix maxima ("records"): the first passage time over any control limit
// is recoverable from the records alone, so one simulation pass supports
// bisection over the UCL. Runs with no record above the limit contribute
// the horizon as a lower bound on their run length.
// ---------------------------------------------------------------------------

struct RunRecords {
    std::vector<long> times;
    std::vector<double> values;

    void observe(long t, double value);
    long first_passage(double ucl, long horizon) const;
};

double arl_for_ucl(std::span<const RunRecords> runs, double ucl, long horizon);

// One in-control run of the monitored process: call the sink exactly once
// per step with that step's residual batch.
using BatchSink = std::function<void(std::span<const double>)>;
using InControlGenerator = std::function<void(RngStream&, long horizon, const BatchSink&)>;

// Scalar-statistic variant (used for Hotelling-type monitors).
using ScalarSink = std::function<void(double)>;
using ScalarGenerator = std::function<void(RngStream&, long horizon, const ScalarSink&)>;

std::vector<RunRecords> simulate_scalar_records(const ScalarGenerator& generator, long n_runs,
                                                long horizon, const RngStream& rng,
                                                int parallelism = 1);

// Bisection for the UCL whose empirical ARL over the recorded runs is
// closest to target; the bracket is established by doubling.
double calibrate_from_records(std::span<const RunRecords> runs, double target_arl0,
                              long horizon);

double calibrate_ucl_mc(const InControlGenerator& generator, const EwmaChart& chart_template,
                        double target_arl0, long n_runs, long horizon, const RngStream& rng,
                        int parallelism = 1);

// Joint OR-rule calibration of an (A, V) pair: each chart is calibrated
// individually, then a common multiplier on both limits is bisected until
// the joint ARL0 hits the target.
std::pair<double, double> calibrate_joint_ucl_mc(const InControlGenerator& generator,
                                                 const EwmaChart& a_template,
                                                 const EwmaChart& v_template,
                                                 double target_arl0, long n_runs, long horizon,
                                                 const RngStream& rng, int parallelism = 1);

nlohmann::json chart_to_json(const EwmaChart& chart);
EwmaChart chart_from_json(const nlohmann::json& doc);

}  // namespace pass::monitor
