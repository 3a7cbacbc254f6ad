#include "pass/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <string>

#include "pass/parallel.hpp"

namespace pass::monitor {

double top_r_mean(std::span<const double> residuals, int r) {
    const auto n = static_cast<long>(residuals.size());
    if (r < 1 || r > n) {
        throw InvalidInput("top_r_mean: r must lie in [1, batch size], got r=" +
                           std::to_string(r) + " for n=" + std::to_string(n));
    }
    std::vector<double> abs_vals(residuals.size());
    std::transform(residuals.begin(), residuals.end(), abs_vals.begin(),
                   [](double e) { return std::abs(e); });
    std::nth_element(abs_vals.begin(), abs_vals.begin() + (r - 1), abs_vals.end(),
                     std::greater<>());
    const double sum = std::accumulate(abs_vals.begin(), abs_vals.begin() + r, 0.0);
    return sum / static_cast<double>(r);
}

double log_variance(std::span<const double> residuals) {
    const auto n = static_cast<long>(residuals.size());
    if (n < 2) throw InvalidInput("log_variance: need at least two residuals");
    const double mean =
        std::accumulate(residuals.begin(), residuals.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double e : residuals) {
        const double d = e - mean;
        ss += d * d;
    }
    const double s2 = ss / static_cast<double>(n - 1);
    if (!(s2 > 0.0)) {
        throw DegenerateBatchError("log_variance: constant residual batch (zero variance)");
    }
    return std::log(s2);
}

// Upward recurrence to x >= 10, then the asymptotic series. Checked against
// psi(1) = -gamma and psi_1(1) = pi^2/6.
double digamma(double x) {
    if (!(x > 0.0)) throw InvalidInput("digamma: argument must be positive");
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = std::log(x) - 0.5 * inv;
    series -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return acc + series;
}

double trigamma(double x) {
    if (!(x > 0.0)) throw InvalidInput("trigamma: argument must be positive");
    double acc = 0.0;
    while (x < 10.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series =
        inv * (1.0 + 0.5 * inv +
               inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
    return acc + series;
}

LogS2Moments log_s2_moments(double sigma2, long n) {
    if (!(sigma2 > 0.0)) throw InvalidInput("log_s2_moments: sigma2 must be positive");
    if (n < 2) throw InvalidInput("log_s2_moments: n must be at least 2");
    const double half_k = 0.5 * static_cast<double>(n - 1);
    LogS2Moments m;
    m.mean = std::log(sigma2) - std::log(static_cast<double>(n - 1)) + digamma(half_k) +
             std::log(2.0);
    m.variance = trigamma(half_k);
    return m;
}

void ewma_update(EwmaChart& chart, double theta) {
    chart.z = chart.lambda * std::max(0.0, theta - chart.theta0) +
              (1.0 - chart.lambda) * chart.z;
    ++chart.t;
}

double analytic_ucl(double theta0, double sigma_theta, double L, double lambda, long t) {
    const double decay = std::pow(1.0 - lambda, 2.0 * static_cast<double>(t));
    return theta0 + L * sigma_theta * std::sqrt(lambda / (2.0 - lambda) * (1.0 - decay));
}

double steady_state_ucl(double theta0, double sigma_theta, double L, double lambda) {
    return theta0 + L * sigma_theta * std::sqrt(lambda / (2.0 - lambda));
}

double empirical_quantile(std::span<const double> values, double q) {
    if (values.empty()) throw InvalidInput("empirical_quantile: empty sample");
    if (!(q > 0.0 && q < 1.0)) throw InvalidInput("empirical_quantile: q must lie in (0, 1)");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double calibrate_ucl_bootstrap(std::span<const double> baseline_stats, double quantile) {
    return empirical_quantile(baseline_stats, quantile);
}

ChartReading two_chart_step(EwmaChart* chart_a, EwmaChart* chart_v,
                            std::span<const double> residual_batch) {
    ChartReading reading;
    if (chart_a != nullptr) {
        const double a = top_r_mean(residual_batch, chart_a->r);
        ewma_update(*chart_a, a);
        reading.stat_a = a;
        reading.z_a = chart_a->z;
        reading.a_alarm = chart_a->in_alarm();
    }
    if (chart_v != nullptr) {
        const double v = log_variance(residual_batch);
        ewma_update(*chart_v, v);
        reading.stat_v = v;
        reading.z_v = chart_v->z;
        reading.v_alarm = chart_v->in_alarm();
    }
    reading.alarm = reading.a_alarm || reading.v_alarm;
    return reading;
}

void RunRecords::observe(long t, double value) {
    if (values.empty() || value > values.back()) {
        times.push_back(t);
        values.push_back(value);
    }
}

long RunRecords::first_passage(double ucl, long horizon) const {
    const auto it = std::upper_bound(values.begin(), values.end(), ucl);
    if (it == values.end()) return horizon;
    return times[static_cast<std::size_t>(it - values.begin())];
}

double arl_for_ucl(std::span<const RunRecords> runs, double ucl, long horizon) {
    if (runs.empty()) throw InvalidInput("arl_for_ucl: no runs");
    double total = 0.0;
    for (const RunRecords& run : runs) {
        total += static_cast<double>(run.first_passage(ucl, horizon));
    }
    return total / static_cast<double>(runs.size());
}

std::vector<RunRecords> simulate_scalar_records(const ScalarGenerator& generator, long n_runs,
                                                long horizon, const RngStream& rng,
                                                int parallelism) {
    std::vector<RunRecords> runs(static_cast<std::size_t>(n_runs));
    parallel_for(n_runs, parallelism, [&](long i) {
        RngStream run_rng = rng.child(static_cast<std::uint64_t>(i));
        RunRecords& rec = runs[static_cast<std::size_t>(i)];
        long t = 0;
        generator(run_rng, horizon, [&](double value) { rec.observe(++t, value); });
    });
    return runs;
}

double calibrate_from_records(std::span<const RunRecords> runs, double target_arl0,
                              long horizon) {
    if (!(target_arl0 > 1.0)) {
        throw InvalidInput("calibrate_from_records: target ARL0 must exceed 1");
    }
    const double arl_at_zero = arl_for_ucl(runs, 0.0, horizon);
    if (arl_at_zero >= target_arl0) {
        throw CalibrationFailureError(
            "calibration: in-control statistic is too quiet; ARL at a zero limit is already " +
            std::to_string(arl_at_zero));
    }

    // Seed the doubling from the smallest recorded positive value.
    double hi = std::numeric_limits<double>::infinity();
    for (const RunRecords& run : runs) {
        if (!run.values.empty()) hi = std::min(hi, run.values.front());
    }
    if (!std::isfinite(hi) || hi <= 0.0) hi = 1e-12;

    int doublings = 0;
    while (arl_for_ucl(runs, hi, horizon) < target_arl0) {
        hi *= 2.0;
        if (++doublings > 60) {
            throw CalibrationFailureError(
                "calibration: no UCL bracket found within 60 doublings (horizon too short "
                "or statistic unbounded)");
        }
    }

    double lo = 0.0;  // invariant: arl(lo) < target <= arl(hi)
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (arl_for_ucl(runs, mid, horizon) < target_arl0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double arl_lo = arl_for_ucl(runs, lo, horizon);
    const double arl_hi = arl_for_ucl(runs, hi, horizon);
    return std::abs(arl_lo - target_arl0) < std::abs(arl_hi - target_arl0) ? lo : hi;
}

namespace {

double chart_statistic(const EwmaChart& chart, std::span<const double> batch) {
    return chart.statistic == ChartStatistic::top_r_abs_mean ? top_r_mean(batch, chart.r)
                                                             : log_variance(batch);
}

// One record set per template, all charts driven by the same batches.
std::vector<std::vector<RunRecords>> simulate_chart_records(
    const InControlGenerator& generator, std::span<const EwmaChart> templates, long n_runs,
    long horizon, const RngStream& rng, int parallelism) {
    std::vector<std::vector<RunRecords>> all(templates.size(),
                                             std::vector<RunRecords>(static_cast<std::size_t>(n_runs)));
    parallel_for(n_runs, parallelism, [&](long i) {
        RngStream run_rng = rng.child(static_cast<std::uint64_t>(i));
        std::vector<EwmaChart> charts(templates.begin(), templates.end());
        for (auto& c : charts) c.reset();
        long t = 0;
        generator(run_rng, horizon, [&](std::span<const double> batch) {
            ++t;
            for (std::size_t c = 0; c < charts.size(); ++c) {
                ewma_update(charts[c], chart_statistic(charts[c], batch));
                all[c][static_cast<std::size_t>(i)].observe(t, charts[c].z);
            }
        });
    });
    return all;
}

void check_calibration_args(double target_arl0, long n_runs, long horizon) {
    if (n_runs < 100) throw InvalidInput("calibration: need at least 100 runs");
    if (horizon < 10 * static_cast<long>(target_arl0)) {
        throw InvalidInput("calibration: horizon must be at least 10 * target ARL0");
    }
}

}  // namespace

double calibrate_ucl_mc(const InControlGenerator& generator, const EwmaChart& chart_template,
                        double target_arl0, long n_runs, long horizon, const RngStream& rng,
                        int parallelism) {
    check_calibration_args(target_arl0, n_runs, horizon);
    const auto records = simulate_chart_records(generator, {&chart_template, 1}, n_runs,
                                                horizon, rng, parallelism);
    return calibrate_from_records(records[0], target_arl0, horizon);
}

std::pair<double, double> calibrate_joint_ucl_mc(const InControlGenerator& generator,
                                                 const EwmaChart& a_template,
                                                 const EwmaChart& v_template,
                                                 double target_arl0, long n_runs, long horizon,
                                                 const RngStream& rng, int parallelism) {
    check_calibration_args(target_arl0, n_runs, horizon);
    const EwmaChart templates[2] = {a_template, v_template};
    const auto records =
        simulate_chart_records(generator, {templates, 2}, n_runs, horizon, rng, parallelism);
    const double ucl_a = calibrate_from_records(records[0], target_arl0, horizon);
    const double ucl_v = calibrate_from_records(records[1], target_arl0, horizon);

    const auto joint_arl = [&](double scale) {
        double total = 0.0;
        for (long i = 0; i < n_runs; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            total += static_cast<double>(
                std::min(records[0][idx].first_passage(scale * ucl_a, horizon),
                         records[1][idx].first_passage(scale * ucl_v, horizon)));
        }
        return total / static_cast<double>(n_runs);
    };

    double hi = 1.0;
    int doublings = 0;
    while (joint_arl(hi) < target_arl0) {
        hi *= 2.0;
        if (++doublings > 60) {
            throw CalibrationFailureError("joint calibration: no multiplier bracket found");
        }
    }
    double lo = 0.0;
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (joint_arl(mid) < target_arl0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double scale =
        std::abs(joint_arl(lo) - target_arl0) < std::abs(joint_arl(hi) - target_arl0) ? lo : hi;
    return {scale * ucl_a, scale * ucl_v};
}

nlohmann::json chart_to_json(const EwmaChart& chart) {
    return nlohmann::json{
        {"statistic",
         chart.statistic == ChartStatistic::top_r_abs_mean ? "top_r_abs_mean" : "log_variance"},
        {"lambda", chart.lambda},
        {"theta0", chart.theta0},
        {"z", chart.z},
        {"ucl", chart.ucl},
        {"r", chart.r},
        {"t", chart.t},
    };
}

EwmaChart chart_from_json(const nlohmann::json& doc) {
    EwmaChart chart;
    const std::string stat = doc.at("statistic").get<std::string>();
    if (stat == "top_r_abs_mean") {
        chart.statistic = ChartStatistic::top_r_abs_mean;
    } else if (stat == "log_variance") {
        chart.statistic = ChartStatistic::log_variance;
    } else {
        throw ParseError("chart: unknown statistic '" + stat + "'");
    }
    chart.lambda = doc.at("lambda").get<double>();
    chart.theta0 = doc.at("theta0").get<double>();
    chart.z = doc.at("z").get<double>();
    chart.ucl = doc.at("ucl").get<double>();
    chart.r = doc.at("r").get<int>();
    chart.t = doc.at("t").get<long>();
    return chart;
}

}  // namespace pass::monitor
