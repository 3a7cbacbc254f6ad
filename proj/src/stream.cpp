#include "pass/stream.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "pass/baselines.hpp"
#include "pass/csv.hpp"
#include "pass/explore.hpp"
#include "pass/exploit.hpp"

namespace pass::stream {

std::vector<StreamBatch> read_stream_csv(std::istream& in) {
    std::string line;
    long line_number = 0;
    if (!std::getline(in, line)) throw ParseError("stream: empty file");
    ++line_number;
    const auto header = csv::split_line(line);
    if (header.size() < 3 || header.front() != "t") {
        throw ParseError("stream: header must be t,x1..xd,y[,prediction]");
    }
    bool has_prediction = header.back() == "prediction";
    const std::size_t dim = header.size() - 2 - (has_prediction ? 1 : 0);
    if (dim < 1) throw ParseError("stream: header must name at least one input axis");
    for (std::size_t j = 0; j < dim; ++j) {
        if (header[1 + j] != "x" + std::to_string(j + 1)) {
            throw ParseError("stream: expected column x" + std::to_string(j + 1) +
                             ", got '" + header[1 + j] + "'");
        }
    }
    if (header[1 + dim] != "y") {
        throw ParseError("stream: expected column y, got '" + header[1 + dim] + "'");
    }

    std::vector<StreamBatch> batches;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_number) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        StreamRecord rec;
        rec.t = csv::parse_long(fields[0], line_number);
        rec.x.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            rec.x[j] = csv::parse_double(fields[1 + j], line_number);
        }
        rec.y = csv::parse_double(fields[1 + dim], line_number);
        if (has_prediction) rec.prediction = csv::parse_double(fields[2 + dim], line_number);

        if (batches.empty() || batches.back().t != rec.t) {
            if (!batches.empty() && rec.t < batches.back().t) {
                throw ParseError("line " + std::to_string(line_number) +
                                 ": batch ids must be nondecreasing");
            }
            batches.push_back(StreamBatch{rec.t, {}});
        }
        batches.back().records.push_back(std::move(rec));
    }
    return batches;
}

void write_stream_csv(std::ostream& os, std::span<const StreamBatch> batches) {
    if (batches.empty() || batches.front().records.empty()) {
        throw InvalidInput("write_stream_csv: no records");
    }
    const std::size_t dim = batches.front().records.front().x.size();
    const bool has_prediction = batches.front().records.front().prediction.has_value();
    os << "t";
    for (std::size_t j = 1; j <= dim; ++j) os << ",x" << j;
    os << ",y";
    if (has_prediction) os << ",prediction";
    os << '\n';
    for (const auto& batch : batches) {
        for (const auto& rec : batch.records) {
            os << rec.t;
            for (double c : rec.x) os << ',' << csv::format_number(c);
            os << ',' << csv::format_number(rec.y);
            if (has_prediction) os << ',' << csv::format_number(*rec.prediction);
            os << '\n';
        }
    }
}

StreamConfig stream_config_from_json(const nlohmann::json& doc) {
    if (!doc.contains("stream")) throw ParseError("config: missing 'stream' section");
    const auto& s = doc.at("stream");
    StreamConfig cfg;
    cfg.domain = Domain(s.at("lower").get<std::vector<double>>(),
                        s.at("upper").get<std::vector<double>>());
    cfg.grid_bins = s.at("grid_bins").get<std::vector<std::size_t>>();
    if (s.contains("budget_per_step")) cfg.budget_per_step = s.at("budget_per_step").get<long>();
    if (s.contains("epsilon")) cfg.epsilon = s.at("epsilon").get<double>();
    if (s.contains("top_r")) cfg.top_r = s.at("top_r").get<int>();
    if (s.contains("lambda")) cfg.lambda = s.at("lambda").get<double>();
    if (s.contains("charts")) {
        cfg.chart_a = false;
        cfg.chart_v = false;
        for (const auto& c : s.at("charts")) {
            const std::string name = c.get<std::string>();
            if (name == "A") {
                cfg.chart_a = true;
            } else if (name == "V") {
                cfg.chart_v = true;
            } else {
                throw ParseError("config: unknown chart '" + name + "'");
            }
        }
    }
    if (s.contains("exploit_window")) cfg.exploit_window = s.at("exploit_window").get<long>();
    if (!cfg.chart_a && !cfg.chart_v) throw ParseError("config: stream needs a chart");
    if (cfg.budget_per_step < 1) throw ParseError("config: stream budget must be positive");
    return cfg;
}

nlohmann::json artifact_to_json(const CalibrationArtifact& artifact) {
    return nlohmann::json{
        {"theta0_A", artifact.theta0_a}, {"theta0_V", artifact.theta0_v},
        {"ucl_A", artifact.ucl_a},       {"ucl_V", artifact.ucl_v},
        {"sigma_hat", artifact.sigma_hat}, {"method", artifact.method},
        {"seed", artifact.seed},         {"n_runs", artifact.n_runs},
    };
}

CalibrationArtifact artifact_from_json(const nlohmann::json& doc) {
    // Non-finite limits (a chart that was not calibrated) serialize as null.
    const auto number_or_inf = [&doc](const char* key) {
        const auto& v = doc.at(key);
        return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
    };
    CalibrationArtifact artifact;
    artifact.theta0_a = doc.at("theta0_A").get<double>();
    artifact.theta0_v = doc.at("theta0_V").get<double>();
    artifact.ucl_a = number_or_inf("ucl_A");
    artifact.ucl_v = number_or_inf("ucl_V");
    artifact.sigma_hat = doc.at("sigma_hat").get<double>();
    artifact.method = doc.at("method").get<std::string>();
    artifact.seed = doc.at("seed").get<std::uint64_t>();
    artifact.n_runs = doc.at("n_runs").get<long>();
    return artifact;
}

namespace {

// Squared distance on min-max-scaled axes.
double scaled_dist2(const Domain& domain, const Point& a, const Point& b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = (a[j] - b[j]) / domain.width(j);
        acc += d * d;
    }
    return acc;
}

std::size_t nearest_unrevealed(const Domain& domain, const Point& proposal,
                               const std::vector<StreamRecord>& records,
                               const std::vector<bool>& revealed) {
    std::size_t best = records.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (revealed[i]) continue;
        const double d = scaled_dist2(domain, proposal, records[i].x);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

ReplayResult replay(const StreamConfig& config, const CalibrationArtifact& artifact,
                    const FittedModel* model, std::span<const StreamBatch> batches,
                    RngStream& rng) {
    const explore::GridSpec grid(config.domain, config.grid_bins);
    explore::LastVisitMap visits;
    exploit::ExploitationState history(static_cast<std::size_t>(config.exploit_window));
    std::optional<ModelEvaluator> eval;
    if (model != nullptr) eval.emplace(*model);

    monitor::EwmaChart chart_a;
    chart_a.statistic = monitor::ChartStatistic::top_r_abs_mean;
    chart_a.lambda = config.lambda;
    chart_a.theta0 = artifact.theta0_a;
    chart_a.ucl = artifact.ucl_a;
    chart_a.r = config.top_r;
    monitor::EwmaChart chart_v;
    chart_v.statistic = monitor::ChartStatistic::log_variance;
    chart_v.lambda = config.lambda;
    chart_v.theta0 = artifact.theta0_v;
    chart_v.ucl = artifact.ucl_v;

    // Turbulence for candidate matching: half the smallest cell width, held
    // constant (the proposals are snapped to candidates anyway).
    const double h = 0.5 * grid.min_cell_width();

    ReplayResult result;
    bool warned_budget = false;
    bool warned_r = false;
    long step = 0;  // internal 1-based batch ordinal for visit recency
    for (const StreamBatch& batch : batches) {
        ++step;
        const auto& records = batch.records;
        const auto batch_size = static_cast<long>(records.size());
        if (batch_size == 0) continue;
        for (const auto& rec : records) {
            if (!config.domain.contains(rec.x)) {
                throw InvalidInput("stream: batch " + std::to_string(batch.t) +
                                   " has a candidate outside the configured domain");
            }
            if (model == nullptr && !rec.prediction.has_value()) {
                throw InvalidInput(
                    "stream: no model supplied and record lacks a prediction column");
            }
        }

        const long take = std::min(config.budget_per_step, batch_size);
        if (take < config.budget_per_step && !warned_budget) {
            result.warnings.push_back("batch " + std::to_string(batch.t) + " has only " +
                                      std::to_string(batch_size) +
                                      " candidates; budget reduced to the batch size");
            warned_budget = true;
        }

        std::vector<bool> revealed(records.size(), false);
        std::vector<std::size_t> chosen;
        chosen.reserve(static_cast<std::size_t>(take));
        const auto reveal = [&](std::size_t idx) {
            revealed[idx] = true;
            chosen.push_back(idx);
            visits.stamp(explore::cell_of(grid, records[idx].x), step);
        };

        if (take == batch_size) {
            for (std::size_t i = 0; i < records.size(); ++i) reveal(i);
        } else {
            const auto [m_x, m_e] = baselines::split_budget(take, config.epsilon);
            // Exploitation proposals, snapped to the nearest unrevealed row.
            for (long k = 0; k < m_x; ++k) {
                Point proposal;
                if (history.empty()) {
                    proposal.resize(config.domain.dim());
                    for (std::size_t j = 0; j < proposal.size(); ++j) {
                        proposal[j] =
                            rng.uniform(config.domain.lower[j], config.domain.upper[j]);
                    }
                } else {
                    const std::size_t anchor = history.select(rng.uniform());
                    proposal = exploit::perturb(history.anchor(anchor), h, config.domain, rng);
                }
                reveal(nearest_unrevealed(config.domain, proposal, records, revealed));
            }
            // Exploration: accept-reject over the grid, proposals snapped to
            // unrevealed rows; the accepted cell and the landed cell both
            // stamp the visit map.
            const std::size_t n_cells = grid.cell_count();
            long accepted = 0;
            long rejected = 0;
            const long budget = 10000 * std::max<long>(m_e, 1);
            std::vector<std::size_t> coords;
            while (accepted < m_e) {
                const std::size_t cell = rng.uniform_below(n_cells);
                const double p =
                    explore::acceptance_prob(step - visits.last_visit(cell), step, n_cells);
                const double u = rng.uniform();
                if (u < p) {
                    grid.cell_coords(cell, coords);
                    Point proposal(config.domain.dim());
                    for (std::size_t j = 0; j < proposal.size(); ++j) {
                        const double w = grid.cell_width(j);
                        proposal[j] = config.domain.lower[j] +
                                      w * (static_cast<double>(coords[j]) + rng.uniform());
                    }
                    visits.stamp(cell, step);
                    reveal(nearest_unrevealed(config.domain, proposal, records, revealed));
                    ++accepted;
                } else if (++rejected > budget) {
                    throw ProgressFailureError("stream: exploration stalled at batch " +
                                               std::to_string(batch.t));
                }
            }
        }

        // Residuals in reveal order.
        std::vector<double> res;
        res.reserve(chosen.size());
        for (std::size_t idx : chosen) {
            const auto& rec = records[idx];
            const double prediction =
                rec.prediction.has_value() ? *rec.prediction : (*eval)(rec.x);
            res.push_back(rec.y - prediction);
        }

        const auto n_revealed = static_cast<long>(chosen.size());
        StepLog log;
        log.t = batch.t;
        log.revealed = n_revealed;
        log.ucl_a = chart_a.ucl;
        log.ucl_v = chart_v.ucl;
        bool alarm_a = false;
        bool alarm_v = false;
        if (config.chart_a) {
            int r_eff = config.top_r;
            if (r_eff > n_revealed) {
                r_eff = static_cast<int>(n_revealed);
                if (!warned_r) {
                    result.warnings.push_back("batch " + std::to_string(batch.t) +
                                              ": top_r clipped to the revealed count");
                    warned_r = true;
                }
            }
            const double a = monitor::top_r_mean(res, r_eff);
            monitor::ewma_update(chart_a, a);
            log.stat_a = a;
            log.z_a = chart_a.z;
            alarm_a = chart_a.in_alarm();
        }
        if (config.chart_v) {
            const double v = monitor::log_variance(res);
            monitor::ewma_update(chart_v, v);
            log.stat_v = v;
            log.z_v = chart_v.z;
            alarm_v = chart_v.in_alarm();
        }
        log.alarm = alarm_a || alarm_v;
        result.steps.push_back(log);
        result.total_revealed += n_revealed;

        if (log.alarm) {
            if (alarm_a) result.alarms.push_back(AlarmEvent{batch.t, "A"});
            if (alarm_v) result.alarms.push_back(AlarmEvent{batch.t, "V"});
            // Continue monitoring: reset the EWMA state, keep the labeled
            // history as of the previous batch.
            chart_a.reset();
            chart_v.reset();
        } else {
            for (std::size_t i = 0; i < chosen.size(); ++i) {
                history.add(records[chosen[i]].x, res[i]);
            }
        }
    }
    return result;
}

namespace {

std::string opt_field(const std::optional<double>& v) {
    return v.has_value() ? csv::format_number(*v) : std::string();
}

}  // namespace

void write_chart_log_csv(std::ostream& os, std::span<const StepLog> steps) {
    os << "t,A,V,z_A,z_V,ucl_A,ucl_V,alarm\n";
    for (const auto& s : steps) {
        os << s.t << ',' << opt_field(s.stat_a) << ',' << opt_field(s.stat_v) << ','
           << opt_field(s.z_a) << ',' << opt_field(s.z_v) << ','
           << csv::format_number(s.ucl_a) << ',' << csv::format_number(s.ucl_v) << ','
           << (s.alarm ? 1 : 0) << '\n';
    }
}

void write_alarms_csv(std::ostream& os, std::span<const AlarmEvent> alarms) {
    os << "t,chart\n";
    for (const auto& a : alarms) os << a.t << ',' << a.chart << '\n';
}

}  // namespace pass::stream
