#pragma once

#include <iosfwd>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pass/domain.hpp"
#include "pass/monitor.hpp"
#include "pass/predictor.hpp"
#include "pass/rng.hpp"

namespace pass::stream {

// One candidate row of a streaming batch. The label is present in the file
// but treated as hidden until the replay queries it; each row is revealed
// at most once.
struct StreamRecord {
    long t = 0;
    Point x;
    double y = 0.0;
    std::optional<double> prediction;
};

struct StreamBatch {
    long t = 0;
    std::vector<StreamRecord> records;
};

// Schema: header `t,x1..xd,y[,prediction]`; rows grouped by consecutive
// equal t with nondecreasing batch ids. Malformed rows raise ParseError
// with the line number.
std::vector<StreamBatch> read_stream_csv(std::istream& in);
void write_stream_csv(std::ostream& os, std::span<const StreamBatch> batches);

struct StreamConfig {
    Domain domain;
    std::vector<std::size_t> grid_bins;
    long budget_per_step = 8;
    double epsilon = 0.5;
    int top_r = 4;
    double lambda = 0.2;
    bool chart_a = true;
    bool chart_v = false;
    long exploit_window = 0;
};

StreamConfig stream_config_from_json(const nlohmann::json& doc);

// The calibrate command's output document.
struct CalibrationArtifact {
    double theta0_a = 0.0;
    double theta0_v = 0.0;
    double ucl_a = std::numeric_limits<double>::infinity();
    double ucl_v = std::numeric_limits<double>::infinity();
    double sigma_hat = 0.0;
    std::string method = "mc";
    std::uint64_t seed = 0;
    long n_runs = 0;
};

nlohmann::json artifact_to_json(const CalibrationArtifact& artifact);
CalibrationArtifact artifact_from_json(const nlohmann::json& doc);

struct StepLog {
    long t = 0;  // the batch id from the file
    std::optional<double> stat_a;
    std::optional<double> stat_v;
    std::optional<double> z_a;
    std::optional<double> z_v;
    double ucl_a = 0.0;
    double ucl_v = 0.0;
    bool alarm = false;
    long revealed = 0;
};

struct AlarmEvent {
    long t = 0;
    std::string chart;  // "A" or "V"
};

struct ReplayResult {
    std::vector<StepLog> steps;
    std::vector<AlarmEvent> alarms;
    long total_revealed = 0;
    std::vector<std::string> warnings;
};

// Budget-constrained replay: per batch, PASS selection over the candidate
// rows (exploitation anchors from previously revealed labels, exploration
// proposals mapped to the nearest unrevealed candidate on min-max-scaled
// axes), exactly min(budget, batch size) labels revealed, charts updated,
// alarms logged. Charts reset and continue after an alarm. `model` may be
// null when every record carries a prediction.
ReplayResult replay(const StreamConfig& config, const CalibrationArtifact& artifact,
                    const FittedModel* model, std::span<const StreamBatch> batches,
                    RngStream& rng);

void write_chart_log_csv(std::ostream& os, std::span<const StepLog> steps);
void write_alarms_csv(std::ostream& os, std::span<const AlarmEvent> alarms);

}  // namespace pass::stream
