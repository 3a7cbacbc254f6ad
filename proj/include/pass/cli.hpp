#pragma once

#include <nlohmann/json_fwd.hpp>
#include <ostream>
#include <string>

namespace pass::cli {

struct CommandOptions {
    std::string out_dir = ".";
    int parallelism = 1;
};

// Fit the baseline, calibrate control limits, and write calibration.json,
// model.json, and manifest.json into the output directory.
int cmd_calibrate(const nlohmann::json& config, const CommandOptions& opts, std::ostream& log);

// Run the configured sweep (or the single configured cell) and write
// results.csv plus per-cell result documents. Existing cell documents are
// reused, so a rerun with the same config and seed recomputes nothing and
// reproduces results.csv byte for byte.
int cmd_simulate(const nlohmann::json& config, const CommandOptions& opts, std::ostream& log);

struct StreamPaths {
    std::string data;
    std::string calibration;
    std::string model;  // optional; empty when records carry predictions
};

// Replay a stream CSV under the labeling budget; writes chart_log.csv and
// alarms.csv.
int cmd_stream(const nlohmann::json& config, const StreamPaths& paths,
               const CommandOptions& opts, std::ostream& log);

// Summarize a results CSV: summary.txt plus per-series ARL-vs-delta files.
int cmd_report(const std::string& results_path, const CommandOptions& opts, std::ostream& log);

}  // namespace pass::cli
