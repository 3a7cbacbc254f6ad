#include "pass/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "pass/config.hpp"
#include "pass/manifest.hpp"
#include "pass/report.hpp"
#include "pass/simlab.hpp"
#include "pass/stream.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pass::cli {

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    out << content;
}

std::uint64_t seed_of(const json& config) {
    return config.contains("seed") ? config.at("seed").get<std::uint64_t>() : 0;
}

}  // namespace

int cmd_calibrate(const json& config, const CommandOptions& opts, std::ostream& log) {
    simlab::ExperimentConfig cfg = config::experiment_from_json(config);
    const auto resolved = cfg.resolved();
    const auto baseline = simlab::build_baseline(resolved, opts.parallelism);

    stream::CalibrationArtifact artifact;
    artifact.theta0_a = baseline.theta0_a;
    artifact.theta0_v = baseline.theta0_v;
    artifact.ucl_a = baseline.chart_a.ucl;
    artifact.ucl_v = baseline.chart_v.ucl;
    artifact.sigma_hat = baseline.sigma_hat;
    artifact.method =
        resolved.calibration.method == simlab::CalibrationMethod::mc ? "mc" : "bootstrap";
    artifact.seed = resolved.seed;
    artifact.n_runs = resolved.calibration.method == simlab::CalibrationMethod::mc
                          ? resolved.calibration.n_runs
                          : resolved.calibration.n_boot;

    fs::create_directories(opts.out_dir);
    const fs::path cal_path = fs::path(opts.out_dir) / "calibration.json";
    const fs::path model_path = fs::path(opts.out_dir) / "model.json";
    write_file(cal_path, stream::artifact_to_json(artifact).dump(2) + "\n");
    write_file(model_path, model_to_json(baseline.model).dump(2) + "\n");
    write_file(fs::path(opts.out_dir) / "manifest.json",
               manifest::run_manifest(config, resolved.seed,
                                      {cal_path.string(), model_path.string()})
                       .dump(2) +
                   "\n");

    log << "calibration written to " << cal_path.string() << "\n"
        << "  sigma_hat = " << baseline.sigma_hat << "\n";
    if (resolved.chart_a) {
        log << "  theta0_A = " << artifact.theta0_a << ", UCL_A = " << artifact.ucl_a << "\n";
    }
    if (resolved.chart_v) {
        log << "  theta0_V = " << artifact.theta0_v << ", UCL_V = " << artifact.ucl_v << "\n";
    }
    return 0;
}

int cmd_simulate(const json& config, const CommandOptions& opts, std::ostream& log) {
    simlab::ExperimentConfig base = config::experiment_from_json(config);

    std::vector<simlab::SweepCell> cells;
    if (config::has_sweep(config)) {
        cells = config::sweep_cells_from_json(config);
    } else {
        const auto resolved = base.resolved();
        cells.push_back(simlab::SweepCell{resolved.function, resolved.policy.kind,
                                          resolved.policy.epsilon, resolved.drift.volume_ratio,
                                          resolved.drift.delta_sigma, resolved.drift.kind});
    }

    fs::create_directories(opts.out_dir);
    const fs::path cells_dir = fs::path(opts.out_dir) / "cells";
    fs::create_directories(cells_dir);

    std::map<std::string, simlab::Baseline> baselines;
    std::vector<std::string> rows;
    std::vector<std::string> outputs;
    for (const auto& cell : cells) {
        const auto cfg = simlab::cell_config(base, cell).resolved();
        const json cell_doc = config::experiment_to_json(cfg);
        const std::string digest = manifest::config_digest(cell_doc, cfg.seed);
        const fs::path cell_path = cells_dir / ("cell_" + digest + ".json");

        json cell_result;
        if (fs::exists(cell_path)) {
            std::ifstream in(cell_path);
            in >> cell_result;
            log << "cell " << digest << ": cached\n";
        } else {
            // Baselines (model fit + calibration) are shared across cells
            // that differ only in drift parameters.
            simlab::SweepCell key_cell = cell;
            key_cell.pi_d = 0.0;
            key_cell.delta = 0.0;
            key_cell.kind = DriftKind::abrupt;
            const std::string key =
                config::experiment_to_json(simlab::cell_config(base, key_cell).resolved())
                    .dump();
            auto it = baselines.find(key);
            if (it == baselines.end()) {
                log << "calibrating baseline for " << benchmark(cfg.function).name << " ("
                    << (cell.policy == baselines::PolicyKind::pass
                            ? "pass"
                            : cell.policy == baselines::PolicyKind::random ? "random"
                                                                           : "score_adaptive")
                    << ", eps=" << cell.epsilon << ") ...\n";
                it = baselines.emplace(key, simlab::build_baseline(cfg, opts.parallelism))
                         .first;
            }
            const auto summary = simlab::run_experiment(cfg, it->second, opts.parallelism);
            cell_result["row"] = simlab::results_csv_row(simlab::SweepResult{cell, summary});
            cell_result["manifest"] = manifest::run_manifest(cell_doc, cfg.seed, {});
            write_file(cell_path, cell_result.dump(2) + "\n");
            if (cfg.collect_history) {
                // Replication 0 replayed with its own stream; the sampling
                // history goes next to the cell document.
                RngStream rep_rng = RngStream(cfg.seed).child(16);
                const auto run = simlab::run_once(cfg, it->second, rep_rng);
                std::ofstream hist(cells_dir / ("history_" + digest + ".csv"),
                                   std::ios::binary);
                simlab::write_history_csv(hist, run.sampling_history,
                                          benchmark(cfg.function).dim);
                outputs.push_back((cells_dir / ("history_" + digest + ".csv")).string());
            }
            log << "cell " << digest << ": ARL1 = " << summary.mean << " (SE " << summary.se
                << ")\n";
        }
        rows.push_back(cell_result.at("row").get<std::string>());
        outputs.push_back(cell_path.string());
    }

    std::string csv_text = simlab::results_csv_header() + "\n";
    for (const auto& row : rows) csv_text += row + "\n";
    const fs::path results_path = fs::path(opts.out_dir) / "results.csv";
    write_file(results_path, csv_text);
    outputs.push_back(results_path.string());
    write_file(fs::path(opts.out_dir) / "manifest.json",
               manifest::run_manifest(config, seed_of(config), outputs).dump(2) + "\n");
    log << "results written to " << results_path.string() << "\n";
    return 0;
}

int cmd_stream(const json& config, const StreamPaths& paths, const CommandOptions& opts,
               std::ostream& log) {
    const auto cfg = stream::stream_config_from_json(config);
    const auto artifact =
        stream::artifact_from_json(config::load_config_file(paths.calibration));

    std::optional<FittedModel> model;
    if (!paths.model.empty()) {
        model = model_from_json(config::load_config_file(paths.model));
    }

    std::ifstream data(paths.data);
    if (!data) throw ParseError("cannot open '" + paths.data + "'");
    const auto batches = stream::read_stream_csv(data);

    RngStream rng(seed_of(config));
    const auto result = stream::replay(cfg, artifact, model ? &*model : nullptr, batches, rng);

    fs::create_directories(opts.out_dir);
    {
        std::ofstream out(fs::path(opts.out_dir) / "chart_log.csv", std::ios::binary);
        stream::write_chart_log_csv(out, result.steps);
    }
    {
        std::ofstream out(fs::path(opts.out_dir) / "alarms.csv", std::ios::binary);
        stream::write_alarms_csv(out, result.alarms);
    }
    for (const auto& w : result.warnings) log << "warning: " << w << "\n";
    log << "batches: " << result.steps.size() << ", labels revealed: " << result.total_revealed
        << "\n";
    for (const auto& alarm : result.alarms) {
        log << "ALARM at t=" << alarm.t << " (chart " << alarm.chart << ")\n";
    }
    return 0;
}

int cmd_report(const std::string& results_path, const CommandOptions& opts, std::ostream& log) {
    std::ifstream in(results_path);
    if (!in) throw ParseError("cannot open '" + results_path + "'");
    auto rows = report::parse_results_csv(in);
    report::flag_best_epsilon(rows);

    fs::create_directories(opts.out_dir);
    const std::string table = report::summary_table(rows);
    write_file(fs::path(opts.out_dir) / "summary.txt", table);
    for (const auto& [name, content] : report::series_files(rows)) {
        write_file(fs::path(opts.out_dir) / name, content);
    }
    log << table;
    return 0;
}

}  // namespace pass::cli
