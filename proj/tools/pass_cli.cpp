#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "pass/cli.hpp"
#include "pass/config.hpp"
#include "pass/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int parallelism = 0;
};

nlohmann::json load_config(const CommonArgs& args) {
    nlohmann::json doc;
    if (!args.preset.empty()) {
        doc = pass::config::preset_config(args.preset);
    } else if (!args.config_path.empty()) {
        doc = pass::config::load_config_file(args.config_path);
    } else {
        throw pass::ParseError("either --config or --preset is required");
    }
    if (args.seed_given) doc["seed"] = args.seed;
    if (!doc.contains("seed")) doc["seed"] = 0;
    return doc;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool need_config = true) {
    if (need_config) {
        cmd->add_option("--config", args.config_path, "config JSON path");
        cmd->add_option("--preset", args.preset,
                        "built-in config: table1-subset, table2-subset, branin-demo");
    }
    cmd->add_option("--seed", args.seed, "master seed (default 0)")
        ->each([&args](const std::string&) { args.seed_given = true; });
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--parallelism", args.parallelism,
                    "worker threads (0 = hardware concurrency)");
}

pass::cli::CommandOptions options_of(const CommonArgs& args) {
    return pass::cli::CommandOptions{args.out_dir, args.parallelism};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive-sampling drift monitor"};
    app.require_subcommand(1);

    CommonArgs calibrate_args, simulate_args, stream_args, report_args;
    pass::cli::StreamPaths stream_paths;
    std::string results_path;

    auto* calibrate = app.add_subcommand("calibrate", "fit the baseline and calibrate UCLs");
    add_common(calibrate, calibrate_args);

    auto* simulate = app.add_subcommand("simulate", "run experiment sweeps");
    add_common(simulate, simulate_args);

    auto* stream_cmd = app.add_subcommand("stream", "replay a CSV stream under budget");
    add_common(stream_cmd, stream_args);
    stream_cmd->add_option("--data", stream_paths.data, "stream CSV path")->required();
    stream_cmd->add_option("--calibration", stream_paths.calibration,
                           "calibration artifact path")
        ->required();
    stream_cmd->add_option("--model", stream_paths.model, "exported model JSON path");

    auto* report = app.add_subcommand("report", "summarize a results CSV");
    add_common(report, report_args, false);
    report->add_option("--results", results_path, "results CSV path")->required();

    try {
        app.parse(argc, argv);
        if (calibrate->parsed()) {
            return pass::cli::cmd_calibrate(load_config(calibrate_args),
                                            options_of(calibrate_args), std::cout);
        }
        if (simulate->parsed()) {
            return pass::cli::cmd_simulate(load_config(simulate_args),
                                           options_of(simulate_args), std::cout);
        }
        if (stream_cmd->parsed()) {
            return pass::cli::cmd_stream(load_config(stream_args), stream_paths,
                                         options_of(stream_args), std::cout);
        }
        if (report->parsed()) {
            return pass::cli::cmd_report(results_path, options_of(report_args), std::cout);
        }
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
