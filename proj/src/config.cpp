#include "pass/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

namespace pass::config {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key)) {
            throw ParseError("config: unknown key '" + key + "' in " + where);
        }
    }
}

baselines::PolicyKind policy_from_string(const std::string& s) {
    if (s == "pass") return baselines::PolicyKind::pass;
    if (s == "random") return baselines::PolicyKind::random;
    if (s == "score_adaptive") return baselines::PolicyKind::score_adaptive;
    throw ParseError("config: unknown policy '" + s + "'");
}

std::string policy_to_string(baselines::PolicyKind kind) {
    switch (kind) {
        case baselines::PolicyKind::pass:
            return "pass";
        case baselines::PolicyKind::random:
            return "random";
        case baselines::PolicyKind::score_adaptive:
            return "score_adaptive";
    }
    throw InvalidInput("unknown policy kind");
}

DriftKind kind_from_string(const std::string& s) {
    if (s == "abrupt") return DriftKind::abrupt;
    if (s == "incremental") return DriftKind::incremental;
    throw ParseError("config: unknown drift kind '" + s + "'");
}

void parse_charts(const json& arr, simlab::ExperimentConfig& cfg) {
    cfg.chart_a = false;
    cfg.chart_v = false;
    for (const auto& entry : arr) {
        const std::string name = entry.get<std::string>();
        if (name == "A") {
            cfg.chart_a = true;
        } else if (name == "V") {
            cfg.chart_v = true;
        } else {
            throw ParseError("config: unknown chart '" + name + "' (expected A or V)");
        }
    }
}

}  // namespace

simlab::ExperimentConfig experiment_from_json(const json& doc) {
    simlab::ExperimentConfig cfg;
    if (doc.contains("schema_version") && doc.at("schema_version").get<int>() != kSchemaVersion) {
        throw ParseError("config: unsupported schema_version");
    }
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (!doc.contains("experiment")) return cfg;

    const json& e = doc.at("experiment");
    reject_unknown_keys(e,
                        {"function", "policy", "epsilon", "budget_per_step", "grid_bins",
                         "drift", "lambda", "top_r", "charts", "arl0_target", "n_replications",
                         "phase1_batches", "d0_size", "model", "turbulence", "calibration",
                         "exploit_window", "horizon", "collect_history", "noise_sigma"},
                        "experiment");
    if (e.contains("function")) {
        cfg.function = benchmark_from_name(e.at("function").get<std::string>());
    }
    if (e.contains("policy")) cfg.policy.kind = policy_from_string(e.at("policy"));
    if (e.contains("epsilon")) cfg.policy.epsilon = e.at("epsilon").get<double>();
    if (e.contains("budget_per_step")) cfg.budget_per_step = e.at("budget_per_step").get<long>();
    if (e.contains("grid_bins")) {
        cfg.grid_bins = e.at("grid_bins").get<std::vector<std::size_t>>();
    }
    if (e.contains("drift")) {
        const json& d = e.at("drift");
        reject_unknown_keys(d, {"kind", "delta_sigma", "volume_ratio", "onset", "ramp_end"},
                            "experiment.drift");
        if (d.contains("kind")) cfg.drift.kind = kind_from_string(d.at("kind"));
        if (d.contains("delta_sigma")) cfg.drift.delta_sigma = d.at("delta_sigma").get<double>();
        if (d.contains("volume_ratio")) {
            cfg.drift.volume_ratio = d.at("volume_ratio").get<double>();
        }
        if (d.contains("onset")) cfg.drift.onset = d.at("onset").get<long>();
        if (d.contains("ramp_end")) cfg.drift.ramp_end = d.at("ramp_end").get<long>();
    }
    if (e.contains("lambda")) cfg.lambda = e.at("lambda").get<double>();
    if (e.contains("top_r")) cfg.top_r = e.at("top_r").get<int>();
    if (e.contains("charts")) parse_charts(e.at("charts"), cfg);
    if (e.contains("arl0_target")) cfg.arl0_target = e.at("arl0_target").get<double>();
    if (e.contains("n_replications")) cfg.n_replications = e.at("n_replications").get<long>();
    if (e.contains("phase1_batches")) cfg.phase1_batches = e.at("phase1_batches").get<long>();
    if (e.contains("d0_size")) cfg.d0_size = e.at("d0_size").get<long>();
    if (e.contains("model")) {
        const json& m = e.at("model");
        reject_unknown_keys(m, {"kind", "knots_per_axis", "spline_degree", "ridge_penalty"},
                            "experiment.model");
        if (m.contains("kind")) {
            const std::string kind = m.at("kind").get<std::string>();
            if (kind == "identity") {
                cfg.model.kind = FeatureKind::identity;
            } else if (kind == "spline_interactions") {
                cfg.model.kind = FeatureKind::spline_interactions;
            } else {
                throw ParseError("config: unknown model kind '" + kind + "'");
            }
        }
        if (m.contains("knots_per_axis")) cfg.model.knots_per_axis = m.at("knots_per_axis");
        if (m.contains("spline_degree")) cfg.model.spline_degree = m.at("spline_degree");
        if (m.contains("ridge_penalty")) cfg.model.ridge_penalty = m.at("ridge_penalty");
    }
    if (e.contains("turbulence")) {
        const json& t = e.at("turbulence");
        reject_unknown_keys(t, {"h0", "rho", "h_min", "h_max"}, "experiment.turbulence");
        if (t.contains("h0")) cfg.turbulence.h0 = t.at("h0").get<double>();
        if (t.contains("rho")) cfg.turbulence.rho = t.at("rho").get<double>();
        if (t.contains("h_min")) cfg.turbulence.h_min = t.at("h_min").get<double>();
        if (t.contains("h_max")) cfg.turbulence.h_max = t.at("h_max").get<double>();
    }
    if (e.contains("calibration")) {
        const json& c = e.at("calibration");
        reject_unknown_keys(c, {"method", "n_runs", "horizon", "quantile", "n_boot"},
                            "experiment.calibration");
        if (c.contains("method")) {
            const std::string method = c.at("method").get<std::string>();
            if (method == "mc") {
                cfg.calibration.method = simlab::CalibrationMethod::mc;
            } else if (method == "bootstrap") {
                cfg.calibration.method = simlab::CalibrationMethod::bootstrap;
            } else {
                throw ParseError("config: unknown calibration method '" + method + "'");
            }
        }
        if (c.contains("n_runs")) cfg.calibration.n_runs = c.at("n_runs").get<long>();
        if (c.contains("horizon")) cfg.calibration.horizon = c.at("horizon").get<long>();
        if (c.contains("quantile")) cfg.calibration.quantile = c.at("quantile").get<double>();
        if (c.contains("n_boot")) cfg.calibration.n_boot = c.at("n_boot").get<long>();
    }
    if (e.contains("exploit_window")) cfg.exploit_window = e.at("exploit_window").get<long>();
    if (e.contains("horizon")) cfg.horizon = e.at("horizon").get<long>();
    if (e.contains("collect_history")) cfg.collect_history = e.at("collect_history").get<bool>();
    if (e.contains("noise_sigma")) cfg.noise_sigma = e.at("noise_sigma").get<double>();
    return cfg;
}

json experiment_to_json(const simlab::ExperimentConfig& cfg) {
    json charts = json::array();
    if (cfg.chart_a) charts.push_back("A");
    if (cfg.chart_v) charts.push_back("V");
    json model;
    if (cfg.model.kind.has_value()) {
        model["kind"] = *cfg.model.kind == FeatureKind::identity ? "identity"
                                                                 : "spline_interactions";
    }
    model["knots_per_axis"] = cfg.model.knots_per_axis;
    model["spline_degree"] = cfg.model.spline_degree;
    model["ridge_penalty"] = cfg.model.ridge_penalty;
    json turbulence;
    if (cfg.turbulence.h0) turbulence["h0"] = *cfg.turbulence.h0;
    if (cfg.turbulence.h_min) turbulence["h_min"] = *cfg.turbulence.h_min;
    if (cfg.turbulence.h_max) turbulence["h_max"] = *cfg.turbulence.h_max;
    turbulence["rho"] = cfg.turbulence.rho;
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["seed"] = cfg.seed;
    doc["experiment"] = {
        {"function", std::string(benchmark(cfg.function).name)},
        {"policy", policy_to_string(cfg.policy.kind)},
        {"epsilon", cfg.policy.epsilon},
        {"budget_per_step", cfg.budget_per_step},
        {"grid_bins", cfg.grid_bins},
        {"drift",
         {{"kind", cfg.drift.kind == DriftKind::abrupt ? "abrupt" : "incremental"},
          {"delta_sigma", cfg.drift.delta_sigma},
          {"volume_ratio", cfg.drift.volume_ratio},
          {"onset", cfg.drift.onset},
          {"ramp_end", cfg.drift.ramp_end}}},
        {"lambda", cfg.lambda},
        {"top_r", cfg.top_r},
        {"charts", charts},
        {"arl0_target", cfg.arl0_target},
        {"n_replications", cfg.n_replications},
        {"phase1_batches", cfg.phase1_batches},
        {"d0_size", cfg.d0_size},
        {"model", model},
        {"turbulence", turbulence},
        {"calibration",
         {{"method",
           cfg.calibration.method == simlab::CalibrationMethod::mc ? "mc" : "bootstrap"},
          {"n_runs", cfg.calibration.n_runs},
          {"horizon", cfg.calibration.horizon},
          {"quantile", cfg.calibration.quantile},
          {"n_boot", cfg.calibration.n_boot}}},
        {"exploit_window", cfg.exploit_window},
        {"horizon", cfg.horizon},
        {"collect_history", cfg.collect_history},
    };
    if (cfg.noise_sigma) doc["experiment"]["noise_sigma"] = *cfg.noise_sigma;
    return doc;
}

bool has_sweep(const json& doc) { return doc.contains("sweep"); }

std::vector<simlab::SweepCell> sweep_cells_from_json(const json& doc) {
    if (!doc.contains("sweep")) return {};
    const json& s = doc.at("sweep");
    reject_unknown_keys(s, {"functions", "policies", "epsilons", "pi_ds", "deltas", "kinds"},
                        "sweep");
    const auto get_or = [&](const char* key, json fallback) -> json {
        return s.contains(key) ? s.at(key) : fallback;
    };
    const json functions = get_or("functions", json::array({"branin"}));
    const json policies = get_or("policies", json::array({"pass"}));
    const json epsilons = get_or("epsilons", json::array({0.2}));
    const json pi_ds = get_or("pi_ds", json::array({0.01}));
    const json deltas = get_or("deltas", json::array({1.0, 2.0, 3.0}));
    const json kinds = get_or("kinds", json::array({"abrupt"}));

    std::vector<simlab::SweepCell> cells;
    for (const auto& fn : functions) {
        for (const auto& policy : policies) {
            for (const auto& eps : epsilons) {
                for (const auto& pi : pi_ds) {
                    for (const auto& delta : deltas) {
                        for (const auto& kind : kinds) {
                            simlab::SweepCell cell;
                            cell.function = benchmark_from_name(fn.get<std::string>());
                            cell.policy = policy_from_string(policy.get<std::string>());
                            cell.epsilon = eps.get<double>();
                            cell.pi_d = pi.get<double>();
                            cell.delta = delta.get<double>();
                            cell.kind = kind_from_string(kind.get<std::string>());
                            cells.push_back(cell);
                        }
                    }
                }
            }
        }
    }
    return cells;
}

json preset_config(std::string_view name) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["seed"] = 0;
    if (name == "table1-subset" || name == "table2-subset") {
        doc["experiment"] = {
            {"function", "branin"},
            {"policy", "pass"},
            {"charts", json::array({"V"})},
            {"n_replications", 100},
            {"exploit_window", 600},
        };
        doc["sweep"] = {
            {"functions", json::array({"branin"})},
            {"policies", json::array({"pass"})},
            {"epsilons", json::array({0.2, 0.5})},
            {"pi_ds", json::array({0.01})},
            {"deltas", json::array({1.0, 2.0, 3.0})},
            {"kinds", json::array({name == "table1-subset" ? "abrupt" : "incremental"})},
        };
        return doc;
    }
    if (name == "branin-demo") {
        doc["experiment"] = {
            {"function", "branin"},
            {"policy", "pass"},
            {"epsilon", 0.5},
            {"charts", json::array({"V"})},
            {"n_replications", 20},
            {"exploit_window", 600},
            {"drift",
             {{"kind", "abrupt"}, {"delta_sigma", 3.0}, {"volume_ratio", 0.01}, {"onset", 30}}},
            {"calibration", {{"method", "mc"}, {"n_runs", 300}}},
        };
        return doc;
    }
    throw ParseError("unknown preset '" + std::string(name) +
                     "' (expected table1-subset, table2-subset, or branin-demo)");
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& err) {
        throw ParseError("config: " + path + ": " + err.what());
    }
    return doc;
}

}  // namespace pass::config
