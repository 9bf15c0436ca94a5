#pragma once

// Command-line front end: `run`, `experiment`, `analyze`.
// Exit codes: 0 success, 1 runtime failure, 2 usage or input error.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "allostasis/config_file.hpp"
#include "allostasis/engine.hpp"
#include "allostasis/experiment.hpp"
#include "allostasis/io.hpp"
#include "allostasis/metrics.hpp"

namespace allostasis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline std::string trace_header() {
    return io::csv_line({"step", "agent_id", "energy", "socialness", "I_energy", "theta_s", "C", "O", "stressed",
                         "alive", "behaviour", "x", "y"});
}

inline std::string trace_line(const StepRecord& r) {
    return io::csv_line({std::to_string(r.step), std::to_string(r.agent_id), io::format_number(r.energy),
                         io::format_number(r.socialness), io::format_number(r.i_energy),
                         io::format_number(r.theta_s), io::format_number(r.C), io::format_number(r.O),
                         r.stressed ? "1" : "0", r.alive ? "1" : "0", std::string(to_string(r.behaviour)),
                         io::format_number(r.x), io::format_number(r.y)});
}

// Config values keep their JSON type: enums as strings, flags as booleans,
// everything else as numbers.
inline Json config_json(const SimConfig& config) {
    SimConfig c = config;
    Json out;
    visit_config_fields(c, [&](std::string_view key, auto&& get, auto&&) {
        const std::string v = get();
        if (key == "world_type" || key == "regulation_type") {
            out[std::string(key)] = v;
        } else if (v == "true" || v == "false") {
            out[std::string(key)] = v == "true";
        } else {
            std::int64_t i = 0;
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
            if (ec == std::errc{} && p == v.data() + v.size()) {
                out[std::string(key)] = i;
            } else {
                double d = 0.0;
                std::from_chars(v.data(), v.data() + v.size(), d);
                out[std::string(key)] = d;
            }
        }
    });
    return out;
}

inline Json run_summary_json(const RunSummary& s) {
    Json agents = Json::array();
    for (const auto& a : s.agents) {
        const auto m = agent_metrics(s, a);
        auto opt = [](const std::optional<double>& v) -> Json { return v ? detail::json_number(*v) : Json(nullptr); };
        agents.push_back({{"id", a.id},
                          {"rank", a.rank},
                          {"alive", a.alive},
                          {"death_step", a.death_step ? Json(*a.death_step) : Json(nullptr)},
                          {"life_length", m.life_length},
                          {"mean_deviation", opt(m.mean_deviation)},
                          {"mean_entropy_I", opt(m.mean_entropy_I)},
                          {"theta_mean", opt(m.theta_mean)},
                          {"theta_sd", opt(m.theta_sd)},
                          {"grooms", m.grooms},
                          {"aggressions", m.aggressions},
                          {"eats", m.eats}});
    }
    return {{"config", config_json(s.config)},
            {"steps", s.steps},
            {"record_stride", s.record_stride},
            {"agents", agents}};
}

struct RunOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    Step stride = 1;
};

inline int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
    SimConfig cfg;
    try {
        cfg = load_config(o.config_path);
        if (o.seed) cfg.seed = *o.seed;
        if (o.stride < 1) throw ConfigError("--stride must be >= 1");
    } catch (const ConfigError& e) {
        err << "error: " << o.config_path << ": " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        const std::filesystem::path dir(o.out_dir);
        std::filesystem::create_directories(dir);
        const auto trace_path = (dir / "trace.csv").string();
        std::ofstream trace(trace_path, std::ios::binary | std::ios::trunc);
        if (!trace) throw io::IoError("cannot write '" + trace_path + "'");
        trace << trace_header();
        const auto summary = run_to_completion(cfg, o.stride, [&](const std::vector<StepRecord>& records) {
            if (records.empty() || records.front().step % o.stride != 0) return;
            for (const auto& r : records) trace << trace_line(r);
        });
        trace.close();
        if (!trace) throw io::IoError("write failed for '" + trace_path + "'");
        io::write_file((dir / "summary.json").string(), run_summary_json(summary).dump(2) + "\n");
        out << "agent_id,life_length\n";
        for (const auto& a : summary.agents) out << a.id << ',' << life_length(a, summary.steps) << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

struct ExperimentOptions {
    std::string plan_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<Step> stride;
    unsigned parallel = 1;
};

inline int cmd_experiment(const ExperimentOptions& o, std::ostream& out, std::ostream& err) {
    ExperimentPlan plan;
    try {
        plan = load_plan(o.plan_path);
        if (o.seed) plan.base_seed = *o.seed;
        if (o.out_dir) plan.output_dir = *o.out_dir;
        if (o.stride) {
            if (*o.stride < 1) throw ConfigError("--stride must be >= 1");
            plan.record_stride = *o.stride;
        }
    } catch (const ConfigError& e) {
        err << "error: " << o.plan_path << ": " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        const auto result = run_experiment(plan, std::max(1u, o.parallel));
        write_experiment(plan.output_dir, result);
        std::size_t failed = 0;
        for (const auto& r : result.runs)
            if (r.error) {
                ++failed;
                err << "run failed: " << to_string(r.regulation) << '/' << to_string(r.world) << " run " << r.run
                    << " seed " << r.seed << ": " << *r.error << '\n';
            }
        out << result.runs.size() << " runs, " << failed << " failed; outputs in " << plan.output_dir << '\n';
        return failed == 0 ? kExitOk : kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

struct AnalyzeOptions {
    std::string cells_path;
    std::optional<std::string> out_dir;
    AnalysisUnit unit = AnalysisUnit::Run;
};

// curves.csv next to cells.csv, if present, feeds the curve figures.
inline int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
    std::vector<CellRecord> rows;
    std::optional<std::vector<CurveRecord>> curves;
    const std::filesystem::path cells(o.cells_path);
    try {
        rows = parse_cells_csv(read_text_file(o.cells_path));
        const auto curves_path = cells.parent_path() / "curves.csv";
        if (std::filesystem::exists(curves_path)) curves = parse_curves_csv(read_text_file(curves_path.string()));
    } catch (const std::exception& e) {
        err << "error: " << o.cells_path << ": " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        const std::filesystem::path dir = o.out_dir ? std::filesystem::path(*o.out_dir) : cells.parent_path();
        write_analysis(dir.empty() ? std::filesystem::path(".") : dir, rows, curves ? &*curves : nullptr, o.unit);
        out << "analysed " << rows.size() << " rows\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Homeostatic, allostatic and social-allostatic animat simulator"};
    app.require_subcommand(1);

    RunOptions run_o;
    std::uint64_t run_seed = 0;
    auto* run = app.add_subcommand("run", "Execute one run; writes trace.csv and summary.json");
    run->add_option("config", run_o.config_path, "Run config file")->required()->check(CLI::ExistingFile);
    auto* run_seed_opt = run->add_option("--seed", run_seed, "Override the config seed");
    run->add_option("--out", run_o.out_dir, "Output directory")->capture_default_str();
    run->add_option("--stride", run_o.stride, "Record every N-th tick")->check(CLI::PositiveNumber);

    ExperimentOptions exp_o;
    std::uint64_t exp_seed = 0;
    std::string exp_out;
    Step exp_stride = 1;
    auto* exp = app.add_subcommand("experiment", "Execute every cell x run of a plan");
    exp->add_option("plan", exp_o.plan_path, "Experiment plan file")->required()->check(CLI::ExistingFile);
    auto* exp_seed_opt = exp->add_option("--seed", exp_seed, "Override base_seed");
    auto* exp_out_opt = exp->add_option("--out", exp_out, "Override output_dir");
    auto* exp_stride_opt = exp->add_option("--stride", exp_stride, "Override record_stride")->check(CLI::PositiveNumber);
    exp->add_option("--parallel", exp_o.parallel, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    AnalyzeOptions an_o;
    std::string unit = "run";
    std::string an_out;
    auto* an = app.add_subcommand("analyze", "Recompute reports from cells.csv");
    an->add_option("cells", an_o.cells_path, "cells.csv from an experiment")->required()->check(CLI::ExistingFile);
    auto* an_out_opt = an->add_option("--out", an_out, "Output directory (default: beside cells.csv)");
    an->add_option("--unit", unit, "Unit of analysis")->check(CLI::IsMember({"run", "agent"}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (run->parsed()) {
        if (*run_seed_opt) run_o.seed = run_seed;
        return cmd_run(run_o, out, err);
    }
    if (exp->parsed()) {
        if (*exp_seed_opt) exp_o.seed = exp_seed;
        if (*exp_out_opt) exp_o.out_dir = exp_out;
        if (*exp_stride_opt) exp_o.stride = exp_stride;
        return cmd_experiment(exp_o, out, err);
    }
    if (*an_out_opt) an_o.out_dir = an_out;
    an_o.unit = *parse_unit(unit);
    return cmd_analyze(an_o, out, err);
}

}  // namespace allostasis::cli
