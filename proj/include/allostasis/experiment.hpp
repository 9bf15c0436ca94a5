#pragma once

// Batch experiments over regulation x world cells, per-run metrics, and the
// reports derived from them. Runs execute on a worker pool; results are
// merged in canonical (world, regulation, run, agent) order so every output
// byte is independent of the worker count.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "allostasis/config_file.hpp"
#include "allostasis/engine.hpp"
#include "allostasis/io.hpp"
#include "allostasis/metrics.hpp"
#include "allostasis/rng.hpp"
#include "allostasis/stats.hpp"

namespace allostasis {

using Json = nlohmann::ordered_json;

enum class AnalysisUnit : std::uint8_t { Run, Agent };

constexpr std::string_view to_string(AnalysisUnit u) noexcept { return u == AnalysisUnit::Run ? "run" : "agent"; }

inline std::optional<AnalysisUnit> parse_unit(std::string_view s) noexcept {
    if (s == "run") return AnalysisUnit::Run;
    if (s == "agent") return AnalysisUnit::Agent;
    return std::nullopt;
}

struct ExperimentPlan {
    std::vector<RegulationType> regulation_types{kAllRegulationTypes.begin(), kAllRegulationTypes.end()};
    std::vector<WorldType> world_types{kAllWorldTypes.begin(), kAllWorldTypes.end()};
    int runs_per_cell = 24;
    Step steps = 30000;
    std::uint64_t base_seed = 1;
    Step record_stride = 1;
    std::string output_dir = "out";
    AnalysisUnit unit = AnalysisUnit::Run;
    SimConfig base{};  // world, regulation, seed and steps are overwritten per run
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const auto item = trim(s.substr(pos, comma == std::string_view::npos ? s.size() - pos : comma - pos));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

template <typename E, typename Parse>
std::vector<E> parse_enum_list(const KeyValueEntry& e, Parse parse) {
    std::vector<E> out;
    for (const auto& item : split_list(e.value)) {
        auto v = parse(item);
        if (!v) throw ConfigError("line " + std::to_string(e.line) + ": unknown value '" + item + "' for '" + e.key + "'");
        if (std::find(out.begin(), out.end(), *v) != out.end())
            throw ConfigError("line " + std::to_string(e.line) + ": duplicate value '" + item + "' for '" + e.key + "'");
        out.push_back(*v);
    }
    if (out.empty()) throw ConfigError("line " + std::to_string(e.line) + ": '" + e.key + "' is empty");
    return out;
}

}  // namespace detail

// Plan keys: regulation_types, world_types, runs_per_cell, steps, base_seed,
// record_stride, output_dir, analysis_unit, config (a run config file,
// resolved against base_dir). Any run-config key is accepted as an override
// applied after `config`.
inline ExperimentPlan parse_plan(std::string_view text, const std::filesystem::path& base_dir = {}) {
    ExperimentPlan plan;
    const auto entries = parse_key_values(text);
    for (const auto& e : entries)
        if (e.key == "config") {
            auto p = std::filesystem::path(e.value);
            if (p.is_relative()) p = base_dir / p;
            plan.base = load_config(p.string());
        }
    for (const auto& e : entries) {
        if (e.key == "config") continue;
        if (e.key == "regulation_types") plan.regulation_types = detail::parse_enum_list<RegulationType>(e, parse_regulation);
        else if (e.key == "world_types") plan.world_types = detail::parse_enum_list<WorldType>(e, parse_world);
        else if (e.key == "runs_per_cell") plan.runs_per_cell = detail::parse_number<int>(e);
        else if (e.key == "steps") plan.steps = detail::parse_number<Step>(e);
        else if (e.key == "base_seed") plan.base_seed = detail::parse_number<std::uint64_t>(e);
        else if (e.key == "record_stride") plan.record_stride = detail::parse_number<Step>(e);
        else if (e.key == "output_dir") plan.output_dir = e.value;
        else if (e.key == "analysis_unit") {
            auto u = parse_unit(e.value);
            if (!u) throw ConfigError("line " + std::to_string(e.line) + ": analysis_unit must be 'run' or 'agent'");
            plan.unit = *u;
        } else if (!apply_config_entry(plan.base, e)) {
            throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
        }
    }
    if (plan.runs_per_cell < 1) throw ConfigError("invalid plan: runs_per_cell must be >= 1");
    if (plan.steps < 0) throw ConfigError("invalid plan: steps must be >= 0");
    if (plan.record_stride < 1) throw ConfigError("invalid plan: record_stride must be >= 1");
    plan.base.steps = plan.steps;
    validate(plan.base);
    return plan;
}

inline ExperimentPlan load_plan(const std::string& path) {
    return parse_plan(read_text_file(path), std::filesystem::path(path).parent_path());
}

// Cell index over the full 3x3 design, independent of the plan's subset.
constexpr std::uint32_t cell_index(WorldType w, RegulationType r) noexcept {
    return static_cast<std::uint32_t>(w) * 3u + static_cast<std::uint32_t>(r);
}

// seed = splitmix64(splitmix64(base) ^ (cell << 32 | run)).
constexpr std::uint64_t run_seed(std::uint64_t base_seed, std::uint32_t cell, std::uint32_t run) noexcept {
    return splitmix64(splitmix64(base_seed) ^ ((static_cast<std::uint64_t>(cell) << 32) | run));
}

// ---------------------------------------------------------------------------
// Per-agent metrics.

struct AgentMetrics {
    Step life_length = 0;
    std::optional<double> mean_deviation;
    std::optional<double> mean_entropy_I;
    std::optional<double> theta_mean;
    std::optional<double> theta_sd;
    std::int64_t grooms = 0;
    std::int64_t aggressions = 0;
    std::int64_t eats = 0;
};

struct AgentCurves {
    std::vector<double> entropy_I;   // bits per window
    std::vector<double> theta_mean;  // per window
};

inline AgentMetrics agent_metrics(const RunSummary& run, const AgentSummary& a, AgentCurves* curves = nullptr,
                                  const EntropyWindowing& w = {}) {
    AgentMetrics m;
    m.life_length = life_length(a, run.steps);
    m.mean_deviation = mean_deviation(a.trajectory);
    const auto& t = a.trajectory;
    const auto i_e = alive_prefix(t.i_energy, t.alive);
    const auto entropy = windowed_entropy(i_e, run.record_stride, w);
    if (!entropy.empty()) m.mean_entropy_I = mean_of(entropy);
    const auto theta = alive_prefix(t.theta_s, t.alive);
    if (auto s = threshold_summary(theta, run.config.theta_base)) {
        m.theta_mean = s->mean;
        m.theta_sd = s->sd;
    }
    m.grooms = a.counts.grooms;
    m.aggressions = a.counts.aggressions;
    m.eats = a.counts.eats;
    if (curves) {
        curves->entropy_I = entropy;
        curves->theta_mean = windowed_mean(theta, run.record_stride, w);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Experiment execution.

struct CellRecord {
    RegulationType regulation{};
    WorldType world{};
    int run = 0;
    std::uint64_t seed = 0;
    AgentId agent_id = 0;
    AgentMetrics metrics;
};

struct CurveRecord {
    RegulationType regulation{};
    WorldType world{};
    int run = 0;
    AgentId agent_id = 0;
    std::string variable;
    int window = 0;
    double value = 0.0;
};

struct RunOutcome {
    RegulationType regulation{};
    WorldType world{};
    int run = 0;
    std::uint64_t seed = 0;
    std::optional<std::string> error;
    std::vector<CellRecord> cells;
    std::vector<CurveRecord> curves;
};

struct ExperimentResult {
    ExperimentPlan plan;
    std::vector<RunOutcome> runs;  // canonical order
};

struct RunJob {
    WorldType world{};
    RegulationType regulation{};
    int run = 0;
};

// Canonical job order: world, then regulation, then run.
inline std::vector<RunJob> plan_jobs(const ExperimentPlan& plan) {
    std::vector<WorldType> worlds = plan.world_types;
    std::vector<RegulationType> regs = plan.regulation_types;
    std::sort(worlds.begin(), worlds.end());
    std::sort(regs.begin(), regs.end());
    std::vector<RunJob> jobs;
    for (auto w : worlds)
        for (auto r : regs)
            for (int k = 0; k < plan.runs_per_cell; ++k) jobs.push_back({w, r, k});
    return jobs;
}

inline RunOutcome execute_run(const ExperimentPlan& plan, const RunJob& job) {
    RunOutcome out;
    out.regulation = job.regulation;
    out.world = job.world;
    out.run = job.run;
    out.seed = run_seed(plan.base_seed, cell_index(job.world, job.regulation), static_cast<std::uint32_t>(job.run));
    try {
        SimConfig cfg = plan.base;
        cfg.world_type = job.world;
        cfg.regulation_type = job.regulation;
        cfg.seed = out.seed;
        cfg.steps = plan.steps;
        validate(cfg);
        const auto summary = run_to_completion(cfg, plan.record_stride);
        for (const auto& a : summary.agents) {
            AgentCurves c;
            out.cells.push_back({job.regulation, job.world, job.run, out.seed, a.id, agent_metrics(summary, a, &c)});
            for (std::size_t i = 0; i < c.entropy_I.size(); ++i)
                out.curves.push_back({job.regulation, job.world, job.run, a.id, "entropy_I", static_cast<int>(i),
                                      c.entropy_I[i]});
            for (std::size_t i = 0; i < c.theta_mean.size(); ++i)
                out.curves.push_back({job.regulation, job.world, job.run, a.id, "theta_s", static_cast<int>(i),
                                      c.theta_mean[i]});
        }
    } catch (const std::exception& e) {
        out.error = e.what();
        out.cells.clear();
        out.curves.clear();
    }
    return out;
}

// Each worker owns the runs it claims; results land in their canonical slot.
inline ExperimentResult run_experiment(const ExperimentPlan& plan, unsigned parallel = 1) {
    const auto jobs = plan_jobs(plan);
    ExperimentResult result{plan, std::vector<RunOutcome>(jobs.size())};
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) result.runs[i] = execute_run(plan, jobs[i]);
    };
    const unsigned n = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(jobs.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    return result;
}

// ---------------------------------------------------------------------------
// CSV schemas.

inline const std::vector<std::string>& cells_columns() {
    static const std::vector<std::string> cols{"regulation",     "world",          "run",        "seed",
                                               "agent_id",       "life_length",    "mean_deviation",
                                               "mean_entropy_I", "theta_mean",     "theta_sd",
                                               "grooms",         "aggressions",    "eats"};
    return cols;
}

inline const std::vector<std::string>& curves_columns() {
    static const std::vector<std::string> cols{"regulation", "world", "run", "agent_id", "variable", "window", "value"};
    return cols;
}

inline std::string cells_csv(const std::vector<CellRecord>& rows) {
    std::string out = io::csv_line(cells_columns());
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        out += io::csv_line({std::string(to_string(r.regulation)), std::string(to_string(r.world)),
                             std::to_string(r.run), std::to_string(r.seed), std::to_string(r.agent_id),
                             std::to_string(m.life_length), io::format_optional(m.mean_deviation),
                             io::format_optional(m.mean_entropy_I), io::format_optional(m.theta_mean),
                             io::format_optional(m.theta_sd), std::to_string(m.grooms),
                             std::to_string(m.aggressions), std::to_string(m.eats)});
    }
    return out;
}

inline std::string curves_csv(const std::vector<CurveRecord>& rows) {
    std::string out = io::csv_line(curves_columns());
    for (const auto& r : rows)
        out += io::csv_line({std::string(to_string(r.regulation)), std::string(to_string(r.world)),
                             std::to_string(r.run), std::to_string(r.agent_id), r.variable,
                             std::to_string(r.window), io::format_number(r.value)});
    return out;
}

inline std::vector<CellRecord> all_cells(const ExperimentResult& r) {
    std::vector<CellRecord> out;
    for (const auto& run : r.runs) out.insert(out.end(), run.cells.begin(), run.cells.end());
    return out;
}

inline std::vector<CurveRecord> all_curves(const ExperimentResult& r) {
    std::vector<CurveRecord> out;
    for (const auto& run : r.runs) out.insert(out.end(), run.curves.begin(), run.curves.end());
    return out;
}

namespace detail {

template <typename T>
T whole_number(const io::CsvTable& t, std::size_t row, std::size_t col) {
    const auto v = t.number(row, col);
    if (!v || *v != std::floor(*v))
        throw io::IoError("csv: row " + std::to_string(row + 2) + ": expected an integer in column " +
                          std::to_string(col + 1));
    return static_cast<T>(*v);
}

inline RegulationType regulation_cell(const io::CsvTable& t, std::size_t row, std::size_t col) {
    auto r = parse_regulation(t.at(row, col));
    if (!r) throw io::IoError("csv: row " + std::to_string(row + 2) + ": unknown regulation '" + t.at(row, col) + "'");
    return *r;
}

inline WorldType world_cell(const io::CsvTable& t, std::size_t row, std::size_t col) {
    auto w = parse_world(t.at(row, col));
    if (!w) throw io::IoError("csv: row " + std::to_string(row + 2) + ": unknown world '" + t.at(row, col) + "'");
    return *w;
}

}  // namespace detail

// Every schema column must be present; extra columns are ignored.
inline std::vector<CellRecord> parse_cells_csv(std::string_view text) {
    const io::CsvTable t(text);
    std::map<std::string, std::size_t> c;
    for (const auto& name : cells_columns()) c[name] = t.column(name);
    std::vector<CellRecord> out;
    out.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CellRecord r;
        r.regulation = detail::regulation_cell(t, i, c["regulation"]);
        r.world = detail::world_cell(t, i, c["world"]);
        r.run = detail::whole_number<int>(t, i, c["run"]);
        {
            const auto& s = t.at(i, c["seed"]);
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), r.seed);
            if (ec != std::errc{} || ptr != s.data() + s.size())
                throw io::IoError("csv: row " + std::to_string(i + 2) + ": bad seed '" + s + "'");
        }
        r.agent_id = detail::whole_number<AgentId>(t, i, c["agent_id"]);
        auto& m = r.metrics;
        m.life_length = detail::whole_number<Step>(t, i, c["life_length"]);
        m.mean_deviation = t.number(i, c["mean_deviation"]);
        m.mean_entropy_I = t.number(i, c["mean_entropy_I"]);
        m.theta_mean = t.number(i, c["theta_mean"]);
        m.theta_sd = t.number(i, c["theta_sd"]);
        m.grooms = detail::whole_number<std::int64_t>(t, i, c["grooms"]);
        m.aggressions = detail::whole_number<std::int64_t>(t, i, c["aggressions"]);
        m.eats = detail::whole_number<std::int64_t>(t, i, c["eats"]);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<CurveRecord> parse_curves_csv(std::string_view text) {
    const io::CsvTable t(text);
    std::map<std::string, std::size_t> c;
    for (const auto& name : curves_columns()) c[name] = t.column(name);
    std::vector<CurveRecord> out;
    out.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto v = t.number(i, c["value"]);
        if (!v) throw io::IoError("csv: row " + std::to_string(i + 2) + ": empty value");
        out.push_back({detail::regulation_cell(t, i, c["regulation"]), detail::world_cell(t, i, c["world"]),
                       detail::whole_number<int>(t, i, c["run"]), detail::whole_number<AgentId>(t, i, c["agent_id"]),
                       t.at(i, c["variable"]), detail::whole_number<int>(t, i, c["window"]), *v});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analysis.

struct Observation {
    RegulationType regulation{};
    WorldType world{};
    double value = 0.0;
};

enum class Metric : std::uint8_t { LifeLength, MeanDeviation, MeanEntropyI, ThetaMean, ThetaSd };

constexpr std::string_view to_string(Metric m) noexcept {
    switch (m) {
        case Metric::LifeLength: return "life_length";
        case Metric::MeanDeviation: return "mean_deviation";
        case Metric::MeanEntropyI: return "mean_entropy_I";
        case Metric::ThetaMean: return "theta_mean";
        case Metric::ThetaSd: return "theta_sd";
    }
    return "?";
}

inline std::optional<double> metric_value(const AgentMetrics& m, Metric which) noexcept {
    switch (which) {
        case Metric::LifeLength: return static_cast<double>(m.life_length);
        case Metric::MeanDeviation: return m.mean_deviation;
        case Metric::MeanEntropyI: return m.mean_entropy_I;
        case Metric::ThetaMean: return m.theta_mean;
        case Metric::ThetaSd: return m.theta_sd;
    }
    return std::nullopt;
}

// Agent unit: one observation per agent with a value. Run unit: the mean
// over that run's agents with a value; runs with none are dropped.
inline std::vector<Observation> observations(const std::vector<CellRecord>& rows, Metric metric, AnalysisUnit unit) {
    std::vector<Observation> out;
    if (unit == AnalysisUnit::Agent) {
        for (const auto& r : rows)
            if (auto v = metric_value(r.metrics, metric)) out.push_back({r.regulation, r.world, *v});
        return out;
    }
    std::map<std::tuple<WorldType, RegulationType, int>, std::pair<double, int>> acc;
    for (const auto& r : rows) {
        auto& slot = acc[{r.world, r.regulation, r.run}];
        if (auto v = metric_value(r.metrics, metric)) {
            slot.first += *v;
            ++slot.second;
        }
    }
    for (const auto& [key, s] : acc)
        if (s.second > 0) out.push_back({std::get<1>(key), std::get<0>(key), s.first / s.second});
    return out;
}

namespace detail {

inline Json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline std::string effect_label(const std::string& name) {
    if (name == "A") return "regulation";
    if (name == "B") return "world";
    if (name == "A:B") return "regulation:world";
    return name;
}

inline Json anova_json(const stats::AnovaResult& r) {
    Json effects = Json::array();
    for (const auto& e : r.effects)
        effects.push_back({{"effect", effect_label(e.name)},
                           {"df_effect", e.df_effect},
                           {"df_error", e.df_error},
                           {"ss", json_number(e.ss)},
                           {"F", json_number(e.F)},
                           {"p", json_number(e.p)}});
    return {{"effects", effects}, {"ss_error", json_number(r.ss_error)}, {"df_error", r.df_error}};
}

inline std::vector<RegulationType> regulations_in(const std::vector<Observation>& obs) {
    std::set<RegulationType> s;
    for (const auto& o : obs) s.insert(o.regulation);
    return {s.begin(), s.end()};
}

inline std::vector<WorldType> worlds_in(const std::vector<Observation>& obs) {
    std::set<WorldType> s;
    for (const auto& o : obs) s.insert(o.world);
    return {s.begin(), s.end()};
}

// Groups per regulation type within one world, in enum order.
inline std::pair<std::vector<RegulationType>, std::vector<std::vector<double>>> groups_by_regulation(
    const std::vector<Observation>& obs, WorldType world, bool setpoint_coupled_only = false) {
    std::map<RegulationType, std::vector<double>> g;
    for (const auto& o : obs)
        if (o.world == world && (!setpoint_coupled_only || setpoint_coupled(o.regulation))) g[o.regulation].push_back(o.value);
    std::pair<std::vector<RegulationType>, std::vector<std::vector<double>>> out;
    for (auto& [r, v] : g) {
        out.first.push_back(r);
        out.second.push_back(std::move(v));
    }
    return out;
}

inline Json tukey_json(const std::vector<RegulationType>& labels, const std::vector<std::vector<double>>& groups,
                       double alpha) {
    Json arr = Json::array();
    for (const auto& c : stats::tukey_hsd(groups, alpha))
        arr.push_back({{"a", to_string(labels[c.group_i])},
                       {"b", to_string(labels[c.group_j])},
                       {"mean_diff", json_number(c.mean_diff)},
                       {"q", json_number(c.q)},
                       {"p_adj", json_number(c.p_adj)},
                       {"reject", c.reject}});
    return arr;
}

template <typename F>
Json guarded(F&& f) {
    try {
        return f();
    } catch (const stats::StatsError& e) {
        return Json{{"error", e.what()}};
    }
}

}  // namespace detail

// Two-way ANOVA (regulation x world) plus per-world Tukey HSD over
// regulation types for life length and mean deviation; per-world one-way
// ANOVA on mean entropy of I_Energy across set-point-coupled regulation types.
inline Json anova_report(const std::vector<CellRecord>& rows, AnalysisUnit unit, double alpha = 0.05) {
    Json report;
    report["unit"] = to_string(unit);
    report["alpha"] = alpha;
    for (Metric metric : {Metric::LifeLength, Metric::MeanDeviation}) {
        const auto obs = observations(rows, metric, unit);
        Json block;
        block["n"] = obs.size();
        block["two_way"] = detail::guarded([&] {
            stats::FactorTable table;
            for (const auto& o : obs)
                table.push_back({std::string(to_string(o.regulation)), std::string(to_string(o.world)), o.value});
            return detail::anova_json(stats::two_way_anova(table));
        });
        Json tukey;
        for (auto w : detail::worlds_in(obs)) {
            auto [labels, groups] = detail::groups_by_regulation(obs, w);
            tukey[std::string(to_string(w))] = detail::guarded([&] { return detail::tukey_json(labels, groups, alpha); });
        }
        block["tukey_by_world"] = tukey;
        report[std::string(to_string(metric))] = block;
    }
    {
        const auto obs = observations(rows, Metric::MeanEntropyI, unit);
        Json block;
        for (auto w : detail::worlds_in(obs)) {
            auto [labels, groups] = detail::groups_by_regulation(obs, w, true);
            Json entry;
            Json names = Json::array();
            for (auto r : labels) names.push_back(to_string(r));
            entry["groups"] = names;
            entry["one_way"] = detail::guarded([&] { return detail::anova_json(stats::one_way_anova(groups)); });
            block[std::string(to_string(w))] = entry;
        }
        report["mean_entropy_I"] = Json{{"one_way_by_world", block}};
    }
    return report;
}

inline std::string anova_text(const Json& report) {
    std::ostringstream out;
    auto num = [](const Json& v) -> std::string {
        if (v.is_null()) return "NA";
        if (v.is_string()) return v.get<std::string>();
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
        return buf;
    };
    auto table = [&](const Json& a, const std::string& indent) {
        if (a.contains("error")) {
            out << indent << "error: " << a["error"].get<std::string>() << '\n';
            return;
        }
        char line[160];
        std::snprintf(line, sizeof line, "%s%-18s %6s %8s %14s %12s\n", indent.c_str(), "effect", "df", "df_err", "F", "p");
        out << line;
        for (const auto& e : a["effects"]) {
            std::snprintf(line, sizeof line, "%s%-18s %6s %8s %14s %12s\n", indent.c_str(),
                          e["effect"].get<std::string>().c_str(), num(e["df_effect"]).c_str(),
                          num(e["df_error"]).c_str(), num(e["F"]).c_str(), num(e["p"]).c_str());
            out << line;
        }
    };
    out << "unit of analysis: " << report["unit"].get<std::string>() << "\n";
    for (const char* metric : {"life_length", "mean_deviation"}) {
        const auto& b = report[metric];
        out << "\n" << metric << " (n = " << b["n"].get<std::size_t>() << ")\n  two-way ANOVA\n";
        table(b["two_way"], "    ");
        for (const auto& [world, t] : b["tukey_by_world"].items()) {
            out << "  Tukey HSD, " << world << " world\n";
            if (t.contains("error")) {
                out << "    error: " << t["error"].get<std::string>() << '\n';
                continue;
            }
            for (const auto& c : t)
                out << "    " << c["a"].get<std::string>() << " vs " << c["b"].get<std::string>()
                    << ": diff = " << num(c["mean_diff"]) << ", p_adj = " << num(c["p_adj"])
                    << (c["reject"].get<bool>() ? " *" : "") << '\n';
        }
    }
    out << "\nmean_entropy_I\n";
    for (const auto& [world, e] : report["mean_entropy_I"]["one_way_by_world"].items()) {
        out << "  one-way ANOVA, " << world << " world\n";
        table(e["one_way"], "    ");
    }
    return out.str();
}

namespace detail {

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample; 0 when n < 2
};

inline Moments moments(const std::vector<double>& v) {
    Moments m{v.size()};
    if (v.empty()) return m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return m;
}

inline std::string grouped_csv(const std::vector<Observation>& obs) {
    std::map<std::pair<WorldType, RegulationType>, std::vector<double>> g;
    for (const auto& o : obs) g[{o.world, o.regulation}].push_back(o.value);
    std::string out = io::csv_line({"world", "regulation", "n", "mean", "sd"});
    for (const auto& [key, v] : g) {
        const auto m = moments(v);
        out += io::csv_line({std::string(to_string(key.first)), std::string(to_string(key.second)),
                             std::to_string(m.n), io::format_number(m.mean), io::format_number(m.sd)});
    }
    return out;
}

inline std::string curve_csv(const std::vector<CurveRecord>& curves, const std::string& variable) {
    std::map<std::tuple<WorldType, RegulationType, int>, std::vector<double>> g;
    for (const auto& c : curves)
        if (c.variable == variable) g[{c.world, c.regulation, c.window}].push_back(c.value);
    std::string out = io::csv_line({"world", "regulation", "window", "n", "mean", "sd"});
    for (const auto& [key, v] : g) {
        const auto m = moments(v);
        out += io::csv_line({std::string(to_string(std::get<0>(key))), std::string(to_string(std::get<1>(key))),
                             std::to_string(std::get<2>(key)), std::to_string(m.n), io::format_number(m.mean),
                             io::format_number(m.sd)});
    }
    return out;
}

}  // namespace detail

// File name -> content for the figdata/ directory. Curve files are emitted
// only when curve records are available.
inline std::map<std::string, std::string> figdata(const std::vector<CellRecord>& rows,
                                                  const std::vector<CurveRecord>* curves, AnalysisUnit unit) {
    std::map<std::string, std::string> files;
    files["fig3_life_length.csv"] = detail::grouped_csv(observations(rows, Metric::LifeLength, unit));
    files["fig4_mean_deviation.csv"] = detail::grouped_csv(observations(rows, Metric::MeanDeviation, unit));
    files["fig5_entropy_summary.csv"] = detail::grouped_csv(observations(rows, Metric::MeanEntropyI, unit));
    files["fig5_theta_mean.csv"] = detail::grouped_csv(observations(rows, Metric::ThetaMean, unit));
    files["fig5_theta_sd.csv"] = detail::grouped_csv(observations(rows, Metric::ThetaSd, unit));
    if (curves) {
        files["fig5_entropy_curve.csv"] = detail::curve_csv(*curves, "entropy_I");
        files["fig5_theta_curve.csv"] = detail::curve_csv(*curves, "theta_s");
    }
    return files;
}

// Writes anova.txt, anova.json and figdata/ under out_dir.
inline void write_analysis(const std::filesystem::path& out_dir, const std::vector<CellRecord>& rows,
                           const std::vector<CurveRecord>* curves, AnalysisUnit unit) {
    std::filesystem::create_directories(out_dir / "figdata");
    const auto report = anova_report(rows, unit);
    io::write_file((out_dir / "anova.json").string(), report.dump(2) + "\n");
    io::write_file((out_dir / "anova.txt").string(), anova_text(report));
    for (const auto& [name, content] : figdata(rows, curves, unit))
        io::write_file((out_dir / "figdata" / name).string(), content);
}

inline Json plan_json(const ExperimentPlan& plan) {
    Json regs = Json::array(), worlds = Json::array();
    for (auto r : plan.regulation_types) regs.push_back(to_string(r));
    for (auto w : plan.world_types) worlds.push_back(to_string(w));
    return {{"regulation_types", regs},      {"world_types", worlds},
            {"runs_per_cell", plan.runs_per_cell}, {"steps", plan.steps},
            {"base_seed", plan.base_seed},   {"record_stride", plan.record_stride},
            {"analysis_unit", to_string(plan.unit)}};
}

// Writes cells.csv, curves.csv, summary.json and the analysis outputs. The
// analysis is computed from the cells.csv text just written, so a later
// `analyze` of that file reproduces it exactly.
inline void write_experiment(const std::filesystem::path& out_dir, const ExperimentResult& result) {
    std::filesystem::create_directories(out_dir);
    const auto cells_text = cells_csv(all_cells(result));
    const auto curves_text = curves_csv(all_curves(result));
    io::write_file((out_dir / "cells.csv").string(), cells_text);
    io::write_file((out_dir / "curves.csv").string(), curves_text);

    Json failed = Json::array();
    for (const auto& r : result.runs)
        if (r.error)
            failed.push_back({{"regulation", to_string(r.regulation)},
                              {"world", to_string(r.world)},
                              {"run", r.run},
                              {"seed", r.seed},
                              {"error", *r.error}});
    Json summary{{"plan", plan_json(result.plan)},
                 {"runs", result.runs.size()},
                 {"failed_runs", failed.size()},
                 {"failed", failed}};
    io::write_file((out_dir / "summary.json").string(), summary.dump(2) + "\n");

    const auto rows = parse_cells_csv(cells_text);
    const auto curves = parse_curves_csv(curves_text);
    write_analysis(out_dir, rows, &curves, result.plan.unit);
}

}  // namespace allostasis
