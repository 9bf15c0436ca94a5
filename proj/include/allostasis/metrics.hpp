#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "allostasis/engine.hpp"

namespace allostasis {

struct TimeSeries {
    AgentId agent_id = 0;
    std::string variable;
    std::vector<double> values;
    Step stride = 1;
};

inline Step life_length(const AgentSummary& a, Step total_steps) noexcept {
    return a.death_step ? *a.death_step : total_steps;
}

inline std::vector<std::pair<AgentId, Step>> life_length(const RunSummary& summary) {
    std::vector<std::pair<AgentId, Step>> out;
    out.reserve(summary.agents.size());
    for (const auto& a : summary.agents) out.emplace_back(a.id, life_length(a, summary.steps));
    return out;
}

// Mean over alive samples of the two drives' absolute gaps to their
// instantaneous set points. Empty alive span -> nullopt.
inline std::optional<double> mean_deviation(std::span<const double> energy, std::span<const double> socialness,
                                            std::span<const double> i_energy, std::span<const double> i_social,
                                            std::span<const std::uint8_t> alive) noexcept {
    const std::size_t n =
        std::min({energy.size(), socialness.size(), i_energy.size(), i_social.size(), alive.size()});
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (!alive[t]) continue;
        sum += 0.5 * (std::abs(energy[t] - i_energy[t]) + std::abs(socialness[t] - i_social[t]));
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

inline std::optional<double> mean_deviation(const AgentTrajectory& t) noexcept {
    return mean_deviation(t.energy, t.socialness, t.i_energy, t.i_social, t.alive);
}

// Leading run of samples recorded while alive.
template <typename T>
std::span<const T> alive_prefix(const std::vector<T>& values, std::span<const std::uint8_t> alive) noexcept {
    std::size_t n = 0;
    const std::size_t lim = std::min(values.size(), alive.size());
    while (n < lim && alive[n]) ++n;
    return std::span<const T>(values.data(), n);
}

struct EntropyWindowing {
    Step window = 1000;      // in ticks
    Step stride = 0;         // in ticks; 0 = non-overlapping (stride = window)
    int bins = 32;
    double lo = 0.5;
    double hi = 1.0;
    double min_fill = 0.1;   // partial windows below this fraction are dropped
};

inline int bin_of(double v, int bins, double lo, double hi) noexcept {
    const double f = (v - lo) / (hi - lo);
    const auto b = static_cast<int>(std::floor(f * bins));
    return std::clamp(b, 0, bins - 1);
}

// Shannon entropy in bits of the binned values.
inline double binned_entropy(std::span<const double> values, int bins, double lo, double hi) {
    if (values.empty()) return 0.0;
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : values) ++counts[static_cast<std::size_t>(bin_of(v, bins, lo, hi))];
    const double n = static_cast<double>(values.size());
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = c / n;
        h -= p * std::log2(p);
    }
    return h;
}

// One entropy value per window. Window and stride are given in ticks and
// converted to samples using the series' recording stride.
inline std::vector<double> windowed_entropy(std::span<const double> values, Step series_stride,
                                            const EntropyWindowing& w = {}) {
    std::vector<double> out;
    if (values.empty()) return out;
    const auto win = static_cast<std::size_t>(std::max<Step>(1, w.window / std::max<Step>(1, series_stride)));
    const auto step = static_cast<std::size_t>(
        std::max<Step>(1, (w.stride > 0 ? w.stride : w.window) / std::max<Step>(1, series_stride)));
    if (values.size() <= win) {
        out.push_back(binned_entropy(values, w.bins, w.lo, w.hi));
        return out;
    }
    const auto min_samples = static_cast<std::size_t>(std::ceil(w.min_fill * static_cast<double>(win)));
    for (std::size_t start = 0; start < values.size(); start += step) {
        const std::size_t len = std::min(win, values.size() - start);
        if (len < std::max<std::size_t>(1, min_samples)) break;
        out.push_back(binned_entropy(values.subspan(start, len), w.bins, w.lo, w.hi));
        if (start + win >= values.size()) break;
    }
    return out;
}

// Per-window arithmetic mean with the same window placement and fill rule
// as windowed_entropy.
inline std::vector<double> windowed_mean(std::span<const double> values, Step series_stride,
                                         const EntropyWindowing& w = {}) {
    std::vector<double> out;
    if (values.empty()) return out;
    const auto win = static_cast<std::size_t>(std::max<Step>(1, w.window / std::max<Step>(1, series_stride)));
    const auto step = static_cast<std::size_t>(
        std::max<Step>(1, (w.stride > 0 ? w.stride : w.window) / std::max<Step>(1, series_stride)));
    auto mean = [](std::span<const double> s) {
        double acc = 0.0;
        for (double v : s) acc += v;
        return acc / static_cast<double>(s.size());
    };
    if (values.size() <= win) {
        out.push_back(mean(values));
        return out;
    }
    const auto min_samples = static_cast<std::size_t>(std::ceil(w.min_fill * static_cast<double>(win)));
    for (std::size_t start = 0; start < values.size(); start += step) {
        const std::size_t len = std::min(win, values.size() - start);
        if (len < std::max<std::size_t>(1, min_samples)) break;
        out.push_back(mean(values.subspan(start, len)));
        if (start + win >= values.size()) break;
    }
    return out;
}

inline TimeSeries windowed_entropy(const TimeSeries& series, const EntropyWindowing& w = {}) {
    TimeSeries out{series.agent_id, series.variable + "_entropy", windowed_entropy(series.values, series.stride, w),
                   w.stride > 0 ? w.stride : w.window};
    return out;
}

struct ThresholdSummary {
    double mean = 0.0;
    double sd = 0.0;  // population
    double percent_change = 0.0;
};

inline std::optional<ThresholdSummary> threshold_summary(std::span<const double> values, double baseline) noexcept {
    if (values.empty()) return std::nullopt;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size()));
    return ThresholdSummary{mean, sd, (mean - baseline) / baseline * 100.0};
}

inline double mean_of(std::span<const double> v) noexcept {
    if (v.empty()) return std::nan("");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Ordinary least-squares slope of y against its index.
inline double trend_slope(std::span<const double> y) noexcept {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    const double xbar = (static_cast<double>(n) - 1.0) / 2.0;
    const double ybar = mean_of(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - xbar;
        sxy += dx * (y[i] - ybar);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace allostasis
