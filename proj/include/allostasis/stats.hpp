#pragma once

// Fixed-effects ANOVA and Tukey HSD.
//
// p-values come from the F survival function expressed through the
// regularised incomplete beta function. The studentized range CDF is a
// double integral evaluated by adaptive Gauss-Kronrod quadrature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

namespace allostasis::stats {

class StatsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper tail P(X > f) for X ~ F(d1, d2). F = +inf -> 0.
inline double f_survival(double f, double d1, double d2) {
    if (std::isnan(f)) return std::nan("");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    const double x = d2 / (d2 + d1 * f);
    return std::clamp(boost::math::ibeta(d2 / 2.0, d1 / 2.0, x), 0.0, 1.0);
}

struct AnovaEffect {
    std::string name;
    double ss = 0.0;
    double df_effect = 0.0;
    double df_error = 0.0;
    double ms = 0.0;
    double F = 0.0;
    double p = 1.0;
};

struct AnovaResult {
    std::vector<AnovaEffect> effects;
    double ss_error = 0.0;
    double df_error = 0.0;
    double ms_error = 0.0;
    double ss_total = 0.0;

    const AnovaEffect& effect(const std::string& name) const {
        for (const auto& e : effects)
            if (e.name == name) return e;
        throw StatsError("no effect named '" + name + "'");
    }
};

namespace detail {

// 0/0 is reported as F = 0 (nothing to explain); x/0 as the +inf sentinel.
inline AnovaEffect make_effect(std::string name, double ss, double df, double ss_err, double df_err) {
    constexpr double tiny = 1e-12;
    AnovaEffect e{std::move(name), std::max(0.0, ss), df, df_err};
    e.ms = e.ss / df;
    const double ms_err = ss_err / df_err;
    const double scale = std::max(ss, ss_err);
    if (e.ss <= tiny * std::max(1.0, scale) && ss_err <= tiny * std::max(1.0, scale)) {
        e.F = 0.0;
        e.p = 1.0;
    } else if (ss_err <= tiny * scale) {
        e.F = kInf;
        e.p = 0.0;
    } else {
        e.F = e.ms / ms_err;
        e.p = f_survival(e.F, df, df_err);
    }
    return e;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double centred_ss(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
}

// Solves the symmetric system in place by Gaussian elimination with partial
// pivoting; near-singular pivots are treated as zero columns.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    std::vector<double> x(n, 0.0);
    std::vector<std::size_t> pivot_row(n, n);
    std::vector<bool> used(n, false);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = n;
        double best_abs = 1e-12;
        for (std::size_t r = 0; r < n; ++r)
            if (!used[r] && std::abs(a[r][col]) > best_abs) {
                best = r;
                best_abs = std::abs(a[r][col]);
            }
        if (best == n) continue;
        used[best] = true;
        pivot_row[col] = best;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == best) continue;
            const double f = a[r][col] / a[best][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[best][c];
            b[r] -= f * b[best];
        }
    }
    for (std::size_t col = 0; col < n; ++col)
        if (pivot_row[col] != n) x[col] = b[pivot_row[col]] / a[pivot_row[col]][col];
    return x;
}

// Residual SS of the additive model y ~ 1 + A + B (treatment coding).
inline double additive_rss(const std::vector<std::size_t>& ia, const std::vector<std::size_t>& ib,
                           const std::vector<double>& y, std::size_t na, std::size_t nb) {
    const std::size_t p = 1 + (na - 1) + (nb - 1);
    auto row = [&](std::size_t i) {
        std::vector<double> x(p, 0.0);
        x[0] = 1.0;
        if (ia[i] > 0) x[ia[i]] = 1.0;
        if (ib[i] > 0) x[na - 1 + ib[i]] = 1.0;
        return x;
    };
    std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto x = row(i);
        for (std::size_t r = 0; r < p; ++r) {
            xty[r] += x[r] * y[i];
            for (std::size_t c = 0; c < p; ++c) xtx[r][c] += x[r] * x[c];
        }
    }
    const auto beta = solve(std::move(xtx), std::move(xty));
    double rss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto x = row(i);
        double fit = 0.0;
        for (std::size_t r = 0; r < p; ++r) fit += x[r] * beta[r];
        rss += (y[i] - fit) * (y[i] - fit);
    }
    return rss;
}

}  // namespace detail

// Requires >= 2 groups with >= 2 values each.
inline AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw StatsError("one-way ANOVA needs at least 2 groups");
    std::vector<double> all;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].size() < 2)
            throw StatsError("one-way ANOVA: group " + std::to_string(g) + " has fewer than 2 values");
        all.insert(all.end(), groups[g].begin(), groups[g].end());
    }
    for (double v : all)
        if (!std::isfinite(v)) throw StatsError("one-way ANOVA: non-finite value");
    double ssw = 0.0;
    for (const auto& g : groups) ssw += detail::centred_ss(g);
    const double sst = detail::centred_ss(all);
    const double ssb = std::max(0.0, sst - ssw);
    const double df_b = static_cast<double>(groups.size() - 1);
    const double df_w = static_cast<double>(all.size() - groups.size());

    AnovaResult r;
    r.effects.push_back(detail::make_effect("group", ssb, df_b, ssw, df_w));
    r.ss_error = ssw;
    r.df_error = df_w;
    r.ms_error = ssw / df_w;
    r.ss_total = sst;
    return r;
}

struct FactorRow {
    std::string a;
    std::string b;
    double value = 0.0;
};

using FactorTable = std::vector<FactorRow>;

// Effects "A", "B", "A:B". Type-II sums of squares; identical to the
// sequential decomposition when the design is balanced. Every cell must be
// non-empty and at least one cell must hold 2 or more observations.
inline AnovaResult two_way_anova(const FactorTable& table) {
    std::map<std::string, std::size_t> la, lb;
    for (const auto& r : table) {
        la.emplace(r.a, 0);
        lb.emplace(r.b, 0);
        if (!std::isfinite(r.value)) throw StatsError("two-way ANOVA: non-finite value");
    }
    if (la.size() < 2) throw StatsError("two-way ANOVA: factor A needs at least 2 levels");
    if (lb.size() < 2) throw StatsError("two-way ANOVA: factor B needs at least 2 levels");
    std::size_t k = 0;
    for (auto& [_, i] : la) i = k++;
    k = 0;
    for (auto& [_, i] : lb) i = k++;
    const std::size_t na = la.size(), nb = lb.size();

    std::vector<std::size_t> ia, ib;
    std::vector<double> y;
    std::vector<std::vector<double>> cells(na * nb), by_a(na), by_b(nb);
    for (const auto& r : table) {
        const auto a = la[r.a], b = lb[r.b];
        ia.push_back(a);
        ib.push_back(b);
        y.push_back(r.value);
        cells[a * nb + b].push_back(r.value);
        by_a[a].push_back(r.value);
        by_b[b].push_back(r.value);
    }
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b)
            if (cells[a * nb + b].empty())
                throw StatsError("two-way ANOVA: empty cell (" + std::next(la.begin(), static_cast<long>(a))->first +
                                 ", " + std::next(lb.begin(), static_cast<long>(b))->first +
                                 ") with interaction requested");
    const double n = static_cast<double>(y.size());
    const double df_err = n - static_cast<double>(na * nb);
    if (df_err < 1) throw StatsError("two-way ANOVA: needs replicated observations within cells");

    double rss_full = 0.0;
    for (const auto& c : cells)
        if (c.size() > 1) rss_full += detail::centred_ss(c);
    double rss_a = 0.0, rss_b = 0.0;
    for (const auto& g : by_a) rss_a += detail::centred_ss(g);
    for (const auto& g : by_b) rss_b += detail::centred_ss(g);
    const double rss_add = detail::additive_rss(ia, ib, y, na, nb);

    AnovaResult r;
    r.effects.push_back(detail::make_effect("A", rss_b - rss_add, static_cast<double>(na - 1), rss_full, df_err));
    r.effects.push_back(detail::make_effect("B", rss_a - rss_add, static_cast<double>(nb - 1), rss_full, df_err));
    r.effects.push_back(detail::make_effect("A:B", rss_add - rss_full, static_cast<double>((na - 1) * (nb - 1)),
                                            rss_full, df_err));
    r.ss_error = rss_full;
    r.df_error = df_err;
    r.ms_error = rss_full / df_err;
    r.ss_total = detail::centred_ss(y);
    return r;
}

// ---------------------------------------------------------------------------
// Studentized range distribution.

namespace detail {

inline double norm_pdf(double z) noexcept { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double norm_cdf(double z) noexcept { return 0.5 * boost::math::erfc(-z / std::numbers::sqrt2); }

// Adaptive bisection on an absolute error target; each panel is a single
// 31-point Gauss-Kronrod rule with its embedded error estimate.
template <typename F>
double integrate_abs(const F& f, double a, double b, double abs_tol, int depth = 24) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err);
    if (err <= abs_tol || depth == 0) return v;
    const double m = 0.5 * (a + b);
    return integrate_abs(f, a, m, 0.5 * abs_tol, depth - 1) + integrate_abs(f, m, b, 0.5 * abs_tol, depth - 1);
}

// P(range of k iid standard normals < w).
inline double normal_range_cdf(double w, int k) {
    if (w <= 0.0) return 0.0;
    auto f = [w, k](double z) {
        const double d = norm_cdf(z) - norm_cdf(z - w);
        return norm_pdf(z) * std::pow(std::max(0.0, d), k - 1);
    };
    return std::clamp(k * integrate_abs(f, -8.5, 8.5, 1e-10), 0.0, 1.0);
}

}  // namespace detail

// P(Q < q) for the studentized range with k groups and df error degrees of
// freedom. df = +inf gives the normal range distribution.
inline double studentized_range_cdf(double q, int k, double df) {
    if (k < 2) throw StatsError("studentized range needs k >= 2");
    if (!(df > 0)) throw StatsError("studentized range needs df > 0");
    if (std::isnan(q)) return std::nan("");
    if (q <= 0.0) return 0.0;
    if (std::isinf(q)) return 1.0;
    if (std::isinf(df) || df > 25000) return detail::normal_range_cdf(q, k);

    // s = chi_df / sqrt(df); log density.
    const double log_c = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0);
    auto density = [&](double s) {
        if (s <= 0.0) return 0.0;
        return std::exp(log_c + (df - 1.0) * std::log(s) - 0.5 * df * s * s);
    };
    auto f = [&](double s) {
        const double d = density(s);
        return d == 0.0 ? 0.0 : d * detail::normal_range_cdf(q * s, k);
    };
    // The density is concentrated around s = 1 with spread ~ 1/sqrt(2 df).
    const double spread = 1.0 / std::sqrt(2.0 * df);
    const double hi = 1.0 + 40.0 * spread + 5.0;
    return std::clamp(detail::integrate_abs(f, 0.0, hi, 1e-8), 0.0, 1.0);
}

// q such that P(Q < q) = p.
inline double studentized_range_quantile(double p, int k, double df) {
    if (!(p > 0.0 && p < 1.0)) throw StatsError("quantile probability must lie in (0,1)");
    double lo = 0.0, hi = 8.0;
    while (studentized_range_cdf(hi, k, df) < p) hi *= 2.0;
    auto g = [&](double q) { return studentized_range_cdf(q, k, df) - p; };
    boost::math::tools::eps_tolerance<double> tol(36);
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(g, lo + 1e-12, hi, g(lo + 1e-12), g(hi), tol, iters);
    return 0.5 * (a + b);
}

struct TukeyComparison {
    std::size_t group_i = 0;
    std::size_t group_j = 0;
    double mean_diff = 0.0;  // mean_j - mean_i
    double q = 0.0;
    double p_adj = 1.0;
    bool reject = false;
};

// All pairs i < j; Tukey-Kramer standard errors for unequal group sizes.
inline std::vector<TukeyComparison> tukey_hsd(const std::vector<std::vector<double>>& groups, double alpha = 0.05) {
    std::vector<TukeyComparison> out;
    if (groups.size() < 2) return out;
    const auto anova = one_way_anova(groups);
    const int k = static_cast<int>(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            TukeyComparison c{i, j, detail::mean(groups[j]) - detail::mean(groups[i])};
            const double se = std::sqrt(0.5 * anova.ms_error *
                                        (1.0 / static_cast<double>(groups[i].size()) +
                                         1.0 / static_cast<double>(groups[j].size())));
            const double diff = std::abs(c.mean_diff);
            if (diff == 0.0) {
                c.q = 0.0;
                c.p_adj = 1.0;
            } else if (se == 0.0) {
                c.q = kInf;
                c.p_adj = 0.0;
            } else {
                c.q = diff / se;
                c.p_adj = std::clamp(1.0 - studentized_range_cdf(c.q, k, anova.df_error), 0.0, 1.0);
            }
            c.reject = c.p_adj < alpha;
            out.push_back(c);
        }
    return out;
}

}  // namespace allostasis::stats
