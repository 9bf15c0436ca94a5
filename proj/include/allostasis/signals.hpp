#pragma once

// Hormone-like signal transducers. C integrates homeostatic error against
// perceived resources; O accumulates with positive social contact. Both are
// bounded to [0,1]. All rates are per simulation tick (forward Euler, dt = 1).

#include <algorithm>
#include <cmath>

#include "allostasis/core_types.hpp"

namespace allostasis {

struct SignalUpdate {
    double dC = 0.0;
    double dO = 0.0;
    double new_i_energy = 0.0;
    double new_theta_s = 0.0;
};

inline double cortisol_delta(double mean_error, double mean_resource, double alpha_c) noexcept {
    return alpha_c * (mean_error - mean_resource);
}

inline double apply_cortisol_delta(double c, double dc) noexcept { return std::clamp(c + dc, 0.0, 1.0); }

// Mean over both drives of the deficit below set point.
inline double mean_drive_error(const AgentState& a) noexcept {
    double sum = 0.0;
    for (auto d : kAllDrives) sum += std::max(0.0, a.set_point(d) - a.drive(d));
    return sum / static_cast<double>(kDriveCount);
}

inline double cortisol_on_aggression(double recipient_c, double actor_touch_intensity, double eta) noexcept {
    return std::min(1.0, recipient_c + eta * actor_touch_intensity);
}

// I_Energy moves against the rate of change of C and relaxes toward I_base.
inline double allostatic_setpoint_step(double i_energy, double dc, double k, double gamma, double i_base,
                                       double lo = 0.5, double hi = 1.0) noexcept {
    return std::clamp(i_energy - k * dc + gamma * (i_base - i_energy), lo, hi);
}

inline double oxytocin_deposit(double o, double touch_intensity, double omega) noexcept {
    return std::min(1.0, o + omega * touch_intensity);
}

inline double oxytocin_decay(double o, double rate = 0.01) noexcept { return std::max(0.0, o - rate); }

inline double logistic(double x, double steepness, double midpoint) noexcept {
    return 1.0 / (1.0 + std::exp(-steepness * (x - midpoint)));
}

// Social buffering: the stress threshold rises logistically with O.
inline double stress_threshold(double o, double theta_base, double theta_max, double kappa_sig, double mu) noexcept {
    return theta_base + theta_max * logistic(o, kappa_sig, mu);
}

inline double stress_threshold(double o, const SimConfig& c) noexcept {
    return stress_threshold(o, c.theta_base, c.theta_max, c.kappa_sig, c.mu);
}

inline bool is_stressed(double c, double theta_s) noexcept { return c >= theta_s; }

}  // namespace allostasis
