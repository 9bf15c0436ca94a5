#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <optional>

#include "allostasis/core_types.hpp"

namespace allostasis {

struct BehaviourIntensity {
    BehaviourId behaviour = BehaviourId::Eat;
    double intensity = 0.0;
    friend bool operator==(const BehaviourIntensity&, const BehaviourIntensity&) = default;
};

// Cue availability indexed by ResourceId, each in [0,1].
using Cues = std::array<double, kDriveCount>;

// Deficit-cue motivation: deficit (max deficit normalised to 1) scaled by
// (1 + cue). Drives at or above their set point yield zero intensity.
inline double behaviour_intensity(double drive_level, double set_point, double cue) noexcept {
    assert(drive_level >= 0.0 && drive_level <= 1.0);
    assert(set_point >= 0.0 && set_point <= 1.0);
    assert(cue >= 0.0 && cue <= 1.0);
    return std::max(0.0, set_point - drive_level) * (1.0 + cue);
}

inline std::array<double, kDriveCount> behaviour_intensities(const AgentState& agent, const Cues& cues) noexcept {
    std::array<double, kDriveCount> out{};
    for (auto d : kAllDrives)
        out[index(behaviour_of(d))] =
            behaviour_intensity(agent.drive(d), agent.set_point(d), cues[index(resource_of(d))]);
    return out;
}

// Winner-take-all over intensities; Eat wins exact ties. Returns nullopt when
// no behaviour is motivated (the agent wanders).
inline std::optional<BehaviourIntensity> select_behaviour(const std::array<double, kDriveCount>& intensities) noexcept {
    const double eat = intensities[index(BehaviourId::Eat)];
    const double touch = intensities[index(BehaviourId::Touch)];
    if (eat <= 0.0 && touch <= 0.0) return std::nullopt;
    if (eat >= touch) return BehaviourIntensity{BehaviourId::Eat, eat};
    return BehaviourIntensity{BehaviourId::Touch, touch};
}

inline std::optional<BehaviourIntensity> select_behaviour(const AgentState& agent, const Cues& cues) noexcept {
    return select_behaviour(behaviour_intensities(agent, cues));
}

inline AgentState apply_eat(AgentState agent, double lambda_eat = 0.25) noexcept {
    auto& e = agent.drive(DriveId::Energy);
    e = std::min(1.0, e + lambda_eat);
    return agent;
}

// Socialness gained by both parties of a groom.
inline double touch_gain(double intensity, double c_actor, double kappa_touch) noexcept {
    return intensity * kappa_touch * (1.0 + c_actor);
}

inline AgentState apply_social_gain(AgentState agent, double gain) noexcept {
    auto& s = agent.drive(DriveId::Socialness);
    s = std::clamp(s + gain, 0.0, 1.0);
    return agent;
}

inline AgentState decay_drives(AgentState agent, const std::array<double, kDriveCount>& decay) noexcept {
    for (auto d : kAllDrives) {
        assert(decay[index(d)] >= 0.0);
        agent.drive(d) = std::max(0.0, agent.drive(d) - decay[index(d)]);
    }
    return agent;
}

// Energy is the only viability variable; death is permanent.
inline AgentState check_death(AgentState agent, Step step) noexcept {
    if (agent.alive && agent.drive(DriveId::Energy) <= 0.0) {
        agent.alive = false;
        agent.death_step = step;
    }
    return agent;
}

}  // namespace allostasis
