#pragma once

#include <algorithm>
#include <optional>
#include <span>

#include "allostasis/core_types.hpp"
#include "allostasis/signals.hpp"

namespace allostasis {

struct PartnerEvaluation {
    AgentId target_id = 0;
    double value = 0.0;  // V in [-1, 1]
    friend bool operator==(const PartnerEvaluation&, const PartnerEvaluation&) = default;
};

enum class SocialKind : std::uint8_t { Groom, Aggression };

struct SocialAction {
    SocialKind kind = SocialKind::Groom;
    AgentId actor = 0;
    AgentId target = 0;
    double intensity = 0.0;  // actor's touch intensity
    friend bool operator==(const SocialAction&, const SocialAction&) = default;
};

// How strongly O pulls perceived ranks toward the midpoint. Identity on [0,1]
// by default; a logistic in O when requested.
struct EqualisationMap {
    bool enabled = false;
    bool logistic = false;
    double steepness = 15.0;
    double midpoint = 0.65;

    double operator()(double o) const noexcept {
        if (!enabled) return 0.0;
        return logistic ? allostasis::logistic(o, steepness, midpoint) : std::clamp(o, 0.0, 1.0);
    }

    static EqualisationMap from(const SimConfig& c) noexcept {
        return {socially_coupled(c.regulation_type), c.logistic_equalisation, c.kappa_sig, c.mu};
    }
};

inline double equalised_rank(double r, double o, const EqualisationMap& sigma) noexcept {
    const double s = sigma(o);
    return r * (1.0 - s) + 0.5 * s;
}

inline double equalised_rank(double r, double o, bool enable_equalisation) noexcept {
    return equalised_rank(r, o, EqualisationMap{enable_equalisation});
}

// Value of `other` as seen by `self`; both ranks equalised with the evaluator's O.
inline double partner_value(double r_self, double r_other, double o_self, const EqualisationMap& sigma) noexcept {
    return equalised_rank(r_self, o_self, sigma) - equalised_rank(r_other, o_self, sigma);
}

inline double partner_value(double r_self, double r_other, double o_self, bool enable_equalisation) noexcept {
    return partner_value(r_self, r_other, o_self, EqualisationMap{enable_equalisation});
}

struct Candidate {
    AgentId id = 0;
    double rank = 0.0;  // normalised
};

// Argmax partner value over the visible candidates; lowest id wins ties.
inline std::optional<PartnerEvaluation> select_partner(double r_self, double o_self, std::span<const Candidate> visible,
                                                       const EqualisationMap& sigma) noexcept {
    std::optional<PartnerEvaluation> best;
    for (const auto& q : visible) {
        const double v = partner_value(r_self, q.rank, o_self, sigma);
        if (!best || v > best->value || (v == best->value && q.id < best->target_id))
            best = PartnerEvaluation{q.id, v};
    }
    return best;
}

inline double aggression_probability(double v_target, bool stressed, double beta) noexcept {
    if (!stressed) return 0.0;
    return std::clamp(beta * (1.0 - v_target), 0.0, 1.0);
}

// `u` is a unit-uniform draw; aggression fires iff u < P(aggression).
inline SocialAction resolve_social_action(AgentId actor, bool stressed, const PartnerEvaluation& target,
                                          double intensity, double u, double beta) noexcept {
    const bool aggress = u < aggression_probability(target.value, stressed, beta);
    return {aggress ? SocialKind::Aggression : SocialKind::Groom, actor, target.target_id, intensity};
}

}  // namespace allostasis
