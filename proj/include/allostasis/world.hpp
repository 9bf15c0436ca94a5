#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "allostasis/core_types.hpp"
#include "allostasis/physiology.hpp"
#include "allostasis/rng.hpp"
#include "allostasis/social.hpp"

namespace allostasis {

// ---------------------------------------------------------------------------
// Toroidal geometry. Coordinates live in [0,width) x [0,height); headings are
// degrees counter-clockwise from +x.

struct Torus {
    double width = 99.0;
    double height = 99.0;
    friend bool operator==(const Torus&, const Torus&) = default;

    static double wrap1(double v, double extent) noexcept {
        double r = std::fmod(v, extent);
        if (r < 0) r += extent;
        // fmod of a tiny negative can round back up to `extent`
        return r >= extent ? 0.0 : r;
    }

    static double delta1(double from, double to, double extent) noexcept {
        double d = std::fmod(to - from, extent);
        if (d < -extent / 2) d += extent;
        else if (d >= extent / 2) d -= extent;
        return d;
    }

    Vec2 wrap(Vec2 p) const noexcept { return {wrap1(p.x, width), wrap1(p.y, height)}; }

    // Shortest displacement from `from` to `to`.
    Vec2 delta(Vec2 from, Vec2 to) const noexcept {
        return {delta1(from.x, to.x, width), delta1(from.y, to.y, height)};
    }

    double distance(Vec2 a, Vec2 b) const noexcept {
        const auto d = delta(a, b);
        return std::hypot(d.x, d.y);
    }
};

inline double deg_to_rad(double d) noexcept { return d * std::numbers::pi / 180.0; }
inline double rad_to_deg(double r) noexcept { return r * 180.0 / std::numbers::pi; }

// Normalise to [0, 360).
inline double normalise_heading(double deg) noexcept {
    double h = std::fmod(deg, 360.0);
    if (h < 0) h += 360.0;
    return h >= 360.0 ? 0.0 : h;
}

// Signed difference to - from, in (-180, 180].
inline double angle_difference(double from_deg, double to_deg) noexcept {
    double d = std::fmod(to_deg - from_deg, 360.0);
    if (d <= -180.0) d += 360.0;
    else if (d > 180.0) d -= 360.0;
    return d;
}

inline double bearing(const Torus& t, Vec2 from, Vec2 to) noexcept {
    const auto d = t.delta(from, to);
    return normalise_heading(rad_to_deg(std::atan2(d.y, d.x)));
}

struct VisionCone {
    double range = 20.0;
    double half_angle_deg = 10.0;

    // Coincident points are always visible.
    bool sees(const Torus& t, Vec2 eye, double heading_deg, Vec2 p) const noexcept {
        const auto d = t.delta(eye, p);
        const double dist = std::hypot(d.x, d.y);
        if (dist > range) return false;
        if (dist < 1e-12) return true;
        const double off = angle_difference(heading_deg, rad_to_deg(std::atan2(d.y, d.x)));
        return std::abs(off) <= half_angle_deg;
    }
};

// ---------------------------------------------------------------------------
// World state and food schedule.

using FoodId = std::uint32_t;

struct FoodItem {
    FoodId id = 0;
    Vec2 pos{};
    friend bool operator==(const FoodItem&, const FoodItem&) = default;
};

struct WorldState {
    Torus torus{};
    std::vector<FoodItem> food;
    Step step = 0;
    WorldType world_type = WorldType::Static;
    FoodId next_food_id = 0;
    friend bool operator==(const WorldState&, const WorldState&) = default;
};

// Static: constant. Seasonal: max, max-1, ..., 1, ..., max-1 per phase.
// Extreme: alternates max and 1 per phase.
inline int scheduled_food_count(WorldType world, Step step, Step phase = 2000, int max_food = 4) noexcept {
    const Step p = step / phase;
    switch (world) {
        case WorldType::Static:
            return max_food;
        case WorldType::Seasonal: {
            if (max_food <= 1) return max_food;
            const Step cycle = 2 * (max_food - 1);
            const Step i = p % cycle;
            const Step down = i <= max_food - 1 ? i : cycle - i;
            return max_food - static_cast<int>(down);
        }
        case WorldType::Extreme:
            return p % 2 == 0 ? max_food : 1;
    }
    return max_food;
}

namespace detail {

inline Vec2 random_free_position(const WorldState& w, double separation, Rng& rng) {
    Vec2 p{};
    for (int attempt = 0; attempt < 256; ++attempt) {
        p = {rng.uniform() * w.torus.width, rng.uniform() * w.torus.height};
        const bool clear = std::none_of(w.food.begin(), w.food.end(), [&](const FoodItem& f) {
            return w.torus.distance(f.pos, p) < separation;
        });
        if (clear) break;
    }
    return p;
}

}  // namespace detail

// Brings the food count to the scheduled value for world.step: removes
// uniformly chosen items or spawns new ones at random free positions.
inline WorldState apply_food_schedule(WorldState world, Rng& rng, Step phase = 2000, int max_food = 4,
                                      double separation = 4.0) {
    const auto target = static_cast<std::size_t>(scheduled_food_count(world.world_type, world.step, phase, max_food));
    while (world.food.size() > target) {
        const auto victim = rng.index(world.food.size());
        world.food.erase(world.food.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    while (world.food.size() < target) {
        const Vec2 p = detail::random_free_position(world, separation, rng);
        world.food.push_back({world.next_food_id++, p});
    }
    return world;
}

// ---------------------------------------------------------------------------
// Perception.

struct VisibleAgent {
    AgentId id = 0;
    double rank = 0.0;  // normalised
    Vec2 pos{};
    double distance = 0.0;
    double value = 0.0;  // partner value as judged by the perceiver
};

struct Perception {
    std::vector<FoodItem> visible_food;
    std::vector<VisibleAgent> visible_agents;
    double cue_food = 0.0;
    double cue_agent = 0.0;
    double s_food = 0.0;
    double s_agent = 0.0;

    Cues cues() const noexcept {
        Cues c{};
        c[index(ResourceId::Food)] = cue_food;
        c[index(ResourceId::Agent)] = cue_agent;
        return c;
    }
    double mean_resource() const noexcept { return 0.5 * (s_food + s_agent); }
};

// Living agents other than `self` inside the vision cone, plus normalised cues:
// food count / max_food, and the best visible partner value clamped to [0,1].
inline Perception perceive(const AgentState& self, const WorldState& world, std::span<const AgentState> others,
                           const SimConfig& cfg) {
    Perception p;
    const VisionCone cone{cfg.vision_range, cfg.vision_half_angle_deg};
    for (const auto& f : world.food)
        if (cone.sees(world.torus, self.pos, self.heading_deg, f.pos)) p.visible_food.push_back(f);

    const auto sigma = EqualisationMap::from(cfg);
    const double r_self = normalised_rank(self.rank, cfg.n_agents);
    for (const auto& q : others) {
        if (q.id == self.id || !q.alive) continue;
        if (!cone.sees(world.torus, self.pos, self.heading_deg, q.pos)) continue;
        const double r_q = normalised_rank(q.rank, cfg.n_agents);
        p.visible_agents.push_back(
            {q.id, r_q, q.pos, world.torus.distance(self.pos, q.pos), partner_value(r_self, r_q, self.O, sigma)});
    }

    p.cue_food = p.s_food = std::min(1.0, static_cast<double>(p.visible_food.size()) / cfg.max_food);
    if (!p.visible_agents.empty()) {
        double best = p.visible_agents.front().value;
        for (const auto& v : p.visible_agents) best = std::max(best, v.value);
        p.cue_agent = p.s_agent = std::clamp(best, 0.0, 1.0);
    }
    return p;
}

// Nearest visible food (ties by id).
inline std::optional<FoodItem> nearest_food(const Torus& t, Vec2 from, std::span<const FoodItem> items) noexcept {
    std::optional<FoodItem> best;
    double best_d = 0.0;
    for (const auto& f : items) {
        const double d = t.distance(from, f.pos);
        if (!best || d < best_d || (d == best_d && f.id < best->id)) {
            best = f;
            best_d = d;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Movement.

struct Wander {};
struct Approach {
    Vec2 target;
};
struct Flee {
    double heading_deg;
};
using Steering = std::variant<Wander, Approach, Flee>;

inline double movement_speed(double c, double eps, bool stressed, const SimConfig& cfg) noexcept {
    const double v = std::max(0.0, cfg.v0 * (1.0 + eps + cfg.alpha_v * c));
    return stressed ? v * cfg.stressed_speed_multiplier : v;
}

// Draw order: wander turn (wander only), then speed noise. Approaching agents
// halt at approach_standoff * interaction_radius from the target, still
// facing it.
inline AgentState move(AgentState agent, const Steering& steer, bool stressed, Rng& rng, const SimConfig& cfg,
                       const Torus& torus) {
    double max_step = -1.0;
    if (const auto* a = std::get_if<Approach>(&steer)) {
        const double dist = torus.distance(agent.pos, a->target);
        if (dist > 1e-12) agent.heading_deg = bearing(torus, agent.pos, a->target);
        max_step = std::max(0.0, dist - cfg.approach_standoff * cfg.interaction_radius);
    } else if (const auto* f = std::get_if<Flee>(&steer)) {
        agent.heading_deg = normalise_heading(f->heading_deg);
    } else {
        agent.heading_deg = normalise_heading(agent.heading_deg + rng.uniform(-cfg.wander_turn_deg, cfg.wander_turn_deg));
    }
    const double eps = rng.uniform(-cfg.speed_noise, cfg.speed_noise);
    double speed = movement_speed(agent.C, eps, stressed, cfg);
    if (max_step >= 0.0) speed = std::min(speed, max_step);
    const double h = deg_to_rad(agent.heading_deg);
    agent.pos = torus.wrap({agent.pos.x + speed * std::cos(h), agent.pos.y + speed * std::sin(h)});
    return agent;
}

// Food patches are renewable: eating never removes them. Returns the item
// eaten from, if any lies within the interaction radius.
inline std::optional<FoodItem> try_consume(const AgentState& agent, const WorldState& world, double radius) noexcept {
    auto f = nearest_food(world.torus, agent.pos, world.food);
    if (f && world.torus.distance(agent.pos, f->pos) <= radius) return f;
    return std::nullopt;
}

}  // namespace allostasis
