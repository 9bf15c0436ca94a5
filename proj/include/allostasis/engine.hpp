#pragma once

// Per-tick scheduler. Phases run in a fixed order over agents sorted by id:
//   1 food schedule          4 interaction resolution   7 drive decay
//   2 snapshot               5 event application        8 death check
//   3 sense/regulate/move    6 stress threshold update  9 records
// Every stochastic draw comes from the single run RNG in that order.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "allostasis/core_types.hpp"
#include "allostasis/physiology.hpp"
#include "allostasis/rng.hpp"
#include "allostasis/signals.hpp"
#include "allostasis/social.hpp"
#include "allostasis/world.hpp"

namespace allostasis {

enum class Activity : std::uint8_t { None = 0, Eat = 1, Touch = 2 };

constexpr std::string_view to_string(Activity a) noexcept {
    switch (a) {
        case Activity::Eat: return "eat";
        case Activity::Touch: return "touch";
        case Activity::None: break;
    }
    return "none";
}

struct StepRecord {
    Step step = 0;
    AgentId agent_id = 0;
    double energy = 0.0;
    double socialness = 0.0;
    double i_energy = 0.0;
    double theta_s = 0.0;
    double C = 0.0;
    double O = 0.0;
    bool stressed = false;
    bool alive = true;
    Activity behaviour = Activity::None;
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct EventCounts {
    std::int64_t grooms = 0;
    std::int64_t aggressions = 0;
    std::int64_t eats = 0;
    friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

struct RunState {
    SimConfig config;
    Rng rng;
    WorldState world;
    std::vector<AgentState> agents;  // ordered by id
    std::vector<EventCounts> counts;
    Step step = 0;
    friend bool operator==(const RunState&, const RunState&) = default;
};

inline RunState init_run(const SimConfig& cfg) {
    validate(cfg);
    RunState run{cfg, Rng(cfg.seed), {}, {}, {}, 0};
    run.world.torus = {cfg.world_width, cfg.world_height};
    run.world.world_type = cfg.world_type;

    const auto n = static_cast<std::size_t>(cfg.n_agents);
    std::vector<int> ranks(n);
    for (std::size_t i = 0; i < n; ++i) ranks[i] = static_cast<int>(i) + 1;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(ranks[i], ranks[run.rng.index(i + 1)]);

    const double theta0 = socially_coupled(cfg.regulation_type) ? stress_threshold(0.0, cfg) : cfg.theta_base;
    run.agents.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        AgentState a;
        a.id = static_cast<AgentId>(i);
        a.rank = ranks[i];
        a.pos = {run.rng.uniform() * cfg.world_width, run.rng.uniform() * cfg.world_height};
        a.heading_deg = run.rng.uniform() * 360.0;
        a.set_point(DriveId::Energy) = cfg.i_energy_init;
        a.set_point(DriveId::Socialness) = cfg.i_social;
        a.drive(DriveId::Energy) = cfg.i_energy_init;
        a.drive(DriveId::Socialness) = cfg.i_social;
        a.stress_threshold = theta0;
        run.agents.push_back(a);
    }
    run.counts.assign(n, {});
    run.world = apply_food_schedule(std::move(run.world), run.rng, cfg.schedule_phase, cfg.max_food,
                                    2.0 * cfg.interaction_radius);
    return run;
}

namespace detail {

struct Intent {
    std::optional<BehaviourIntensity> winner;
    std::optional<PartnerEvaluation> partner;
    double touch_intensity = 0.0;
    bool stressed = false;
    bool fleeing = false;
};

struct Event {
    enum class Kind : std::uint8_t { Eat, Groom, Aggression } kind;
    std::size_t actor;
    std::size_t recipient;
    double intensity;
};

}  // namespace detail

// Advances one tick, appending one record per agent to `records`.
inline void tick(RunState& run, std::vector<StepRecord>& records) {
    const SimConfig& cfg = run.config;
    const auto n = run.agents.size();
    const bool coupled = setpoint_coupled(cfg.regulation_type);
    const bool social = socially_coupled(cfg.regulation_type);
    const auto sigma = EqualisationMap::from(cfg);

    // 1
    run.world.step = run.step;
    run.world = apply_food_schedule(std::move(run.world), run.rng, cfg.schedule_phase, cfg.max_food,
                                    2.0 * cfg.interaction_radius);
    // 2
    const std::vector<AgentState> snapshot = run.agents;

    // 3
    std::vector<detail::Intent> intents(n);
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        AgentState& a = run.agents[i];
        if (!a.alive) continue;
        const Perception p = perceive(snapshot[i], run.world, snapshot, cfg);

        double dc = cortisol_delta(mean_drive_error(a), p.mean_resource(), cfg.alpha_c);
        const double c_before = a.C;
        a.C = apply_cortisol_delta(a.C, dc);
        if (cfg.setpoint_tracks_clamped_c) dc = a.C - c_before;
        if (coupled)
            a.set_point(DriveId::Energy) = allostatic_setpoint_step(a.set_point(DriveId::Energy), dc, cfg.k_setpoint,
                                                                    cfg.gamma, cfg.i_base, cfg.setpoint_min,
                                                                    cfg.setpoint_max);
        if (social) a.O = oxytocin_decay(a.O, cfg.o_decay);

        auto& intent = intents[i];
        const auto intensities = behaviour_intensities(a, p.cues());
        intent.winner = select_behaviour(intensities);
        intent.touch_intensity = intensities[index(BehaviourId::Touch)];
        intent.stressed = is_stressed(a.C, a.stress_threshold);

        candidates.clear();
        for (const auto& v : p.visible_agents) candidates.push_back({v.id, v.rank});
        intent.partner = select_partner(normalised_rank(a.rank, cfg.n_agents), a.O, candidates, sigma);

        Steering steer = Wander{};
        const double r_self = normalised_rank(a.rank, cfg.n_agents);
        const VisibleAgent* threat = nullptr;
        if (intent.stressed)
            for (const auto& v : p.visible_agents)
                if (v.rank > r_self && (!threat || v.distance < threat->distance ||
                                        (v.distance == threat->distance && v.id < threat->id)))
                    threat = &v;
        if (threat) {
            intent.fleeing = true;
            steer = Flee{bearing(run.world.torus, threat->pos, a.pos)};
        } else if (intent.winner && intent.winner->behaviour == BehaviourId::Eat) {
            if (auto f = nearest_food(run.world.torus, a.pos, p.visible_food)) steer = Approach{f->pos};
        } else if (intent.winner && intent.winner->behaviour == BehaviourId::Touch && intent.partner) {
            steer = Approach{snapshot[intent.partner->target_id].pos};
        }
        a = move(std::move(a), steer, intent.stressed, run.rng, cfg, run.world.torus);
    }

    // 4
    std::vector<detail::Event> events;
    for (std::size_t i = 0; i < n; ++i) {
        const AgentState& a = run.agents[i];
        const auto& intent = intents[i];
        if (!a.alive || !intent.winner || intent.fleeing) continue;
        if (intent.winner->behaviour == BehaviourId::Eat) {
            if (try_consume(a, run.world, cfg.interaction_radius))
                events.push_back({detail::Event::Kind::Eat, i, i, intent.winner->intensity});
        } else if (intent.partner) {
            const auto j = static_cast<std::size_t>(intent.partner->target_id);
            const AgentState& b = run.agents[j];
            if (b.alive && run.world.torus.distance(a.pos, b.pos) <= cfg.interaction_radius) {
                const double u = run.rng.uniform();
                const auto action = resolve_social_action(a.id, intent.stressed, *intent.partner,
                                                          intent.touch_intensity, u, cfg.beta);
                events.push_back({action.kind == SocialKind::Groom ? detail::Event::Kind::Groom
                                                                   : detail::Event::Kind::Aggression,
                                  i, j, action.intensity});
            }
        }
    }

    // 5
    for (const auto& e : events) {
        AgentState& actor = run.agents[e.actor];
        AgentState& recipient = run.agents[e.recipient];
        switch (e.kind) {
            case detail::Event::Kind::Eat:
                actor = apply_eat(std::move(actor), cfg.lambda_eat);
                ++run.counts[e.actor].eats;
                break;
            case detail::Event::Kind::Groom: {
                const double gain = touch_gain(e.intensity, actor.C, cfg.kappa_touch);
                actor = apply_social_gain(std::move(actor), gain);
                recipient = apply_social_gain(std::move(recipient), gain);
                if (social) {
                    actor.O = oxytocin_deposit(actor.O, e.intensity, cfg.omega_actor);
                    recipient.O = oxytocin_deposit(recipient.O, e.intensity, cfg.omega_recipient);
                }
                ++run.counts[e.actor].grooms;
                break;
            }
            case detail::Event::Kind::Aggression:
                recipient.C = cortisol_on_aggression(recipient.C, e.intensity, cfg.eta);
                ++run.counts[e.actor].aggressions;
                break;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        AgentState& a = run.agents[i];
        if (!a.alive) continue;
        // 6
        if (social) a.stress_threshold = stress_threshold(a.O, cfg);
        // 7
        a = decay_drives(std::move(a), {cfg.energy_decay, cfg.social_decay});
        // 8
        a = check_death(std::move(a), run.step);
    }

    // 9
    for (std::size_t i = 0; i < n; ++i) {
        const AgentState& a = run.agents[i];
        const auto& intent = intents[i];
        Activity act = Activity::None;
        if (intent.winner) act = intent.winner->behaviour == BehaviourId::Eat ? Activity::Eat : Activity::Touch;
        records.push_back({run.step, a.id, a.drive(DriveId::Energy), a.drive(DriveId::Socialness),
                           a.set_point(DriveId::Energy), a.stress_threshold, a.C, a.O, intent.stressed, a.alive, act,
                           a.pos.x, a.pos.y});
    }
    ++run.step;
}

inline std::vector<StepRecord> tick(RunState& run) {
    std::vector<StepRecord> records;
    records.reserve(run.agents.size());
    tick(run, records);
    return records;
}

// ---------------------------------------------------------------------------

struct AgentTrajectory {
    std::vector<double> energy;
    std::vector<double> socialness;
    std::vector<double> i_energy;
    std::vector<double> i_social;
    std::vector<double> theta_s;
    std::vector<double> C;
    std::vector<double> O;
    std::vector<std::uint8_t> alive;
    friend bool operator==(const AgentTrajectory&, const AgentTrajectory&) = default;
};

struct AgentSummary {
    AgentId id = 0;
    int rank = 0;
    bool alive = true;
    std::optional<Step> death_step;
    EventCounts counts;
    AgentTrajectory trajectory;  // sampled every `record_stride` ticks
    friend bool operator==(const AgentSummary&, const AgentSummary&) = default;
};

struct RunSummary {
    SimConfig config;
    Step steps = 0;
    Step record_stride = 1;
    std::vector<AgentSummary> agents;
    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

// Called with each tick's records; lets callers stream a trace without
// holding it in memory.
using RecordSink = std::function<void(const std::vector<StepRecord>&)>;

inline RunSummary run_to_completion(const SimConfig& cfg, Step record_stride = 1, const RecordSink& sink = {}) {
    if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
    RunState run = init_run(cfg);
    RunSummary out;
    out.config = cfg;
    out.steps = cfg.steps;
    out.record_stride = record_stride;
    out.agents.resize(run.agents.size());
    const auto samples = static_cast<std::size_t>((cfg.steps + record_stride - 1) / record_stride);
    for (std::size_t i = 0; i < run.agents.size(); ++i) {
        auto& t = out.agents[i].trajectory;
        for (auto* v : {&t.energy, &t.socialness, &t.i_energy, &t.i_social, &t.theta_s, &t.C, &t.O}) v->reserve(samples);
        t.alive.reserve(samples);
    }

    std::vector<StepRecord> records;
    records.reserve(run.agents.size());
    while (run.step < cfg.steps) {
        records.clear();
        const Step s = run.step;
        tick(run, records);
        if (sink) sink(records);
        if (s % record_stride != 0) continue;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            auto& t = out.agents[i].trajectory;
            t.energy.push_back(r.energy);
            t.socialness.push_back(r.socialness);
            t.i_energy.push_back(r.i_energy);
            t.i_social.push_back(run.agents[i].set_point(DriveId::Socialness));
            t.theta_s.push_back(r.theta_s);
            t.C.push_back(r.C);
            t.O.push_back(r.O);
            t.alive.push_back(r.alive ? 1 : 0);
        }
    }

    for (std::size_t i = 0; i < run.agents.size(); ++i) {
        const auto& a = run.agents[i];
        auto& s = out.agents[i];
        s.id = a.id;
        s.rank = a.rank;
        s.alive = a.alive;
        s.death_step = a.death_step;
        s.counts = run.counts[i];
    }
    return out;
}

}  // namespace allostasis
