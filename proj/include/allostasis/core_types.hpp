#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace allostasis {

// Drives, motivations, behaviours and resources are in bijection; the
// enumerator value doubles as the index into per-drive arrays.
enum class DriveId : std::uint8_t { Energy = 0, Socialness = 1 };
enum class MotivationId : std::uint8_t { Hungry = 0, Lonely = 1 };
enum class BehaviourId : std::uint8_t { Eat = 0, Touch = 1 };
enum class ResourceId : std::uint8_t { Food = 0, Agent = 1 };

inline constexpr std::size_t kDriveCount = 2;
inline constexpr std::array<DriveId, kDriveCount> kAllDrives{DriveId::Energy, DriveId::Socialness};

constexpr std::size_t index(DriveId d) noexcept { return static_cast<std::size_t>(d); }
constexpr std::size_t index(ResourceId r) noexcept { return static_cast<std::size_t>(r); }
constexpr std::size_t index(BehaviourId b) noexcept { return static_cast<std::size_t>(b); }

constexpr MotivationId motivation_of(DriveId d) noexcept { return static_cast<MotivationId>(d); }
constexpr BehaviourId behaviour_of(MotivationId m) noexcept { return static_cast<BehaviourId>(m); }
constexpr BehaviourId behaviour_of(DriveId d) noexcept { return behaviour_of(motivation_of(d)); }
constexpr ResourceId resource_of(DriveId d) noexcept { return static_cast<ResourceId>(d); }
constexpr DriveId drive_of(BehaviourId b) noexcept { return static_cast<DriveId>(b); }

enum class RegulationType : std::uint8_t { Homeostatic = 0, Allostatic = 1, SocialAllostatic = 2 };
enum class WorldType : std::uint8_t { Static = 0, Seasonal = 1, Extreme = 2 };

inline constexpr std::array<RegulationType, 3> kAllRegulationTypes{
    RegulationType::Homeostatic, RegulationType::Allostatic, RegulationType::SocialAllostatic};
inline constexpr std::array<WorldType, 3> kAllWorldTypes{WorldType::Static, WorldType::Seasonal,
                                                         WorldType::Extreme};

// Set-point coupling to C (allostatic set-point drift) is active.
constexpr bool setpoint_coupled(RegulationType r) noexcept { return r != RegulationType::Homeostatic; }
// O is deposited and acts on rank perception and the stress threshold.
constexpr bool socially_coupled(RegulationType r) noexcept { return r == RegulationType::SocialAllostatic; }

constexpr std::string_view to_string(RegulationType r) noexcept {
    switch (r) {
        case RegulationType::Homeostatic: return "homeostatic";
        case RegulationType::Allostatic: return "allostatic";
        case RegulationType::SocialAllostatic: return "social_allostatic";
    }
    return "?";
}

constexpr std::string_view to_string(WorldType w) noexcept {
    switch (w) {
        case WorldType::Static: return "static";
        case WorldType::Seasonal: return "seasonal";
        case WorldType::Extreme: return "extreme";
    }
    return "?";
}

constexpr std::string_view to_string(BehaviourId b) noexcept {
    return b == BehaviourId::Eat ? "eat" : "touch";
}

inline std::optional<RegulationType> parse_regulation(std::string_view s) noexcept {
    for (auto r : kAllRegulationTypes)
        if (s == to_string(r)) return r;
    return std::nullopt;
}

inline std::optional<WorldType> parse_world(std::string_view s) noexcept {
    for (auto w : kAllWorldTypes)
        if (s == to_string(w)) return w;
    return std::nullopt;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

using AgentId = std::uint32_t;
using Step = std::int64_t;

struct AgentState {
    AgentId id = 0;
    int rank = 1;  // 1 = highest
    Vec2 pos{};
    double heading_deg = 0.0;
    std::array<double, kDriveCount> drives{};      // A_i
    std::array<double, kDriveCount> set_points{};  // I_i
    double C = 0.0;
    double O = 0.0;
    double stress_threshold = 0.5;
    bool alive = true;
    std::optional<Step> death_step;

    double drive(DriveId d) const noexcept { return drives[index(d)]; }
    double& drive(DriveId d) noexcept { return drives[index(d)]; }
    double set_point(DriveId d) const noexcept { return set_points[index(d)]; }
    double& set_point(DriveId d) noexcept { return set_points[index(d)]; }

    friend bool operator==(const AgentState&, const AgentState&) = default;
};

// Rank 1..n mapped onto [0,1], with rank 1 -> 1.0 and rank n -> 0.0.
constexpr double normalised_rank(int rank, int n_agents) noexcept {
    if (n_agents < 2) return 1.0;
    return static_cast<double>(n_agents - rank) / static_cast<double>(n_agents - 1);
}

struct SimConfig {
    WorldType world_type = WorldType::Static;
    RegulationType regulation_type = RegulationType::Homeostatic;
    std::uint64_t seed = 1;
    Step steps = 30000;

    int n_agents = 6;
    double world_width = 99.0;
    double world_height = 99.0;
    double vision_range = 20.0;
    double vision_half_angle_deg = 10.0;

    // signal transducer C
    double alpha_c = 0.005;
    double eta = 0.3;
    // allostatic set point coupling
    double k_setpoint = 2.0;
    double gamma = 0.001;
    double i_base = 0.7;
    double setpoint_min = 0.5;
    double setpoint_max = 1.0;
    bool setpoint_tracks_clamped_c = true;  // dC is the realised change of clamped C
    double i_energy_init = 0.7;
    double i_social = 0.8;
    // social buffering of the stress threshold
    double theta_base = 0.5;
    double theta_max = 0.5;
    double kappa_sig = 15.0;
    double mu = 0.65;
    // signal transducer O
    double omega_actor = 0.2;
    double omega_recipient = 0.1;
    double o_decay = 0.01;
    // behaviour
    double beta = 4.0;
    double lambda_eat = 0.25;
    double kappa_touch = 0.00125;
    bool logistic_equalisation = false;

    double energy_decay = 0.00015;
    double social_decay = 0.00194;
    double v0 = 2.25;
    double speed_noise = 0.1;  // eps ~ U(-speed_noise, speed_noise)
    double alpha_v = 0.38;
    double stressed_speed_multiplier = 1.1;
    double wander_turn_deg = 20.6;
    double interaction_radius = 7.75;
    double approach_standoff = 0.575;  // fraction of interaction_radius at which approach halts

    int max_food = 4;  // also the cue normaliser for visible food
    Step schedule_phase = 2000;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws ConfigError naming the first violated constraint.
inline void validate(const SimConfig& c) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("invalid config: ") + what);
    };
    require(c.n_agents >= 2, "n_agents must be >= 2");
    require(c.steps >= 0, "steps must be >= 0");
    require(c.world_width > 0 && c.world_height > 0, "world dimensions must be positive");
    require(c.vision_range > c.interaction_radius, "vision_range must exceed interaction_radius");
    require(c.interaction_radius >= 0, "interaction_radius must be >= 0");
    require(c.vision_half_angle_deg >= 0 && c.vision_half_angle_deg <= 180,
            "vision_half_angle_deg must lie in [0,180]");
    for (double rate : {c.alpha_c, c.eta, c.k_setpoint, c.gamma, c.omega_actor, c.omega_recipient,
                        c.o_decay, c.beta, c.lambda_eat, c.kappa_touch, c.energy_decay,
                        c.social_decay, c.v0, c.speed_noise, c.alpha_v, c.wander_turn_deg,
                        c.kappa_sig, c.theta_max, c.stressed_speed_multiplier})
        require(rate >= 0, "rate constants must be >= 0");
    require(c.setpoint_min <= c.setpoint_max, "setpoint_min must not exceed setpoint_max");
    require(c.i_base >= c.setpoint_min && c.i_base <= c.setpoint_max, "i_base outside set point bounds");
    require(c.i_energy_init >= c.setpoint_min && c.i_energy_init <= c.setpoint_max,
            "i_energy_init outside set point bounds");
    require(c.i_social >= 0 && c.i_social <= 1, "i_social must lie in [0,1]");
    require(c.max_food >= 1, "max_food must be >= 1");
    require(c.schedule_phase >= 1, "schedule_phase must be >= 1");
}

// Every published model constant at its published value. The rest (drive
// decay, v0, alpha_v, stressed speed multiplier, touch gain, interaction
// radius, approach standoff, wander turn) are calibrated so that homeostatic
// agents in the static world stay viable for most of a 30k-tick run.
inline SimConfig default_config(WorldType world, RegulationType regulation, std::uint64_t seed) {
    SimConfig c;
    c.world_type = world;
    c.regulation_type = regulation;
    c.seed = seed;
    return c;
}

}  // namespace allostasis
