#pragma once

// Flat `key = value` text format shared by run configs and experiment plans.
// Blank lines and `#` comments are ignored; unknown keys are an error.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "allostasis/core_types.hpp"

namespace allostasis {

struct KeyValueEntry {
    std::string key;
    std::string value;
    int line = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const KeyValueEntry& e) {
    T out{};
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError("line " + std::to_string(e.line) + ": bad value '" + e.value +
                          "' for key '" + e.key + "'");
    return out;
}

inline bool parse_bool(const KeyValueEntry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw ConfigError("line " + std::to_string(e.line) + ": bad boolean '" + e.value +
                      "' for key '" + e.key + "'");
}

}  // namespace detail

inline std::vector<KeyValueEntry> parse_key_values(std::string_view text) {
    std::vector<KeyValueEntry> out;
    std::map<std::string, int, std::less<>> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        KeyValueEntry e{std::string(detail::trim(line.substr(0, eq))),
                        std::string(detail::trim(line.substr(eq + 1))), line_no};
        if (e.key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (auto [it, fresh] = seen.emplace(e.key, line_no); !fresh)
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + e.key + "'");
        out.push_back(std::move(e));
    }
    return out;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Binds every SimConfig field to its key. The visitor receives
// (key, getter-as-string, setter-from-entry) for each field in file order.
template <typename Visitor>
void visit_config_fields(SimConfig& c, Visitor&& visit) {
    using detail::format_double;
    auto dbl = [&](std::string_view key, double& f) {
        visit(key, [&f] { return format_double(f); },
              [&f](const KeyValueEntry& e) { f = detail::parse_number<double>(e); });
    };
    auto int_ = [&](std::string_view key, auto& f) {
        using T = std::remove_reference_t<decltype(f)>;
        visit(key, [&f] { return std::to_string(f); },
              [&f](const KeyValueEntry& e) { f = detail::parse_number<T>(e); });
    };
    visit("world_type", [&c] { return std::string(to_string(c.world_type)); },
          [&c](const KeyValueEntry& e) {
              auto w = parse_world(e.value);
              if (!w) throw ConfigError("line " + std::to_string(e.line) + ": unknown world_type '" + e.value + "'");
              c.world_type = *w;
          });
    visit("regulation_type", [&c] { return std::string(to_string(c.regulation_type)); },
          [&c](const KeyValueEntry& e) {
              auto r = parse_regulation(e.value);
              if (!r)
                  throw ConfigError("line " + std::to_string(e.line) + ": unknown regulation_type '" + e.value + "'");
              c.regulation_type = *r;
          });
    int_("seed", c.seed);
    int_("steps", c.steps);
    int_("n_agents", c.n_agents);
    dbl("world_width", c.world_width);
    dbl("world_height", c.world_height);
    dbl("vision_range", c.vision_range);
    dbl("vision_half_angle_deg", c.vision_half_angle_deg);
    dbl("alpha_c", c.alpha_c);
    dbl("eta", c.eta);
    dbl("k_setpoint", c.k_setpoint);
    dbl("gamma", c.gamma);
    dbl("i_base", c.i_base);
    dbl("setpoint_min", c.setpoint_min);
    dbl("setpoint_max", c.setpoint_max);
    visit("setpoint_tracks_clamped_c", [&c] { return std::string(c.setpoint_tracks_clamped_c ? "true" : "false"); },
          [&c](const KeyValueEntry& e) { c.setpoint_tracks_clamped_c = detail::parse_bool(e); });
    dbl("i_energy_init", c.i_energy_init);
    dbl("i_social", c.i_social);
    dbl("theta_base", c.theta_base);
    dbl("theta_max", c.theta_max);
    dbl("kappa_sig", c.kappa_sig);
    dbl("mu", c.mu);
    dbl("omega_actor", c.omega_actor);
    dbl("omega_recipient", c.omega_recipient);
    dbl("o_decay", c.o_decay);
    dbl("beta", c.beta);
    dbl("lambda_eat", c.lambda_eat);
    dbl("kappa_touch", c.kappa_touch);
    visit("logistic_equalisation", [&c] { return std::string(c.logistic_equalisation ? "true" : "false"); },
          [&c](const KeyValueEntry& e) { c.logistic_equalisation = detail::parse_bool(e); });
    dbl("energy_decay", c.energy_decay);
    dbl("social_decay", c.social_decay);
    dbl("v0", c.v0);
    dbl("speed_noise", c.speed_noise);
    dbl("alpha_v", c.alpha_v);
    dbl("stressed_speed_multiplier", c.stressed_speed_multiplier);
    dbl("wander_turn_deg", c.wander_turn_deg);
    dbl("interaction_radius", c.interaction_radius);
    dbl("approach_standoff", c.approach_standoff);
    int_("max_food", c.max_food);
    int_("schedule_phase", c.schedule_phase);
}

// Applies one entry to the config; returns false if the key is not a config field.
inline bool apply_config_entry(SimConfig& c, const KeyValueEntry& e) {
    bool hit = false;
    visit_config_fields(c, [&](std::string_view key, auto&&, auto&& set) {
        if (!hit && key == e.key) {
            set(e);
            hit = true;
        }
    });
    return hit;
}

// Keys not present keep their default_config values.
inline SimConfig parse_config(std::string_view text) {
    SimConfig c;
    for (const auto& e : parse_key_values(text))
        if (!apply_config_entry(c, e))
            throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    validate(c);
    return c;
}

inline SimConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

inline std::string write_config(const SimConfig& config) {
    SimConfig c = config;
    std::string out;
    visit_config_fields(c, [&](std::string_view key, auto&& get, auto&&) {
        out.append(key);
        out.append(" = ");
        out.append(get());
        out.push_back('\n');
    });
    return out;
}

}  // namespace allostasis
