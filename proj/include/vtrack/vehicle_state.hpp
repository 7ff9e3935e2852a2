#pragma once

// Vehicle feature state and the multiplexed LED board.
//
// The board is modelled as a pure function of VehicleState. Physical LEDs:
//   white  x2  lit by position or head lights
//   red    x2  tail, lit by position or brake lights
//   yellow x4  warning flashers
//   status red x1    door open or GSM not registered
//   doors green x1   doors locked
//   GSM green x1     GSM registered

#include <optional>

#include "vtrack/command_protocol.hpp"

namespace vtrack {

struct VehicleState {
    bool position_lights = false;
    bool head_lights = false;
    bool brake_lights = false;
    bool warning_lights = false;
    bool doors_locked = false;
    bool gsm_ready = false;
    bool location_mode = false;

    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

inline constexpr VehicleState initial_state() { return VehicleState{}; }

struct MultiplexCode {
    int s0 = 0;
    int s1 = 0;
    int s2 = 0;

    constexpr int channel() const { return s2 * 4 + s1 * 2 + s0; }

    friend bool operator==(const MultiplexCode&, const MultiplexCode&) = default;
};

struct LedPanel {
    int white = 0;
    int red = 0;
    int yellow = 0;
    int green = 0;

    friend bool operator==(const LedPanel&, const LedPanel&) = default;
};

inline constexpr LedPanel kPanelMax{2, 3, 4, 2};

// Signed per-colour change between two panel renders.
struct LedDelta {
    int white = 0;
    int red = 0;
    int yellow = 0;
    int green = 0;

    friend bool operator==(const LedDelta&, const LedDelta&) = default;
};

inline constexpr LedDelta operator-(const LedPanel& a, const LedPanel& b) {
    return {a.white - b.white, a.red - b.red, a.yellow - b.yellow, a.green - b.green};
}

inline constexpr LedPanel operator+(const LedPanel& p, const LedDelta& d) {
    return {p.white + d.white, p.red + d.red, p.yellow + d.yellow, p.green + d.green};
}

inline constexpr LedPanel render_panel(const VehicleState& s) {
    LedPanel p;
    p.white = (s.position_lights || s.head_lights) ? 2 : 0;
    p.red = (s.position_lights || s.brake_lights) ? 2 : 0;
    p.red += (!s.doors_locked || !s.gsm_ready) ? 1 : 0;
    p.yellow = s.warning_lights ? 4 : 0;
    p.green = (s.doors_locked ? 1 : 0) + (s.gsm_ready ? 1 : 0);
    return p;
}

inline constexpr bool is_lighting(Command c) {
    switch (c) {
    case Command::PositionLightsOn:
    case Command::PositionLightsOff:
    case Command::HeadLightsOn:
    case Command::HeadLightsOff:
    case Command::BrakeLightsOn:
    case Command::BrakeLightsOff:
    case Command::WarningOn:
    case Command::WarningOff:
        return true;
    default:
        return false;
    }
}

// Multiplexer triple written as (s0, s1, s2). Every OFF command shares
// channel 5. nullopt for commands that bypass the multiplexer.
inline constexpr std::optional<MultiplexCode> multiplex_code_for(Command c) {
    switch (c) {
    case Command::PositionLightsOn: return MultiplexCode{1, 0, 0};
    case Command::HeadLightsOn: return MultiplexCode{0, 0, 1};
    case Command::BrakeLightsOn: return MultiplexCode{0, 1, 0};
    case Command::WarningOn: return MultiplexCode{1, 1, 1};
    case Command::PositionLightsOff:
    case Command::HeadLightsOff:
    case Command::BrakeLightsOff:
    case Command::WarningOff:
        return MultiplexCode{1, 0, 1};
    default:
        return std::nullopt;
    }
}

struct Effects {
    std::optional<MultiplexCode> strobe;
    LedDelta panel;
};

struct Applied {
    VehicleState state;
    Effects effects;
};

inline constexpr Applied apply(VehicleState s, Command c) {
    const LedPanel before = render_panel(s);
    switch (c) {
    case Command::PositionLightsOn: s.position_lights = true; break;
    case Command::PositionLightsOff: s.position_lights = false; break;
    case Command::HeadLightsOn: s.head_lights = true; break;
    case Command::HeadLightsOff: s.head_lights = false; break;
    case Command::BrakeLightsOn: s.brake_lights = true; break;
    case Command::BrakeLightsOff: s.brake_lights = false; break;
    case Command::WarningOn: s.warning_lights = true; break;
    case Command::WarningOff: s.warning_lights = false; break;
    case Command::LocationOn: s.location_mode = true; break;
    case Command::LocationOff: s.location_mode = false; break;
    case Command::DoorsLock: s.doors_locked = true; break;
    case Command::DoorsUnlock: s.doors_locked = false; break;
    }
    return {s, {multiplex_code_for(c), render_panel(s) - before}};
}

// The GSM indicator's own contribution to the panel.
inline constexpr LedDelta gsm_status_leds(bool ready) {
    return ready ? LedDelta{0, 0, 0, 1} : LedDelta{0, 1, 0, 0};
}

} // namespace vtrack
