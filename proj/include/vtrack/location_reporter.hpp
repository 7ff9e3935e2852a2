#pragma once

// Fix acquisition over a bounded virtual-time window, and the two outbound
// report formats: the LAT/LON/SAT/PREC line and the maps link.

#include <concepts>
#include <cstdio>
#include <string>
#include <vector>

#include "vtrack/nmea.hpp"

namespace vtrack {

struct TimedChunk {
    Millis at = 0;
    std::string bytes;
};

// Anything that can hand over the GPS bytes that arrived in [from, to).
template <class S>
concept GpsByteSource = requires(S& s, Millis from, Millis to) {
    { s.read_window(from, to) } -> std::convertible_to<std::vector<TimedChunk>>;
};

inline constexpr Millis kFixWindowMs = 1000;

// Consumes the stream for exactly `window_ms`. Returns the last fix decoded
// inside the window, or the zero fix when none completed.
template <GpsByteSource Source>
nmea::GpsFix acquire_fix(nmea::Decoder& decoder, Source& source, Millis start,
                         Millis window_ms = kFixWindowMs) {
    bool found = false;
    for (const auto& chunk : source.read_window(start, start + window_ms)) {
        for (char c : chunk.bytes) found |= decoder.encode(c, chunk.at);
    }
    return found ? decoder.fix(start + window_ms) : nmea::GpsFix{};
}

namespace detail {
inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}
} // namespace detail

// Six fractional digits, then the first 8 bytes only. With `full_precision`
// the truncation is skipped.
inline std::string format_coord(double value, bool full_precision = false) {
    auto s = detail::fixed6(value);
    if (!full_precision && s.size() > 8) s.resize(8);
    return s;
}

inline std::string compose_location_text(const nmea::GpsFix& fix) {
    return "LAT=" + detail::fixed6(fix.latitude) + " LON=" + detail::fixed6(fix.longitude) +
           " SAT=" + std::to_string(fix.satellites) + " PREC=" + std::to_string(fix.hdop_hundredths);
}

inline std::string compose_maps_link(const nmea::GpsFix& fix, bool full_precision = false) {
    const auto lat = format_coord(fix.latitude, full_precision);
    const auto lon = format_coord(fix.longitude, full_precision);
    return "https://www.google.ro/maps/place/" + lat + "+" + lon + "/@" + lat + "," + lon + ",17z/";
}

} // namespace vtrack
