#pragma once

// Synthetic GPS receiver: turns scenario waypoints into timed GGA sentences.

#include <algorithm>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "vtrack/location_reporter.hpp"
#include "vtrack/nmea.hpp"

namespace vtrack {

struct Waypoint {
    Millis at = 0;
    double latitude = 0.0;
    double longitude = 0.0;
    int satellites = 0;
    int hdop_hundredths = 0;
};

// One complete "$GPGGA,...*hh\r\n" sentence stamped with UTC-of-day `at`.
inline std::string make_gga(Millis at, double lat, double lon, int satellites, int hdop_hundredths) {
    const auto day_ms = ((at % 86400000) + 86400000) % 86400000;
    const auto la = nmea::latitude_to_ddmm(lat);
    const auto lo = nmea::longitude_to_ddmm(lon);
    char body[96];
    std::snprintf(body, sizeof body, "GPGGA,%02lld%02lld%02lld.%02lld,%s,%c,%s,%c,1,%02d,%d.%02d,0.0,M,0.0,M,,",
                  static_cast<long long>(day_ms / 3600000), static_cast<long long>(day_ms / 60000 % 60),
                  static_cast<long long>(day_ms / 1000 % 60), static_cast<long long>(day_ms / 10 % 100),
                  la.field.c_str(), la.hemisphere, lo.field.c_str(), lo.hemisphere, satellites,
                  hdop_hundredths / 100, hdop_hundredths % 100);
    return "$" + std::string(body) + "*" + nmea::checksum(body) + "\r\n";
}

inline TimedChunk to_nmea(const Waypoint& w) {
    return {w.at, make_gga(w.at, w.latitude, w.longitude, w.satellites, w.hdop_hundredths)};
}

// One GGA sentence per waypoint, emitted at the waypoint's timestamp.
inline std::vector<TimedChunk> waypoints_to_nmea(std::span<const Waypoint> waypoints) {
    std::vector<TimedChunk> out;
    out.reserve(waypoints.size());
    for (const auto& w : waypoints) out.push_back(to_nmea(w));
    return out;
}

// Emits a sentence at every waypoint and, like a real receiver, repeats the
// latest position every `period_ms` (0 disables repeats).
class GpsReceiver {
public:
    explicit GpsReceiver(Millis period_ms = 1000) : period_(period_ms) {}

    void add_waypoint(const Waypoint& w) {
        auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), w.at,
                                   [](Millis t, const Waypoint& x) { return t < x.at; });
        waypoints_.insert(it, w);
    }

    const std::vector<Waypoint>& waypoints() const { return waypoints_; }

    std::vector<TimedChunk> read_window(Millis from, Millis to) const {
        std::vector<TimedChunk> out;
        for (const auto& w : waypoints_) {
            if (w.at >= from && w.at < to) out.push_back(to_nmea(w));
        }
        if (period_ > 0 && !waypoints_.empty()) {
            Millis tick = ((from + period_ - 1) / period_) * period_;
            for (; tick < to; tick += period_) {
                const Waypoint* latest = nullptr;
                bool exact = false;
                for (const auto& w : waypoints_) {
                    if (w.at > tick) break;
                    latest = &w;
                    exact = (w.at == tick);
                }
                if (latest && !exact) {
                    Waypoint repeat = *latest;
                    repeat.at = tick;
                    out.push_back(to_nmea(repeat));
                }
            }
        }
        std::stable_sort(out.begin(), out.end(), [](const TimedChunk& a, const TimedChunk& b) { return a.at < b.at; });
        return out;
    }

private:
    Millis period_;
    std::vector<Waypoint> waypoints_;
};

} // namespace vtrack
