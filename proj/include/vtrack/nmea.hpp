#pragma once

// Streaming NMEA 0183 decoder for GGA and RMC position sentences.
//
// Bytes are fed one at a time. A sentence completes at its CR or LF and is
// accepted only with a correct "*hh" checksum. '$' always restarts
// accumulation. Other sentence types are skipped.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtrack/types.hpp"

namespace vtrack::nmea {

inline constexpr std::size_t kMaxSentence = 82;
inline constexpr Millis kInvalidAge = kNever;

inline std::string checksum(std::string_view body) {
    unsigned char x = 0;
    for (char c : body) x ^= static_cast<unsigned char>(c);
    static constexpr char hex[] = "0123456789ABCDEF";
    return {hex[x >> 4], hex[x & 0x0f]};
}

struct GpsFix {
    double latitude = 0.0;
    double longitude = 0.0;
    int satellites = 0;
    int hdop_hundredths = 0;
    Millis age_ms = kInvalidAge;
    bool valid = false;

    friend bool operator==(const GpsFix&, const GpsFix&) = default;
};

// "ddmm.mmmm" / "dddmm.mmmm" plus hemisphere -> signed decimal degrees.
inline std::optional<double> ddmm_to_degrees(std::string_view field, std::string_view hemisphere) {
    const auto dot = field.find('.');
    const auto int_len = dot == std::string_view::npos ? field.size() : dot;
    if (int_len < 3 || int_len > 5) return std::nullopt;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (i == dot) continue;
        if (field[i] < '0' || field[i] > '9') return std::nullopt;
    }
    int degrees = 0;
    for (std::size_t i = 0; i < int_len - 2; ++i) degrees = degrees * 10 + (field[i] - '0');
    double minutes = 0.0;
    const auto mins = field.substr(int_len - 2);
    if (std::from_chars(mins.data(), mins.data() + mins.size(), minutes).ec != std::errc{}) {
        return std::nullopt;
    }
    if (minutes >= 60.0) return std::nullopt;
    double value = degrees + minutes / 60.0;
    if (hemisphere == "S" || hemisphere == "W") {
        value = -value;
    } else if (hemisphere != "N" && hemisphere != "E") {
        return std::nullopt;
    }
    return value;
}

struct NmeaCoord {
    std::string field;
    char hemisphere;
};

namespace detail {
inline NmeaCoord to_ddmm(double degrees, int degree_digits, char pos, char neg) {
    // Units of 1e-4 arc minutes; integer carry keeps 59.99996' from printing as 60'.
    const auto total = std::llround(std::fabs(degrees) * 600000.0);
    const auto whole = total / 600000;
    const auto rem = total % 600000;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*lld%02lld.%04lld", degree_digits, static_cast<long long>(whole),
                  static_cast<long long>(rem / 10000), static_cast<long long>(rem % 10000));
    return {buf, (degrees < 0.0 && total != 0) ? neg : pos};
}
} // namespace detail

inline NmeaCoord latitude_to_ddmm(double degrees) { return detail::to_ddmm(degrees, 2, 'N', 'S'); }
inline NmeaCoord longitude_to_ddmm(double degrees) { return detail::to_ddmm(degrees, 3, 'E', 'W'); }

// HDOP text ("0.9", "1.25") -> hundredths, exact decimal parse.
inline std::optional<int> parse_hdop_hundredths(std::string_view text) {
    if (text.empty()) return std::nullopt;
    int whole = 0;
    int frac = 0;
    int frac_digits = 0;
    bool seen_dot = false;
    for (char c : text) {
        if (c == '.') {
            if (seen_dot) return std::nullopt;
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            if (!seen_dot) {
                whole = whole * 10 + (c - '0');
                if (whole > 99999) return std::nullopt;
            } else if (frac_digits < 2) {
                frac = frac * 10 + (c - '0');
                ++frac_digits;
            }
        } else {
            return std::nullopt;
        }
    }
    if (frac_digits == 1) frac *= 10;
    return whole * 100 + frac;
}

inline std::optional<int> parse_count(std::string_view text) {
    int v = 0;
    if (text.empty()) return std::nullopt;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size() || v < 0) return std::nullopt;
    return v;
}

class Decoder {
public:
    enum class Phase { Idle, InBody, InChecksum };

    // True exactly when this byte completes a checksum-valid sentence that
    // carried a position.
    bool encode(char c, Millis now = 0) {
        if (c == '$') {
            begin();
            return false;
        }
        switch (phase_) {
        case Phase::Idle:
            return false;
        case Phase::InBody:
            if (c == '*') {
                phase_ = Phase::InChecksum;
                push(c);
            } else if (c == '\r' || c == '\n') {
                phase_ = Phase::Idle;
            } else {
                running_ ^= static_cast<unsigned char>(c);
                push(c);
            }
            return false;
        case Phase::InChecksum:
            if (c == '\r' || c == '\n') {
                phase_ = Phase::Idle;
                return check_digits_ == 2 && finish(now);
            }
            if (check_digits_ < 2 && std::isxdigit(static_cast<unsigned char>(c))) {
                received_ = static_cast<unsigned char>((received_ << 4) | hex_value(c));
                ++check_digits_;
                push(c);
            } else {
                phase_ = Phase::Idle;
            }
            return false;
        }
        return false;
    }

    // Feeds a contiguous chunk; returns the fixes completed within it.
    std::vector<GpsFix> decode(std::string_view bytes, Millis now = 0) {
        std::vector<GpsFix> out;
        for (char c : bytes) {
            if (encode(c, now)) out.push_back(fix(now));
        }
        return out;
    }

    // Sentinel-mapped: without a fix every field reads zero and age is invalid.
    GpsFix fix(Millis now) const {
        if (!has_fix_) return {};
        GpsFix f = last_;
        f.age_ms = now - decoded_at_;
        return f;
    }

    int satellites() const { return has_fix_ ? last_.satellites : 0; }
    int hdop_hundredths() const { return has_fix_ ? last_.hdop_hundredths : 0; }
    Phase phase() const { return phase_; }
    std::size_t passed_checksums() const { return passed_; }
    std::size_t failed_checksums() const { return failed_; }

private:
    static int hex_value(char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return c - 'A' + 10;
    }

    void begin() {
        phase_ = Phase::InBody;
        len_ = 0;
        running_ = 0;
        received_ = 0;
        check_digits_ = 0;
        push('$');
    }

    void push(char c) {
        if (len_ >= kMaxSentence) {
            phase_ = Phase::Idle;
            return;
        }
        buf_[len_++] = c;
    }

    bool finish(Millis now) {
        if (received_ != running_) {
            ++failed_;
            return false;
        }
        ++passed_;
        // Strip leading '$' and trailing "*hh".
        std::string_view body(buf_.data() + 1, len_ - 4);
        std::array<std::string_view, 20> f{};
        std::size_t n = 0;
        for (std::size_t start = 0; n < f.size();) {
            const auto comma = body.find(',', start);
            f[n++] = body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (f[0].size() != 5) return false;
        const auto type = f[0].substr(2);
        if (type == "GGA" && n >= 9) return take_gga(f, now);
        if (type == "RMC" && n >= 7) return take_rmc(f, now);
        return false;
    }

    bool take_gga(const std::array<std::string_view, 20>& f, Millis now) {
        if (f[6].empty() || f[6] == "0") return false;
        auto lat = ddmm_to_degrees(f[2], f[3]);
        auto lon = ddmm_to_degrees(f[4], f[5]);
        auto sats = parse_count(f[7]);
        auto hdop = parse_hdop_hundredths(f[8]);
        if (!lat || !lon || !sats || !hdop) return false;
        return commit(*lat, *lon, *sats, *hdop, now);
    }

    bool take_rmc(const std::array<std::string_view, 20>& f, Millis now) {
        if (f[2] != "A") return false;
        auto lat = ddmm_to_degrees(f[3], f[4]);
        auto lon = ddmm_to_degrees(f[5], f[6]);
        if (!lat || !lon) return false;
        // RMC carries no satellite count or HDOP; keep the last GGA values.
        return commit(*lat, *lon, last_.satellites, last_.hdop_hundredths, now);
    }

    bool commit(double lat, double lon, int sats, int hdop, Millis now) {
        if (std::fabs(lat) > 90.0 || std::fabs(lon) > 180.0) return false;
        last_ = GpsFix{lat, lon, sats, hdop, 0, true};
        decoded_at_ = now;
        has_fix_ = true;
        return true;
    }

    Phase phase_ = Phase::Idle;
    std::array<char, kMaxSentence> buf_{};
    std::size_t len_ = 0;
    unsigned char running_ = 0;
    unsigned char received_ = 0;
    int check_digits_ = 0;

    GpsFix last_{};
    Millis decoded_at_ = 0;
    bool has_fix_ = false;
    std::size_t passed_ = 0;
    std::size_t failed_ = 0;
};

} // namespace vtrack::nmea
