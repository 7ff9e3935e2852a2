#pragma once

// SMS command decoding and sender authentication.
//
// Command bodies are matched byte-for-byte against a fixed table: no case
// folding, no trimming, no prefix matching. Anything else is NoMatch and
// must not cause a visible reaction downstream.

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "vtrack/types.hpp"

namespace vtrack {

class PhoneNumber {
public:
    // Accepts "+<7..15 digits>" or "00<7..15 digits>", ignoring the usual
    // visual separators (space, '-', '.', parentheses).
    static std::optional<PhoneNumber> parse(std::string_view text) {
        std::string cleaned;
        cleaned.reserve(text.size());
        for (char c : text) {
            if (c == ' ' || c == '-' || c == '.' || c == '(' || c == ')') continue;
            cleaned.push_back(c);
        }
        std::string_view digits;
        if (cleaned.starts_with('+')) {
            digits = std::string_view(cleaned).substr(1);
        } else if (cleaned.starts_with("00")) {
            digits = std::string_view(cleaned).substr(2);
        } else {
            return std::nullopt;
        }
        if (digits.size() < 7 || digits.size() > 15) return std::nullopt;
        if (!std::all_of(digits.begin(), digits.end(),
                         [](char c) { return c >= '0' && c <= '9'; })) {
            return std::nullopt;
        }
        return PhoneNumber("+" + std::string(digits));
    }

    const std::string& str() const { return digits_; }

    friend bool operator==(const PhoneNumber&, const PhoneNumber&) = default;
    friend auto operator<=>(const PhoneNumber&, const PhoneNumber&) = default;

private:
    explicit PhoneNumber(std::string normalized) : digits_(std::move(normalized)) {}
    std::string digits_;
};

inline constexpr std::size_t kMaxSmsBody = 160;

// Printable ASCII only, at most 160 bytes.
inline bool is_valid_sms_body(std::string_view body) {
    return body.size() <= kMaxSmsBody &&
           std::all_of(body.begin(), body.end(), [](char c) { return c >= 0x20 && c <= 0x7e; });
}

struct SmsMessage {
    PhoneNumber sender;
    std::string body;
    Millis submitted_at = 0;
    Millis delivered_at = 0;
};

enum class Command {
    PositionLightsOn,
    PositionLightsOff,
    HeadLightsOn,
    HeadLightsOff,
    BrakeLightsOn,
    BrakeLightsOff,
    WarningOn,
    WarningOff,
    LocationOn,
    LocationOff,
    DoorsLock,
    DoorsUnlock,
};

inline constexpr std::size_t kCommandCount = 12;

inline constexpr std::string_view command_tag(Command c) {
    switch (c) {
    case Command::PositionLightsOn: return "PositionLightsOn";
    case Command::PositionLightsOff: return "PositionLightsOff";
    case Command::HeadLightsOn: return "HeadLightsOn";
    case Command::HeadLightsOff: return "HeadLightsOff";
    case Command::BrakeLightsOn: return "BrakeLightsOn";
    case Command::BrakeLightsOff: return "BrakeLightsOff";
    case Command::WarningOn: return "WarningOn";
    case Command::WarningOff: return "WarningOff";
    case Command::LocationOn: return "LocationOn";
    case Command::LocationOff: return "LocationOff";
    case Command::DoorsLock: return "DoorsLock";
    case Command::DoorsUnlock: return "DoorsUnlock";
    }
    return "";
}

struct CommandEntry {
    std::string_view text;
    std::size_t length;
    Command command;
};

using CommandTable = std::array<CommandEntry, kCommandCount>;

namespace detail {
constexpr CommandEntry entry(std::string_view text, Command c) { return {text, text.size(), c}; }
} // namespace detail

// Index character first ('0'..'9', 'a', 'b'), then the message text.
inline constexpr CommandTable canonical_command_table() {
    using detail::entry;
    return {{
        entry("0lights: ON", Command::PositionLightsOn),
        entry("1lights: OFF", Command::PositionLightsOff),
        entry("2head: ON", Command::HeadLightsOn),
        entry("3head: OFF", Command::HeadLightsOff),
        entry("4brake: ON", Command::BrakeLightsOn),
        entry("5brake: OFF", Command::BrakeLightsOff),
        entry("6warning: ON", Command::WarningOn),
        entry("7warning: OFF", Command::WarningOff),
        entry("8location: ON", Command::LocationOn),
        entry("9location: OFF", Command::LocationOff),
        entry("adoors: ON", Command::DoorsLock),
        entry("bdoors: OFF", Command::DoorsUnlock),
    }};
}

inline constexpr std::string_view canonical_text(Command c) {
    for (const auto& e : canonical_command_table()) {
        if (e.command == c) return e.text;
    }
    return {};
}

// Full-body byte equality. nullopt is NoMatch.
inline std::optional<Command> parse_command(std::string_view body) {
    for (const auto& e : canonical_command_table()) {
        if (body.size() == e.length && body == e.text) return e.command;
    }
    return std::nullopt;
}

struct AuthRegistry {
    PhoneNumber owner;
    std::set<PhoneNumber> additional_authorized;

    friend bool operator==(const AuthRegistry&, const AuthRegistry&) = default;
};

inline bool authenticate(const PhoneNumber& sender, const AuthRegistry& registry) {
    return sender == registry.owner || registry.additional_authorized.contains(sender);
}

inline AuthRegistry set_owner(AuthRegistry registry, PhoneNumber new_owner) {
    registry.owner = std::move(new_owner);
    return registry;
}

// Malformed numbers are rejected; the caller keeps its registry.
inline std::optional<AuthRegistry> set_owner(const AuthRegistry& registry, std::string_view new_owner) {
    auto number = PhoneNumber::parse(new_owner);
    if (!number) return std::nullopt;
    return set_owner(registry, *std::move(number));
}

} // namespace vtrack
