#pragma once

// Line-oriented scenario files. See docs/scenario-format.md for the grammar.
//
//   # comment
//   set <key> <value>
//   <at_ms> sms <from> <body...>
//   <at_ms> waypoint <lat> <lon> <sats> <hdop_hundredths>
//   <at_ms> power main|backup on|off
//   <at_ms> restart

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vtrack/command_protocol.hpp"
#include "vtrack/gps_receiver.hpp"

namespace vtrack {

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::size_t line, std::size_t column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct InboundSms {
    PhoneNumber from;
    std::string body;
};

enum class PowerSource { Main, Backup };

struct PowerChange {
    PowerSource source;
    bool on;
};

struct Restart {};

struct ScenarioEvent {
    Millis at = 0;
    std::variant<InboundSms, Waypoint, PowerChange, Restart> kind = Restart{};
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::optional<Millis> attach_delay_ms = 60000; // nullopt: never registers
    Millis attach_deadline_ms = 120000;
    bool ack_mode = false;
    Millis loop_tick_ms = 100;
    Millis latency_min_ms = 4000;
    Millis latency_max_ms = 6000;
    PhoneNumber owner = *PhoneNumber::parse("+40700000001");
    std::vector<PhoneNumber> authorized;
    PhoneNumber vehicle_number = *PhoneNumber::parse("+40700000000");
    Millis location_period_ms = 0;
    bool full_precision = false;
    Millis gps_period_ms = 1000;
    Millis fix_window_ms = 1000;
    Millis drain_ms = 15000;
    Millis end_ms = 0;
    bool store_and_forward = false;
    bool power_main = true;
    bool power_backup = true;
};

struct Scenario {
    ScenarioConfig config;
    std::vector<ScenarioEvent> events;
};

namespace detail {

struct Token {
    std::string_view text;
    std::size_t column;
};

inline std::vector<Token> tokenize(std::string_view line, std::size_t max_tokens) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size() && out.size() < max_tokens) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size()) break;
        const auto start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

template <class T>
T parse_number(const Token& t, std::size_t line_no, std::string_view what) {
    T v{};
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || p != t.text.data() + t.text.size()) {
        throw ScenarioError(line_no, t.column, "expected " + std::string(what) + ", got '" + std::string(t.text) + "'");
    }
    return v;
}

inline bool parse_bool(const Token& t, std::size_t line_no) {
    if (t.text == "true" || t.text == "on" || t.text == "1") return true;
    if (t.text == "false" || t.text == "off" || t.text == "0") return false;
    throw ScenarioError(line_no, t.column, "expected boolean, got '" + std::string(t.text) + "'");
}

inline PhoneNumber parse_phone(const Token& t, std::size_t line_no) {
    auto n = PhoneNumber::parse(t.text);
    if (!n) throw ScenarioError(line_no, t.column, "malformed phone number '" + std::string(t.text) + "'");
    return *n;
}

inline Millis parse_ms(const Token& t, std::size_t line_no) {
    const auto v = parse_number<Millis>(t, line_no, "milliseconds");
    if (v < 0) throw ScenarioError(line_no, t.column, "negative time");
    return v;
}

inline void apply_setting(ScenarioConfig& c, const Token& key, const Token& value, std::size_t ln) {
    const auto k = key.text;
    if (k == "seed") c.seed = parse_number<std::uint64_t>(value, ln, "integer seed");
    else if (k == "attach_delay_ms") c.attach_delay_ms = value.text == "never" ? std::nullopt : std::optional(parse_ms(value, ln));
    else if (k == "attach_deadline_ms") c.attach_deadline_ms = parse_ms(value, ln);
    else if (k == "ack_mode") c.ack_mode = parse_bool(value, ln);
    else if (k == "loop_tick_ms") c.loop_tick_ms = parse_ms(value, ln);
    else if (k == "latency_min_ms") c.latency_min_ms = parse_ms(value, ln);
    else if (k == "latency_max_ms") c.latency_max_ms = parse_ms(value, ln);
    else if (k == "owner") c.owner = parse_phone(value, ln);
    else if (k == "authorized") c.authorized.push_back(parse_phone(value, ln));
    else if (k == "vehicle_number") c.vehicle_number = parse_phone(value, ln);
    else if (k == "location_period_ms") c.location_period_ms = parse_ms(value, ln);
    else if (k == "full_precision") c.full_precision = parse_bool(value, ln);
    else if (k == "gps_period_ms") c.gps_period_ms = parse_ms(value, ln);
    else if (k == "fix_window_ms") c.fix_window_ms = parse_ms(value, ln);
    else if (k == "drain_ms") c.drain_ms = parse_ms(value, ln);
    else if (k == "end_ms") c.end_ms = parse_ms(value, ln);
    else if (k == "store_and_forward") c.store_and_forward = parse_bool(value, ln);
    else if (k == "power_main") c.power_main = parse_bool(value, ln);
    else if (k == "power_backup") c.power_backup = parse_bool(value, ln);
    else throw ScenarioError(ln, key.column, "unknown setting '" + std::string(k) + "'");
}

} // namespace detail

inline Scenario parse_scenario(std::istream& in) {
    using namespace detail;
    Scenario s;
    std::string raw;
    std::size_t ln = 0;
    Millis last_at = 0;
    while (std::getline(in, raw)) {
        ++ln;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        auto head = tokenize(line, 3);
        if (head.empty() || head[0].text.starts_with('#')) continue;

        if (head[0].text == "set") {
            auto t = tokenize(line, 4);
            if (t.size() != 3) throw ScenarioError(ln, head[0].column, "expected 'set <key> <value>'");
            apply_setting(s.config, t[1], t[2], ln);
            continue;
        }

        ScenarioEvent ev;
        ev.at = parse_ms(head[0], ln);
        if (ev.at < last_at) throw ScenarioError(ln, head[0].column, "event time goes backwards");
        last_at = ev.at;
        if (head.size() < 2) throw ScenarioError(ln, line.size() + 1, "missing event kind");
        const auto kind = head[1];

        if (kind.text == "sms") {
            if (head.size() < 3) throw ScenarioError(ln, line.size() + 1, "expected sender");
            const auto from = parse_phone(head[2], ln);
            // The body is everything after exactly one separator, verbatim.
            const auto body_col = head[2].column - 1 + head[2].text.size() + 1;
            std::string body = body_col <= line.size() ? std::string(line.substr(body_col)) : std::string();
            if (!is_valid_sms_body(body)) {
                throw ScenarioError(ln, body_col + 1, "SMS body must be printable ASCII, at most 160 bytes");
            }
            ev.kind = InboundSms{from, std::move(body)};
        } else if (kind.text == "waypoint") {
            auto t = tokenize(line, 7);
            if (t.size() != 6) throw ScenarioError(ln, kind.column, "expected 'waypoint <lat> <lon> <sats> <hdop>'");
            Waypoint w{ev.at, parse_number<double>(t[2], ln, "latitude"), parse_number<double>(t[3], ln, "longitude"),
                       parse_number<int>(t[4], ln, "satellite count"), parse_number<int>(t[5], ln, "hdop hundredths")};
            if (w.latitude < -90 || w.latitude > 90) throw ScenarioError(ln, t[2].column, "latitude out of range");
            if (w.longitude < -180 || w.longitude > 180) throw ScenarioError(ln, t[3].column, "longitude out of range");
            if (w.satellites < 0 || w.satellites > 99) throw ScenarioError(ln, t[4].column, "satellite count out of range");
            if (w.hdop_hundredths < 0 || w.hdop_hundredths > 9999) throw ScenarioError(ln, t[5].column, "hdop out of range");
            ev.kind = w;
        } else if (kind.text == "power") {
            auto t = tokenize(line, 5);
            if (t.size() != 4) throw ScenarioError(ln, kind.column, "expected 'power main|backup on|off'");
            PowerChange p{};
            if (t[2].text == "main") p.source = PowerSource::Main;
            else if (t[2].text == "backup") p.source = PowerSource::Backup;
            else throw ScenarioError(ln, t[2].column, "expected 'main' or 'backup'");
            if (t[3].text == "on") p.on = true;
            else if (t[3].text == "off") p.on = false;
            else throw ScenarioError(ln, t[3].column, "expected 'on' or 'off'");
            ev.kind = p;
        } else if (kind.text == "restart") {
            if (tokenize(line, 3).size() != 2) throw ScenarioError(ln, kind.column, "restart takes no arguments");
            ev.kind = Restart{};
        } else {
            throw ScenarioError(ln, kind.column, "unknown event kind '" + std::string(kind.text) + "'");
        }
        s.events.push_back(std::move(ev));
    }
    if (s.config.latency_min_ms > s.config.latency_max_ms) {
        throw ScenarioError(ln, 1, "latency_min_ms exceeds latency_max_ms");
    }
    if (s.config.loop_tick_ms <= 0) throw ScenarioError(ln, 1, "loop_tick_ms must be positive");
    return s;
}

inline Scenario parse_scenario(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_scenario(in);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario '" + path + "'");
    return parse_scenario(in);
}

// Config block as "set" lines, enough to reproduce `c` through parse_scenario.
inline std::string format_config(const ScenarioConfig& c) {
    auto b = [](bool v) { return v ? "true" : "false"; };
    std::string out;
    out += "set seed " + std::to_string(c.seed) + "\n";
    out += "set attach_delay_ms " + (c.attach_delay_ms ? std::to_string(*c.attach_delay_ms) : "never") + "\n";
    out += "set attach_deadline_ms " + std::to_string(c.attach_deadline_ms) + "\n";
    out += std::string("set ack_mode ") + b(c.ack_mode) + "\n";
    out += "set loop_tick_ms " + std::to_string(c.loop_tick_ms) + "\n";
    out += "set latency_min_ms " + std::to_string(c.latency_min_ms) + "\n";
    out += "set latency_max_ms " + std::to_string(c.latency_max_ms) + "\n";
    out += "set owner " + c.owner.str() + "\n";
    for (const auto& a : c.authorized) out += "set authorized " + a.str() + "\n";
    out += "set vehicle_number " + c.vehicle_number.str() + "\n";
    out += "set location_period_ms " + std::to_string(c.location_period_ms) + "\n";
    out += std::string("set full_precision ") + b(c.full_precision) + "\n";
    out += "set gps_period_ms " + std::to_string(c.gps_period_ms) + "\n";
    out += "set fix_window_ms " + std::to_string(c.fix_window_ms) + "\n";
    out += "set drain_ms " + std::to_string(c.drain_ms) + "\n";
    out += "set end_ms " + std::to_string(c.end_ms) + "\n";
    out += std::string("set store_and_forward ") + b(c.store_and_forward) + "\n";
    out += std::string("set power_main ") + b(c.power_main) + "\n";
    out += std::string("set power_backup ") + b(c.power_backup) + "\n";
    return out;
}

// Event line in the same syntax parse_scenario reads.
inline std::string format_event(const ScenarioEvent& ev) {
    std::string out = std::to_string(ev.at) + " ";
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, InboundSms>) {
                out += "sms " + k.from.str() + " " + k.body;
            } else if constexpr (std::is_same_v<K, Waypoint>) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "waypoint %.9g %.9g %d %d", k.latitude, k.longitude, k.satellites,
                              k.hdop_hundredths);
                out += buf;
            } else if constexpr (std::is_same_v<K, PowerChange>) {
                out += std::string("power ") + (k.source == PowerSource::Main ? "main" : "backup") +
                       (k.on ? " on" : " off");
            } else {
                out += "restart";
            }
        },
        ev.kind);
    return out;
}

} // namespace vtrack
