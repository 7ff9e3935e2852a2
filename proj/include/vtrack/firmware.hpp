#pragma once

// The vehicle controller program: boot, wait for GSM registration with the
// red/green indicator protocol, then poll the modem for one SMS per loop
// iteration and act on authenticated, exactly-matching commands.
//
// Firmware talks to its peripherals only through the modem's AT surface and
// the GPS byte stream, and reports what it does as transcript records.

#include <concepts>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtrack/command_protocol.hpp"
#include "vtrack/location_reporter.hpp"
#include "vtrack/transcript.hpp"
#include "vtrack/vehicle_state.hpp"

namespace vtrack {

template <class M>
concept AtModem = requires(M& m, std::string_view line, Millis now) {
    { m.at_execute(line, now) } -> std::convertible_to<std::vector<std::string>>;
};

struct FirmwareConfig {
    AuthRegistry registry;
    bool ack_mode = false;
    Millis location_period_ms = 0; // 0: one report per request
    bool full_precision = false;
    Millis attach_deadline_ms = 120000;
    Millis loop_tick_ms = 100;
    Millis fix_window_ms = kFixWindowMs;
};

template <AtModem Modem, GpsByteSource Gps>
class Firmware {
public:
    enum class Phase { Off, Attaching, Running, Acquiring, Error };

    Firmware(FirmwareConfig config, Modem& modem, Gps& gps, Transcript& transcript)
        : config_(std::move(config)), modem_(modem), gps_(gps), log_(transcript) {}

    // Power-on or reset: everything returns to the initial state.
    void setup(Millis now) {
        state_ = initial_state();
        decoder_ = nmea::Decoder{};
        phase_ = Phase::Attaching;
        setup_at_ = now;
        next_wake_ = now;
        periodic_to_.reset();
        log_.add(now, "firmware", "setup");
        log_.add(now, "firmware", "state", state_json(state_));
        modem_.at_execute("AT", now);
    }

    void halt() {
        phase_ = Phase::Off;
        next_wake_ = kNever;
    }

    Phase phase() const { return phase_; }
    const VehicleState& state() const { return state_; }
    const FirmwareConfig& config() const { return config_; }
    Millis next_wake() const { return next_wake_; }

    void set_registry(AuthRegistry registry) { config_.registry = std::move(registry); }

    // One loop iteration at `now`; schedules the next wake-up.
    void step(Millis now) {
        switch (phase_) {
        case Phase::Off:
        case Phase::Error:
            next_wake_ = kNever;
            return;
        case Phase::Attaching:
            return attach_poll(now);
        case Phase::Acquiring:
            return finish_location(now);
        case Phase::Running:
            if (!poll_inbox(now) && periodic_to_ && now >= next_periodic_) {
                next_periodic_ += config_.location_period_ms;
                begin_location(*periodic_to_, now);
                return;
            }
            if (phase_ == Phase::Running) next_wake_ = now + config_.loop_tick_ms;
            return;
        }
    }

private:
    static bool has_line(const std::vector<std::string>& lines, std::string_view want) {
        for (const auto& l : lines) {
            if (l == want) return true;
        }
        return false;
    }

    void attach_poll(Millis now) {
        const auto resp = modem_.at_execute("AT+CREG?", now);
        const bool registered = has_line(resp, "+CREG: 0,1") || has_line(resp, "+CREG: 0,5");
        if (registered && has_line(modem_.at_execute("AT+CMGF=1", now), "OK")) {
            state_.gsm_ready = true;
            phase_ = Phase::Running;
            next_wake_ = now + config_.loop_tick_ms;
            log_.add(now, "firmware", "gsm_ready");
            log_.add(now, "firmware", "state", state_json(state_));
            return;
        }
        if (now - setup_at_ >= config_.attach_deadline_ms) {
            phase_ = Phase::Error;
            next_wake_ = kNever;
            log_.add(now, "firmware", "gsm_attach_failed");
            return;
        }
        next_wake_ = now + config_.loop_tick_ms;
    }

    // Returns true when a message was consumed this iteration.
    bool poll_inbox(Millis now) {
        const auto resp = modem_.at_execute("AT+CMGR=1", now);
        if (has_line(resp, "ERROR")) {
            log_.add(now, "firmware", "modem_error", Json{{"command", "AT+CMGR=1"}});
            return false;
        }
        std::optional<std::string> sender;
        std::string body;
        for (std::size_t i = 0; i < resp.size(); ++i) {
            if (!resp[i].starts_with("+CMGR:")) continue;
            // +CMGR: "REC UNREAD","<sender>",,"<scts>"
            const auto& h = resp[i];
            const auto q1 = h.find('"', h.find(',') + 1);
            const auto q2 = q1 == std::string::npos ? q1 : h.find('"', q1 + 1);
            if (q2 != std::string::npos) sender = h.substr(q1 + 1, q2 - q1 - 1);
            if (i + 1 < resp.size() && resp[i + 1] != "OK") body = resp[i + 1];
            break;
        }
        if (!sender) return false;
        modem_.at_execute("AT+CMGD=1", now);

        const auto from = PhoneNumber::parse(*sender);
        if (!from || !authenticate(*from, config_.registry)) {
            log_.add(now, "firmware", "auth_rejected", Json{{"from", *sender}});
            return true;
        }
        const auto command = parse_command(body);
        if (!command) {
            log_.add(now, "firmware", "cmd_ignored", Json{{"from", *sender}, {"body", body}});
            return true;
        }
        dispatch(*command, *from, now);
        return true;
    }

    void dispatch(Command command, const PhoneNumber& from, Millis now) {
        const auto [next, effects] = apply(state_, command);
        state_ = next;
        log_.add(now, "firmware", "cmd_applied",
                 Json{{"from", from.str()}, {"command", command_tag(command)}, {"text", canonical_text(command)}});
        if (effects.strobe) {
            const auto& m = *effects.strobe;
            log_.add(now, "firmware", "mux_strobe",
                     Json{{"s0", m.s0}, {"s1", m.s1}, {"s2", m.s2}, {"channel", m.channel()}});
        }
        log_.add(now, "firmware", "state", state_json(state_));

        switch (command) {
        case Command::LocationOn:
            if (config_.location_period_ms > 0) {
                periodic_to_ = from;
                next_periodic_ = now + config_.location_period_ms;
            }
            begin_location(from, now);
            return;
        case Command::LocationOff:
            periodic_to_.reset();
            return;
        default:
            if (config_.ack_mode) send_sms(from, canonical_text(command), now);
            return;
        }
    }

    void begin_location(const PhoneNumber& to, Millis now) {
        phase_ = Phase::Acquiring;
        acquire_start_ = now;
        acquire_for_ = to;
        next_wake_ = now + config_.fix_window_ms;
    }

    void finish_location(Millis now) {
        const auto fix = acquire_fix(decoder_, gps_, acquire_start_, config_.fix_window_ms);
        log_.add(now, "firmware", "location_fix", Json{{"text", compose_location_text(fix)}});
        phase_ = Phase::Running;
        next_wake_ = now + config_.loop_tick_ms;
        if (acquire_for_) send_sms(*acquire_for_, compose_maps_link(fix, config_.full_precision), now);
    }

    void send_sms(const PhoneNumber& to, std::string_view body, Millis now) {
        const auto cmd = "AT+CMGS=\"" + to.str() + "\"";
        if (!has_line(modem_.at_execute(cmd, now), "> ")) {
            log_.add(now, "firmware", "modem_error", Json{{"command", "AT+CMGS"}});
            return;
        }
        if (!has_line(modem_.at_execute(std::string(body) + kCtrlZChar, now), "OK")) {
            log_.add(now, "firmware", "modem_error", Json{{"command", "AT+CMGS"}});
        }
    }

    static constexpr char kCtrlZChar = 0x1a;

    FirmwareConfig config_;
    Modem& modem_;
    Gps& gps_;
    Transcript& log_;

    VehicleState state_ = initial_state();
    nmea::Decoder decoder_;
    Phase phase_ = Phase::Off;
    Millis setup_at_ = 0;
    Millis next_wake_ = kNever;

    Millis acquire_start_ = 0;
    std::optional<PhoneNumber> acquire_for_;
    std::optional<PhoneNumber> periodic_to_;
    Millis next_periodic_ = 0;
};

} // namespace vtrack
