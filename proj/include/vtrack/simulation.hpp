#pragma once

// Discrete-event driver. The scheduler owns virtual time; at each instant it
// handles, in order: scenario events (file order), network deliveries
// (due time, then submission order), then one firmware loop iteration.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vtrack/firmware.hpp"
#include "vtrack/gps_receiver.hpp"
#include "vtrack/gsm_modem.hpp"
#include "vtrack/scenario.hpp"
#include "vtrack/transcript.hpp"

namespace vtrack {

struct PowerModel {
    bool main = true;
    bool backup = true;

    bool powered() const { return main || backup; }
};

class Simulation {
public:
    using Controller = Firmware<ModemSim, GpsReceiver>;

    explicit Simulation(Scenario scenario)
        : config_(std::move(scenario.config)),
          modem_(config_.vehicle_number, config_.attach_delay_ms, &transcript_),
          network_(config_.seed, config_.latency_min_ms, config_.latency_max_ms),
          gps_(config_.gps_period_ms),
          firmware_(firmware_config(config_), modem_, gps_, transcript_) {
        power_.main = config_.power_main;
        power_.backup = config_.power_backup;
        for (auto& ev : scenario.events) schedule(std::move(ev));
    }

    // Last scheduled stimulus plus the drain window, or end_ms if later.
    Millis end_time() const {
        return std::max(last_event_at_ + config_.drain_ms, config_.end_ms);
    }

    const Transcript& run() {
        advance_to(end_time() + 1);
        return transcript_;
    }

    // Processes every instant strictly before `limit`; afterwards now() == limit.
    void advance_to(Millis limit) {
        boot();
        for (;;) {
            Millis t = kNever;
            if (!events_.empty()) t = std::min(t, events_.begin()->first.first);
            if (auto due = network_.next_due()) t = std::min(t, *due);
            if (power_.powered()) t = std::min(t, firmware_.next_wake());
            if (t >= limit || t == kNever) break;
            now_ = t;

            while (!events_.empty() && events_.begin()->first.first == t) {
                auto ev = std::move(events_.begin()->second);
                events_.erase(events_.begin());
                handle(ev);
            }
            for (auto& env : network_.pop_due(t)) deliver(std::move(env));
            if (power_.powered() && firmware_.next_wake() <= t) {
                firmware_.step(t);
                drain_outbox();
            }
        }
        if (limit != kNever) now_ = std::max(now_, limit);
    }

    // Queues a stimulus at the current virtual time.
    ScenarioEvent inject(ScenarioEvent ev) {
        ev.at = now_;
        schedule(ev);
        return ev;
    }

    Millis now() const { return now_; }
    Transcript& transcript() { return transcript_; }
    const Transcript& transcript() const { return transcript_; }
    const VehicleState& state() const { return firmware_.state(); }
    Controller::Phase phase() const { return firmware_.phase(); }
    const ModemSim& modem() const { return modem_; }
    const ScenarioConfig& config() const { return config_; }
    const PowerModel& power() const { return power_; }

private:
    static FirmwareConfig firmware_config(const ScenarioConfig& c) {
        AuthRegistry registry{c.owner, {c.authorized.begin(), c.authorized.end()}};
        return FirmwareConfig{registry,          c.ack_mode,      c.location_period_ms, c.full_precision,
                              c.attach_deadline_ms, c.loop_tick_ms, c.fix_window_ms};
    }

    void schedule(ScenarioEvent ev) {
        const auto at = ev.at;
        last_event_at_ = std::max(last_event_at_, at);
        events_.emplace(std::pair{at, next_seq_++}, std::move(ev));
    }

    void boot() {
        if (booted_) return;
        booted_ = true;
        transcript_.add(0, "harness", "boot",
                        Json{{"seed", config_.seed}, {"main", power_.main}, {"backup", power_.backup}});
        if (power_.powered()) power_up(0);
    }

    void power_up(Millis t) {
        modem_.power_on(t);
        firmware_.setup(t);
        for (auto& env : std::exchange(held_, {})) deliver_to_vehicle(std::move(env), t);
    }

    void handle(const ScenarioEvent& ev) {
        const Millis t = ev.at;
        if (const auto* sms = std::get_if<InboundSms>(&ev.kind)) {
            const auto& env = network_.submit(sms->from, config_.vehicle_number, sms->body, t);
            transcript_.add(t, "phone", "sms_submitted",
                            Json{{"id", env.id}, {"from", sms->from.str()}, {"to", config_.vehicle_number.str()},
                                 {"body", sms->body}});
        } else if (const auto* w = std::get_if<Waypoint>(&ev.kind)) {
            gps_.add_waypoint(*w);
            transcript_.add(t, "scenario", "waypoint",
                            Json{{"lat", format_coord(w->latitude, true)}, {"lon", format_coord(w->longitude, true)},
                                 {"sats", w->satellites}, {"hdop", w->hdop_hundredths}});
        } else if (const auto* p = std::get_if<PowerChange>(&ev.kind)) {
            const bool was = power_.powered();
            (p->source == PowerSource::Main ? power_.main : power_.backup) = p->on;
            transcript_.add(t, "harness", "power",
                            Json{{"source", p->source == PowerSource::Main ? "main" : "backup"},
                                 {"on", p->on},
                                 {"powered", power_.powered()}});
            if (was && !power_.powered()) {
                modem_.power_off();
                firmware_.halt();
                transcript_.add(t, "harness", "power_lost");
            } else if (!was && power_.powered()) {
                transcript_.add(t, "harness", "power_restored");
                power_up(t);
            }
        } else {
            if (power_.powered()) {
                transcript_.add(t, "harness", "restart");
                firmware_.setup(t);
            } else {
                transcript_.add(t, "harness", "restart_ignored");
            }
        }
    }

    void deliver(Envelope env) {
        if (env.to == config_.vehicle_number) return deliver_to_vehicle(std::move(env), now_);
        env.message.delivered_at = now_;
        transcript_.add(now_, "network", "sms_delivered", delivered_json(env));
    }

    void deliver_to_vehicle(Envelope env, Millis t) {
        if (!power_.powered()) {
            const Json info{{"id", env.id}, {"from", env.message.sender.str()}, {"to", env.to.str()}};
            if (config_.store_and_forward) {
                transcript_.add(t, "network", "sms_held", info);
                held_.push_back(std::move(env));
            } else {
                Json dropped = info;
                dropped["reason"] = "unpowered";
                transcript_.add(t, "network", "sms_dropped", dropped);
            }
            return;
        }
        env.message.delivered_at = t;
        transcript_.add(t, "network", "sms_delivered", delivered_json(env));
        modem_.deliver(env.id, env.message);
    }

    static Json delivered_json(const Envelope& env) {
        return Json{{"id", env.id},
                    {"from", env.message.sender.str()},
                    {"to", env.to.str()},
                    {"body", env.message.body},
                    {"submitted_at", env.message.submitted_at},
                    {"latency_ms", env.message.delivered_at - env.message.submitted_at}};
    }

    void drain_outbox() {
        for (auto& out : modem_.take_outbox()) {
            const auto& env = network_.submit(config_.vehicle_number, out.to, out.body, out.at);
            transcript_.add(out.at, "modem", "sms_submitted",
                            Json{{"id", env.id}, {"from", config_.vehicle_number.str()}, {"to", out.to.str()},
                                 {"body", out.body}});
        }
    }

    ScenarioConfig config_;
    Transcript transcript_;
    ModemSim modem_;
    NetworkModel network_;
    GpsReceiver gps_;
    Controller firmware_;
    PowerModel power_;

    std::map<std::pair<Millis, std::uint64_t>, ScenarioEvent> events_;
    std::uint64_t next_seq_ = 0;
    Millis last_event_at_ = 0;
    std::vector<Envelope> held_;
    Millis now_ = 0;
    bool booted_ = false;
};

inline std::string run_to_jsonl(Scenario scenario) {
    Simulation sim(std::move(scenario));
    return sim.run().to_jsonl();
}

} // namespace vtrack
