#pragma once

// Simulated GSM modem with a text-mode AT command surface, and the SMS
// network that carries messages between endpoints with bounded latency.
//
// Supported commands (echo off, "\r" terminated, responses "\r\n"-framed):
//   AT                 -> OK
//   AT+CMGF=1          -> OK          (AT+CMGF=0 and others -> ERROR)
//   AT+CREG?           -> +CREG: 0,1 when registered, else +CREG: 0,2
//   AT+CMGS="<number>" -> "> " prompt; body then 0x1A -> +CMGS: <mr>, OK
//   AT+CMGR=<i>        -> +CMGR: "REC UNREAD","<from>",,"<scts>", body, OK
//   AT+CMGD=<i>        -> OK
// Before registration only AT and AT+CREG? succeed.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vtrack/command_protocol.hpp"
#include "vtrack/transcript.hpp"

namespace vtrack {

inline constexpr Millis kDefaultAttachDelayMs = 60000;
inline constexpr char kCtrlZ = 0x1a;
inline constexpr char kEsc = 0x1b;

// GSM service-centre timestamp, "yy/MM/dd,hh:mm:ss+zz", virtual epoch 2000-01-01.
inline std::string scts(Millis t) {
    using namespace std::chrono;
    const auto day = floor<days>(milliseconds(t));
    const year_month_day ymd{sys_days{year{2000} / January / 1} + day};
    const hh_mm_ss hms{milliseconds(t) - day};
    char buf[48];
    std::snprintf(buf, sizeof buf, "%02d/%02u/%02u,%02ld:%02ld:%02ld+00", static_cast<int>(ymd.year()) % 100,
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

struct StoredSms {
    std::uint64_t id = 0;
    SmsMessage message;
    bool read = false;
};

struct OutgoingSms {
    PhoneNumber to;
    std::string body;
    Millis at = 0;
    int reference = 0;
};

class ModemSim {
public:
    // nullopt attach delay: the modem never registers.
    ModemSim(PhoneNumber sim_number, std::optional<Millis> attach_delay_ms = kDefaultAttachDelayMs,
             Transcript* transcript = nullptr)
        : sim_number_(std::move(sim_number)), attach_delay_(attach_delay_ms), transcript_(transcript) {}

    void power_on(Millis now) {
        powered_ = true;
        powered_at_ = now;
        text_mode_ = false;
        awaiting_body_ = false;
        line_.clear();
        output_.clear();
    }

    void power_off() {
        powered_ = false;
        awaiting_body_ = false;
        line_.clear();
        output_.clear();
    }

    bool powered() const { return powered_; }
    Millis powered_at() const { return powered_at_; }
    std::optional<Millis> attach_delay() const { return attach_delay_; }
    Millis ready_at() const { return attach_delay_ ? powered_at_ + *attach_delay_ : kNever; }
    bool registered(Millis now) const { return powered_ && now >= ready_at(); }
    bool text_mode() const { return text_mode_; }
    const PhoneNumber& sim_number() const { return sim_number_; }

    // Host -> modem bytes. Responses accumulate for read().
    void write(std::string_view bytes, Millis now) {
        if (!powered_) return;
        for (char c : bytes) {
            if (awaiting_body_) {
                if (c == kCtrlZ) {
                    submit_body(now);
                } else if (c == kEsc) {
                    awaiting_body_ = false;
                    body_.clear();
                    respond("OK");
                } else {
                    body_.push_back(c);
                }
            } else if (c == '\r') {
                execute(line_, now);
                line_.clear();
            } else if (c == '\n') {
                continue;
            } else {
                line_.push_back(c);
            }
        }
    }

    // Modem -> host bytes since the last read.
    std::string read() { return std::exchange(output_, {}); }

    // One command line (or, at the "> " prompt, an SMS body ending in 0x1A),
    // returning the response lines with framing stripped.
    std::vector<std::string> at_execute(std::string_view line, Millis now) {
        if (awaiting_body_) {
            write(line, now);
        } else {
            write(std::string(line) + "\r", now);
        }
        std::vector<std::string> lines;
        std::string_view out = output_;
        while (!out.empty()) {
            const auto crlf = out.find("\r\n");
            const auto piece = out.substr(0, crlf);
            if (!piece.empty()) lines.emplace_back(piece);
            if (crlf == std::string_view::npos) break;
            out.remove_prefix(crlf + 2);
        }
        output_.clear();
        return lines;
    }

    // Network side.
    void deliver(std::uint64_t id, SmsMessage message) { inbox_.push_back({id, std::move(message), false}); }

    std::vector<OutgoingSms> take_outbox() { return std::exchange(outbox_, {}); }

    const std::deque<StoredSms>& inbox() const { return inbox_; }

private:
    void respond(std::string_view line) {
        output_ += "\r\n";
        output_ += line;
        output_ += "\r\n";
    }

    static std::optional<std::size_t> parse_index(std::string_view s) {
        if (s.empty() || s.size() > 3) return std::nullopt;
        std::size_t v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + static_cast<std::size_t>(c - '0');
        }
        if (v == 0) return std::nullopt;
        return v;
    }

    void execute(std::string_view cmd, Millis now) {
        if (cmd == "AT") return respond("OK");
        if (cmd == "AT+CREG?") {
            respond(registered(now) ? "+CREG: 0,1" : "+CREG: 0,2");
            return respond("OK");
        }
        if (!registered(now)) return respond("ERROR");

        if (cmd == "AT+CMGF=1") {
            text_mode_ = true;
            return respond("OK");
        }
        if (cmd.starts_with("AT+CMGS=") && text_mode_) {
            auto arg = cmd.substr(8);
            if (arg.size() < 2 || arg.front() != '"' || arg.back() != '"') return respond("ERROR");
            auto to = PhoneNumber::parse(arg.substr(1, arg.size() - 2));
            if (!to) return respond("ERROR");
            pending_to_ = *to;
            awaiting_body_ = true;
            body_.clear();
            output_ += "\r\n> ";
            return;
        }
        if (cmd.starts_with("AT+CMGR=") && text_mode_) {
            auto index = parse_index(cmd.substr(8));
            if (!index) return respond("ERROR");
            if (*index <= inbox_.size()) {
                auto& slot = inbox_[*index - 1];
                respond("+CMGR: \"" + std::string(slot.read ? "REC READ" : "REC UNREAD") + "\",\"" +
                        slot.message.sender.str() + "\",,\"" + scts(slot.message.submitted_at) + "\"");
                respond(slot.message.body);
                slot.read = true;
                if (transcript_) {
                    transcript_->add(now, "modem", "sms_read", Json{{"id", slot.id}, {"slot", *index}});
                }
            }
            return respond("OK");
        }
        if (cmd.starts_with("AT+CMGD=")) {
            auto index = parse_index(cmd.substr(8));
            if (!index) return respond("ERROR");
            if (*index <= inbox_.size()) inbox_.erase(inbox_.begin() + static_cast<std::ptrdiff_t>(*index - 1));
            return respond("OK");
        }
        respond("ERROR");
    }

    void submit_body(Millis now) {
        awaiting_body_ = false;
        if (!is_valid_sms_body(body_) || !pending_to_) {
            body_.clear();
            return respond("ERROR");
        }
        const int ref = next_reference_;
        next_reference_ = (next_reference_ + 1) % 256;
        outbox_.push_back({*pending_to_, std::exchange(body_, {}), now, ref});
        respond("+CMGS: " + std::to_string(ref));
        respond("OK");
    }

    PhoneNumber sim_number_;
    std::optional<Millis> attach_delay_;
    Transcript* transcript_;

    bool powered_ = false;
    Millis powered_at_ = 0;
    bool text_mode_ = false;

    std::string line_;
    std::string output_;
    bool awaiting_body_ = false;
    std::string body_;
    std::optional<PhoneNumber> pending_to_;
    int next_reference_ = 0;

    std::deque<StoredSms> inbox_;
    std::vector<OutgoingSms> outbox_;
};

struct Envelope {
    std::uint64_t id = 0;
    PhoneNumber to;
    SmsMessage message;
    Millis due = 0;
};

// Store-and-deliver SMS network. Each submission is delayed by a latency
// drawn uniformly from [min, max]; deliveries between the same pair of
// numbers never overtake each other.
class NetworkModel {
public:
    explicit NetworkModel(std::uint64_t seed, Millis latency_min_ms = 4000, Millis latency_max_ms = 6000)
        : rng_(seed), min_(latency_min_ms), max_(latency_max_ms) {}

    Millis latency_min() const { return min_; }
    Millis latency_max() const { return max_; }

    const Envelope& submit(const PhoneNumber& from, const PhoneNumber& to, std::string body, Millis now) {
        const auto span = static_cast<std::uint64_t>(max_ - min_) + 1;
        // Modulo bias is below 1e-15 for spans this small.
        Millis due = now + min_ + static_cast<Millis>(rng_() % span);
        auto& last = last_due_[{from, to}];
        if (due < last) due = last;
        last = due;
        const auto id = next_id_++;
        Envelope e{id, to, SmsMessage{from, std::move(body), now, due}, due};
        return pending_.emplace(Key{due, id}, std::move(e)).first->second;
    }

    std::optional<Millis> next_due() const {
        if (pending_.empty()) return std::nullopt;
        return pending_.begin()->first.due;
    }

    // Everything due at or before `now`, in (due, submission) order.
    std::vector<Envelope> pop_due(Millis now) {
        std::vector<Envelope> out;
        while (!pending_.empty() && pending_.begin()->first.due <= now) {
            out.push_back(std::move(pending_.begin()->second));
            pending_.erase(pending_.begin());
        }
        return out;
    }

    std::size_t in_flight() const { return pending_.size(); }

private:
    struct Key {
        Millis due;
        std::uint64_t id;
        auto operator<=>(const Key&) const = default;
    };

    std::mt19937_64 rng_;
    Millis min_;
    Millis max_;
    std::uint64_t next_id_ = 1;
    std::map<Key, Envelope> pending_;
    std::map<std::pair<PhoneNumber, PhoneNumber>, Millis> last_due_;
};

} // namespace vtrack
