#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vtrack/types.hpp"
#include "vtrack/vehicle_state.hpp"

namespace vtrack {

using Json = nlohmann::ordered_json;

// Append-only record log. Each record serializes as one JSON object with
// keys in insertion order: t, src, event, then the payload.
class Transcript {
public:
    using Listener = std::function<void(const Json&)>;

    void add(Millis t, std::string_view src, std::string_view event, Json payload = Json::object()) {
        Json rec = Json::object();
        rec["t"] = t;
        rec["src"] = src;
        rec["event"] = event;
        for (auto& [k, v] : payload.items()) rec[k] = v;
        records_.push_back(std::move(rec));
        for (auto& l : listeners_) l(records_.back());
    }

    void subscribe(Listener l) { listeners_.push_back(std::move(l)); }

    const std::vector<Json>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    std::vector<Json> filter(std::string_view event) const {
        std::vector<Json> out;
        for (const auto& r : records_) {
            if (r["event"] == event) out.push_back(r);
        }
        return out;
    }

    std::string to_jsonl() const {
        std::string out;
        for (const auto& r : records_) {
            out += r.dump();
            out += '\n';
        }
        return out;
    }

private:
    std::vector<Json> records_;
    std::vector<Listener> listeners_;
};

inline Json state_json(const VehicleState& s) {
    const auto p = render_panel(s);
    return Json{{"position_lights", s.position_lights}, {"head_lights", s.head_lights},
                {"brake_lights", s.brake_lights},       {"warning_lights", s.warning_lights},
                {"doors_locked", s.doors_locked},       {"gsm_ready", s.gsm_ready},
                {"location_mode", s.location_mode},     {"white", p.white},
                {"red", p.red},                         {"yellow", p.yellow},
                {"green", p.green}};
}

} // namespace vtrack
