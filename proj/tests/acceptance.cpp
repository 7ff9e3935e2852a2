// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "vtrack/vtrack.hpp"

using namespace vtrack;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    if (!ok) ++failures;
}

PhoneNumber num(std::string_view s) { return *PhoneNumber::parse(s); }

const PhoneNumber kOwner = num("+40700000001");

std::string scenario_path(const char* name) { return std::string(VTRACK_SCENARIO_DIR) + "/" + name; }

ScenarioEvent sms_at(Millis at, const PhoneNumber& from, std::string body) {
    return {at, InboundSms{from, std::move(body)}};
}

std::size_t count(const Transcript& t, std::string_view ev) { return t.filter(ev).size(); }

std::size_t outbound_count(const Transcript& t) {
    std::size_t n = 0;
    for (const auto& r : t.filter("sms_submitted")) n += r["src"] == "modem";
    return n;
}

// Independent XOR fold, upper-case hex.
std::string xor_oracle(std::string_view body) {
    const unsigned x = std::accumulate(body.begin(), body.end(), 0u,
                                       [](unsigned a, char c) { return a ^ static_cast<unsigned char>(c); });
    static const char* hex = "0123456789ABCDEF";
    return {hex[x >> 4], hex[x & 15]};
}

std::string framed(const std::string& body) { return "$" + body + "*" + xor_oracle(body) + "\r\n"; }

// ---------------------------------------------------------------------------

void latency() {
    const auto table = canonical_command_table();
    Scenario s;
    s.config.seed = 2024;
    // 3 s spacing keeps a location request's 1 s fix window from queueing the next command.
    for (int i = 0; i < 100; ++i) s.events.push_back(sms_at(61000 + 3000 * i, kOwner, std::string(table[i % 12].text)));

    const auto start = std::chrono::steady_clock::now();
    Simulation sim(s);
    const auto& log = sim.run();
    const auto wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    Millis lo = kNever, hi = 0;
    for (const auto& r : log.filter("sms_delivered")) {
        const auto l = r["latency_ms"].get<Millis>();
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }

    // Submission time per message id, then pair each command with the read before it.
    std::map<std::uint64_t, Millis> submitted;
    for (const auto& r : log.filter("sms_submitted")) submitted[r["id"].get<std::uint64_t>()] = r["t"].get<Millis>();
    Millis worst_e2e = 0;
    std::size_t applied = 0;
    std::optional<std::uint64_t> last_read;
    for (const auto& r : log.records()) {
        if (r["event"] == "sms_read") last_read = r["id"].get<std::uint64_t>();
        if (r["event"] == "cmd_applied" && last_read) {
            ++applied;
            worst_e2e = std::max(worst_e2e, r["t"].get<Millis>() - submitted.at(*last_read));
        }
    }
    const Millis bound = 6000 + s.config.loop_tick_ms;
    std::ostringstream d;
    d << applied << " commands applied, delivery latency [" << lo << ", " << hi << "] ms, worst end-to-end "
      << worst_e2e << " ms (limit " << bound << "), wall " << static_cast<int>(wall_ms) << " ms";
    report("latency", applied == 100 && lo >= 4000 && hi <= 6000 && worst_e2e <= bound && wall_ms < 5000, d.str());
}

void golden_link() {
    const std::string want = "https://www.google.ro/maps/place/44.44212+26.04938/@44.44212,26.04938,17z/";
    Scenario s;
    s.events.push_back({0, Waypoint{0, 44.44212, 26.04938, 7, 120}});
    s.events.push_back(sms_at(61000, kOwner, "8location: ON"));
    Simulation sim(s);
    std::string got;
    for (const auto& r : sim.run().filter("sms_submitted")) {
        if (r["src"] == "modem") got = r["body"];
    }
    report("golden_link", got == want, "outbound body " + (got.empty() ? std::string("<none>") : got));
}

void command_table() {
    const std::map<Command, MultiplexCode> triples = {
        {Command::PositionLightsOn, {1, 0, 0}}, {Command::PositionLightsOff, {1, 0, 1}},
        {Command::HeadLightsOn, {0, 0, 1}},     {Command::HeadLightsOff, {1, 0, 1}},
        {Command::BrakeLightsOn, {0, 1, 0}},    {Command::BrakeLightsOff, {1, 0, 1}},
        {Command::WarningOn, {1, 1, 1}},        {Command::WarningOff, {1, 0, 1}},
    };
    bool ok = true;
    int lighting = 0;
    for (const auto& e : canonical_command_table()) {
        const auto code = apply(initial_state(), e.command).effects.strobe;
        const auto it = triples.find(e.command);
        if (it == triples.end()) {
            ok &= !code.has_value();
        } else {
            ++lighting;
            ok &= code.has_value() && *code == it->second;
        }
    }

    // Frame property: each command writes only its own field.
    using Field = bool VehicleState::*;
    const std::map<Command, std::pair<Field, bool>> target = {
        {Command::PositionLightsOn, {&VehicleState::position_lights, true}},
        {Command::PositionLightsOff, {&VehicleState::position_lights, false}},
        {Command::HeadLightsOn, {&VehicleState::head_lights, true}},
        {Command::HeadLightsOff, {&VehicleState::head_lights, false}},
        {Command::BrakeLightsOn, {&VehicleState::brake_lights, true}},
        {Command::BrakeLightsOff, {&VehicleState::brake_lights, false}},
        {Command::WarningOn, {&VehicleState::warning_lights, true}},
        {Command::WarningOff, {&VehicleState::warning_lights, false}},
        {Command::LocationOn, {&VehicleState::location_mode, true}},
        {Command::LocationOff, {&VehicleState::location_mode, false}},
        {Command::DoorsLock, {&VehicleState::doors_locked, true}},
        {Command::DoorsUnlock, {&VehicleState::doors_locked, false}},
    };
    const Field all[] = {&VehicleState::position_lights, &VehicleState::head_lights, &VehicleState::brake_lights,
                         &VehicleState::warning_lights,  &VehicleState::doors_locked, &VehicleState::gsm_ready,
                         &VehicleState::location_mode};
    std::mt19937 rng(1000);
    const auto table = canonical_command_table();
    int steps = 0;
    for (int seq = 0; seq < 1000; ++seq) {
        VehicleState s = initial_state();
        s.gsm_ready = (rng() & 1u) != 0;
        for (int k = 0; k < 25; ++k, ++steps) {
            const auto cmd = table[rng() % table.size()].command;
            const auto next = apply(s, cmd).state;
            const auto [field, value] = target.at(cmd);
            ok &= next.*field == value;
            for (auto f : all) {
                if (f != field) ok &= next.*f == s.*f;
            }
            s = next;
        }
    }
    report("command_table", ok && lighting == 8,
           std::to_string(lighting) + " multiplex triples checked, frame property over 1000 sequences (" +
               std::to_string(steps) + " steps)");
}

void silent_drop() {
    std::mt19937 rng(50);
    const auto table = canonical_command_table();
    auto in_table = [&](const std::string& body) {
        for (const auto& e : table) {
            if (body.size() == e.text.size() && std::equal(body.begin(), body.end(), e.text.begin())) return true;
        }
        return false;
    };

    Scenario s;
    s.config.ack_mode = true; // any accepted command would produce a reply
    Millis t = 61000;
    for (int i = 0; i < 50; ++i, t += 1000) {
        const auto stranger = num("+4079" + std::to_string(1000000 + rng() % 8999999));
        s.events.push_back(sms_at(t, stranger, std::string(table[rng() % 12].text)));
    }
    int garbled = 0;
    while (garbled < 50) {
        std::string body(table[rng() % 12].text);
        switch (rng() % 5) {
        case 0: body[rng() % body.size()] ^= 0x20; break;
        case 1: body.insert(rng() % (body.size() + 1), 1, ' '); break;
        case 2: body.resize(rng() % body.size()); break;
        case 3: body += static_cast<char>(0x21 + rng() % 94); break;
        default: body.erase(rng() % body.size(), 1); break;
        }
        if (in_table(body) || !is_valid_sms_body(body)) continue;
        s.events.push_back(sms_at(t, kOwner, body));
        t += 1000;
        ++garbled;
    }
    Simulation sim(s);
    const auto& log = sim.run();
    // After attach, the only state record allowed is the one gsm_ready emits.
    std::size_t state_changes = 0;
    bool ready = false;
    for (const auto& r : log.records()) {
        if (r["event"] == "gsm_ready") ready = true;
        else if (r["event"] == "state" && ready && r["t"] > log.filter("gsm_ready").at(0)["t"]) ++state_changes;
    }
    VehicleState expect = initial_state();
    expect.gsm_ready = true;
    const auto rejected = count(log, "auth_rejected") + count(log, "cmd_ignored");
    std::ostringstream d;
    d << rejected << "/100 ignored, " << outbound_count(log) << " outbound SMS, " << state_changes
      << " state changes, " << count(log, "cmd_applied") << " applied";
    report("silent_drop",
           rejected == 100 && outbound_count(log) == 0 && state_changes == 0 && count(log, "cmd_applied") == 0 &&
               sim.state() == expect,
           d.str());
}

void attach() {
    Scenario ok_case;
    ok_case.config.end_ms = 70000;
    Simulation a(ok_case);
    const auto ready = a.run().filter("gsm_ready");
    const Millis ready_at = ready.empty() ? -1 : ready[0]["t"].get<Millis>();

    Scenario fail;
    fail.config.attach_delay_ms = std::nullopt;
    for (int i = 0; i < 10; ++i) fail.events.push_back(sms_at(1000 + 20000 * i, kOwner, "6warning: ON"));
    Simulation b(fail);
    const auto& log = b.run();
    const bool error = b.phase() == Simulation::Controller::Phase::Error && count(log, "gsm_attach_failed") == 1;
    const auto dispatched = count(log, "cmd_applied") + outbound_count(log);

    std::ostringstream d;
    d << "gsm_ready at t=" << ready_at << " ms; failure case: " << (error ? "Error" : "not Error") << ", "
      << dispatched << " dispatched";
    report("attach", ready.size() == 1 && ready_at == 60000 && error && dispatched == 0 && !b.state().warning_lights,
           d.str());
}

void nmea_suite() {
    std::mt19937_64 rng(5050);
    std::uniform_real_distribution<double> lat(-89.9, 89.9), lon(-179.9, 179.9);

    // 50 sentences: GGA from the receiver and hand-built RMC, with some noise.
    std::string stream = "garbage\r\n";
    for (int i = 0; i < 50; ++i) {
        if (i % 3 == 2) {
            const auto la = nmea::latitude_to_ddmm(lat(rng));
            const auto lo = nmea::longitude_to_ddmm(lon(rng));
            stream += framed("GPRMC,120000.00,A," + la.field + "," + la.hemisphere + "," + lo.field + "," +
                             std::string(1, lo.hemisphere) + ",0.0,0.0,010100,,");
        } else {
            stream += make_gga(i * 1000, lat(rng), lon(rng), static_cast<int>(rng() % 13), static_cast<int>(rng() % 500));
        }
        if (i % 10 == 0) stream += framed("GPGSV,1,1,00");
    }
    nmea::Decoder whole;
    const auto reference = whole.decode(stream, 0);

    bool chunk_ok = reference.size() == 50;
    for (int trial = 0; trial < 1000 && chunk_ok; ++trial) {
        nmea::Decoder d;
        std::vector<nmea::GpsFix> got;
        std::size_t pos = 0;
        while (pos < stream.size()) {
            const std::size_t n = std::min<std::size_t>(1 + rng() % 40, stream.size() - pos);
            for (auto& f : d.decode(std::string_view(stream).substr(pos, n), 0)) got.push_back(f);
            pos += n;
        }
        chunk_ok = got == reference;
    }

    // Exhaustive single-byte corruption of one sentence's body.
    const auto good = make_gga(0, 44.44212, 26.04938, 7, 120);
    const auto star = good.find('*');
    bool corrupt_ok = true;
    long variants = 0;
    for (std::size_t p = 1; p < star; ++p) {
        for (int b = 0; b < 256; ++b) {
            if (static_cast<unsigned char>(good[p]) == b) continue;
            auto bad = good;
            bad[p] = static_cast<char>(b);
            nmea::Decoder d;
            corrupt_ok &= d.decode(bad, 0).empty();
            ++variants;
        }
    }

    // ddmm.mmmm round trip.
    double worst = 0;
    bool parse_ok = true;
    for (int i = 0; i < 10000; ++i) {
        const double a = lat(rng), o = lon(rng);
        const auto la = nmea::latitude_to_ddmm(a);
        const auto lo = nmea::longitude_to_ddmm(o);
        const auto ba = nmea::ddmm_to_degrees(la.field, std::string(1, la.hemisphere));
        const auto bo = nmea::ddmm_to_degrees(lo.field, std::string(1, lo.hemisphere));
        if (!ba || !bo) {
            parse_ok = false;
            continue;
        }
        worst = std::max({worst, std::abs(*ba - a), std::abs(*bo - o)});
    }

    // Checksum against the XOR oracle.
    bool cs_ok = xor_oracle("GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,") == "47";
    for (int i = 0; i < 5000; ++i) {
        std::string body(rng() % 80, ' ');
        for (auto& c : body) c = static_cast<char>(0x20 + rng() % 95);
        cs_ok &= nmea::checksum(body) == xor_oracle(body);
    }

    std::ostringstream d;
    d << "chunking " << (chunk_ok ? "invariant" : "DIVERGED") << " over 1000 splits of " << reference.size()
      << " fixes; " << variants << " corruptions " << (corrupt_ok ? "all rejected" : "NOT all rejected")
      << "; round-trip worst " << worst << " deg; checksum " << (cs_ok ? "matches oracle" : "MISMATCH");
    report("nmea", chunk_ok && corrupt_ok && parse_ok && worst <= 1e-6 && cs_ok, d.str());
}

void determinism() {
    bool same = true;
    for (auto name : {"paper_demo.scn", "power_failure.scn", "silent_drop.scn"}) {
        const auto s = load_scenario(scenario_path(name));
        same &= run_to_jsonl(s) == run_to_jsonl(s);
    }
    auto seeded = load_scenario(scenario_path("paper_demo.scn"));
    for (std::uint64_t seed : {1u, 99u, 123456u}) {
        seeded.config.seed = seed;
        same &= run_to_jsonl(seeded) == run_to_jsonl(seeded);
    }

    Scenario r;
    r.events.push_back(sms_at(61000, kOwner, "0lights: ON"));
    r.events.push_back(sms_at(62000, kOwner, "6warning: ON"));
    r.events.push_back(sms_at(63000, kOwner, "adoors: ON"));
    r.events.push_back(sms_at(64000, kOwner, "8location: ON"));
    r.events.push_back({80000, Restart{}});
    Simulation sim(r);
    const auto& log = sim.run();
    bool restored = false;
    bool seen_restart = false;
    bool changed_before = false;
    for (const auto& rec : log.records()) {
        if (rec["event"] == "cmd_applied") changed_before = true;
        if (rec["event"] == "restart") seen_restart = true;
        if (seen_restart && rec["event"] == "state") {
            Json expect = Json::object();
            expect["t"] = rec["t"];
            expect["src"] = rec["src"];
            expect["event"] = rec["event"];
            const Json initial = state_json(initial_state());
            for (auto& [k, v] : initial.items()) expect[k] = v;
            restored = rec == expect;
            break;
        }
    }
    report("determinism", same && changed_before && restored,
           std::string("transcripts ") + (same ? "byte-identical" : "DIFFER") + "; restart " +
               (restored ? "restores initial_state()" : "does NOT restore initial_state()"));
}

void power_continuity() {
    Scenario base;
    base.config.seed = 77;
    for (int i = 0; i < 20; ++i) base.events.push_back(sms_at(61000 + 2000 * i, kOwner, i % 2 ? "0lights: ON" : "1lights: OFF"));
    auto with_failure = base;
    with_failure.events.insert(with_failure.events.begin(), {60500, PowerChange{PowerSource::Main, false}});

    auto applied_times = [](const Transcript& t) {
        std::vector<Millis> out;
        for (const auto& r : t.filter("cmd_applied")) out.push_back(r["t"]);
        return out;
    };
    Simulation ref(base), main_fail(with_failure);
    const auto ref_times = applied_times(ref.run());
    const auto& mf = main_fail.run();
    const bool backup_ok = applied_times(mf) == ref_times && ref_times.size() == 20 && count(mf, "sms_dropped") == 0;

    Simulation dual(load_scenario(scenario_path("power_failure.scn")));
    const auto& dl = dual.run();
    bool resumed = false;
    bool after = false;
    for (const auto& r : dl.records()) {
        if (r["event"] == "power_restored") after = true;
        if (after && r["event"] == "cmd_applied") resumed = true;
    }
    const bool dual_ok = count(dl, "sms_dropped") >= 1 && count(dl, "power_lost") == 1 && resumed;

    std::ostringstream d;
    d << "backup only: " << count(mf, "sms_dropped") << " dropped, timing " << (backup_ok ? "unchanged" : "CHANGED")
      << "; dual failure: " << count(dl, "sms_dropped") << " dropped and logged, processing "
      << (resumed ? "resumed" : "did NOT resume");
    report("power_continuity", backup_ok && dual_ok, d.str());
}

void demo_scenario() {
    Simulation sim(load_scenario(scenario_path("paper_demo.scn")));
    const auto& log = sim.run();
    const std::string want = "https://www.google.ro/maps/place/44.44212+26.04938/@44.44212,26.04938,17z/";
    std::size_t links = 0;
    for (const auto& r : log.filter("sms_delivered")) links += r["to"] == kOwner.str() && r["body"] == want;
    std::ostringstream d;
    d << count(log, "cmd_applied") << "/13 commands applied, " << links << "/2 location links delivered";
    report("demo_scenario", count(log, "cmd_applied") == 13 && links == 2, d.str());
}

} // namespace

int main() {
    latency();
    golden_link();
    command_table();
    silent_drop();
    attach();
    nmea_suite();
    determinism();
    power_continuity();
    demo_scenario();
    std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
