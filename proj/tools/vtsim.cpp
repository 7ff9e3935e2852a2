// vtsim: command-line driver for the vehicle tracking simulator.
//
//   vtsim run <scenario> [--seed N] [--out transcript.jsonl]
//   vtsim decode-nmea <file>
//   vtsim --print-commands
//   vtsim --interactive [--port P] [--speedup X] [--config scenario] [--record session.scn]

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>

#include <CLI11.hpp>

#include "vtrack/console_gateway.hpp"
#include "vtrack/vtrack.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

int print_commands() {
    for (const auto& e : vtrack::canonical_command_table()) {
        std::cout << e.text << '\t' << vtrack::command_tag(e.command) << '\n';
    }
    return 0;
}

int decode_nmea(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "vtsim: cannot open '" << path << "'\n";
        return 1;
    }
    const std::string bytes{std::istreambuf_iterator<char>(in), {}};
    vtrack::nmea::Decoder decoder;
    for (const auto& fix : decoder.decode(bytes)) std::cout << vtrack::compose_location_text(fix) << '\n';
    return 0;
}

int run_batch(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out) {
    auto scenario = vtrack::load_scenario(path);
    if (seed) scenario.config.seed = *seed;
    const auto jsonl = vtrack::run_to_jsonl(std::move(scenario));
    if (out.empty()) {
        std::cout << jsonl;
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) {
            std::cerr << "vtsim: cannot write '" << out << "'\n";
            return 1;
        }
        f << jsonl;
    }
    return 0;
}

int run_interactive(std::uint16_t port, double speedup, const std::string& config_path,
                    std::optional<std::uint64_t> seed, const std::string& record_path) {
    vtrack::Scenario scenario;
    if (!config_path.empty()) scenario = vtrack::load_scenario(config_path);
    if (seed) scenario.config.seed = *seed;
    const auto config = scenario.config;
    const auto preloaded = scenario.events;

    vtrack::Simulation sim(std::move(scenario));
    vtrack::ConsoleGateway gateway(port);
    vtrack::attach_gateway(sim.transcript(), gateway);
    std::cerr << "vtsim: console gateway listening on 127.0.0.1:" << gateway.port() << " (speedup " << speedup
              << "x, Ctrl-C to stop)\n";

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto injected = vtrack::run_interactive(sim, gateway, speedup, g_stop);

    if (!record_path.empty()) {
        std::ofstream f(record_path, std::ios::binary);
        f << "# recorded interactive session\n" << vtrack::format_config(config);
        f << "set end_ms " << sim.now() << '\n';
        // Events from the config file and from clients, merged in time order.
        std::vector<vtrack::ScenarioEvent> all = preloaded;
        for (const auto& ev : injected) all.push_back(ev);
        std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.at < b.at; });
        for (const auto& ev : all) {
            if (ev.at < sim.now()) f << vtrack::format_event(ev) << '\n';
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator for an SMS-controlled vehicle tracking unit"};
    app.require_subcommand(0, 1);

    bool print = false;
    bool interactive = false;
    std::uint16_t port = 7878;
    double speedup = 1.0;
    std::string config_path;
    std::string record_path;
    std::optional<std::uint64_t> seed;

    app.add_flag("--print-commands", print, "Print the command table, one '<text>\\t<tag>' line per entry");
    app.add_flag("--interactive", interactive, "Run live, serving the phone console gateway");
    app.add_option("--port", port, "Gateway TCP port (interactive)");
    app.add_option("--speedup", speedup, "Virtual-time speed relative to wall clock (interactive)")
        ->check(CLI::PositiveNumber);
    app.add_option("--config", config_path, "Scenario file supplying settings (interactive)");
    app.add_option("--record", record_path, "Save the interactive session as a scenario file");
    app.add_option("--seed", seed, "Override the scenario seed");

    auto* run = app.add_subcommand("run", "Run a scenario in batch mode and emit its transcript");
    std::string scenario_path;
    std::string out_path;
    run->add_option("scenario", scenario_path, "Scenario file")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out", out_path, "Write the transcript here instead of stdout");

    auto* decode = app.add_subcommand("decode-nmea", "Decode an NMEA byte stream and print each fix");
    std::string nmea_path;
    decode->add_option("file", nmea_path, "NMEA capture")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (print) return print_commands();
        if (*run) return run_batch(scenario_path, seed, out_path);
        if (*decode) return decode_nmea(nmea_path);
        if (interactive) return run_interactive(port, speedup, config_path, seed, record_path);
    } catch (const std::exception& e) {
        std::cerr << "vtsim: " << e.what() << '\n';
        return 1;
    }
    std::cout << app.help();
    return 0;
}
