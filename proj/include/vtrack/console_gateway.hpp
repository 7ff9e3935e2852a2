#pragma once

// Socket gateway for the phone console. Newline-delimited JSON both ways:
//
//   client -> harness  {"type":"send_sms","from":"+40...","body":"0lights: ON"}
//                      {"type":"power","source":"main"|"backup","on":true|false}
//                      {"type":"restart"}
//   harness -> client  {"type":"record","record":{...transcript record...}}
//                      {"type":"state_snapshot","t":...,...state fields...}
//                      {"type":"error","reason":"..."}
//
// Newly connected clients first receive every message broadcast so far.
// Client I/O runs on its own thread; parsed commands are handed to the
// scheduler through a queue and never touch simulation state directly.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "vtrack/simulation.hpp"

namespace vtrack {

struct GatewayCommand {
    std::variant<InboundSms, PowerChange, Restart> kind;
};

// Validates one client line. Returns the command, or the reason it was rejected.
inline std::variant<GatewayCommand, std::string> parse_gateway_line(std::string_view line) {
    Json msg = Json::parse(line, nullptr, false);
    if (msg.is_discarded() || !msg.is_object()) return std::string("malformed JSON");
    if (!msg.contains("type") || !msg["type"].is_string()) return std::string("missing 'type'");
    const auto type = msg["type"].get<std::string>();
    if (type == "send_sms") {
        if (!msg.contains("from") || !msg["from"].is_string()) return std::string("send_sms needs string 'from'");
        if (!msg.contains("body") || !msg["body"].is_string()) return std::string("send_sms needs string 'body'");
        auto from = PhoneNumber::parse(msg["from"].get<std::string>());
        if (!from) return std::string("malformed phone number");
        auto body = msg["body"].get<std::string>();
        if (!is_valid_sms_body(body)) return std::string("body must be printable ASCII, at most 160 bytes");
        return GatewayCommand{InboundSms{*from, std::move(body)}};
    }
    if (type == "power") {
        if (!msg.contains("source") || !msg["source"].is_string()) return std::string("power needs 'source'");
        if (!msg.contains("on") || !msg["on"].is_boolean()) return std::string("power needs boolean 'on'");
        const auto src = msg["source"].get<std::string>();
        if (src != "main" && src != "backup") return std::string("source must be 'main' or 'backup'");
        return GatewayCommand{PowerChange{src == "main" ? PowerSource::Main : PowerSource::Backup, msg["on"].get<bool>()}};
    }
    if (type == "restart") return GatewayCommand{Restart{}};
    return "unknown type '" + type + "'";
}

class ConsoleGateway {
public:
    // Port 0 picks an ephemeral port; see port().
    explicit ConsoleGateway(std::uint16_t port, const char* bind_address = "127.0.0.1") {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        ::inet_pton(AF_INET, bind_address, &addr.sin_addr);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 8) < 0) {
            ::close(listen_fd_);
            throw std::runtime_error("cannot listen on port " + std::to_string(port));
        }
        socklen_t len = sizeof addr;
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        io_ = std::thread([this] { serve(); });
    }

    ConsoleGateway(const ConsoleGateway&) = delete;
    ConsoleGateway& operator=(const ConsoleGateway&) = delete;

    ~ConsoleGateway() {
        stop_ = true;
        if (io_.joinable()) io_.join();
        std::lock_guard lock(mu_);
        for (auto& c : clients_) ::close(c.fd);
        ::close(listen_fd_);
    }

    std::uint16_t port() const { return port_; }

    void broadcast(const Json& msg) {
        auto line = msg.dump() + "\n";
        std::lock_guard lock(mu_);
        for (auto& c : clients_) send_all(c, line);
        history_.push_back(std::move(line));
    }

    std::vector<GatewayCommand> take_commands() {
        std::lock_guard lock(mu_);
        return std::exchange(commands_, {});
    }

    std::size_t client_count() {
        std::lock_guard lock(mu_);
        return clients_.size();
    }

private:
    struct Client {
        int fd;
        std::string pending;
        bool dead = false;
    };

    static void send_all(Client& c, std::string_view data) {
        while (!c.dead && !data.empty()) {
            const auto n = ::send(c.fd, data.data(), data.size(), MSG_NOSIGNAL);
            if (n <= 0) {
                c.dead = true;
                return;
            }
            data.remove_prefix(static_cast<std::size_t>(n));
        }
    }

    void serve() {
        while (!stop_) {
            std::vector<pollfd> fds;
            {
                std::lock_guard lock(mu_);
                std::erase_if(clients_, [](const Client& c) {
                    if (c.dead) ::close(c.fd);
                    return c.dead;
                });
                fds.push_back({listen_fd_, POLLIN, 0});
                for (auto& c : clients_) fds.push_back({c.fd, POLLIN, 0});
            }
            if (::poll(fds.data(), fds.size(), 50) <= 0) continue;

            std::lock_guard lock(mu_);
            if (fds[0].revents & POLLIN) {
                const int fd = ::accept(listen_fd_, nullptr, nullptr);
                if (fd >= 0) {
                    timeval tv{1, 0};
                    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
                    clients_.push_back({fd, {}});
                    for (const auto& line : history_) send_all(clients_.back(), line);
                }
            }
            for (std::size_t i = 1; i < fds.size(); ++i) {
                if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
                auto it = std::find_if(clients_.begin(), clients_.end(), [&](const Client& c) { return c.fd == fds[i].fd; });
                if (it == clients_.end()) continue;
                char buf[4096];
                const auto n = ::recv(it->fd, buf, sizeof buf, 0);
                if (n <= 0) {
                    it->dead = true;
                    continue;
                }
                it->pending.append(buf, static_cast<std::size_t>(n));
                for (auto nl = it->pending.find('\n'); nl != std::string::npos; nl = it->pending.find('\n')) {
                    std::string line = it->pending.substr(0, nl);
                    it->pending.erase(0, nl + 1);
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (line.empty()) continue;
                    auto parsed = parse_gateway_line(line);
                    if (auto* cmd = std::get_if<GatewayCommand>(&parsed)) {
                        commands_.push_back(std::move(*cmd));
                    } else {
                        send_all(*it, Json{{"type", "error"}, {"reason", std::get<std::string>(parsed)}}.dump() + "\n");
                    }
                }
            }
        }
    }

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stop_{false};
    std::thread io_;

    std::mutex mu_;
    std::vector<Client> clients_;
    std::vector<std::string> history_;
    std::vector<GatewayCommand> commands_;
};

// Forwards every transcript record, plus a state snapshot after each state change.
inline void attach_gateway(Transcript& transcript, ConsoleGateway& gateway) {
    transcript.subscribe([&gateway](const Json& rec) {
        gateway.broadcast(Json{{"type", "record"}, {"record", rec}});
        if (rec["event"] == "state") {
            Json snap{{"type", "state_snapshot"}, {"t", rec["t"]}};
            for (auto& [k, v] : rec.items()) {
                if (k != "t" && k != "src" && k != "event") snap[k] = v;
            }
            gateway.broadcast(snap);
        }
    });
}

inline ScenarioEvent to_event(const GatewayCommand& cmd) {
    ScenarioEvent ev;
    std::visit([&](const auto& k) { ev.kind = k; }, cmd.kind);
    return ev;
}

// Runs the simulation against wall-clock time scaled by `speedup` until
// `stop` is set. Injected events are returned in order so a session can be
// saved as a batch scenario.
inline std::vector<ScenarioEvent> run_interactive(Simulation& sim, ConsoleGateway& gateway, double speedup,
                                                  const std::atomic<bool>& stop) {
    using clock = std::chrono::steady_clock;
    std::vector<ScenarioEvent> injected;
    const auto start = clock::now();
    const Millis base = sim.now();
    while (!stop) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - start).count();
        const auto target = base + static_cast<Millis>(static_cast<double>(wall) * speedup);
        sim.advance_to(target);
        for (const auto& cmd : gateway.take_commands()) injected.push_back(sim.inject(to_event(cmd)));
    }
    return injected;
}

} // namespace vtrack
