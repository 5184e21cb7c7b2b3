#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "kiloswarm/world.hpp"

namespace kiloswarm::bridge {

/// {"type":"snapshot", tick, sim_time_s, speed_factor, paused, comm_radius_mm,
///  body_radius_mm, bots:[{id, x_mm, y_mm, theta_rad, led:"r,g,b",
///  leg_points:[[x,y] front, [x,y] left rear, [x,y] right rear]}]}
nlohmann::json wire_snapshot(const World& world);

struct CommandOutcome {
    nlohmann::json reply;                    // ack or error frame
    std::optional<SteeringCommand> command;  // set for commands the world must apply
};

/// Validates one client text frame. Accepted types: pause, resume,
/// set_speed {factor}, move_bot {id, x_mm, y_mm}, toggle_comms_overlay.
/// A numeric "seq" in the frame is echoed in the reply, otherwise `next_seq`
/// is used and incremented. Invalid frames produce an error reply and no
/// command.
CommandOutcome handle_command(std::string_view text, std::size_t n_bots, std::uint64_t& next_seq);

struct ServerOptions {
    std::string bind_address = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks a free port
    double ui_rate_hz = 30.0;
    std::filesystem::path ui_dir;  // static files served at /; empty serves a stub page
};

/// HTTP + websocket endpoint. Static UI at /, live traffic at /ws.
///
/// publish() is called from the simulation thread; everything network-side
/// runs on one internal I/O thread. Commands reach the simulation through
/// the `submit` callback, which must be thread-safe (World::submit is).
class Server {
public:
    Server(ServerOptions options, std::size_t n_bots, std::function<void(SteeringCommand)> submit);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and starts the I/O thread. Throws std::runtime_error if the port
    /// cannot be bound.
    void start();
    void stop();
    std::uint16_t port() const;

    /// Broadcasts the world's state unless one went out less than
    /// 1/ui_rate_hz ago (wall time). Latest wins: a slow client skips frames.
    void publish(const World& world);
    /// Broadcasts regardless of the rate limit.
    void publish_now(const World& world);

    std::size_t client_count() const;
    std::uint64_t frames_published() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace kiloswarm::bridge
