#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kiloswarm/comms.hpp"
#include "kiloswarm/config.hpp"
#include "kiloswarm/controller.hpp"
#include "kiloswarm/snapshot.hpp"

namespace kiloswarm {

/// Creates the controller for one robot.
using ControllerFactory = std::function<std::unique_ptr<Controller>(RobotId)>;

/// A controller callback failed (threw, or overran its loop budget).
class ControllerError : public std::runtime_error {
public:
    ControllerError(RobotId robot, const std::string& what)
        : std::runtime_error("robot " + std::to_string(robot) + ": " + what), robot_(robot) {}
    RobotId robot() const { return robot_; }

private:
    RobotId robot_;
};

/// Operator action, applied only between ticks.
struct SteeringCommand {
    enum class Kind { Pause, Resume, SetSpeedFactor, MoveRobot };
    Kind kind = Kind::Pause;
    std::optional<RobotId> robot_id;
    std::optional<Vec2> target;
    std::optional<double> factor;

    static SteeringCommand pause() { return {Kind::Pause, {}, {}, {}}; }
    static SteeringCommand resume() { return {Kind::Resume, {}, {}, {}}; }
    static SteeringCommand set_speed_factor(double f) { return {Kind::SetSpeedFactor, {}, {}, f}; }
    static SteeringCommand move_robot(RobotId id, Vec2 to) { return {Kind::MoveRobot, id, to, {}}; }
};

/// Thread-safe inbox for steering commands. Any thread may push; the world
/// drains it at tick boundaries.
class CommandQueue {
public:
    void push(SteeringCommand cmd);
    std::vector<SteeringCommand> drain();

private:
    std::mutex mutex_;
    std::vector<SteeringCommand> pending_;
};

/// Whole simulation state. Single-threaded: only submit() may be called from
/// other threads. Not movable, since controllers hold references into it.
class World {
public:
    /// Places robots per the config's layout, binds one controller per robot
    /// and runs every setup() in id order. Throws ConfigError for layouts
    /// that cannot be realised.
    World(SimConfig config, const ControllerFactory& factory);
    /// As above with a caller-provided environment (light/obstacle callbacks)
    /// replacing the one described by the config.
    World(SimConfig config, const ControllerFactory& factory, Environment env);

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    /// Drains queued commands, then, unless paused, advances one tick:
    /// controller loops, message delivery, motion, collisions, clock.
    /// Returns false (and leaves the tick unchanged) when paused.
    bool step();

    /// Applies a command immediately. Throws std::invalid_argument for an
    /// unknown robot or a non-positive speed factor; state is untouched then.
    void apply_command(const SteeringCommand& cmd);
    /// Queues a command for the next tick boundary. Thread-safe.
    void submit(SteeringCommand cmd) { commands_.push(std::move(cmd)); }

    Snapshot snapshot() const;

    const SimConfig& config() const { return config_; }
    std::uint64_t tick() const { return tick_; }
    double sim_time_s() const { return static_cast<double>(tick_) * config_.time_step_s; }
    bool paused() const { return paused_; }
    double speed_factor() const { return speed_factor_; }
    std::size_t size() const { return robots_.size(); }
    const Robot& robot(RobotId id) const { return robots_.at(id).robot; }
    const Controller& controller(RobotId id) const { return *robots_.at(id).controller; }
    const ChannelStats& channel_stats() const { return stats_; }
    NeighborStrategy strategy() const { return strategy_; }
    const Environment& environment() const { return env_; }
    /// Order in which controller loops ran during the last tick.
    const std::vector<RobotId>& last_loop_order() const { return loop_order_; }

private:
    void place_robots();
    void refresh_positions();
    void run_controller(RobotSlot& slot, const char* hook, const std::function<void()>& call);
    void resolve_collisions_pass(int max_passes);
    std::uint32_t kilo_ticks_at(std::uint64_t tick) const;

    SimConfig config_;
    Environment env_;
    MotionParams motion_;
    ChannelParams channel_;
    NeighborStrategy strategy_;
    Rng rng_;
    std::uint64_t tick_ = 0;
    bool paused_ = false;
    double speed_factor_ = 1.0;
    std::vector<RobotSlot> robots_;
    std::vector<Vec2> positions_;
    std::vector<double> radii_;
    std::vector<RobotId> loop_order_;
    NeighborIndex index_;
    ChannelStats stats_;
    CommandQueue commands_;
};

/// Number of ticks covering `duration_s`: ceil(duration/dt), robust to the
/// rounding of dt itself.
std::uint64_t ticks_for_duration(double duration_s, double dt);

struct RunOptions {
    double duration_s = 0.0;
    std::uint64_t snapshot_every_n_ticks = 0;
    /// Sleep so simulated time tracks wall time times the world's speed factor.
    bool paced = false;
    /// Receives the snapshot at the start and after every n-th tick.
    std::function<void(const Snapshot&)> on_snapshot;
    /// Called after every tick and while paused; used by live viewers.
    std::function<void(const World&)> on_idle;
    /// Polled between ticks; returning true ends the run early.
    std::function<bool()> should_stop;
};

struct RunSummary {
    std::uint64_t ticks = 0;
    double sim_seconds = 0.0;
    double wall_seconds = 0.0;
    double realtime_factor = 0.0;
    std::uint64_t snapshots = 0;
};

/// Steps the world for the requested duration.
RunSummary run(World& world, const RunOptions& options);

}  // namespace kiloswarm
