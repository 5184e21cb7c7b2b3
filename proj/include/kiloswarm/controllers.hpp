#pragma once

// Demonstration controllers: orbit, edge following, hop-count gradient and
// follow-the-leader. The orbit and edge-following decision rules follow the
// classic Kilobot demos; the gradient and follow-the-leader programs are
// reconstructions written for this simulator.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kiloswarm/config.hpp"
#include "kiloswarm/controller.hpp"
#include "kiloswarm/world.hpp"

namespace kiloswarm {

enum class Turn { Left, Right };

/// Clockwise orbit rule: turn left (away) when closer than d0, otherwise right.
Turn orbit_decide(double d_measured_mm, double d0_mm);

/// A distance reading from one neighbour.
struct NeighborReading {
    RobotId sender = 0;
    double distance_mm = 0.0;
};

/// The reading with the smallest distance; ties go to the lowest sender id.
std::optional<NeighborReading> closest_neighbor(std::span<const NeighborReading> readings);

/// Orbit rule applied to the closest neighbour; nullopt (stop) when nothing
/// was heard.
std::optional<Turn> edge_follow_decide(std::span<const NeighborReading> recent, double d0_mm);

inline constexpr std::uint16_t kGradientUnset = 0xFFFF;

struct GradientState {
    std::uint16_t value = kGradientUnset;
    bool seeded = false;
};

/// Hop count: 0 for the seed, otherwise one more than the smallest value
/// heard, saturating at kGradientUnset.
std::uint16_t gradient_update(const GradientState& own, std::span<const std::uint16_t> neighbor_values);

/// Base for the demos: kilobot-style set_motion() that spins up the motors
/// only when the motion changes.
class MotionController : public Controller {
protected:
    void set_motion(Motion motion);
    Motion motion() const { return motion_; }

private:
    Motion motion_ = Motion::Stationary;
    bool started_ = false;
};

struct OrbitParams {
    double d0_mm = 60.0;
    RobotId star_id = 0;
};

/// The star sits still and beacons; every other robot orbits it clockwise.
class OrbitController : public MotionController {
public:
    OrbitController(RobotId id, OrbitParams params) : params_(params), is_star_(id == params.star_id) {}

    void setup() override;
    void loop() override;
    std::optional<Payload> message_tx() override;
    void message_rx(const Message& msg, double distance_mm) override;
    std::string debug_string() const override;

    double last_distance() const { return distance_; }

private:
    OrbitParams params_;
    bool is_star_;
    bool new_message_ = false;
    double distance_ = 0.0;
};

struct EdgeFollowParams {
    double d0_mm = 60.0;
    std::optional<RobotId> mobile_id;  // default: highest id
    double timeout_s = 2.0;
};

/// One mobile robot keeps d0 to its closest neighbour and so travels along
/// the rim of a group of stationary beacons.
class EdgeFollowController : public MotionController {
public:
    EdgeFollowController(RobotId id, std::uint32_t n_bots, EdgeFollowParams params);

    void setup() override;
    void loop() override;
    std::optional<Payload> message_tx() override;
    void message_rx(const Message& msg, double distance_mm) override;
    std::string debug_string() const override;

private:
    struct Heard {
        double distance_mm;
        std::uint32_t tick;
    };
    EdgeFollowParams params_;
    bool mobile_;
    bool new_message_ = false;
    std::map<RobotId, Heard> heard_;
    std::optional<NeighborReading> closest_;
};

struct GradientParams {
    RobotId seed_id = 0;
    double timeout_s = 2.0;
};

/// Stationary hop-count gradient from a seed robot, shown on the LEDs.
class GradientController : public Controller {
public:
    GradientController(RobotId id, GradientParams params)
        : params_(params), state_{id == params.seed_id ? std::uint16_t{0} : kGradientUnset, id == params.seed_id} {}

    void loop() override;
    std::optional<Payload> message_tx() override;
    void message_rx(const Message& msg, double distance_mm) override;
    std::string debug_string() const override;

    std::uint16_t value() const { return state_.value; }

private:
    struct Heard {
        std::uint16_t value;
        std::uint32_t tick;
    };
    GradientParams params_;
    GradientState state_;
    std::map<RobotId, Heard> heard_;
};

struct FollowTheLeaderParams {
    double d0_mm = 60.0;
    double timeout_s = 2.0;
};

/// Robot 0 wanders on a fixed schedule; robot k steers around robot k-1 with
/// the orbit rule. Everyone moves and transmits all the time.
class FollowTheLeaderController : public MotionController {
public:
    FollowTheLeaderController(RobotId id, FollowTheLeaderParams params) : params_(params), id_(id) {}

    void setup() override;
    void loop() override;
    std::optional<Payload> message_tx() override;
    void message_rx(const Message& msg, double distance_mm) override;
    std::string debug_string() const override;

    /// Leader's schedule as a function of kilo_ticks.
    static Motion leader_motion(std::uint32_t kilo_ticks);
    /// Follower's choice given the latest reading from its predecessor.
    static Motion follower_motion(std::optional<double> predecessor_distance_mm, double d0_mm);

private:
    FollowTheLeaderParams params_;
    RobotId id_;
    std::optional<double> predecessor_distance_;
    std::uint32_t heard_tick_ = 0;
};

/// Motors off, silent.
class IdleController : public Controller {
public:
    void loop() override {}
};

/// Names accepted by make_controller_factory.
std::vector<std::string> controller_names();

/// Factory for a named controller. Throws ConfigError for unknown names or
/// bad controller_params keys.
ControllerFactory make_controller_factory(const SimConfig& config);

}  // namespace kiloswarm
