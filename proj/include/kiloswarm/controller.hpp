#pragma once

// The kilolib-style programming surface. A controller is a class deriving
// from Controller; the simulator creates one instance per robot, so member
// variables are the robot's private state (what REGISTER_USERDATA provides on
// the real library). Portability rules for controller authors:
//   1. keep all persistent state in members, never in globals or statics;
//   2. time things with kilo_ticks(), delay() does nothing here;
//   3. use explicit-width integers (uint8_t, int16_t, ...) so arithmetic wraps
//      the same way on an 8-bit target.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "kiloswarm/geometry.hpp"
#include "kiloswarm/neighbor_index.hpp"
#include "kiloswarm/physics.hpp"

namespace kiloswarm {

inline constexpr std::size_t kPayloadBytes = 9;
using Payload = std::array<std::uint8_t, kPayloadBytes>;

struct Message {
    Payload payload{};
    RobotId sender_id = 0;
};

/// LED colour, two bits per channel.
struct Led {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    constexpr bool operator==(const Led&) const = default;
};

/// Builds an LED colour, clamping each channel to 0..3.
constexpr Led rgb(unsigned r, unsigned g, unsigned b) {
    auto clamp = [](unsigned v) { return static_cast<std::uint8_t>(v > 3 ? 3 : v); };
    return {clamp(r), clamp(g), clamp(b)};
}

/// Per-robot byte generator behind rand_soft().
class SoftRng {
public:
    explicit SoftRng(std::uint64_t seed = 0) { reseed(seed); }
    void reseed(std::uint64_t seed);
    std::uint8_t next();

private:
    std::uint64_t state_ = 0;
};

class Controller;

/// Everything the simulator tracks for one robot.
struct Robot {
    RobotId id = 0;
    Pose pose{};
    MotorCommand motors{};
    Led led{};
    SoftRng soft_rng{};
    std::uint32_t kilo_ticks = 0;
    const Environment* env = nullptr;
};

class Controller {
public:
    virtual ~Controller() = default;

    // Hooks. Only loop() is mandatory.
    virtual void setup() {}
    virtual void loop() = 0;
    /// The message to transmit when this robot's transmit slot comes up, or
    /// nullopt to stay silent.
    virtual std::optional<Payload> message_tx() { return std::nullopt; }
    virtual void message_rx(const Message& /*msg*/, double /*distance_mm*/) {}
    /// Called after every transmission. Always reports success; real hardware
    /// acknowledgement semantics are not modelled.
    virtual void message_tx_success() {}
    /// Free-form text exported with each snapshot.
    virtual std::string debug_string() const { return {}; }

    /// Attaches the controller to its robot. Called by the world before setup().
    void bind(Robot& robot) { robot_ = &robot; }

protected:
    void set_motors(std::uint8_t left, std::uint8_t right);
    void spinup_motors();
    void delay(std::uint16_t ms);
    void set_color(Led led);
    std::uint16_t get_ambientlight() const;
    std::uint8_t rand_soft();
    void rand_seed(std::uint8_t seed);

    std::uint32_t kilo_ticks() const { return robot_->kilo_ticks; }
    std::uint16_t kilo_uid() const { return static_cast<std::uint16_t>(robot_->id); }

    // Calibrated duties. Any nonzero duty runs a motor at the configured speed.
    std::uint8_t kilo_straight_left = 70;
    std::uint8_t kilo_straight_right = 70;
    std::uint8_t kilo_turn_left = 70;
    std::uint8_t kilo_turn_right = 70;

private:
    Robot* robot_ = nullptr;
};

}  // namespace kiloswarm
