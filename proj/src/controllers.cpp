#include "kiloswarm/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace kiloswarm {

using nlohmann::json;

namespace {

constexpr std::uint8_t kMsgBeacon = 1;
constexpr std::uint8_t kMsgGradient = 2;
constexpr std::uint8_t kMsgChain = 3;

std::uint32_t timeout_ticks(double seconds) { return static_cast<std::uint32_t>(std::lround(seconds * 31.0)); }

Payload make_payload(std::uint8_t type, std::uint16_t value) {
    Payload p{};
    p[0] = type;
    p[1] = static_cast<std::uint8_t>(value & 0xFF);
    p[2] = static_cast<std::uint8_t>(value >> 8);
    return p;
}

std::uint16_t payload_value(const Payload& p) { return static_cast<std::uint16_t>(p[1] | (p[2] << 8)); }

Motion turn_motion(Turn t) { return t == Turn::Left ? Motion::TurnLeft : Motion::TurnRight; }

const char* turn_name(Motion m) {
    switch (m) {
    case Motion::Stationary:
        return "stop";
    case Motion::Forward:
        return "forward";
    case Motion::TurnLeft:
        return "left";
    case Motion::TurnRight:
        return "right";
    }
    return "?";
}

/// Reads controller_params with the same strictness as the main config.
class ParamReader {
public:
    explicit ParamReader(const json& params) : params_(params) {}

    template <class T>
    void read(const std::string& key, T& out) {
        seen_.insert(key);
        const auto it = params_.find(key);
        if (it == params_.end()) {
            return;
        }
        const std::string path = "controller_params." + key;
        if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) {
                throw ConfigError(path, "expected a number");
            }
        } else {
            if (!it->is_number_unsigned()) {
                throw ConfigError(path, "expected a non-negative integer");
            }
        }
        out = it->template get<T>();
    }

    void finish() const {
        for (const auto& [key, value] : params_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError("controller_params." + key, "unknown key");
            }
        }
    }

private:
    const json& params_;
    std::set<std::string> seen_;
};

void require_id(RobotId id, std::uint32_t n, const char* key) {
    if (id >= n) {
        throw ConfigError(std::string("controller_params.") + key, "no robot with id " + std::to_string(id));
    }
}

}  // namespace

Turn orbit_decide(double d_measured_mm, double d0_mm) { return d_measured_mm < d0_mm ? Turn::Left : Turn::Right; }

std::optional<NeighborReading> closest_neighbor(std::span<const NeighborReading> readings) {
    std::optional<NeighborReading> best;
    for (const NeighborReading& r : readings) {
        if (!best || r.distance_mm < best->distance_mm ||
            (r.distance_mm == best->distance_mm && r.sender < best->sender)) {
            best = r;
        }
    }
    return best;
}

std::optional<Turn> edge_follow_decide(std::span<const NeighborReading> recent, double d0_mm) {
    const auto closest = closest_neighbor(recent);
    if (!closest) {
        return std::nullopt;
    }
    return orbit_decide(closest->distance_mm, d0_mm);
}

std::uint16_t gradient_update(const GradientState& own, std::span<const std::uint16_t> neighbor_values) {
    if (own.seeded) {
        return 0;
    }
    std::uint16_t lowest = kGradientUnset;
    for (std::uint16_t v : neighbor_values) {
        lowest = std::min(lowest, v);
    }
    return lowest >= kGradientUnset - 1 ? kGradientUnset : static_cast<std::uint16_t>(lowest + 1);
}

void MotionController::set_motion(Motion motion) {
    if (started_ && motion == motion_) {
        return;
    }
    started_ = true;
    motion_ = motion;
    switch (motion) {
    case Motion::Stationary:
        set_motors(0, 0);
        break;
    case Motion::Forward:
        spinup_motors();
        set_motors(kilo_straight_left, kilo_straight_right);
        break;
    case Motion::TurnLeft:
        // the right motor pivots the robot left around its left rear leg
        spinup_motors();
        set_motors(0, kilo_turn_left);
        break;
    case Motion::TurnRight:
        spinup_motors();
        set_motors(kilo_turn_right, 0);
        break;
    }
}

// --- orbit ---------------------------------------------------------------

void OrbitController::setup() {
    set_color(is_star_ ? rgb(3, 0, 0) : rgb(0, 3, 0));
    set_motion(Motion::Stationary);
}

void OrbitController::loop() {
    if (is_star_ || !new_message_) {
        return;
    }
    new_message_ = false;
    const Turn turn = orbit_decide(distance_, params_.d0_mm);
    set_color(turn == Turn::Left ? rgb(0, 3, 0) : rgb(0, 0, 3));
    set_motion(turn_motion(turn));
}

std::optional<Payload> OrbitController::message_tx() {
    if (!is_star_) {
        return std::nullopt;
    }
    return make_payload(kMsgBeacon, kilo_uid());
}

void OrbitController::message_rx(const Message& msg, double distance_mm) {
    if (is_star_ || msg.sender_id != params_.star_id) {
        return;
    }
    distance_ = distance_mm;
    new_message_ = true;
}

std::string OrbitController::debug_string() const {
    if (is_star_) {
        return "star";
    }
    std::ostringstream out;
    out << "planet d=" << distance_ << " " << turn_name(motion());
    return out.str();
}

// --- edge following ------------------------------------------------------

EdgeFollowController::EdgeFollowController(RobotId id, std::uint32_t n_bots, EdgeFollowParams params)
    : params_(params), mobile_(id == params.mobile_id.value_or(n_bots - 1)) {}

void EdgeFollowController::setup() {
    set_color(mobile_ ? rgb(0, 3, 0) : rgb(3, 0, 0));
    set_motion(Motion::Stationary);
}

void EdgeFollowController::loop() {
    if (!mobile_) {
        return;
    }
    const std::uint32_t now = kilo_ticks();
    const std::uint32_t window = timeout_ticks(params_.timeout_s);
    std::erase_if(heard_, [&](const auto& entry) { return now - entry.second.tick > window; });
    if (heard_.empty()) {
        closest_.reset();
        set_motion(Motion::Stationary);
        return;
    }
    if (!new_message_) {
        return;
    }
    new_message_ = false;
    std::vector<NeighborReading> recent;
    recent.reserve(heard_.size());
    for (const auto& [sender, h] : heard_) {
        recent.push_back({sender, h.distance_mm});
    }
    closest_ = closest_neighbor(recent);
    set_motion(turn_motion(*edge_follow_decide(recent, params_.d0_mm)));
}

std::optional<Payload> EdgeFollowController::message_tx() {
    if (mobile_) {
        return std::nullopt;
    }
    return make_payload(kMsgBeacon, kilo_uid());
}

void EdgeFollowController::message_rx(const Message& msg, double distance_mm) {
    if (!mobile_) {
        return;
    }
    heard_[msg.sender_id] = {distance_mm, kilo_ticks()};
    new_message_ = true;
}

std::string EdgeFollowController::debug_string() const {
    if (!mobile_) {
        return "beacon";
    }
    std::ostringstream out;
    out << "mobile " << turn_name(motion());
    if (closest_) {
        out << " closest=" << closest_->sender << " d=" << closest_->distance_mm;
    }
    return out.str();
}

// --- gradient ------------------------------------------------------------

void GradientController::loop() {
    const std::uint32_t now = kilo_ticks();
    const std::uint32_t window = timeout_ticks(params_.timeout_s);
    std::erase_if(heard_, [&](const auto& entry) { return now - entry.second.tick > window; });
    std::vector<std::uint16_t> values;
    values.reserve(heard_.size());
    for (const auto& [sender, h] : heard_) {
        values.push_back(h.value);
    }
    state_.value = gradient_update(state_, values);

    static constexpr Led palette[] = {rgb(3, 0, 0), rgb(3, 3, 0), rgb(0, 3, 0),
                                      rgb(0, 3, 3), rgb(0, 0, 3), rgb(3, 0, 3)};
    set_color(state_.value == kGradientUnset ? rgb(0, 0, 0) : palette[state_.value % std::size(palette)]);
}

std::optional<Payload> GradientController::message_tx() {
    if (state_.value == kGradientUnset) {
        return std::nullopt;
    }
    return make_payload(kMsgGradient, state_.value);
}

void GradientController::message_rx(const Message& msg, double /*distance_mm*/) {
    if (msg.payload[0] != kMsgGradient) {
        return;
    }
    heard_[msg.sender_id] = {payload_value(msg.payload), kilo_ticks()};
}

std::string GradientController::debug_string() const {
    return state_.value == kGradientUnset ? "gradient=unset" : "gradient=" + std::to_string(state_.value);
}

// --- follow the leader ---------------------------------------------------

Motion FollowTheLeaderController::leader_motion(std::uint32_t kilo_ticks) {
    // 4 s straight, 1 s left, 4 s straight, 1.5 s right; period 10.5 s
    const std::uint32_t phase = kilo_ticks % 326;
    if (phase < 124) {
        return Motion::Forward;
    }
    if (phase < 155) {
        return Motion::TurnLeft;
    }
    if (phase < 279) {
        return Motion::Forward;
    }
    return Motion::TurnRight;
}

Motion FollowTheLeaderController::follower_motion(std::optional<double> predecessor_distance_mm, double d0_mm) {
    if (!predecessor_distance_mm) {
        return Motion::Forward;
    }
    return turn_motion(orbit_decide(*predecessor_distance_mm, d0_mm));
}

void FollowTheLeaderController::setup() {
    set_color(id_ == 0 ? rgb(3, 0, 0) : rgb(0, 0, 3));
    set_motion(id_ == 0 ? Motion::Forward : Motion::Stationary);
}

void FollowTheLeaderController::loop() {
    if (id_ == 0) {
        set_motion(leader_motion(kilo_ticks()));
        return;
    }
    if (predecessor_distance_ && kilo_ticks() - heard_tick_ > timeout_ticks(params_.timeout_s)) {
        predecessor_distance_.reset();
    }
    set_motion(follower_motion(predecessor_distance_, params_.d0_mm));
}

std::optional<Payload> FollowTheLeaderController::message_tx() {
    return make_payload(kMsgChain, kilo_uid());
}

void FollowTheLeaderController::message_rx(const Message& msg, double distance_mm) {
    if (id_ == 0 || msg.sender_id + 1 != id_) {
        return;
    }
    predecessor_distance_ = distance_mm;
    heard_tick_ = kilo_ticks();
}

std::string FollowTheLeaderController::debug_string() const {
    std::ostringstream out;
    out << (id_ == 0 ? "leader " : "follower ") << turn_name(motion());
    return out.str();
}

// --- registry ------------------------------------------------------------

std::vector<std::string> controller_names() { return {"edge_follow", "follow_the_leader", "gradient", "idle", "orbit"}; }

ControllerFactory make_controller_factory(const SimConfig& config) {
    ParamReader params(config.controller_params);
    const std::uint32_t n = config.n_bots;
    const std::string& name = config.controller;

    if (name == "orbit") {
        OrbitParams p;
        params.read("d0_mm", p.d0_mm);
        params.read("star_id", p.star_id);
        params.finish();
        require_id(p.star_id, n, "star_id");
        if (!(p.d0_mm > 0.0 && p.d0_mm < config.comm_radius_mm)) {
            throw ConfigError("controller_params.d0_mm", "must lie in (0, comm_radius_mm)");
        }
        return [p](RobotId id) { return std::make_unique<OrbitController>(id, p); };
    }
    if (name == "edge_follow") {
        EdgeFollowParams p;
        RobotId mobile = n - 1;
        params.read("d0_mm", p.d0_mm);
        params.read("mobile_id", mobile);
        params.read("timeout_s", p.timeout_s);
        params.finish();
        require_id(mobile, n, "mobile_id");
        p.mobile_id = mobile;
        if (!(p.d0_mm > 0.0 && p.d0_mm < config.comm_radius_mm)) {
            throw ConfigError("controller_params.d0_mm", "must lie in (0, comm_radius_mm)");
        }
        return [p, n](RobotId id) { return std::make_unique<EdgeFollowController>(id, n, p); };
    }
    if (name == "gradient") {
        GradientParams p;
        params.read("seed_id", p.seed_id);
        params.read("timeout_s", p.timeout_s);
        params.finish();
        require_id(p.seed_id, n, "seed_id");
        return [p](RobotId id) { return std::make_unique<GradientController>(id, p); };
    }
    if (name == "follow_the_leader") {
        FollowTheLeaderParams p;
        params.read("d0_mm", p.d0_mm);
        params.read("timeout_s", p.timeout_s);
        params.finish();
        return [p](RobotId id) { return std::make_unique<FollowTheLeaderController>(id, p); };
    }
    if (name == "idle") {
        params.finish();
        return [](RobotId) { return std::make_unique<IdleController>(); };
    }
    throw ConfigError("controller", "unknown controller '" + name + "'");
}

}  // namespace kiloswarm
