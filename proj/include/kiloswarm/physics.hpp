#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kiloswarm/geometry.hpp"
#include "kiloswarm/neighbor_index.hpp"
#include "kiloswarm/random.hpp"

namespace kiloswarm {

/// Motor duties as set by the controller. Only on/off matters for motion;
/// the duty values are kept for export.
struct MotorCommand {
    std::uint8_t left = 0;
    std::uint8_t right = 0;
    // Spin-up is not simulated (one tick is longer than the 15 ms burst); the
    // field records that spinup_motors() was requested.
    double spinup_remaining_s = 0.0;

    constexpr bool operator==(const MotorCommand&) const = default;
};

enum class Motion { Stationary, Forward, TurnLeft, TurnRight };

/// Both motors on drives forward. A single motor pivots the robot about the
/// rear leg on the opposite side: the left motor alone turns it clockwise
/// around the right rear leg, the right motor alone counterclockwise around
/// the left rear leg.
Motion classify(const MotorCommand& motors);

struct LegGeometry {
    double leg_angle_deg = 125.0;  // rear legs at +-leg_angle from the front leg
    double leg_radius_mm = 16.5;   // centre-to-leg distance
    double body_radius_mm = 16.5;

    /// Throws std::invalid_argument when the geometry is not physical.
    void validate() const;
};

struct MotionParams {
    double speed_mm_s = 10.0;
    double turn_rate_rad_s = 0.7;
    LegGeometry legs{};
};

enum class Side { Left, Right };

/// Position of the left or right rear leg for a pose.
Vec2 rear_leg(const Pose& pose, const LegGeometry& legs, Side side);

/// Front leg, left rear leg, right rear leg.
std::array<Vec2, 3> leg_points(const Pose& pose, const LegGeometry& legs);

/// Rigid rotation of the body about a fixed point; heading changes by `angle`.
Pose rotate_about_pivot(const Pose& pose, Vec2 pivot, double angle);

/// Advances one pose by dt under the given motor state. Heading of the result
/// is normalized to [-pi, pi).
Pose integrate(const Pose& pose, const MotorCommand& motors, const MotionParams& params, double dt);

/// Environment callbacks. An empty light_at reads as darkness (0) and an empty
/// is_blocked means no obstacles.
struct Environment {
    std::function<double(double x_mm, double y_mm)> light_at;
    std::function<bool(double x_mm, double y_mm)> is_blocked;
};

inline constexpr std::uint16_t kMaxLight = 1023;

/// Keeps the old position when the new centre is blocked. Heading always
/// follows pose_new.
Pose clip_to_environment(const Pose& pose_old, const Pose& pose_new, const Environment& env);

/// Light intensity at the robot's centre, clamped to [0, 1023].
std::uint16_t sample_light(const Pose& pose, const Environment& env);

struct CollisionParams {
    int max_passes = 8;
    double tolerance_mm = 1e-3;
    double coincident_epsilon_mm = 1e-9;
};

struct CollisionResult {
    std::vector<Vec2> displacements;  // one per robot, sums to zero
    int passes = 0;                   // resolution passes that moved robots
    bool converged = false;           // a check found no overlap above tolerance
};

/// Pushes overlapping discs apart, each robot of a pair moving half the
/// overlap along the line joining the centres. Pairs are processed in
/// ascending (i, j) order and each correction is applied immediately, so
/// later pairs in the same pass see earlier corrections. Coincident centres
/// separate along a direction drawn from `rng`.
CollisionResult resolve_collisions(std::span<const Vec2> positions, std::span<const double> radii,
                                   const CollisionParams& params, NeighborStrategy strategy, Rng& rng);

}  // namespace kiloswarm
