#include "kiloswarm/physics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace kiloswarm {

Motion classify(const MotorCommand& motors) {
    const bool left = motors.left != 0;
    const bool right = motors.right != 0;
    if (left && right) {
        return Motion::Forward;
    }
    if (left) {
        return Motion::TurnRight;
    }
    if (right) {
        return Motion::TurnLeft;
    }
    return Motion::Stationary;
}

void LegGeometry::validate() const {
    if (!(leg_angle_deg > 0.0 && leg_angle_deg <= 180.0)) {
        throw std::invalid_argument("leg_angle_deg must be in (0, 180]");
    }
    if (!(leg_radius_mm > 0.0) || !(body_radius_mm > 0.0)) {
        throw std::invalid_argument("leg and body radii must be positive");
    }
    if (leg_radius_mm > body_radius_mm) {
        throw std::invalid_argument("leg_radius_mm must not exceed body_radius_mm");
    }
}

Vec2 rear_leg(const Pose& pose, const LegGeometry& legs, Side side) {
    const double offset = deg_to_rad(legs.leg_angle_deg);
    const double angle = side == Side::Left ? pose.theta + offset : pose.theta - offset;
    return pose.position() + unit_vector(angle) * legs.leg_radius_mm;
}

std::array<Vec2, 3> leg_points(const Pose& pose, const LegGeometry& legs) {
    return {pose.position() + unit_vector(pose.theta) * legs.leg_radius_mm, rear_leg(pose, legs, Side::Left),
            rear_leg(pose, legs, Side::Right)};
}

Pose rotate_about_pivot(const Pose& pose, Vec2 pivot, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const Vec2 rel = pose.position() - pivot;
    return {pivot.x + c * rel.x - s * rel.y, pivot.y + s * rel.x + c * rel.y, normalize_angle(pose.theta + angle)};
}

Pose integrate(const Pose& pose, const MotorCommand& motors, const MotionParams& params, double dt) {
    switch (classify(motors)) {
    case Motion::Stationary:
        return pose;
    case Motion::Forward: {
        const double step = params.speed_mm_s * dt;
        return {pose.x + step * std::cos(pose.theta), pose.y + step * std::sin(pose.theta), pose.theta};
    }
    case Motion::TurnLeft:
        return rotate_about_pivot(pose, rear_leg(pose, params.legs, Side::Left), params.turn_rate_rad_s * dt);
    case Motion::TurnRight:
        return rotate_about_pivot(pose, rear_leg(pose, params.legs, Side::Right), -params.turn_rate_rad_s * dt);
    }
    return pose;
}

Pose clip_to_environment(const Pose& pose_old, const Pose& pose_new, const Environment& env) {
    if (env.is_blocked && env.is_blocked(pose_new.x, pose_new.y)) {
        return {pose_old.x, pose_old.y, pose_new.theta};
    }
    return pose_new;
}

std::uint16_t sample_light(const Pose& pose, const Environment& env) {
    if (!env.light_at) {
        return 0;
    }
    const double value = env.light_at(pose.x, pose.y);
    if (!(value > 0.0)) {
        return 0;  // also catches NaN
    }
    return static_cast<std::uint16_t>(std::min(value, static_cast<double>(kMaxLight)));
}

CollisionResult resolve_collisions(std::span<const Vec2> positions, std::span<const double> radii,
                                   const CollisionParams& params, NeighborStrategy strategy, Rng& rng) {
    if (radii.size() != positions.size()) {
        throw std::invalid_argument("resolve_collisions: one radius per robot required");
    }
    CollisionResult result;
    std::vector<Vec2> moved(positions.begin(), positions.end());
    const double reach = 2.0 * (radii.empty() ? 0.0 : *std::max_element(radii.begin(), radii.end()));

    std::vector<std::pair<RobotId, RobotId>> pairs;
    for (int pass = 0; pass <= params.max_passes; ++pass) {
        pairs.clear();
        double worst = 0.0;
        for_each_close_pair(moved, reach, strategy, [&](RobotId i, RobotId j) {
            const double overlap = radii[i] + radii[j] - (moved[j] - moved[i]).norm();
            if (overlap > 0.0) {
                pairs.emplace_back(i, j);
                worst = std::max(worst, overlap);
            }
        });
        if (worst <= params.tolerance_mm) {
            result.converged = true;
            break;
        }
        if (pass == params.max_passes) {
            break;
        }
        std::sort(pairs.begin(), pairs.end());
        for (const auto& [i, j] : pairs) {
            const Vec2 delta = moved[j] - moved[i];
            const double dist = delta.norm();
            const double overlap = radii[i] + radii[j] - dist;
            if (overlap <= 0.0) {
                continue;
            }
            const Vec2 dir = dist < params.coincident_epsilon_mm ? random_unit_vector(rng) : delta * (1.0 / dist);
            const Vec2 shift = dir * (0.5 * overlap);
            moved[i] -= shift;
            moved[j] += shift;
        }
        ++result.passes;
    }

    result.displacements.resize(moved.size());
    for (std::size_t k = 0; k < moved.size(); ++k) {
        result.displacements[k] = moved[k] - positions[k];
    }
    return result;
}

}  // namespace kiloswarm
