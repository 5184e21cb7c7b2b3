#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kiloswarm/controllers.hpp"
#include "kiloswarm/world.hpp"
#include "support/generators.hpp"

using namespace kiloswarm;

TEST_SUITE("controllers") {
    TEST_CASE("orbit rule") {
        CHECK(orbit_decide(55, 60) == Turn::Left);
        CHECK(orbit_decide(65, 60) == Turn::Right);
        CHECK(orbit_decide(60, 60) == Turn::Right);
        CHECK(orbit_decide(0, 60) == Turn::Left);
    }

    TEST_CASE("edge-follow rule uses the closest neighbour") {
        const std::vector<NeighborReading> far{{4, 70}, {2, 90}};
        const std::vector<NeighborReading> near{{4, 55}, {2, 90}};
        CHECK(edge_follow_decide(far, 60) == Turn::Right);
        CHECK(edge_follow_decide(near, 60) == Turn::Left);
        CHECK_FALSE(edge_follow_decide({}, 60).has_value());
        const std::vector<NeighborReading> tie{{9, 50}, {3, 50}, {5, 51}};
        CHECK(closest_neighbor(tie)->sender == 3);
    }

    TEST_CASE("gradient update") {
        CHECK(gradient_update({0, true}, {}) == 0);
        const std::vector<std::uint16_t> heard{4, 2, kGradientUnset};
        CHECK(gradient_update({0, true}, heard) == 0);
        CHECK(gradient_update({}, heard) == 3);
        CHECK(gradient_update({}, {}) == kGradientUnset);
        const std::vector<std::uint16_t> near_top{kGradientUnset - 1};
        CHECK(gradient_update({}, near_top) == kGradientUnset);
        const std::vector<std::uint16_t> just_below{kGradientUnset - 2};
        CHECK(gradient_update({}, just_below) == kGradientUnset - 1);
    }

    TEST_CASE("follow-the-leader rules") {
        CHECK(FollowTheLeaderController::follower_motion(65.0, 60.0) == Motion::TurnRight);
        CHECK(FollowTheLeaderController::follower_motion(50.0, 60.0) == Motion::TurnLeft);
        CHECK(FollowTheLeaderController::follower_motion(std::nullopt, 60.0) == Motion::Forward);
        CHECK(FollowTheLeaderController::leader_motion(0) == Motion::Forward);
        CHECK(FollowTheLeaderController::leader_motion(130) == Motion::TurnLeft);
        CHECK(FollowTheLeaderController::leader_motion(200) == Motion::Forward);
        CHECK(FollowTheLeaderController::leader_motion(300) == Motion::TurnRight);
        CHECK(FollowTheLeaderController::leader_motion(326) == Motion::Forward);
    }

    TEST_CASE("leader alone wanders") {
        SimConfig c;
        c.controller = "follow_the_leader";
        World world(c, make_controller_factory(c));
        const Vec2 start = world.robot(0).pose.position();
        run(world, {.duration_s = 30.0});
        CHECK((world.robot(0).pose.position() - start).norm() > 50.0);
    }

    TEST_CASE("three-robot chain gradient") {
        SimConfig c;
        c.n_bots = 3;
        c.controller = "gradient";
        c.initial_layout = ExplicitLayout{{{0, 0, 0}, {80, 0, 0}, {160, 0, 0}}};
        World world(c, make_controller_factory(c));
        run(world, {.duration_s = 10.0});
        for (RobotId id = 0; id < 3; ++id) {
            CHECK(static_cast<const GradientController&>(world.controller(id)).value() == id);
        }
        CHECK(world.snapshot().robots[2].debug == "gradient=2");
    }

    TEST_CASE("disconnected robot keeps the sentinel") {
        SimConfig c;
        c.n_bots = 3;
        c.controller = "gradient";
        c.initial_layout = ExplicitLayout{{{0, 0, 0}, {80, 0, 0}, {500, 0, 0}}};
        World world(c, make_controller_factory(c));
        run(world, {.duration_s = 10.0});
        CHECK(static_cast<const GradientController&>(world.controller(2)).value() == kGradientUnset);
        CHECK(world.robot(2).led == Led{});
    }

    TEST_CASE("edge follower stops when nothing is heard") {
        SimConfig c;
        c.n_bots = 2;
        c.controller = "edge_follow";
        c.initial_layout = ExplicitLayout{{{0, 0, 0}, {300, 0, 0}}};
        World world(c, make_controller_factory(c));
        run(world, {.duration_s = 5.0});
        CHECK(world.robot(1).motors.left == 0);
        CHECK(world.robot(1).motors.right == 0);
        CHECK(world.robot(1).pose == Pose{300, 0, 0});
    }

    TEST_CASE("edge follower circles a convex cluster") {
        const SimConfig c = load_config(KILOSWARM_SOURCE_DIR "/configs/edge_follow.json");
        World world(c, make_controller_factory(c));
        Vec2 centroid{};
        for (RobotId id = 0; id + 1 < world.size(); ++id) {
            centroid += world.robot(id).pose.position();
        }
        centroid = centroid * (1.0 / static_cast<double>(world.size() - 1));
        const RobotId mobile = static_cast<RobotId>(world.size() - 1);
        const auto bearing = [&] {
            const Vec2 rel = world.robot(mobile).pose.position() - centroid;
            return std::atan2(rel.y, rel.x);
        };

        // clockwise winding, monotone at the one-second snapshot cadence; a
        // pivot about the inner rear leg may retreat by a hair within a second
        double winding = 0.0;
        double tick_prev = bearing();
        double second_prev = tick_prev;
        double second_winding = 0.0;
        int retreats = 0;
        double worst_tick_retreat = 0.0;
        for (int t = 1; t <= 31 * 300; ++t) {
            world.step();
            const double a = bearing();
            const double d = normalize_angle(a - tick_prev);
            winding += d;
            worst_tick_retreat = std::max(worst_tick_retreat, d);
            tick_prev = a;
            if (t % 31 == 0) {
                const double ds = normalize_angle(a - second_prev);
                second_winding += ds;
                retreats += ds > 0.0 ? 1 : 0;
                second_prev = a;
            }
        }
        CHECK(winding < -2.0 * std::numbers::pi);
        CHECK(second_winding == doctest::Approx(winding));
        CHECK(retreats == 0);
        CHECK(worst_tick_retreat < 1e-3);
    }

    TEST_CASE("factory validation") {
        SimConfig c;
        c.n_bots = 3;
        c.controller = "orbit";
        c.controller_params = {{"d0_mm", 150}};
        CHECK_THROWS_WITH_AS(make_controller_factory(c), doctest::Contains("controller_params.d0_mm"), ConfigError);
        c.controller_params = {{"star_id", 3}};
        CHECK_THROWS_WITH_AS(make_controller_factory(c), doctest::Contains("controller_params.star_id"), ConfigError);
        c.controller_params = {{"d0", 60}};
        CHECK_THROWS_WITH_AS(make_controller_factory(c), doctest::Contains("controller_params.d0: unknown key"),
                             ConfigError);
        c.controller_params = {{"d0_mm", "sixty"}};
        CHECK_THROWS_AS(make_controller_factory(c), ConfigError);
        c.controller = "swarmify";
        c.controller_params = nlohmann::json::object();
        CHECK_THROWS_WITH_AS(make_controller_factory(c), doctest::Contains("unknown controller"), ConfigError);
        for (const auto& name : controller_names()) {
            c.controller = name;
            CHECK_NOTHROW(make_controller_factory(c));
        }
    }
}
