#include "kiloswarm/world.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "kiloswarm/log.hpp"

namespace kiloswarm {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<Pose> grid_poses(std::uint32_t n, double spacing, Rng& rng) {
    const auto cols = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const auto rows = (n + cols - 1) / cols;
    const double row_height = spacing * std::sqrt(3.0) / 2.0;
    const double x0 = -0.5 * spacing * (cols - 1);
    const double y0 = -0.5 * row_height * (rows - 1);
    std::vector<Pose> poses;
    poses.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) {
        const std::uint32_t row = k / cols;
        const std::uint32_t col = k % cols;
        const double shift = (row % 2 == 1) ? 0.5 * spacing : 0.0;
        const double theta = std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng);
        poses.push_back({x0 + col * spacing + shift, y0 + row * row_height, theta});
    }
    return poses;
}

std::vector<Pose> random_disc_poses(std::uint32_t n, double radius, double body_radius, Rng& rng) {
    if (radius <= 0.0) {
        radius = 2.0 * body_radius * std::sqrt(static_cast<double>(n));
    }
    const double min_dist2 = 4.0 * body_radius * body_radius;
    std::uniform_real_distribution<double> coord(-radius, radius);
    std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
    std::vector<Pose> poses;
    poses.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            const Vec2 p{coord(rng), coord(rng)};
            if (p.norm2() > radius * radius) {
                continue;
            }
            placed = std::none_of(poses.begin(), poses.end(),
                                  [&](const Pose& q) { return (q.position() - p).norm2() < min_dist2; });
            if (placed) {
                poses.push_back({p.x, p.y, heading(rng)});
            }
        }
        if (!placed) {
            throw ConfigError("initial_layout.radius_mm",
                              "cannot place " + std::to_string(n) + " robots without overlap in the disc");
        }
    }
    return poses;
}

}  // namespace

void CommandQueue::push(SteeringCommand cmd) {
    std::lock_guard lock(mutex_);
    pending_.push_back(std::move(cmd));
}

std::vector<SteeringCommand> CommandQueue::drain() {
    std::lock_guard lock(mutex_);
    std::vector<SteeringCommand> out;
    out.swap(pending_);
    return out;
}

World::World(SimConfig config, const ControllerFactory& factory)
    : World(config, factory, config.environment()) {}

World::World(SimConfig config, const ControllerFactory& factory, Environment env)
    : config_(std::move(config)),
      env_(std::move(env)),
      motion_(config_.motion()),
      channel_(config_.channel()),
      strategy_(choose_strategy(config_.n_bots, config_.neighbor_strategy)),
      rng_(config_.rand_seed) {
    config_.validate();
    place_robots();
    for (RobotSlot& slot : robots_) {
        slot.controller = factory(slot.robot.id);
        if (!slot.controller) {
            throw std::invalid_argument("controller factory returned no controller for robot " +
                                        std::to_string(slot.robot.id));
        }
        slot.controller->bind(slot.robot);
    }
    for (RobotSlot& slot : robots_) {
        run_controller(slot, "setup", [&] { slot.controller->setup(); });
    }
    refresh_positions();
}

void World::place_robots() {
    const std::uint32_t n = config_.n_bots;
    std::vector<Pose> poses = std::visit(
        [&](const auto& layout) -> std::vector<Pose> {
            using T = std::decay_t<decltype(layout)>;
            if constexpr (std::is_same_v<T, GridLayout>) {
                return grid_poses(n, layout.spacing_mm, rng_);
            } else if constexpr (std::is_same_v<T, RandomDiscLayout>) {
                return random_disc_poses(n, layout.radius_mm, config_.body_radius_mm, rng_);
            } else {
                return layout.poses;
            }
        },
        config_.initial_layout);

    robots_.resize(n);
    radii_.assign(n, config_.body_radius_mm);
    for (std::uint32_t id = 0; id < n; ++id) {
        Robot& r = robots_[id].robot;
        r.id = id;
        r.pose = poses[id];
        r.pose.theta = normalize_angle(r.pose.theta);
        r.soft_rng.reseed(mix_seed(config_.rand_seed, id));
        r.env = &env_;
    }
}

void World::refresh_positions() {
    positions_.resize(robots_.size());
    for (std::size_t k = 0; k < robots_.size(); ++k) {
        positions_[k] = robots_[k].robot.pose.position();
    }
}

void World::run_controller(RobotSlot& slot, const char* hook, const std::function<void()>& call) {
    const auto start = config_.enforce_loop_budget ? Clock::now() : Clock::time_point{};
    try {
        call();
    } catch (const std::exception& e) {
        throw ControllerError(slot.robot.id, std::string(hook) + " failed: " + e.what());
    } catch (...) {
        throw ControllerError(slot.robot.id, std::string(hook) + " failed");
    }
    if (config_.enforce_loop_budget) {
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        if (ms > config_.loop_budget_ms) {
            throw ControllerError(slot.robot.id, std::string(hook) + " took " + std::to_string(ms) +
                                                     " ms, over the " + std::to_string(config_.loop_budget_ms) +
                                                     " ms budget (busy-waiting cannot be simulated)");
        }
    }
}

std::uint32_t World::kilo_ticks_at(std::uint64_t tick) const {
    return static_cast<std::uint32_t>(std::floor(static_cast<double>(tick) * config_.time_step_s * 31.0 + 1e-9));
}

bool World::step() {
    for (const SteeringCommand& cmd : commands_.drain()) {
        try {
            apply_command(cmd);
        } catch (const std::invalid_argument& e) {
            log().warn("steering command rejected: {}", e.what());
        }
    }
    if (paused_) {
        return false;
    }

    const std::uint32_t kt = kilo_ticks_at(tick_);
    for (RobotSlot& slot : robots_) {
        slot.robot.kilo_ticks = kt;
    }

    loop_order_.resize(robots_.size());
    for (std::size_t k = 0; k < robots_.size(); ++k) {
        loop_order_[k] = static_cast<RobotId>(k);
    }
    if (config_.shuffle_loop_order) {
        std::shuffle(loop_order_.begin(), loop_order_.end(), rng_);
    }
    for (RobotId id : loop_order_) {
        RobotSlot& slot = robots_[id];
        if (config_.enforce_loop_budget) {
            run_controller(slot, "loop", [&] { slot.controller->loop(); });
            continue;
        }
        try {
            slot.controller->loop();
        } catch (const std::exception& e) {
            throw ControllerError(id, std::string("loop failed: ") + e.what());
        }
    }

    refresh_positions();
    const NeighborIndex* grid = nullptr;
    if (strategy_ == NeighborStrategy::Grid) {
        index_ = NeighborIndex::build(positions_, config_.grid_cell_size());
        grid = &index_;
    }
    deliver_messages(robots_, positions_, grid, channel_, tick_, rng_, stats_);

    const double dt = config_.time_step_s;
    for (RobotSlot& slot : robots_) {
        Robot& r = slot.robot;
        const Pose moved = integrate(r.pose, r.motors, motion_, dt);
        r.pose = env_.is_blocked ? clip_to_environment(r.pose, moved, env_) : moved;
        r.motors.spinup_remaining_s = std::max(0.0, r.motors.spinup_remaining_s - dt);
    }

    resolve_collisions_pass(config_.collision_max_passes);
    ++tick_;
    return true;
}

void World::resolve_collisions_pass(int max_passes) {
    refresh_positions();
    CollisionParams params = config_.collision();
    params.max_passes = max_passes;
    const CollisionResult result = resolve_collisions(positions_, radii_, params, strategy_, rng_);
    if (result.passes == 0) {
        return;
    }
    for (std::size_t k = 0; k < robots_.size(); ++k) {
        Pose& p = robots_[k].robot.pose;
        p.x += result.displacements[k].x;
        p.y += result.displacements[k].y;
    }
}

void World::apply_command(const SteeringCommand& cmd) {
    switch (cmd.kind) {
    case SteeringCommand::Kind::Pause:
        paused_ = true;
        return;
    case SteeringCommand::Kind::Resume:
        paused_ = false;
        return;
    case SteeringCommand::Kind::SetSpeedFactor:
        if (!cmd.factor || !(*cmd.factor > 0.0) || !std::isfinite(*cmd.factor)) {
            throw std::invalid_argument("set_speed_factor needs a positive finite factor");
        }
        speed_factor_ = *cmd.factor;
        return;
    case SteeringCommand::Kind::MoveRobot: {
        if (!cmd.robot_id || !cmd.target) {
            throw std::invalid_argument("move_robot needs a robot id and a target");
        }
        if (*cmd.robot_id >= robots_.size()) {
            throw std::invalid_argument("move_robot: unknown robot id " + std::to_string(*cmd.robot_id));
        }
        if (!std::isfinite(cmd.target->x) || !std::isfinite(cmd.target->y)) {
            throw std::invalid_argument("move_robot: target must be finite");
        }
        Pose& p = robots_[*cmd.robot_id].robot.pose;
        p.x = cmd.target->x;
        p.y = cmd.target->y;
        resolve_collisions_pass(1);
        return;
    }
    }
}

Snapshot World::snapshot() const {
    Snapshot snap;
    snap.tick = tick_;
    snap.sim_time_s = sim_time_s();
    snap.robots.reserve(robots_.size());
    for (const RobotSlot& slot : robots_) {
        const Robot& r = slot.robot;
        snap.robots.push_back(
            {r.id, r.pose.x, r.pose.y, r.pose.theta, r.led, r.motors, slot.controller->debug_string()});
    }
    return snap;
}

std::uint64_t ticks_for_duration(double duration_s, double dt) {
    if (!(duration_s > 0.0) || !(dt > 0.0)) {
        return 0;
    }
    const double q = duration_s / dt;
    const double nearest = std::round(q);
    if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, q)) {
        return static_cast<std::uint64_t>(nearest);
    }
    return static_cast<std::uint64_t>(std::ceil(q));
}

RunSummary run(World& world, const RunOptions& options) {
    if (!(options.duration_s > 0.0)) {
        throw std::invalid_argument("run: duration must be positive");
    }
    RunSummary summary;
    const std::uint64_t every = options.snapshot_every_n_ticks;
    const auto emit = [&] {
        if (options.on_snapshot) {
            options.on_snapshot(world.snapshot());
        }
        ++summary.snapshots;
    };
    const auto start = Clock::now();
    if (every > 0) {
        emit();
    }

    const std::uint64_t target = ticks_for_duration(options.duration_s, world.config().time_step_s);
    const double dt = world.config().time_step_s;
    auto anchor_wall = Clock::now();
    std::uint64_t anchor_tick = world.tick();
    double anchor_factor = world.speed_factor();

    while (summary.ticks < target) {
        if (options.should_stop && options.should_stop()) {
            break;
        }
        if (!world.step()) {
            if (options.on_idle) {
                options.on_idle(world);
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            anchor_wall = Clock::now();
            anchor_tick = world.tick();
            continue;
        }
        ++summary.ticks;
        if (every > 0 && world.tick() % every == 0) {
            emit();
        }
        if (options.on_idle) {
            options.on_idle(world);
        }
        if (options.paced) {
            if (world.speed_factor() != anchor_factor) {
                anchor_factor = world.speed_factor();
                anchor_wall = Clock::now();
                anchor_tick = world.tick() - 1;
            }
            const double wall_s = static_cast<double>(world.tick() - anchor_tick) * dt / anchor_factor;
            std::this_thread::sleep_until(anchor_wall + std::chrono::duration_cast<Clock::duration>(
                                                            std::chrono::duration<double>(wall_s)));
        }
    }

    summary.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    summary.sim_seconds = static_cast<double>(summary.ticks) * dt;
    summary.realtime_factor = summary.wall_seconds > 0.0 ? summary.sim_seconds / summary.wall_seconds : 0.0;
    return summary;
}

}  // namespace kiloswarm
