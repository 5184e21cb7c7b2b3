#include "kiloswarm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "kiloswarm/controllers.hpp"
#include "kiloswarm/world.hpp"

namespace kiloswarm {

std::string to_string(Workload w) { return w == Workload::EdgeFollow ? "edge_follow" : "follow_the_leader"; }

Workload workload_from_string(const std::string& name) {
    if (name == "edge_follow") {
        return Workload::EdgeFollow;
    }
    if (name == "follow_the_leader") {
        return Workload::FollowTheLeader;
    }
    throw ConfigError("workload", "expected edge_follow or follow_the_leader, got '" + name + "'");
}

SimConfig workload_config(Workload workload, std::uint32_t n_bots, double duration_s, NeighborStrategy strategy,
                          std::uint64_t seed) {
    SimConfig cfg;
    cfg.n_bots = n_bots;
    cfg.duration_s = duration_s;
    cfg.neighbor_strategy = strategy;
    cfg.rand_seed = seed;
    cfg.snapshot_every_n_ticks = 0;
    if (workload == Workload::FollowTheLeader) {
        cfg.controller = "follow_the_leader";
        cfg.initial_layout = GridLayout{};
        return cfg;
    }

    cfg.controller = "edge_follow";
    const double d0 = 60.0;
    cfg.controller_params = {{"d0_mm", d0}};
    const double spacing = 35.0;
    const std::uint32_t beacons = n_bots > 1 ? n_bots - 1 : 0;
    const auto cols = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(std::max(beacons, 1u)))));
    const double row_height = spacing * std::sqrt(3.0) / 2.0;
    ExplicitLayout layout;
    double east = 0.0;
    for (std::uint32_t k = 0; k < beacons; ++k) {
        const std::uint32_t row = k / cols;
        const std::uint32_t col = k % cols;
        const double x = col * spacing + ((row % 2 == 1) ? 0.5 * spacing : 0.0);
        const double y = row * row_height;
        east = std::max(east, x);
        layout.poses.push_back({x, y, 0.0});
    }
    const double mid_y = beacons == 0 ? 0.0 : 0.5 * row_height * ((beacons - 1) / cols);
    layout.poses.push_back({east + d0, mid_y, -std::numbers::pi / 2.0});
    cfg.initial_layout = std::move(layout);
    return cfg;
}

BenchRow bench_one(Workload workload, const SimConfig& config) {
    World world(config, make_controller_factory(config));
    const std::uint64_t ticks = ticks_for_duration(config.duration_s, config.time_step_s);
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t k = 0; k < ticks; ++k) {
        world.step();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    BenchRow row;
    row.workload = workload;
    row.strategy = world.strategy();
    row.n_bots = config.n_bots;
    row.ticks = ticks;
    row.sim_seconds = static_cast<double>(ticks) * config.time_step_s;
    row.wall_seconds = wall;
    row.ticks_per_second = wall > 0.0 ? static_cast<double>(ticks) / wall : 0.0;
    row.realtime_factor = wall > 0.0 ? row.sim_seconds / wall : 0.0;
    return row;
}

nlohmann::json to_json(const BenchRow& row) {
    return {{"workload", to_string(row.workload)},
            {"strategy", to_string(row.strategy)},
            {"bots", row.n_bots},
            {"ticks", row.ticks},
            {"sim_seconds", row.sim_seconds},
            {"wall_seconds", row.wall_seconds},
            {"ticks_per_second", row.ticks_per_second},
            {"realtime_factor", row.realtime_factor}};
}

}  // namespace kiloswarm
