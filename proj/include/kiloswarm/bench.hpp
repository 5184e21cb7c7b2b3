#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "kiloswarm/config.hpp"

namespace kiloswarm {

enum class Workload { EdgeFollow, FollowTheLeader };

std::string to_string(Workload w);
Workload workload_from_string(const std::string& name);

/// Benchmark configuration for a swarm size.
///   edge_follow: n-1 stationary beacons in a hexagonal block, one mobile
///                robot starting d0 outside its east edge.
///   follow_the_leader: everyone in the default grid layout, all moving.
SimConfig workload_config(Workload workload, std::uint32_t n_bots, double duration_s, NeighborStrategy strategy,
                          std::uint64_t seed = 1);

struct BenchRow {
    Workload workload = Workload::FollowTheLeader;
    NeighborStrategy strategy = NeighborStrategy::Grid;  // after auto resolution
    std::uint32_t n_bots = 0;
    std::uint64_t ticks = 0;
    double sim_seconds = 0.0;
    double wall_seconds = 0.0;
    double ticks_per_second = 0.0;
    double realtime_factor = 0.0;
};

/// Runs one headless simulation; wall time covers the ticks only, not world
/// construction.
BenchRow bench_one(Workload workload, const SimConfig& config);

nlohmann::json to_json(const BenchRow& row);

}  // namespace kiloswarm
