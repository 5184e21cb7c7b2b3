#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kiloswarm/comms.hpp"
#include "kiloswarm/geometry.hpp"
#include "kiloswarm/neighbor_index.hpp"
#include "kiloswarm/physics.hpp"

namespace kiloswarm {

/// Configuration problem; what() starts with the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key_path, const std::string& problem)
        : std::runtime_error(key_path.empty() ? problem : key_path + ": " + problem), key_path_(std::move(key_path)) {}
    const std::string& key_path() const { return key_path_; }

private:
    std::string key_path_;
};

struct GridLayout {
    double spacing_mm = 35.0;
};
struct RandomDiscLayout {
    double radius_mm = 0.0;  // 0 picks a radius giving ~25% area coverage
};
struct ExplicitLayout {
    std::vector<Pose> poses;
};
using Layout = std::variant<GridLayout, RandomDiscLayout, ExplicitLayout>;

/// Built-in light profiles, for configs that do not supply a C++ callback.
struct LightProfile {
    enum class Kind { None, Constant, LinearX, Radial } kind = Kind::None;
    double value = 0.0;       // Constant: intensity
    double gain = 1.0;        // LinearX: intensity = offset + gain * x
    double offset = 0.0;
    Vec2 source{};            // Radial: peak at source, falling linearly
    double peak = kMaxLight;
    double falloff_per_mm = 1.0;
};

/// Axis-aligned blocked rectangle.
struct Wall {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
};

struct SimConfig {
    std::uint32_t n_bots = 1;
    double time_step_s = 1.0 / 31.0;
    double duration_s = 60.0;
    double comm_radius_mm = 100.0;
    double msg_success_prob = 1.0;
    double distance_noise_std_mm = 0.0;
    double speed_mm_s = 10.0;
    double turn_rate_rad_s = 0.7;
    double leg_angle_deg = 125.0;
    double leg_radius_mm = 16.5;
    double body_radius_mm = 16.5;
    std::uint64_t rand_seed = 0;
    NeighborStrategy neighbor_strategy = NeighborStrategy::Auto;
    std::uint32_t tx_period_ticks = 16;
    Layout initial_layout = GridLayout{};
    std::uint64_t snapshot_every_n_ticks = 31;
    std::string controller = "idle";
    nlohmann::json controller_params = nlohmann::json::object();
    bool shuffle_loop_order = false;
    int collision_max_passes = 8;
    double collision_tolerance_mm = 1e-3;
    double loop_budget_ms = 10.0;
    bool enforce_loop_budget = false;
    LightProfile light{};
    std::vector<Wall> walls;

    MotionParams motion() const;
    ChannelParams channel() const;
    CollisionParams collision() const;
    /// Cell side of the per-tick neighbor grid: max(comm radius, body diameter).
    double grid_cell_size() const;
    /// Environment callbacks built from `light` and `walls`.
    Environment environment() const;

    /// Throws ConfigError on any invariant violation.
    void validate() const;
};

/// Parses a config document. Unknown keys are errors; absent keys keep their
/// defaults.
SimConfig parse_config(const nlohmann::json& doc);
/// Reads and parses a UTF-8 JSON file.
SimConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const SimConfig& config);

std::string to_string(NeighborStrategy strategy);
NeighborStrategy strategy_from_string(const std::string& name);

}  // namespace kiloswarm
