#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kiloswarm/controller.hpp"

namespace kiloswarm {

struct RobotRecord {
    RobotId id = 0;
    double x_mm = 0.0;
    double y_mm = 0.0;
    double theta_rad = 0.0;
    Led led{};
    MotorCommand motors{};
    std::string debug;

    bool operator==(const RobotRecord& o) const {
        return id == o.id && x_mm == o.x_mm && y_mm == o.y_mm && theta_rad == o.theta_rad && led == o.led &&
               motors.left == o.motors.left && motors.right == o.motors.right && debug == o.debug;
    }
};

/// Immutable copy of the world after a completed tick. Robots are in
/// ascending id order.
struct Snapshot {
    std::uint64_t tick = 0;
    double sim_time_s = 0.0;
    std::vector<RobotRecord> robots;

    bool operator==(const Snapshot&) const = default;
};

/// "r,g,b" with each channel in 0..3.
std::string led_to_string(Led led);
Led led_from_string(const std::string& text);

nlohmann::json to_json(const Snapshot& snap);
Snapshot snapshot_from_json(const nlohmann::json& doc);

/// Streams snapshots to a JSON-lines file, one document per line.
class SnapshotWriter {
public:
    /// Throws std::runtime_error if the file cannot be created.
    explicit SnapshotWriter(const std::filesystem::path& path);
    /// Throws std::runtime_error on an I/O failure; the file is left partial.
    void write(const Snapshot& snap);
    void close();
    std::uint64_t written() const { return written_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::uint64_t written_ = 0;
};

void write_snapshots(std::span<const Snapshot> stream, const std::filesystem::path& path);
std::vector<Snapshot> read_snapshots(const std::filesystem::path& path);

}  // namespace kiloswarm
