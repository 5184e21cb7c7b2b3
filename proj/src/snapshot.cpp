#include "kiloswarm/snapshot.hpp"

#include <charconv>
#include <stdexcept>

namespace kiloswarm {

using nlohmann::json;

std::string led_to_string(Led led) {
    return std::to_string(led.r) + "," + std::to_string(led.g) + "," + std::to_string(led.b);
}

Led led_from_string(const std::string& text) {
    unsigned channel[3] = {0, 0, 0};
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int k = 0; k < 3; ++k) {
        const auto [next, ec] = std::from_chars(p, end, channel[k]);
        if (ec != std::errc{} || channel[k] > 3) {
            throw std::invalid_argument("bad LED string '" + text + "'");
        }
        p = next;
        if (k < 2) {
            if (p == end || *p != ',') {
                throw std::invalid_argument("bad LED string '" + text + "'");
            }
            ++p;
        }
    }
    if (p != end) {
        throw std::invalid_argument("bad LED string '" + text + "'");
    }
    return rgb(channel[0], channel[1], channel[2]);
}

json to_json(const Snapshot& snap) {
    json robots = json::array();
    for (const RobotRecord& r : snap.robots) {
        robots.push_back({{"id", r.id},
                          {"x_mm", r.x_mm},
                          {"y_mm", r.y_mm},
                          {"theta_rad", r.theta_rad},
                          {"led", led_to_string(r.led)},
                          {"motors", {{"left", r.motors.left}, {"right", r.motors.right}}},
                          {"debug", r.debug}});
    }
    return {{"tick", snap.tick}, {"sim_time_s", snap.sim_time_s}, {"robots", std::move(robots)}};
}

Snapshot snapshot_from_json(const json& doc) {
    Snapshot snap;
    snap.tick = doc.at("tick").get<std::uint64_t>();
    snap.sim_time_s = doc.at("sim_time_s").get<double>();
    for (const json& r : doc.at("robots")) {
        RobotRecord rec;
        rec.id = r.at("id").get<RobotId>();
        rec.x_mm = r.at("x_mm").get<double>();
        rec.y_mm = r.at("y_mm").get<double>();
        rec.theta_rad = r.at("theta_rad").get<double>();
        rec.led = led_from_string(r.at("led").get<std::string>());
        rec.motors.left = r.at("motors").at("left").get<std::uint8_t>();
        rec.motors.right = r.at("motors").at("right").get<std::uint8_t>();
        rec.debug = r.at("debug").get<std::string>();
        snap.robots.push_back(std::move(rec));
    }
    return snap;
}

SnapshotWriter::SnapshotWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) {
        throw std::runtime_error("cannot open export file '" + path.string() + "'");
    }
}

void SnapshotWriter::write(const Snapshot& snap) {
    out_ << to_json(snap).dump() << '\n';
    if (!out_) {
        throw std::runtime_error("write to '" + path_.string() + "' failed after " + std::to_string(written_) +
                                 " snapshots; the file is incomplete");
    }
    ++written_;
}

void SnapshotWriter::close() {
    out_.flush();
    if (!out_) {
        throw std::runtime_error("flushing '" + path_.string() + "' failed; the file may be incomplete");
    }
    out_.close();
}

void write_snapshots(std::span<const Snapshot> stream, const std::filesystem::path& path) {
    SnapshotWriter writer(path);
    for (const Snapshot& s : stream) {
        writer.write(s);
    }
    writer.close();
}

std::vector<Snapshot> read_snapshots(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open snapshot file '" + path.string() + "'");
    }
    std::vector<Snapshot> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.push_back(snapshot_from_json(json::parse(line)));
        }
    }
    return out;
}

}  // namespace kiloswarm
