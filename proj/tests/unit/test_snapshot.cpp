#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "kiloswarm/snapshot.hpp"
#include "support/generators.hpp"

using namespace kiloswarm;

namespace {

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

Snapshot random_snapshot(testgen::Gen& g, std::uint64_t tick, std::size_t n) {
    Snapshot s{tick, static_cast<double>(tick) / 31.0, {}};
    for (RobotId id = 0; id < n; ++id) {
        RobotRecord r;
        r.id = id;
        r.x_mm = testgen::uniform(g, -1e4, 1e4);
        r.y_mm = testgen::uniform(g, -1e4, 1e4);
        r.theta_rad = testgen::uniform(g, -3.14159, 3.14159);
        r.led = rgb(testgen::uniform_int(g, 0, 3), testgen::uniform_int(g, 0, 3), testgen::uniform_int(g, 0, 3));
        r.motors = {static_cast<std::uint8_t>(testgen::uniform_int(g, 0, 255)),
                    static_cast<std::uint8_t>(testgen::uniform_int(g, 0, 255))};
        r.debug = id % 3 == 0 ? "" : "state \"" + std::to_string(id) + "\"\n\xc3\xa9";
        s.robots.push_back(r);
    }
    return s;
}

std::size_t line_count(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_SUITE("snapshot") {
    TEST_CASE("led text form") {
        CHECK(led_to_string(rgb(3, 0, 0)) == "3,0,0");
        CHECK(led_to_string(Led{}) == "0,0,0");
        CHECK(led_from_string("1,2,3") == Led{1, 2, 3});
        CHECK_THROWS(led_from_string("4,0,0"));
        CHECK_THROWS(led_from_string("1,2"));
        CHECK_THROWS(led_from_string("#FF0000"));
    }

    TEST_CASE("json layout") {
        Snapshot s{31, 1.0, {{0, 1.5, -2.0, 0.25, rgb(0, 3, 0), {70, 0}, "planet"}}};
        const auto j = to_json(s);
        CHECK(j["tick"] == 31);
        CHECK(j["sim_time_s"] == 1.0);
        const auto& r = j["robots"][0];
        CHECK(r["id"] == 0);
        CHECK(r["x_mm"] == 1.5);
        CHECK(r["led"] == "0,3,0");
        CHECK(r["motors"]["left"] == 70);
        CHECK(r["motors"]["right"] == 0);
        CHECK(r["debug"] == "planet");
        CHECK(snapshot_from_json(j) == s);
    }

    TEST_CASE("zero snapshots give an empty file") {
        const auto path = temp_file("kiloswarm_empty.jsonl");
        write_snapshots({}, path);
        CHECK(std::filesystem::file_size(path) == 0);
        CHECK(read_snapshots(path).empty());
    }

    TEST_CASE("two robots, three snapshots give three lines") {
        testgen::Gen g(1);
        std::vector<Snapshot> stream;
        for (std::uint64_t t = 0; t < 3; ++t) {
            stream.push_back(random_snapshot(g, t * 31, 2));
        }
        const auto path = temp_file("kiloswarm_three.jsonl");
        write_snapshots(stream, path);
        CHECK(line_count(path) == 3);
        for (const auto& s : read_snapshots(path)) {
            CHECK(s.robots.size() == 2);
        }
    }

    TEST_CASE("property: write then read reproduces the stream") {
        testgen::Gen g(99);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Snapshot> stream;
            const auto n = testgen::uniform_int(g, 0, 40);
            const auto frames = testgen::uniform_int(g, 1, 12);
            for (std::uint64_t t = 0; t < frames; ++t) {
                stream.push_back(random_snapshot(g, t * 7, n));
            }
            const auto path = temp_file("kiloswarm_roundtrip.jsonl");
            write_snapshots(stream, path);
            CHECK(read_snapshots(path) == stream);
        }
    }

    TEST_CASE("writer failures") {
        CHECK_THROWS_AS(SnapshotWriter("/nonexistent-dir/x.jsonl"), std::runtime_error);
        const auto path = temp_file("kiloswarm_writer.jsonl");
        SnapshotWriter w(path);
        w.write(Snapshot{});
        w.write(Snapshot{1, 0.1, {}});
        CHECK(w.written() == 2);
        w.close();
        CHECK(line_count(path) == 2);
    }

    TEST_CASE("malformed lines are reported") {
        const auto path = temp_file("kiloswarm_malformed.jsonl");
        std::ofstream(path) << "{\"tick\":0,\"sim_time_s\":0,\"robots\":[]}\nnot json\n";
        CHECK_THROWS(read_snapshots(path));
    }
}
