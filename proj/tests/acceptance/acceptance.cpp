// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance [criterion numbers...]   runs all when none are given

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "kiloswarm/bench.hpp"
#include "kiloswarm/cli.hpp"
#include "kiloswarm/controllers.hpp"
#include "kiloswarm/world.hpp"
#include "support/generators.hpp"

using namespace kiloswarm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const fs::path kConfigs = KILOSWARM_SOURCE_DIR "/configs";

// --- orbit ----------------------------------------------------------------

struct OrbitRun {
    std::vector<double> distances;  // per tick after the transient
    double winding_rad = 0.0;       // signed, about the star, after the transient
    int second_retreats = 0;        // 1 s intervals where the winding went backwards
    double worst_tick_retreat = 0.0;
    ChannelStats stats;
    double wall_s = 0.0;
};

OrbitRun run_orbit(const SimConfig& config, double transient_s, double window_s) {
    OrbitRun out;
    const auto t0 = Clock::now();
    World world(config, make_controller_factory(config));
    const std::uint64_t skip = ticks_for_duration(transient_s, config.time_step_s);
    const std::uint64_t total = skip + ticks_for_duration(window_s, config.time_step_s);
    const auto bearing = [&] {
        const Vec2 rel = world.robot(1).pose.position() - world.robot(0).pose.position();
        return std::atan2(rel.y, rel.x);
    };
    double prev = 0.0;
    double second_prev = 0.0;
    out.distances.reserve(total - skip);
    for (std::uint64_t t = 1; t <= total; ++t) {
        world.step();
        if (t < skip) {
            continue;
        }
        const double a = bearing();
        if (t == skip) {
            prev = second_prev = a;
            continue;
        }
        out.distances.push_back((world.robot(1).pose.position() - world.robot(0).pose.position()).norm());
        const double d = normalize_angle(a - prev);
        out.winding_rad += d;
        out.worst_tick_retreat = std::max(out.worst_tick_retreat, d);
        prev = a;
        if ((t - skip) % 31 == 0) {
            out.second_retreats += normalize_angle(a - second_prev) > 0.0 ? 1 : 0;
            second_prev = a;
        }
    }
    out.stats = world.channel_stats();
    out.wall_s = seconds_since(t0);
    return out;
}

double variance(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return ss / static_cast<double>(xs.size() - 1);
}

Verdict orbit_reproduction() {
    const SimConfig config = load_config(kConfigs / "orbit.json");
    const OrbitRun r = run_orbit(config, 60.0, 600.0);
    const double in_band = static_cast<double>(std::count_if(r.distances.begin(), r.distances.end(),
                                                             [](double d) { return d >= 45.0 && d <= 75.0; })) /
                           static_cast<double>(r.distances.size());
    const double laps = -r.winding_rad / (2.0 * std::numbers::pi);
    const bool pass = in_band >= 0.95 && laps >= 4.0 && r.second_retreats == 0 && r.wall_s < 5.0;
    return {pass, fmt::format("{:.1f}% of {} ticks in 60±15 mm, {:.2f} clockwise laps, {} backward seconds "
                              "(largest per-tick retreat {:.1e} rad), {:.3f} s wall",
                              100.0 * in_band, r.distances.size(), laps, r.second_retreats, r.worst_tick_retreat,
                              r.wall_s)};
}

Verdict noise_effect() {
    const OrbitRun clean = run_orbit(load_config(kConfigs / "orbit.json"), 60.0, 600.0);
    const SimConfig noisy_cfg = load_config(kConfigs / "orbit_noisy.json");
    const OrbitRun noisy = run_orbit(noisy_cfg, 60.0, 600.0);
    const double v_clean = variance(clean.distances);
    const double v_noisy = variance(noisy.distances);
    // one star beacon every 16 ticks: ~1.9 offers per simulated second
    const OrbitRun long_run = run_orbit(noisy_cfg, 0.0, 6000.0);
    const double frac = long_run.stats.delivered_fraction();
    const bool pass = v_noisy > v_clean && long_run.stats.offers >= 10000 && frac >= 0.78 && frac <= 0.82;
    return {pass, fmt::format("variance {:.2f} mm² noisy vs {:.2f} mm² clean; delivered {:.4f} of {} offers",
                              v_noisy, v_clean, frac, long_run.stats.offers)};
}

// --- neighbor index -------------------------------------------------------

Verdict neighbor_equivalence() {
    const auto t0 = Clock::now();
    testgen::Gen g(20240601);
    std::uint64_t queries = 0;
    std::uint64_t mismatches = 0;
    std::vector<RobotId> a;
    std::vector<RobotId> b;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = testgen::uniform_int(g, 10, 2000);
        const double cell = testgen::uniform(g, 10.0, 200.0);
        const double range = cell * testgen::uniform(g, 0.05, 1.0);
        const auto pts = trial % 4 == 0 ? testgen::adversarial_points(g, n, cell)
                                        : testgen::points_in_square(g, n, cell * std::sqrt(n) * testgen::uniform(g, 0.2, 2.0));
        const auto index = NeighborIndex::build(pts, cell);
        for (RobotId id = 0; id < n; ++id) {
            query_range_into(index, id, pts, range, a);
            brute_force_range_into(pts, id, range, b);
            mismatches += a == b ? 0 : 1;
            ++queries;
        }
    }
    const double wall = seconds_since(t0);
    return {mismatches == 0 && wall < 60.0,
            fmt::format("{} mismatches over {} queries in 1000 configurations, {:.1f} s wall", mismatches, queries,
                        wall)};
}

// --- scaling --------------------------------------------------------------

Verdict scaling_shape() {
    const std::vector<std::uint32_t> sizes{250, 500, 1000, 2000};
    std::map<std::pair<NeighborStrategy, std::uint32_t>, BenchRow> rows;
    for (NeighborStrategy s : {NeighborStrategy::Grid, NeighborStrategy::Brute}) {
        for (std::uint32_t n : sizes) {
            // best of two to damp scheduler noise
            BenchRow best;
            for (int rep = 0; rep < 2; ++rep) {
                const BenchRow row = bench_one(Workload::FollowTheLeader,
                                               workload_config(Workload::FollowTheLeader, n, 60.0, s));
                if (rep == 0 || row.wall_seconds < best.wall_seconds) {
                    best = row;
                }
            }
            rows[{s, n}] = best;
        }
    }
    bool pass = true;
    std::string detail;
    for (std::size_t k = 1; k < sizes.size(); ++k) {
        const double grid = rows[{NeighborStrategy::Grid, sizes[k]}].wall_seconds /
                            rows[{NeighborStrategy::Grid, sizes[k - 1]}].wall_seconds;
        const double brute = rows[{NeighborStrategy::Brute, sizes[k]}].wall_seconds /
                             rows[{NeighborStrategy::Brute, sizes[k - 1]}].wall_seconds;
        pass = pass && grid <= 3.0;
        if (sizes[k - 1] >= 500) {
            pass = pass && brute >= 3.0;
        }
        detail += fmt::format("{}→{}: grid ×{:.2f}, brute ×{:.2f}; ", sizes[k - 1], sizes[k], grid, brute);
    }
    const double rt = rows[{NeighborStrategy::Grid, 1000}].realtime_factor;
    pass = pass && rt >= 10.0;
    detail += fmt::format("grid realtime factor at 1000 bots {:.1f}×", rt);
    for (NeighborStrategy s : {NeighborStrategy::Grid, NeighborStrategy::Brute}) {
        detail += fmt::format("\n       {:5} wall s:", to_string(s));
        for (std::uint32_t n : sizes) {
            detail += fmt::format(" {}={:.3f}", n, rows[{s, n}].wall_seconds);
        }
    }
    return {pass, detail};
}

// --- kinematics -----------------------------------------------------------

Verdict kinematics_oracles() {
    const MotionParams params;
    const double dt = 1.0 / 31.0;
    testgen::Gen g(5);
    double worst_pivot = 0.0;
    double worst_heading = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        Pose pose{testgen::uniform(g, -1000, 1000), testgen::uniform(g, -1000, 1000), testgen::uniform(g, -3, 3)};
        const bool left_motor = trial % 2 == 0;
        const MotorCommand m = left_motor ? MotorCommand{255, 0} : MotorCommand{0, 255};
        const Side side = left_motor ? Side::Right : Side::Left;
        const Vec2 pivot = rear_leg(pose, params.legs, side);
        const double theta0 = pose.theta;
        const int n = static_cast<int>(testgen::uniform_int(g, 1, 200));
        double unwrapped = 0.0;
        for (int k = 0; k < n; ++k) {
            const Pose next = integrate(pose, m, params, dt);
            unwrapped += normalize_angle(next.theta - pose.theta);
            pose = next;
            worst_pivot = std::max(worst_pivot, (rear_leg(pose, params.legs, side) - pivot).norm());
        }
        const double expected = (left_motor ? -1.0 : 1.0) * n * params.turn_rate_rad_s * dt;
        worst_heading = std::max(worst_heading, std::abs(unwrapped - expected));
        worst_heading = std::max(worst_heading, std::abs(normalize_angle(pose.theta - theta0 - expected)));
    }

    // independent rotation-matrix script (tests/oracles/kinematics_oracle.py)
    const Pose ccw = rotate_about_pivot({0, 0, 0}, {-9.464011199792262, -13.516008730768363}, 0.1);
    const Pose left_motor = integrate({0, 0, 0}, {255, 0}, MotionParams{10.0, 0.1, {}}, 1.0);
    const Pose wheels = integrate({10, -5, 1.0}, {255, 0}, MotionParams{10.0, 0.7, {90.0, 20.0, 20.0}}, dt);
    const double oracle_err = std::max({std::hypot(ccw.x - -1.39662996678204, ccw.y - 0.877300827539429),
                                        std::hypot(left_motor.x - 1.3020686952598908, left_motor.y - -1.0123483189787876),
                                        std::hypot(wheels.x - 10.24827711405592, wheels.y - -4.622767945377467)});
    const bool pass = worst_pivot <= 1e-9 && worst_heading <= 1e-9 && oracle_err <= 1e-6;
    return {pass, fmt::format("pivot drift {:.1e} mm, heading error {:.1e} rad, oracle error {:.1e} mm",
                              worst_pivot, worst_heading, oracle_err)};
}

// --- collisions -----------------------------------------------------------

Verdict collision_suite() {
    testgen::Gen g(66);
    const double r = 16.5;
    double worst_gap = 1e9;
    double worst_sum = 0.0;
    int worst_passes = 0;
    int unconverged = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = testgen::uniform_int(g, 2, 200);
        const auto pos = testgen::overlapping_cluster(g, n, r);
        const std::vector<double> radii(n, r);
        Rng rng(trial);
        CollisionParams params;
        params.max_passes = 2000;
        const auto res = resolve_collisions(pos, radii, params, NeighborStrategy::Auto, rng);
        unconverged += res.converged ? 0 : 1;
        worst_passes = std::max(worst_passes, res.passes);
        Vec2 sum{};
        for (const Vec2& d : res.displacements) {
            sum += d;
        }
        worst_sum = std::max(worst_sum, sum.norm());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                worst_gap = std::min(worst_gap, (pos[j] + res.displacements[j] - pos[i] - res.displacements[i]).norm());
            }
        }
    }
    const bool pass = worst_gap >= 2 * r - 1e-3 && worst_sum <= 1e-9 && unconverged == 0;
    return {pass, fmt::format("200 clusters of 2–200: closest pair {:.6f} mm (bound {:.3f}), net displacement "
                              "{:.1e} mm, up to {} passes",
                              worst_gap, 2 * r - 1e-3, worst_sum, worst_passes)};
}

// --- gradient -------------------------------------------------------------

Verdict gradient_oracle() {
    testgen::Gen g(777);
    int matched = 0;
    std::string first_failure;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = testgen::uniform_int(g, 2, 80);
        const auto pts = testgen::connected_configuration(g, n, 95.0, 34.0);
        SimConfig c;
        c.n_bots = static_cast<std::uint32_t>(n);
        c.controller = "gradient";
        c.rand_seed = trial;
        ExplicitLayout layout;
        for (const Vec2& p : pts) {
            layout.poses.push_back({p.x, p.y, 0.0});
        }
        c.initial_layout = layout;
        World world(c, make_controller_factory(c));
        run(world, {.duration_s = 60.0});
        const auto hops = testgen::bfs_hops(pts, 0, c.comm_radius_mm);
        bool ok = true;
        for (RobotId id = 0; id < n; ++id) {
            const auto v = static_cast<const GradientController&>(world.controller(id)).value();
            ok = ok && hops[id] >= 0 && v == hops[id];
        }
        matched += ok ? 1 : 0;
        if (!ok && first_failure.empty()) {
            first_failure = fmt::format(" (first failure: configuration {}, {} robots)", trial, n);
        }
    }
    return {matched == 50, fmt::format("{}/50 configurations match BFS hop counts{}", matched, first_failure)};
}

// --- determinism ----------------------------------------------------------

Verdict determinism() {
    const fs::path dir = fs::temp_directory_path() / "kiloswarm_acceptance";
    fs::create_directories(dir);
    int configs = 0;
    std::vector<std::string> failures;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        for (bool shuffle : {false, true}) {
            std::vector<std::string> contents;
            for (int rep = 0; rep < 2; ++rep) {
                const fs::path out = dir / fmt::format("{}_{}_{}.jsonl", entry.path().stem().string(), shuffle, rep);
                std::vector<std::string> args{"run", "--config", entry.path().string(), "--seed", "7", "--export",
                                              out.string()};
                if (shuffle) {
                    args.push_back("--shuffle-loop-order");
                }
                std::ostringstream sink;
                if (cli_main(args, sink, sink) != kExitOk) {
                    failures.push_back(entry.path().filename().string() + " (run failed)");
                }
                std::ifstream in(out, std::ios::binary);
                contents.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
            }
            if (contents[0] != contents[1] || contents[0].empty()) {
                failures.push_back(entry.path().filename().string() + (shuffle ? " shuffled" : ""));
            }
        }
        ++configs;
    }
    std::string detail = fmt::format("{} bundled configs, plain and shuffled, byte-identical exports", configs);
    for (const auto& f : failures) {
        detail += "; differs: " + f;
    }
    return {failures.empty() && configs > 0, detail};
}

// --- clock ----------------------------------------------------------------

class ClockWitness : public Controller {
public:
    explicit ClockWitness(const World*& world) : world_(world) {}
    void loop() override {
        const double t = world_->sim_time_s();
        const auto expected = static_cast<std::uint32_t>(std::floor(t * 31.0 + 1e-9));
        clock_errors += kilo_ticks() == expected ? 0 : 1;
        const std::uint32_t before = kilo_ticks();
        const auto w0 = Clock::now();
        delay(500);
        worst_delay_s = std::max(worst_delay_s, seconds_since(w0));
        delay_errors += kilo_ticks() == before ? 0 : 1;
        ++calls;
    }
    int clock_errors = 0;
    int delay_errors = 0;
    int calls = 0;
    double worst_delay_s = 0.0;

private:
    const World*& world_;
};

Verdict clock_semantics() {
    int clock_errors = 0;
    int delay_errors = 0;
    int calls = 0;
    double worst_delay = 0.0;
    bool poses_match = true;
    for (double dt : {1.0 / 31.0, 0.01, 0.05}) {
        SimConfig c;
        c.n_bots = 3;
        c.time_step_s = dt;
        const World* handle = nullptr;
        World world(c, [&](RobotId) { return std::make_unique<ClockWitness>(handle); });
        handle = &world;
        SimConfig idle_cfg = c;
        World idle(idle_cfg, [](RobotId) { return std::make_unique<IdleController>(); });
        run(world, {.duration_s = 30.0});
        run(idle, {.duration_s = 30.0});
        for (RobotId id = 0; id < 3; ++id) {
            const auto& w = static_cast<const ClockWitness&>(world.controller(id));
            clock_errors += w.clock_errors;
            delay_errors += w.delay_errors;
            calls += w.calls;
            worst_delay = std::max(worst_delay, w.worst_delay_s);
            poses_match = poses_match && world.robot(id).pose == idle.robot(id).pose;
        }
    }
    const bool pass = clock_errors == 0 && delay_errors == 0 && worst_delay < 1e-3 && poses_match;
    return {pass, fmt::format("{} loop calls at three step sizes: {} clock mismatches, {} delay side effects, "
                              "longest delay(500) {:.1e} s, poses {}",
                              calls, clock_errors, delay_errors, worst_delay, poses_match ? "unchanged" : "CHANGED")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"orbit reproduction", orbit_reproduction},     {"noise effect", noise_effect},
        {"neighbor-index oracle", neighbor_equivalence}, {"scaling shape", scaling_shape},
        {"kinematics oracles", kinematics_oracles},       {"collision suite", collision_suite},
        {"gradient oracle", gradient_oracle},             {"determinism", determinism},
        {"clock and delay", clock_semantics},
    };
    std::set<int> selected;
    for (int k = 1; k < argc; ++k) {
        selected.insert(std::atoi(argv[k]));
    }
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int number = static_cast<int>(k) + 1;
        if (!selected.empty() && !selected.contains(number)) {
            continue;
        }
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::printf("%s [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", number, criteria[k].first.c_str(),
                    v.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
