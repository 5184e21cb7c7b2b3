#include "kiloswarm/cli.hpp"

#include <atomic>
#include <csignal>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kiloswarm/bench.hpp"
#include "kiloswarm/bridge.hpp"
#include "kiloswarm/config.hpp"
#include "kiloswarm/controllers.hpp"
#include "kiloswarm/log.hpp"
#include "kiloswarm/snapshot.hpp"
#include "kiloswarm/world.hpp"

namespace kiloswarm {

namespace {

using nlohmann::json;

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted = true; }

struct RunArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration_s;
    std::string export_path;
    std::optional<std::uint16_t> serve_port;
    bool headless = false;
    std::optional<double> speed_factor;
    bool shuffle_loop_order = false;
    std::string ui_dir;
    std::string bind_address = "127.0.0.1";
};

struct BenchArgs {
    std::vector<std::uint32_t> bots;
    double duration_s = 60.0;
    std::string strategy = "grid";
    std::string workload = "follow_the_leader";
    std::uint64_t seed = 1;
};

int do_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    SimConfig config;
    try {
        config = load_config(args.config_path);
        if (args.seed) {
            config.rand_seed = *args.seed;
        }
        if (args.duration_s) {
            config.duration_s = *args.duration_s;
        }
        if (args.shuffle_loop_order) {
            config.shuffle_loop_order = true;
        }
        config.validate();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    if (args.speed_factor && !(*args.speed_factor > 0.0)) {
        err << "config error: --speed-factor must be positive\n";
        return kExitConfigError;
    }
    if (args.headless && args.serve_port) {
        err << "usage error: --headless and --serve are exclusive\n";
        return kExitConfigError;
    }

    try {
        World world(config, make_controller_factory(config));
        if (args.speed_factor) {
            world.apply_command(SteeringCommand::set_speed_factor(*args.speed_factor));
        }

        std::optional<SnapshotWriter> writer;
        if (!args.export_path.empty()) {
            writer.emplace(args.export_path);
        }

        std::unique_ptr<bridge::Server> server;
        if (args.serve_port) {
            bridge::ServerOptions options;
            options.bind_address = args.bind_address;
            options.port = *args.serve_port;
            options.ui_dir = args.ui_dir;
            server = std::make_unique<bridge::Server>(options, world.size(),
                                                      [&world](SteeringCommand cmd) { world.submit(std::move(cmd)); });
            server->start();
            err << "serving on http://" << args.bind_address << ':' << server->port() << "/\n";
        }

        RunOptions options;
        options.duration_s = config.duration_s;
        options.snapshot_every_n_ticks = writer ? config.snapshot_every_n_ticks : 0;
        options.paced = server != nullptr || args.speed_factor.has_value();
        if (writer) {
            options.on_snapshot = [&writer](const Snapshot& snap) { writer->write(snap); };
        }
        if (server) {
            options.on_idle = [&server](const World& w) { server->publish(w); };
        }
        g_interrupted = false;
        auto previous = std::signal(SIGINT, on_interrupt);
        options.should_stop = [] { return g_interrupted.load(); };

        const RunSummary summary = run(world, options);
        std::signal(SIGINT, previous);

        if (server) {
            server->publish_now(world);
            server->stop();
        }
        if (writer) {
            writer->close();
        }

        json line = {{"command", "run"},
                     {"config", args.config_path},
                     {"n_bots", config.n_bots},
                     {"seed", config.rand_seed},
                     {"ticks", summary.ticks},
                     {"sim_seconds", summary.sim_seconds},
                     {"wall_seconds", summary.wall_seconds},
                     {"realtime_factor", summary.realtime_factor},
                     {"snapshots", summary.snapshots},
                     {"interrupted", g_interrupted.load()}};
        if (!args.export_path.empty()) {
            line["export"] = args.export_path;
        }
        out << line.dump() << std::endl;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
    return kExitOk;
}

int do_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
    Workload workload{};
    NeighborStrategy strategy{};
    try {
        workload = workload_from_string(args.workload);
        strategy = strategy_from_string(args.strategy);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    if (args.bots.empty() || !(args.duration_s > 0.0)) {
        err << "config error: --bots needs at least one size and --duration must be positive\n";
        return kExitConfigError;
    }

    json rows = json::array();
    try {
        for (const std::uint32_t n : args.bots) {
            const SimConfig config = workload_config(workload, n, args.duration_s, strategy, args.seed);
            const BenchRow row = bench_one(workload, config);
            const json j = to_json(row);
            out << j.dump() << std::endl;
            rows.push_back(j);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
    out << json{{"command", "bench"}, {"workload", args.workload}, {"duration_s", args.duration_s}, {"rows", rows}}.dump()
        << std::endl;
    return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tick-based simulator for Kilobot-style swarms", "kiloswarm"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run one simulation");
    run_cmd->add_option("--config", run_args.config_path, "JSON config file")->required();
    run_cmd->add_option("--seed", run_args.seed, "Override rand_seed");
    run_cmd->add_option("--duration", run_args.duration_s, "Simulated seconds (overrides duration_s)");
    run_cmd->add_option("--export", run_args.export_path, "Write snapshots as JSON lines");
    run_cmd->add_option("--serve", run_args.serve_port, "Serve the live viewer on this port (0 picks one)");
    run_cmd->add_flag("--headless", run_args.headless, "No viewer (the default without --serve)");
    run_cmd->add_option("--speed-factor", run_args.speed_factor, "Pace simulated time at this multiple of wall time");
    run_cmd->add_flag("--shuffle-loop-order", run_args.shuffle_loop_order, "Seeded shuffle of controller order");
    run_cmd->add_option("--ui-dir", run_args.ui_dir, "Static viewer files served at /");
    run_cmd->add_option("--bind", run_args.bind_address, "Viewer bind address");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Measure ticks/s across swarm sizes");
    bench_cmd->add_option("--bots", bench_args.bots, "Swarm sizes, e.g. 10,100,1000")->required()->delimiter(',');
    bench_cmd->add_option("--duration", bench_args.duration_s, "Simulated seconds per size");
    bench_cmd->add_option("--strategy", bench_args.strategy, "auto, grid or brute");
    bench_cmd->add_option("--workload", bench_args.workload, "edge_follow or follow_the_leader");
    bench_cmd->add_option("--seed", bench_args.seed, "World seed");

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("kiloswarm");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) {
        argv.push_back(a.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    if (run_cmd->parsed()) {
        return do_run(run_args, out, err);
    }
    return do_bench(bench_args, out, err);
}

}  // namespace kiloswarm
