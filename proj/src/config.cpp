#include "kiloswarm/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace kiloswarm {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

/// Strict object reader: remembers which keys were consumed so the rest can
/// be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ConfigError(path_, "expected an object");
        }
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json* get(const std::string& key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) {
                throw ConfigError(join(path_, key), "expected a number");
            }
            out = v->get<double>();
            if (!std::isfinite(out)) {
                throw ConfigError(join(path_, key), "must be finite");
            }
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) {
                throw ConfigError(join(path_, key), "expected an integer");
            }
            if (v->is_number_unsigned()) {
                const auto u = v->get<std::uint64_t>();
                if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
                    throw ConfigError(join(path_, key), "out of range");
                }
                out = static_cast<Int>(u);
                return;
            }
            const auto s = v->get<std::int64_t>();
            if (s < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
                (s > 0 && static_cast<std::uint64_t>(s) > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))) {
                throw ConfigError(join(path_, key), "out of range");
            }
            out = static_cast<Int>(s);
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = get(key)) {
            if (!v->is_boolean()) {
                throw ConfigError(join(path_, key), "expected true or false");
            }
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = get(key)) {
            if (!v->is_string()) {
                throw ConfigError(join(path_, key), "expected a string");
            }
            out = v->get<std::string>();
        }
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError(join(path_, key), "unknown key");
            }
        }
    }

    const std::string& path() const { return path_; }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

Layout parse_layout(const json& v, const std::string& path) {
    if (v.is_string()) {
        const auto kind = v.get<std::string>();
        if (kind == "grid") {
            return GridLayout{};
        }
        if (kind == "random_disc") {
            return RandomDiscLayout{};
        }
        throw ConfigError(path, "unknown layout '" + kind + "' (expected grid, random_disc or explicit)");
    }
    ObjectReader r(v, path);
    std::string kind;
    r.string("kind", kind);
    if (kind == "grid") {
        GridLayout g;
        r.number("spacing_mm", g.spacing_mm);
        r.finish();
        return g;
    }
    if (kind == "random_disc") {
        RandomDiscLayout d;
        r.number("radius_mm", d.radius_mm);
        r.finish();
        return d;
    }
    if (kind == "explicit") {
        ExplicitLayout e;
        const json* poses = r.get("poses");
        if (poses == nullptr || !poses->is_array()) {
            throw ConfigError(join(path, "poses"), "expected an array of poses");
        }
        for (std::size_t i = 0; i < poses->size(); ++i) {
            ObjectReader pr((*poses)[i], join(path, "poses") + "[" + std::to_string(i) + "]");
            Pose p;
            if (!pr.has("x_mm") || !pr.has("y_mm")) {
                throw ConfigError(pr.path(), "x_mm and y_mm are required");
            }
            pr.number("x_mm", p.x);
            pr.number("y_mm", p.y);
            pr.number("theta_rad", p.theta);
            pr.finish();
            e.poses.push_back(p);
        }
        r.finish();
        return e;
    }
    throw ConfigError(join(path, "kind"), "unknown layout '" + kind + "' (expected grid, random_disc or explicit)");
}

LightProfile parse_light(const json& v, const std::string& path) {
    ObjectReader r(v, path);
    LightProfile light;
    std::string kind;
    r.string("kind", kind);
    if (kind == "constant") {
        light.kind = LightProfile::Kind::Constant;
        r.number("value", light.value);
    } else if (kind == "linear_x") {
        light.kind = LightProfile::Kind::LinearX;
        r.number("gain", light.gain);
        r.number("offset", light.offset);
    } else if (kind == "radial") {
        light.kind = LightProfile::Kind::Radial;
        r.number("source_x_mm", light.source.x);
        r.number("source_y_mm", light.source.y);
        r.number("peak", light.peak);
        r.number("falloff_per_mm", light.falloff_per_mm);
    } else if (kind == "none") {
        light.kind = LightProfile::Kind::None;
    } else {
        throw ConfigError(join(path, "kind"), "unknown light profile '" + kind + "'");
    }
    r.finish();
    return light;
}

void parse_environment(const json& v, const std::string& path, SimConfig& cfg) {
    ObjectReader r(v, path);
    if (const json* light = r.get("light")) {
        cfg.light = parse_light(*light, join(path, "light"));
    }
    if (const json* walls = r.get("walls")) {
        if (!walls->is_array()) {
            throw ConfigError(join(path, "walls"), "expected an array");
        }
        for (std::size_t i = 0; i < walls->size(); ++i) {
            ObjectReader wr((*walls)[i], join(path, "walls") + "[" + std::to_string(i) + "]");
            Wall w;
            for (const char* key : {"x_min", "x_max", "y_min", "y_max"}) {
                if (!wr.has(key)) {
                    throw ConfigError(join(wr.path(), key), "required");
                }
            }
            wr.number("x_min", w.x_min);
            wr.number("x_max", w.x_max);
            wr.number("y_min", w.y_min);
            wr.number("y_max", w.y_max);
            wr.finish();
            cfg.walls.push_back(w);
        }
    }
    r.finish();
}

void require_positive(double v, const char* key) {
    if (!(v > 0.0)) {
        throw ConfigError(key, "must be positive");
    }
}

json layout_to_json(const Layout& layout) {
    return std::visit(
        [](const auto& l) -> json {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, GridLayout>) {
                return {{"kind", "grid"}, {"spacing_mm", l.spacing_mm}};
            } else if constexpr (std::is_same_v<T, RandomDiscLayout>) {
                return {{"kind", "random_disc"}, {"radius_mm", l.radius_mm}};
            } else {
                json poses = json::array();
                for (const Pose& p : l.poses) {
                    poses.push_back({{"x_mm", p.x}, {"y_mm", p.y}, {"theta_rad", p.theta}});
                }
                return {{"kind", "explicit"}, {"poses", poses}};
            }
        },
        layout);
}

}  // namespace

std::string to_string(NeighborStrategy strategy) {
    switch (strategy) {
    case NeighborStrategy::Auto:
        return "auto";
    case NeighborStrategy::Grid:
        return "grid";
    case NeighborStrategy::Brute:
        return "brute";
    }
    return "auto";
}

NeighborStrategy strategy_from_string(const std::string& name) {
    if (name == "auto") {
        return NeighborStrategy::Auto;
    }
    if (name == "grid") {
        return NeighborStrategy::Grid;
    }
    if (name == "brute") {
        return NeighborStrategy::Brute;
    }
    throw ConfigError("neighbor_strategy", "expected auto, grid or brute, got '" + name + "'");
}

MotionParams SimConfig::motion() const {
    return {speed_mm_s, turn_rate_rad_s, LegGeometry{leg_angle_deg, leg_radius_mm, body_radius_mm}};
}

ChannelParams SimConfig::channel() const {
    return {comm_radius_mm, msg_success_prob, distance_noise_std_mm, tx_period_ticks};
}

CollisionParams SimConfig::collision() const {
    CollisionParams p;
    p.max_passes = collision_max_passes;
    p.tolerance_mm = collision_tolerance_mm;
    return p;
}

double SimConfig::grid_cell_size() const { return std::max(comm_radius_mm, 2.0 * body_radius_mm); }

Environment SimConfig::environment() const {
    Environment env;
    const LightProfile l = light;
    switch (l.kind) {
    case LightProfile::Kind::None:
        break;
    case LightProfile::Kind::Constant:
        env.light_at = [v = l.value](double, double) { return v; };
        break;
    case LightProfile::Kind::LinearX:
        env.light_at = [l](double x, double) { return l.offset + l.gain * x; };
        break;
    case LightProfile::Kind::Radial:
        env.light_at = [l](double x, double y) { return l.peak - l.falloff_per_mm * (Vec2{x, y} - l.source).norm(); };
        break;
    }
    if (!walls.empty()) {
        env.is_blocked = [w = walls](double x, double y) {
            for (const Wall& wall : w) {
                if (wall.contains(x, y)) {
                    return true;
                }
            }
            return false;
        };
    }
    return env;
}

void SimConfig::validate() const {
    if (n_bots == 0) {
        throw ConfigError("n_bots", "must be at least 1");
    }
    require_positive(time_step_s, "time_step_s");
    require_positive(duration_s, "duration_s");
    require_positive(comm_radius_mm, "comm_radius_mm");
    require_positive(speed_mm_s, "speed_mm_s");
    require_positive(turn_rate_rad_s, "turn_rate_rad_s");
    require_positive(leg_radius_mm, "leg_radius_mm");
    require_positive(body_radius_mm, "body_radius_mm");
    if (!(msg_success_prob >= 0.0 && msg_success_prob <= 1.0)) {
        throw ConfigError("msg_success_prob", "must be within [0, 1]");
    }
    if (!(distance_noise_std_mm >= 0.0)) {
        throw ConfigError("distance_noise_std_mm", "must be >= 0");
    }
    if (!(leg_angle_deg > 0.0 && leg_angle_deg <= 180.0)) {
        throw ConfigError("leg_angle_deg", "must be within (0, 180]");
    }
    if (leg_radius_mm > body_radius_mm) {
        throw ConfigError("leg_radius_mm", "must not exceed body_radius_mm");
    }
    if (tx_period_ticks == 0) {
        throw ConfigError("tx_period_ticks", "must be at least 1");
    }
    if (collision_max_passes < 0) {
        throw ConfigError("collision_max_passes", "must be >= 0");
    }
    if (!(collision_tolerance_mm >= 0.0)) {
        throw ConfigError("collision_tolerance_mm", "must be >= 0");
    }
    require_positive(loop_budget_ms, "loop_budget_ms");
    if (const auto* grid = std::get_if<GridLayout>(&initial_layout)) {
        require_positive(grid->spacing_mm, "initial_layout.spacing_mm");
    }
    if (const auto* disc = std::get_if<RandomDiscLayout>(&initial_layout)) {
        if (disc->radius_mm < 0.0) {
            throw ConfigError("initial_layout.radius_mm", "must be >= 0");
        }
    }
    if (const auto* ex = std::get_if<ExplicitLayout>(&initial_layout)) {
        if (ex->poses.size() != n_bots) {
            throw ConfigError("initial_layout.poses", "has " + std::to_string(ex->poses.size()) +
                                                          " entries but n_bots is " + std::to_string(n_bots));
        }
    }
    for (std::size_t i = 0; i < walls.size(); ++i) {
        if (walls[i].x_min > walls[i].x_max || walls[i].y_min > walls[i].y_max) {
            throw ConfigError("environment.walls[" + std::to_string(i) + "]", "min exceeds max");
        }
    }
    if (!controller_params.is_object()) {
        throw ConfigError("controller_params", "expected an object");
    }
}

SimConfig parse_config(const json& doc) {
    SimConfig cfg;
    ObjectReader r(doc, "");
    r.integer("n_bots", cfg.n_bots);
    r.number("time_step_s", cfg.time_step_s);
    r.number("duration_s", cfg.duration_s);
    r.number("comm_radius_mm", cfg.comm_radius_mm);
    r.number("msg_success_prob", cfg.msg_success_prob);
    r.number("distance_noise_std_mm", cfg.distance_noise_std_mm);
    r.number("speed_mm_s", cfg.speed_mm_s);
    r.number("turn_rate_rad_s", cfg.turn_rate_rad_s);
    r.number("leg_angle_deg", cfg.leg_angle_deg);
    r.number("leg_radius_mm", cfg.leg_radius_mm);
    r.number("body_radius_mm", cfg.body_radius_mm);
    r.integer("rand_seed", cfg.rand_seed);
    std::string strategy = "auto";
    r.string("neighbor_strategy", strategy);
    cfg.neighbor_strategy = strategy_from_string(strategy);
    r.integer("tx_period_ticks", cfg.tx_period_ticks);
    if (const json* layout = r.get("initial_layout")) {
        cfg.initial_layout = parse_layout(*layout, "initial_layout");
    }
    r.integer("snapshot_every_n_ticks", cfg.snapshot_every_n_ticks);
    r.string("controller", cfg.controller);
    if (const json* params = r.get("controller_params")) {
        if (!params->is_object()) {
            throw ConfigError("controller_params", "expected an object");
        }
        cfg.controller_params = *params;
    }
    r.boolean("shuffle_loop_order", cfg.shuffle_loop_order);
    r.integer("collision_max_passes", cfg.collision_max_passes);
    r.number("collision_tolerance_mm", cfg.collision_tolerance_mm);
    r.number("loop_budget_ms", cfg.loop_budget_ms);
    r.boolean("enforce_loop_budget", cfg.enforce_loop_budget);
    if (const json* env = r.get("environment")) {
        parse_environment(*env, "environment", cfg);
    }
    r.finish();

    if (!r.has("n_bots")) {
        if (const auto* ex = std::get_if<ExplicitLayout>(&cfg.initial_layout)) {
            cfg.n_bots = static_cast<std::uint32_t>(ex->poses.size());
        }
    }
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "malformed JSON in '" + path.string() + "': " + e.what());
    }
    return parse_config(doc);
}

json to_json(const SimConfig& c) {
    json j = {
        {"n_bots", c.n_bots},
        {"time_step_s", c.time_step_s},
        {"duration_s", c.duration_s},
        {"comm_radius_mm", c.comm_radius_mm},
        {"msg_success_prob", c.msg_success_prob},
        {"distance_noise_std_mm", c.distance_noise_std_mm},
        {"speed_mm_s", c.speed_mm_s},
        {"turn_rate_rad_s", c.turn_rate_rad_s},
        {"leg_angle_deg", c.leg_angle_deg},
        {"leg_radius_mm", c.leg_radius_mm},
        {"body_radius_mm", c.body_radius_mm},
        {"rand_seed", c.rand_seed},
        {"neighbor_strategy", to_string(c.neighbor_strategy)},
        {"tx_period_ticks", c.tx_period_ticks},
        {"initial_layout", layout_to_json(c.initial_layout)},
        {"snapshot_every_n_ticks", c.snapshot_every_n_ticks},
        {"controller", c.controller},
        {"controller_params", c.controller_params},
        {"shuffle_loop_order", c.shuffle_loop_order},
        {"collision_max_passes", c.collision_max_passes},
        {"collision_tolerance_mm", c.collision_tolerance_mm},
        {"loop_budget_ms", c.loop_budget_ms},
        {"enforce_loop_budget", c.enforce_loop_budget},
    };
    json env = json::object();
    switch (c.light.kind) {
    case LightProfile::Kind::None:
        break;
    case LightProfile::Kind::Constant:
        env["light"] = {{"kind", "constant"}, {"value", c.light.value}};
        break;
    case LightProfile::Kind::LinearX:
        env["light"] = {{"kind", "linear_x"}, {"gain", c.light.gain}, {"offset", c.light.offset}};
        break;
    case LightProfile::Kind::Radial:
        env["light"] = {{"kind", "radial"},
                        {"source_x_mm", c.light.source.x},
                        {"source_y_mm", c.light.source.y},
                        {"peak", c.light.peak},
                        {"falloff_per_mm", c.light.falloff_per_mm}};
        break;
    }
    if (!c.walls.empty()) {
        json walls = json::array();
        for (const Wall& w : c.walls) {
            walls.push_back({{"x_min", w.x_min}, {"x_max", w.x_max}, {"y_min", w.y_min}, {"y_max", w.y_max}});
        }
        env["walls"] = walls;
    }
    if (!env.empty()) {
        j["environment"] = env;
    }
    return j;
}

}  // namespace kiloswarm
