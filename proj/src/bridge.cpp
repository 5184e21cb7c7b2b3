#include "kiloswarm/bridge.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "kiloswarm/log.hpp"
#include "kiloswarm/physics.hpp"
#include "kiloswarm/snapshot.hpp"

namespace kiloswarm::bridge {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

json wire_snapshot(const World& world) {
    const SimConfig& cfg = world.config();
    const LegGeometry legs{cfg.leg_angle_deg, cfg.leg_radius_mm, cfg.body_radius_mm};
    json bots = json::array();
    for (RobotId id = 0; id < world.size(); ++id) {
        const Robot& r = world.robot(id);
        const auto points = leg_points(r.pose, legs);
        json leg_json = json::array();
        for (const Vec2& p : points) {
            leg_json.push_back({p.x, p.y});
        }
        bots.push_back({{"id", id},
                        {"x_mm", r.pose.x},
                        {"y_mm", r.pose.y},
                        {"theta_rad", r.pose.theta},
                        {"led", led_to_string(r.led)},
                        {"leg_points", std::move(leg_json)}});
    }
    return {{"type", "snapshot"},
            {"tick", world.tick()},
            {"sim_time_s", world.sim_time_s()},
            {"speed_factor", world.speed_factor()},
            {"paused", world.paused()},
            {"comm_radius_mm", cfg.comm_radius_mm},
            {"body_radius_mm", cfg.body_radius_mm},
            {"bots", std::move(bots)}};
}

namespace {

json error_frame(const std::string& reason, std::optional<std::uint64_t> seq) {
    json e = {{"type", "error"}, {"reason", reason}};
    if (seq) {
        e["seq"] = *seq;
    }
    return e;
}

bool finite_number(const json& doc, const char* key) {
    return doc.contains(key) && doc[key].is_number() && std::isfinite(doc[key].get<double>());
}

}  // namespace

CommandOutcome handle_command(std::string_view text, std::size_t n_bots, std::uint64_t& next_seq) {
    json doc = json::parse(text.begin(), text.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        return {error_frame("malformed JSON", std::nullopt), std::nullopt};
    }
    std::uint64_t seq = 0;
    if (doc.contains("seq")) {
        if (!doc["seq"].is_number_unsigned()) {
            return {error_frame("seq must be a non-negative integer", std::nullopt), std::nullopt};
        }
        seq = doc["seq"].get<std::uint64_t>();
    } else {
        seq = next_seq++;
    }
    if (!doc.contains("type") || !doc["type"].is_string()) {
        return {error_frame("missing type", seq), std::nullopt};
    }
    const std::string type = doc["type"].get<std::string>();
    const json ack = {{"type", "ack"}, {"seq", seq}, {"command", type}};

    if (type == "pause") {
        return {ack, SteeringCommand::pause()};
    }
    if (type == "resume") {
        return {ack, SteeringCommand::resume()};
    }
    if (type == "toggle_comms_overlay") {
        // drawn client-side; nothing to change in the simulation
        return {ack, std::nullopt};
    }
    if (type == "set_speed") {
        if (!finite_number(doc, "factor") || !(doc["factor"].get<double>() > 0.0)) {
            return {error_frame("set_speed needs a positive factor", seq), std::nullopt};
        }
        return {ack, SteeringCommand::set_speed_factor(doc["factor"].get<double>())};
    }
    if (type == "move_bot") {
        if (!doc.contains("id") || !doc["id"].is_number_unsigned()) {
            return {error_frame("move_bot needs a non-negative integer id", seq), std::nullopt};
        }
        const auto id = doc["id"].get<std::uint64_t>();
        if (id >= n_bots) {
            return {error_frame("no robot with id " + std::to_string(id), seq), std::nullopt};
        }
        if (!finite_number(doc, "x_mm") || !finite_number(doc, "y_mm")) {
            return {error_frame("move_bot needs finite x_mm and y_mm", seq), std::nullopt};
        }
        return {ack, SteeringCommand::move_robot(static_cast<RobotId>(id),
                                                 {doc["x_mm"].get<double>(), doc["y_mm"].get<double>()})};
    }
    return {error_frame("unknown command type '" + type + "'", seq), std::nullopt};
}

namespace {

constexpr const char* kStubPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>kiloswarm</title></head>
<body>
<h1>kiloswarm</h1>
<p>The viewer bundle is not installed. Start the server with <code>--ui-dir</code>
pointing at the built web UI, or connect a websocket client to <code>/ws</code>.</p>
</body></html>
)";

std::string content_type(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "application/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json" || ext == ".map") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    return "application/octet-stream";
}

}  // namespace

class WsSession;

// Shared by the sessions and the Server facade.
struct Hub {
    ServerOptions options;
    std::size_t n_bots;
    std::function<void(SteeringCommand)> submit;

    asio::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::thread thread;
    std::atomic<bool> running{false};
    std::atomic<std::size_t> clients{0};
    std::atomic<std::uint64_t> frames{0};
    std::uint16_t bound_port = 0;

    // I/O thread only
    std::set<std::shared_ptr<WsSession>> sessions;
    std::shared_ptr<const std::string> latest;

    // simulation thread only
    std::chrono::steady_clock::time_point last_publish{};
    bool published = false;

    Hub(ServerOptions o, std::size_t n, std::function<void(SteeringCommand)> s)
        : options(std::move(o)), n_bots(n), submit(std::move(s)) {}

    void do_accept();
    void broadcast(std::shared_ptr<const std::string> frame);
};

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, Hub& server) : ws_(std::move(socket)), server_(server) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

    void offer_snapshot(std::shared_ptr<const std::string> frame) {
        pending_snapshot_ = std::move(frame);
        maybe_write();
    }

    void shutdown() {
        closed_ = true;
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().close(ec);
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) {
            return;
        }
        server_.sessions.insert(shared_from_this());
        ++server_.clients;
        log().info("viewer connected ({} total)", server_.clients.load());
        if (server_.latest) {
            offer_snapshot(server_.latest);
        }
        do_read();
    }

    void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            close();
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        CommandOutcome outcome = handle_command(text, server_.n_bots, next_seq_);
        if (outcome.command) {
            server_.submit(*outcome.command);
        }
        replies_.push_back(std::make_shared<const std::string>(outcome.reply.dump()));
        maybe_write();
        do_read();
    }

    void maybe_write() {
        if (writing_ || closed_) {
            return;
        }
        if (!replies_.empty()) {
            current_ = std::move(replies_.front());
            replies_.pop_front();
        } else if (pending_snapshot_) {
            current_ = std::move(pending_snapshot_);
            pending_snapshot_.reset();
        } else {
            return;
        }
        writing_ = true;
        ws_.text(true);
        ws_.async_write(asio::buffer(*current_), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        writing_ = false;
        current_.reset();
        if (ec) {
            close();
            return;
        }
        maybe_write();
    }

    void close() {
        if (closed_) {
            return;
        }
        closed_ = true;
        --server_.clients;
        server_.sessions.erase(shared_from_this());
        log().info("viewer disconnected");
    }

    websocket::stream<beast::tcp_stream> ws_;
    Hub& server_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<const std::string>> replies_;
    std::shared_ptr<const std::string> pending_snapshot_;
    std::shared_ptr<const std::string> current_;
    std::uint64_t next_seq_ = 1;
    bool writing_ = false;
    bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, Hub& server) : stream_(std::move(socket)), server_(server) {}

    void run() {
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

private:
    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            return;
        }
        std::string target(req_.target());
        if (const auto q = target.find('?'); q != std::string::npos) {
            target.resize(q);
        }
        if (websocket::is_upgrade(req_)) {
            if (target == "/ws") {
                stream_.expires_never();
                std::make_shared<WsSession>(stream_.release_socket(), server_)->run(std::move(req_));
                return;
            }
            respond(http::status::not_found, "text/plain", "websocket endpoint is /ws\n");
            return;
        }
        if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
            respond(http::status::method_not_allowed, "text/plain", "GET only\n");
            return;
        }
        serve_static(target);
    }

    void serve_static(std::string target) {
        if (target.empty() || target.back() == '/') {
            target += "index.html";
        }
        if (target.find("..") != std::string::npos || target.front() != '/') {
            respond(http::status::bad_request, "text/plain", "bad path\n");
            return;
        }
        const auto& dir = server_.options.ui_dir;
        if (!dir.empty()) {
            const std::filesystem::path file = dir / target.substr(1);
            std::ifstream in(file, std::ios::binary);
            if (in) {
                std::ostringstream body;
                body << in.rdbuf();
                respond(http::status::ok, content_type(file), body.str());
                return;
            }
        }
        if (target == "/index.html") {
            respond(http::status::ok, "text/html; charset=utf-8", kStubPage);
            return;
        }
        respond(http::status::not_found, "text/plain", "not found\n");
    }

    void respond(http::status status, const std::string& type, std::string body) {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::server, "kiloswarm");
        res->set(http::field::content_type, type);
        res->keep_alive(false);
        res->body() = req_.method() == http::verb::head ? std::string() : std::move(body);
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
            beast::error_code ignored;
            self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        });
    }

    beast::tcp_stream stream_;
    Hub& server_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

void Hub::do_accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (!acceptor.is_open()) {
            return;
        }
        if (!ec) {
            std::make_shared<HttpSession>(std::move(socket), *this)->run();
        }
        do_accept();
    });
}

void Hub::broadcast(std::shared_ptr<const std::string> frame) {
    latest = frame;
    for (const auto& session : sessions) {
        session->offer_snapshot(frame);
    }
}

struct Server::Impl : Hub {
    using Hub::Hub;
};

Server::Server(ServerOptions options, std::size_t n_bots, std::function<void(SteeringCommand)> submit)
    : impl_(std::make_unique<Impl>(std::move(options), n_bots, std::move(submit))) {}

Server::~Server() { stop(); }

void Server::start() {
    if (impl_->running) {
        return;
    }
    beast::error_code ec;
    const auto address = asio::ip::make_address(impl_->options.bind_address, ec);
    if (ec) {
        throw std::runtime_error("bad bind address '" + impl_->options.bind_address + "'");
    }
    const tcp::endpoint endpoint(address, impl_->options.port);
    auto& acceptor = impl_->acceptor;
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) {
        acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    }
    if (!ec) {
        acceptor.bind(endpoint, ec);
    }
    if (!ec) {
        acceptor.listen(asio::socket_base::max_listen_connections, ec);
    }
    if (ec) {
        beast::error_code ignored;
        acceptor.close(ignored);
        throw std::runtime_error("cannot listen on " + impl_->options.bind_address + ":" +
                                 std::to_string(impl_->options.port) + ": " + ec.message());
    }
    impl_->bound_port = acceptor.local_endpoint().port();
    impl_->do_accept();
    impl_->running = true;
    impl_->thread = std::thread([this] { impl_->ioc.run(); });
    log().info("viewer bridge listening on {}:{}", impl_->options.bind_address, impl_->bound_port);
}

void Server::stop() {
    if (!impl_->running.exchange(false)) {
        return;
    }
    asio::post(impl_->ioc, [impl = impl_.get()] {
        beast::error_code ignored;
        impl->acceptor.close(ignored);
        for (const auto& session : impl->sessions) {
            session->shutdown();
        }
        impl->sessions.clear();
        impl->ioc.stop();
    });
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

std::uint16_t Server::port() const { return impl_->bound_port; }

void Server::publish(const World& world) {
    const auto now = std::chrono::steady_clock::now();
    const auto interval = std::chrono::duration<double>(1.0 / impl_->options.ui_rate_hz);
    if (impl_->published && now - impl_->last_publish < interval) {
        return;
    }
    publish_now(world);
}

void Server::publish_now(const World& world) {
    if (!impl_->running) {
        return;
    }
    impl_->last_publish = std::chrono::steady_clock::now();
    impl_->published = true;
    auto frame = std::make_shared<const std::string>(wire_snapshot(world).dump());
    ++impl_->frames;
    asio::post(impl_->ioc, [impl = impl_.get(), frame = std::move(frame)]() mutable { impl->broadcast(std::move(frame)); });
}

std::size_t Server::client_count() const { return impl_->clients.load(); }

std::uint64_t Server::frames_published() const { return impl_->frames.load(); }

}  // namespace kiloswarm::bridge
