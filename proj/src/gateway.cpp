#include "rapport/gateway.hpp"

#include <httplib.h>

#include <cstdio>
#include <iostream>

#include "rapport/error.hpp"
#include "rapport/serialization.hpp"

namespace rapport {

using nlohmann::json;

Timestamp system_now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

struct SessionManager::Session {
    std::mutex mutex;
    std::string id;
    std::string user_id;
    Arm arm = Arm::A;
    ConversationState state;
    UserModel model;
    SessionLease lease;
    std::unique_ptr<ConversationLogger> logger;
    Timestamp created_at = 0;
    std::atomic<Timestamp> last_activity{0};
    bool closed = false;
    bool rated = false;
};

SessionManager::SessionManager(const ContentBank& bank, UserStore& store, GatewayConfig config)
    : bank_(bank), store_(store), config_(std::move(config)), id_rng_(std::random_device{}()) {
    if (!config_.clock) config_.clock = system_now_ms;
    if (!config_.log_dir.empty()) std::filesystem::create_directories(config_.log_dir);
}

SessionManager::~SessionManager() = default;

Timestamp SessionManager::now() const { return config_.clock(); }

std::string SessionManager::new_session_id() {
    std::lock_guard lock(id_mutex_);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(id_rng_()),
                  static_cast<unsigned long long>(id_rng_()));
    return buf;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& session_id) const {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw UnknownSession(session_id);
    return it->second;
}

SessionManager::Created SessionManager::create_session(const std::string& user_id) {
    auto s = std::make_shared<Session>();
    s->id = new_session_id();
    s->user_id = user_id;
    s->arm = assign_arm(user_id, config_.experiment);
    const auto& policy = config_.experiment.policy(s->arm);
    std::uint64_t seed;
    {
        std::lock_guard lock(id_mutex_);
        seed = id_rng_();
    }
    auto started = start_conversation(user_id, bank_, store_, policy, seed, s->id);
    s->state = std::move(started.state);
    s->model = std::move(started.model);
    s->lease = std::move(started.lease);
    s->created_at = now();
    s->last_activity = s->created_at;
    LogSink sink;
    if (!config_.log_dir.empty()) sink = JsonlFileSink(config_.log_dir / (s->id + ".jsonl"));
    s->logger = std::make_unique<ConversationLogger>(s->id, std::move(sink));
    s->logger->start(user_id, to_string(s->arm), policy, s->created_at);
    s->logger->engine(started.response, s->created_at);
    {
        std::unique_lock lock(map_mutex_);
        sessions_[s->id] = s;
        active_by_user_[user_id] = s->id;
    }
    return Created{s->id, std::move(started.response), s->arm};
}

EngineResponse SessionManager::post_turn(const std::string& session_id, const std::string& text) {
    auto s = find(session_id);
    std::lock_guard lock(s->mutex);
    if (s->closed) throw SessionClosed(session_id);
    Timestamp at = now();
    s->last_activity = at;
    s->logger->user(text, at);
    auto next = advance(std::move(s->state), text, bank_, std::move(s->model), at);
    s->state = std::move(next.state);
    s->model = std::move(next.model);
    s->logger->engine(next.response, now());
    if (next.response.done) close(*s, "user_stop");
    return std::move(next.response);
}

void SessionManager::post_rating(const std::string& session_id, int rating) {
    auto s = find(session_id);
    if (rating < 1 || rating > 5) throw OutOfRange("rating must be between 1 and 5, got " + std::to_string(rating));
    std::lock_guard lock(s->mutex);
    if (s->rated) throw AlreadyRated(session_id);
    if (!s->closed) close(*s, "rated");
    s->rated = true;
    s->logger->rating(rating, now());
}

UserModel SessionManager::user_model(const std::string& user_id) {
    std::shared_ptr<Session> live;
    {
        std::shared_lock lock(map_mutex_);
        auto it = active_by_user_.find(user_id);
        if (it != active_by_user_.end()) live = sessions_.at(it->second);
    }
    if (live) {
        std::lock_guard lock(live->mutex);
        if (!live->closed) return live->model;
    }
    return store_.load_user(user_id);
}

// Caller holds s.mutex.
void SessionManager::close(Session& s, const std::string& reason) {
    s.closed = true;
    s.logger->end(s.state.exchange_count, reason, now());
    try {
        finish_conversation(store_, s.model);
    } catch (const StorageUnavailable& e) {
        std::cerr << "session " << s.id << ": could not save user model: " << e.what() << '\n';
    }
    s.lease.release();
    std::unique_lock lock(map_mutex_);
    auto it = active_by_user_.find(s.user_id);
    if (it != active_by_user_.end() && it->second == s.id) active_by_user_.erase(it);
}

std::size_t SessionManager::expire_idle() {
    std::vector<std::shared_ptr<Session>> candidates;
    Timestamp t = now();
    {
        std::shared_lock lock(map_mutex_);
        for (const auto& [_, s] : sessions_) {
            if (t - s->last_activity > config_.idle_timeout.count()) candidates.push_back(s);
        }
    }
    std::size_t closed_now = 0;
    std::vector<std::string> forget;
    for (auto& s : candidates) {
        std::lock_guard lock(s->mutex);
        if (!s->closed) {
            close(*s, "idle_timeout");
            ++closed_now;
        } else if (t - s->last_activity > 12 * config_.idle_timeout.count()) {
            forget.push_back(s->id);
        }
    }
    if (!forget.empty()) {
        std::unique_lock lock(map_mutex_);
        for (const auto& id : forget) sessions_.erase(id);
    }
    return closed_now;
}

std::size_t SessionManager::active_sessions() const {
    std::shared_lock lock(map_mutex_);
    return active_by_user_.size();
}

bool SessionManager::closed(const std::string& session_id) const {
    auto s = find(session_id);
    std::lock_guard lock(s->mutex);
    return s->closed;
}

// ---- HTTP -------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    send_json(res, status, {{"error", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("request body must be a JSON object");
    return j;
}

bool debug_mode(const httplib::Request& req) {
    if (!req.has_param("debug")) return false;
    auto v = req.get_param_value("debug");
    return v == "1" || v == "true";
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, "bad_request", e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
    } catch (const UnknownSession& e) {
        send_error(res, 404, "unknown_session", e.what());
    } catch (const SessionClosed& e) {
        send_error(res, 410, "session_closed", e.what());
    } catch (const SessionConflict& e) {
        send_error(res, 409, "session_conflict", e.what());
    } catch (const AlreadyRated& e) {
        send_error(res, 409, "already_rated", e.what());
    } catch (const OutOfRange& e) {
        send_error(res, 422, "out_of_range", e.what());
    } catch (const StorageUnavailable& e) {
        send_error(res, 503, "storage_unavailable", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
    }
}

}  // namespace

HttpGateway::HttpGateway(SessionManager& sessions) : sessions_(sessions), server_(std::make_unique<httplib::Server>()) {
    server_->new_task_queue = [] { return new httplib::ThreadPool(32); };
    install_routes();
}

HttpGateway::~HttpGateway() { stop(); }

void HttpGateway::install_routes() {
    auto& srv = *server_;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); });

    srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto body = parse_body(req);
            auto user_id = body.at("user_id").get<std::string>();
            if (user_id.empty()) throw std::invalid_argument("user_id must not be empty");
            auto created = sessions_.create_session(user_id);
            json out = {{"session_id", created.session_id}, {"reply", created.response.text}, {"done", created.response.done}};
            if (debug_mode(req)) out["annotations"] = annotations_to_json(created.response);
            send_json(res, 201, out);
        });
    });

    srv.Post(R"(/sessions/([^/]+)/turns)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto body = parse_body(req);
            auto text = body.at("text").get<std::string>();
            auto response = sessions_.post_turn(req.matches[1], text);
            json out = {{"reply", response.text}, {"done", response.done}};
            if (debug_mode(req)) out["annotations"] = annotations_to_json(response);
            send_json(res, 200, out);
        });
    });

    srv.Post(R"(/sessions/([^/]+)/rating)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto body = parse_body(req);
            const auto& r = body.at("rating");
            if (!r.is_number_integer()) throw OutOfRange("rating must be an integer between 1 and 5");
            sessions_.post_rating(req.matches[1], r.get<int>());
            send_json(res, 200, {{"status", "recorded"}});
        });
    });

    srv.Get(R"(/users/([^/]+)/model)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            json out = sessions_.user_model(req.matches[1]);
            send_json(res, 200, out);
        });
    });
}

bool HttpGateway::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpGateway::start_background(const std::string& host) {
    int port = server_->bind_to_any_port(host);
    if (port < 0) return port;
    server_thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void HttpGateway::start_reaper(std::chrono::milliseconds interval) {
    reaper_ = std::thread([this, interval] {
        std::unique_lock lock(reaper_mutex_);
        while (!reaper_cv_.wait_for(lock, interval, [this] { return stopping_; })) {
            sessions_.expire_idle();
        }
    });
}

void HttpGateway::stop() {
    {
        std::lock_guard lock(reaper_mutex_);
        stopping_ = true;
    }
    reaper_cv_.notify_all();
    if (server_) server_->stop();
    if (server_thread_.joinable()) server_thread_.join();
    if (reaper_.joinable()) reaper_.join();
}

}  // namespace rapport
