#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <thread>

#include "rapport/content_bank.hpp"
#include "rapport/conversation_log.hpp"
#include "rapport/dialogue_engine.hpp"
#include "rapport/experiment.hpp"
#include "rapport/user_store.hpp"

namespace httplib {
class Server;
}

namespace rapport {

struct GatewayConfig {
    // Conversation logs go to <log_dir>/<session_id>.jsonl; none when empty.
    std::filesystem::path log_dir;
    // Arms are assigned per user from this config.
    ExperimentConfig experiment;
    std::chrono::milliseconds idle_timeout{std::chrono::minutes(5)};
    // Milliseconds since the epoch; defaults to the system clock.
    std::function<Timestamp()> clock;
};

Timestamp system_now_ms();

// Live conversations keyed by opaque session id. Turns within one session are
// processed one at a time; distinct sessions only share the bank and store.
class SessionManager {
public:
    SessionManager(const ContentBank& bank, UserStore& store, GatewayConfig config = {});
    ~SessionManager();
    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    struct Created {
        std::string session_id;
        EngineResponse response;
        Arm arm = Arm::A;
    };

    // Throws SessionConflict or StorageUnavailable; nothing is kept on failure.
    Created create_session(const std::string& user_id);
    // Throws UnknownSession or SessionClosed.
    EngineResponse post_turn(const std::string& session_id, const std::string& text);
    // Ends the conversation if it is still open. Throws UnknownSession,
    // OutOfRange or AlreadyRated.
    void post_rating(const std::string& session_id, int rating);
    // The live model while a session is open, else the stored one.
    UserModel user_model(const std::string& user_id);

    // Closes sessions idle for longer than the timeout; returns how many.
    std::size_t expire_idle();
    std::size_t active_sessions() const;
    bool closed(const std::string& session_id) const;

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& session_id) const;
    void close(Session& s, const std::string& reason);
    Timestamp now() const;
    std::string new_session_id();

    const ContentBank& bank_;
    UserStore& store_;
    GatewayConfig config_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::map<std::string, std::string> active_by_user_;
    std::mutex id_mutex_;
    std::mt19937_64 id_rng_;
};

// HTTP+JSON front end for a SessionManager.
class HttpGateway {
public:
    explicit HttpGateway(SessionManager& sessions);
    ~HttpGateway();

    // Blocks until stop().
    bool listen(const std::string& host, int port);
    // Binds to an ephemeral port and serves on a background thread.
    int start_background(const std::string& host = "127.0.0.1");
    void stop();

    // Runs expire_idle() every `interval` until stop().
    void start_reaper(std::chrono::milliseconds interval);

private:
    void install_routes();

    SessionManager& sessions_;
    std::unique_ptr<httplib::Server> server_;
    std::thread server_thread_;
    std::thread reaper_;
    std::mutex reaper_mutex_;
    std::condition_variable reaper_cv_;
    bool stopping_ = false;
};

}  // namespace rapport
