#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>

#include "rapport/user_model.hpp"

namespace rapport {

class UserStore;

// Exclusive claim on one user_id for the lifetime of a conversation.
class SessionLease {
public:
    SessionLease() = default;
    SessionLease(UserStore* store, std::string user_id) : store_(store), user_id_(std::move(user_id)) {}
    SessionLease(SessionLease&& other) noexcept;
    SessionLease& operator=(SessionLease&& other) noexcept;
    SessionLease(const SessionLease&) = delete;
    SessionLease& operator=(const SessionLease&) = delete;
    ~SessionLease();

    void release();
    bool held() const { return store_ != nullptr; }
    const std::string& user_id() const { return user_id_; }

private:
    UserStore* store_ = nullptr;
    std::string user_id_;
};

// Persistent user models keyed by user_id. Implementations must be safe for
// concurrent calls; at most one session per user_id may be open at a time.
class UserStore {
public:
    virtual ~UserStore() = default;

    // Unknown ids yield a fresh model. Throws StorageUnavailable.
    virtual UserModel load_user(const std::string& user_id) = 0;
    virtual void save_user(const UserModel& model) = 0;

    // Throws SessionConflict if a session is already open for user_id.
    SessionLease open_session(const std::string& user_id);
    bool session_open(const std::string& user_id) const;

private:
    friend class SessionLease;
    void close_session(const std::string& user_id);

    mutable std::mutex sessions_mutex_;
    std::set<std::string> open_;
};

// One JSON record file per user under `dir`. Unreadable records are renamed
// to <id>.json.corrupt and replaced by a fresh model.
class FileUserStore : public UserStore {
public:
    using Logger = std::function<void(const std::string&)>;

    explicit FileUserStore(std::filesystem::path dir, Logger log = {});

    UserModel load_user(const std::string& user_id) override;
    void save_user(const UserModel& model) override;

    std::filesystem::path record_path(const std::string& user_id) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    void check_available() const;

    std::filesystem::path dir_;
    Logger log_;
    std::mutex io_mutex_;
};

class MemoryUserStore : public UserStore {
public:
    UserModel load_user(const std::string& user_id) override;
    void save_user(const UserModel& model) override;

    // Simulates an outage: every call throws StorageUnavailable while false.
    void set_available(bool available);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, UserModel> users_;
    bool available_ = true;
};

// File names are derived from user ids; anything outside [A-Za-z0-9._-] is
// percent-encoded.
std::string encode_user_id(std::string_view user_id);

}  // namespace rapport
