#include "rapport/user_store.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rapport/error.hpp"
#include "rapport/serialization.hpp"

namespace rapport {

SessionLease::SessionLease(SessionLease&& other) noexcept
    : store_(other.store_), user_id_(std::move(other.user_id_)) {
    other.store_ = nullptr;
}

SessionLease& SessionLease::operator=(SessionLease&& other) noexcept {
    if (this != &other) {
        release();
        store_ = other.store_;
        user_id_ = std::move(other.user_id_);
        other.store_ = nullptr;
    }
    return *this;
}

SessionLease::~SessionLease() {
    release();
}

void SessionLease::release() {
    if (store_) {
        store_->close_session(user_id_);
        store_ = nullptr;
    }
}

SessionLease UserStore::open_session(const std::string& user_id) {
    std::lock_guard lock(sessions_mutex_);
    if (!open_.insert(user_id).second) throw SessionConflict(user_id);
    return SessionLease(this, user_id);
}

bool UserStore::session_open(const std::string& user_id) const {
    std::lock_guard lock(sessions_mutex_);
    return open_.count(user_id) > 0;
}

void UserStore::close_session(const std::string& user_id) {
    std::lock_guard lock(sessions_mutex_);
    open_.erase(user_id);
}

std::string encode_user_id(std::string_view user_id) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (char ch : user_id) {
        auto c = static_cast<unsigned char>(ch);
        bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || (c == '.' && !out.empty());
        if (safe) {
            out.push_back(ch);
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

FileUserStore::FileUserStore(std::filesystem::path dir, Logger log) : dir_(std::move(dir)), log_(std::move(log)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
}

std::filesystem::path FileUserStore::record_path(const std::string& user_id) const {
    return dir_ / (encode_user_id(user_id) + ".json");
}

void FileUserStore::check_available() const {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir_, ec)) {
        throw StorageUnavailable("user store directory unavailable: " + dir_.string());
    }
}

UserModel FileUserStore::load_user(const std::string& user_id) {
    std::lock_guard lock(io_mutex_);
    check_available();
    auto path = record_path(user_id);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return fresh_user(user_id);
    std::ifstream in(path);
    if (!in) throw StorageUnavailable("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        auto model = nlohmann::json::parse(ss.str()).get<UserModel>();
        if (model.user_id != user_id) throw std::runtime_error("user_id mismatch");
        return model;
    } catch (const std::exception& e) {
        auto quarantine = path;
        quarantine += ".corrupt";
        std::filesystem::rename(path, quarantine, ec);
        if (log_) log_("corrupt user record " + user_id + " quarantined to " + quarantine.string() + ": " + e.what());
        return fresh_user(user_id);
    }
}

void FileUserStore::save_user(const UserModel& model) {
    std::lock_guard lock(io_mutex_);
    check_available();
    auto path = record_path(model.user_id);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw StorageUnavailable("cannot write " + tmp.string());
        out << nlohmann::json(model).dump(2) << '\n';
        if (!out) throw StorageUnavailable("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw StorageUnavailable("cannot replace " + path.string() + ": " + ec.message());
}

UserModel MemoryUserStore::load_user(const std::string& user_id) {
    std::lock_guard lock(mutex_);
    if (!available_) throw StorageUnavailable("memory store offline");
    auto it = users_.find(user_id);
    return it == users_.end() ? fresh_user(user_id) : it->second;
}

void MemoryUserStore::save_user(const UserModel& model) {
    std::lock_guard lock(mutex_);
    if (!available_) throw StorageUnavailable("memory store offline");
    users_[model.user_id] = model;
}

void MemoryUserStore::set_available(bool available) {
    std::lock_guard lock(mutex_);
    available_ = available;
}

std::size_t MemoryUserStore::size() const {
    std::lock_guard lock(mutex_);
    return users_.size();
}

}  // namespace rapport
