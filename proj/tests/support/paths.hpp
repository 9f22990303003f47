#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "rapport/content_bank.hpp"

namespace testing_support {

inline std::filesystem::path bank_dir() { return RAPPORT_DEFAULT_DATA_DIR; }

inline const rapport::ContentBank& shipped_bank() {
    static const rapport::ContentBank bank = rapport::load_assets(bank_dir());
    return bank;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("rapport-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
