#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <unistd.h>

#include "seedvos/error.hpp"

// Removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("seedvos_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Code of the seedvos::Error thrown by fn, or nullopt if none was thrown.
template <class Fn>
std::optional<seedvos::ErrorCode> error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const seedvos::Error& e) {
        return e.code();
    }
    return std::nullopt;
}
