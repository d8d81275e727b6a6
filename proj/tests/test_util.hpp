#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

// Scratch directory unique to this test process, wiped lazily by the OS.
inline std::filesystem::path test_scratch_dir(const std::string& name) {
    static std::atomic<int> counter{0};
    const auto base = std::filesystem::temp_directory_path() / "boomtrack_tests";
    const auto dir = base / (name + "_" + std::to_string(::getpid()) + "_" +
                             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir;
}
