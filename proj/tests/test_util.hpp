#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "veintex/error.hpp"
#include "veintex/image.hpp"

namespace vt_test {

inline veintex::GrayImage random_image(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(w) * h);
    for (double& x : v) x = u(gen);
    return veintex::GrayImage(w, h, std::move(v));
}

inline std::vector<std::vector<double>> random_matrix(std::size_t n, std::size_t dim, std::mt19937_64& gen,
                                                      double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<std::vector<double>> out(n, std::vector<double>(dim));
    for (auto& row : out) {
        for (double& x : row) x = u(gen);
    }
    return out;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("veintex-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

/// Collects warnings for the lifetime of the object.
class WarningCapture {
public:
    WarningCapture() : previous_(veintex::warning_sink()) {
        veintex::warning_sink() = [this](std::string_view m) { messages.emplace_back(m); };
    }
    ~WarningCapture() { veintex::warning_sink() = previous_; }

    std::vector<std::string> messages;

private:
    veintex::WarningSink previous_;
};

template <typename F>
veintex::ErrorKind error_kind_of(F&& f) {
    try {
        f();
    } catch (const veintex::Error& e) {
        return e.kind();
    }
    throw std::logic_error("expected a veintex::Error");
}

} // namespace vt_test
