#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "tiehawkes/cascade.hpp"
#include "tiehawkes/graph.hpp"

namespace testing_support {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("tiehawkes_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const fs::path& path() const { return path_; }
    [[nodiscard]] fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Users named "0".."n-1", so ids equal indices.
inline tiehawkes::SocialGraph numbered_graph(std::size_t n) {
    tiehawkes::SocialGraph g;
    for (std::size_t i = 0; i < n; ++i) {
        g.add_user(std::to_string(i));
    }
    return g;
}

inline tiehawkes::SocialGraph random_graph(std::size_t n, double p, std::mt19937_64& rng) {
    auto g = numbered_graph(n);
    std::bernoulli_distribution coin(p);
    for (tiehawkes::UserId i = 0; i < n; ++i) {
        for (tiehawkes::UserId j = i + 1; j < n; ++j) {
            if (coin(rng)) {
                g.add_edge(i, j);
            }
        }
    }
    return g;
}

// N events on users drawn uniformly from [0, users), times uniform on [0, horizon].
inline tiehawkes::Cascade random_cascade(std::size_t users, std::size_t events, double horizon,
                                         std::mt19937_64& rng) {
    tiehawkes::Cascade c;
    c.word = "w";
    c.horizon = horizon;
    std::uniform_int_distribution<tiehawkes::UserId> pick(0, static_cast<tiehawkes::UserId>(users - 1));
    std::uniform_real_distribution<double> when(0.0, horizon);
    for (std::size_t n = 0; n < events; ++n) {
        c.events.push_back({pick(rng), when(rng)});
    }
    c.normalize();
    return c;
}

} // namespace testing_support
