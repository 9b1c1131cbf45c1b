#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tiehawkes {

// Run settings read from a flat `key = value` file. Durations carry their
// unit in the key name. Every setting has an explicit default and all of
// them are echoed into each output.
struct RunConfig {
    // inputs / outputs
    std::string edges;
    std::string cities;
    std::string events;
    std::string classes; // word<TAB>class, for pooling risk ratios
    std::string out_dir{"out"};

    // model
    double gamma_per_hour{1.0};
    double tau_star_hours{24.0};
    std::optional<double> horizon_hours; // default: last event per word
    std::vector<std::string> tracked_cities;
    double tie_percentile{90.0};
    std::string fit_spec{"F1+F2+F3+F4"};
    std::string base_spec{"F1+F2"};
    std::vector<std::string> added_features{"F3", "F4"};

    // estimation and testing
    double tol_abs{1e-6};
    std::size_t max_iterations{500};
    double theta_init{1e-4};
    std::size_t permutations{1000};
    double alpha{0.05};

    std::uint64_t seed{0};
    unsigned workers{1};

    // simulation
    std::string sim_graph{"embedded-core"};
    std::size_t sim_nodes{5000};
    double sim_edge_prob{0.01};
    std::size_t sim_cities{8};
    double sim_p_in{0.05};
    double sim_p_out{0.001};
    std::size_t sim_core_size{3};
    std::size_t sim_periphery_per_core{2};
    double sim_city_assortativity{0.8};
    std::string sim_mode{"hawkes"};
    std::vector<double> sim_theta{0.2, 0.1, 0.2, 0.05};
    double sim_mu_per_hour{0.005};
    double sim_horizon_hours{20.0};
    std::size_t sim_words{1};
    bool sim_enforce_stability{true};
    double sim_max_branching{0.99};
    std::size_t sim_max_events{5'000'000};
    double sim_background_rate_per_hour{0.01};
    double sim_adopt_prob{0.1};
    double sim_boost{2.0};
    std::size_t sim_threshold{2};
    double sim_delay_rate_per_hour{2.0};
};

// Throws ConfigError on unknown keys or malformed values, IoError when the
// file cannot be read.
[[nodiscard]] RunConfig parse_config(const std::string& text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

// Every setting as (key, value) in a fixed order; parse_config accepts the
// rendered `key = value` lines back.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);
[[nodiscard]] std::string render_config(const RunConfig& config);

// Throws ConfigError when a value is out of range.
void validate(const RunConfig& config);

} // namespace tiehawkes
