#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tiehawkes/cascade.hpp"
#include "tiehawkes/features.hpp"
#include "tiehawkes/graph.hpp"
#include "tiehawkes/hawkes.hpp"

namespace tiehawkes {

enum class ContagionMode {
    hawkes,            // parametric Hawkes process, sampled by thinning
    simple,            // each exposure triggers adoption with a fixed probability
    complex_threshold, // adoption probability grows once exposures reach a threshold
};

[[nodiscard]] ContagionMode parse_contagion_mode(std::string_view name);
[[nodiscard]] std::string_view to_string(ContagionMode mode);

// Settings for the simple / complex-threshold adoption models. On the k-th
// distinct exposure a user adopts with probability
//   simple:            adopt_prob
//   complex_threshold: adopt_prob for k < threshold,
//                      min(1, adopt_prob * boost^(k - threshold + 1)) otherwise
// after an exponential delay with rate delay_rate.
struct ContagionParams {
    double background_rate{0.01}; // spontaneous adoptions per user-hour
    double adopt_prob{0.1};
    double boost{2.0};
    std::size_t threshold{2};
    double delay_rate{2.0}; // per hour
};

[[nodiscard]] double adoption_probability(const ContagionParams& p, ContagionMode mode, std::size_t exposures);

struct SimConfig {
    FeatureContext features;  // graph plus frozen tie-strength threshold
    ThetaVector theta{};      // feature weights
    std::vector<double> mu;   // base intensity per graph node
    Kernel kernel{};
    double horizon{100.0};
    std::uint64_t seed{0};
    std::string word{"sim"};
    ContagionMode mode{ContagionMode::hawkes};
    ContagionParams contagion{};
    // Reject Hawkes configurations whose branching bound exceeds max_branching.
    bool enforce_stability{true};
    double max_branching{0.99};
    // Hard cap on generated events; exceeding it throws InfeasibleError.
    std::size_t max_events{5'000'000};
};

struct BranchingReport {
    double max_incoming{0.0};   // max over users of sum of incoming alpha / gamma
    double spectral_upper{0.0}; // Collatz-Wielandt upper bound on the spectral radius
    double spectral_lower{0.0};
};

// Bounds on the spectral radius of the alpha / gamma matrix.
[[nodiscard]] BranchingReport branching_bound(const FeatureContext& features, const ThetaVector& theta,
                                              const Kernel& kernel, std::size_t iterations = 200);

// Samples one cascade. Hawkes mode uses thinning against the total
// intensity, then assigns the event to a user in proportion to that user's
// intensity. Deterministic per seed.
[[nodiscard]] Cascade simulate(const SimConfig& config);

// Compensator increments of the superposed process between consecutive
// events (the first from 0), under the given parameters. Under the true
// model these are i.i.d. Exponential(1).
[[nodiscard]] std::vector<double> time_rescaled_intervals(const Cascade& cascade, const FeatureContext& features,
                                                          const ThetaVector& theta, const std::vector<double>& mu,
                                                          const Kernel& kernel);

// Expected event counts of the superposed process in consecutive bins of
// width `bin_hours` over [0, horizon], given the realized history.
[[nodiscard]] std::vector<double> expected_bin_counts(const Cascade& cascade, const FeatureContext& features,
                                                      const ThetaVector& theta, const std::vector<double>& mu,
                                                      const Kernel& kernel, double bin_hours);

enum class GraphKind { erdos_renyi, planted_cities, embedded_core };

[[nodiscard]] GraphKind parse_graph_kind(std::string_view name);

struct SynthGraphParams {
    GraphKind kind{GraphKind::erdos_renyi};
    std::size_t nodes{100};
    double edge_prob{0.05};  // erdos-renyi
    std::size_t cities{0};   // labels city0..; all of them tracked
    double p_in{0.05};       // planted-cities: same-city edge probability
    double p_out{0.0};       // planted-cities: cross-city edge probability
    // embedded-core: disjoint motifs, each a clique of core_size nodes plus
    // periphery_per_core pendant nodes attached round-robin to all core
    // members but the last. Leftover nodes stay isolated.
    std::size_t core_size{10};
    std::size_t periphery_per_core{20};
    // embedded-core: probability that a node carries its motif's home city
    // (otherwise a uniformly random city). Ignored when cities == 0.
    double city_assortativity{0.8};
    std::uint64_t seed{0};
};

[[nodiscard]] SocialGraph synth_graph(const SynthGraphParams& params);

} // namespace tiehawkes
