#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "tiehawkes/cascade.hpp"
#include "tiehawkes/features.hpp"
#include "tiehawkes/graph.hpp"

namespace tiehawkes {

// Exponential decay kernel exp(-gamma * dt). `tau_star` is the lag beyond
// which the accelerated likelihood treats the kernel as zero; +inf disables
// truncation.
struct Kernel {
    double gamma{1.0};     // per hour; exp(-1) after one hour
    double tau_star{24.0}; // hours

    [[nodiscard]] double operator()(double dt) const { return std::exp(-gamma * dt); }
    [[nodiscard]] double truncated(double dt) const { return dt >= tau_star ? 0.0 : std::exp(-gamma * dt); }
    // Throws ArgumentError unless gamma > 0 and tau_star > 0.
    void validate() const;
};

using ThetaVector = std::array<double, kFeatureCount>;

[[nodiscard]] inline double influence(const ThetaVector& theta, FeatureVector f) {
    double a = 0.0;
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
        if (f[static_cast<Feature>(d)]) {
            a += theta[d];
        }
    }
    return a;
}

// Feature weights and per-adopter base intensities. Users outside `users`
// have a base intensity of zero. Weights of inactive features must be zero.
struct Params {
    ThetaVector theta{};
    std::vector<UserId> users; // ascending
    std::vector<double> mu;    // aligned with users

    [[nodiscard]] double base_rate(UserId user) const;
};

// lambda^{m'}(t): uses events strictly before t and the untruncated kernel.
[[nodiscard]] double intensity(UserId user, double t, const Cascade& cascade, const Params& params,
                               const FeatureContext& ctx, const Kernel& kernel);

// Integral of intensity() over [t1, t2] in closed form. t2 may be +inf.
[[nodiscard]] double intensity_integral(UserId user, double t1, double t2, const Cascade& cascade,
                                        const Params& params, const FeatureContext& ctx, const Kernel& kernel);

// Direct double-loop log-likelihood over every user in the graph, without
// kernel truncation. Returns -inf if some event has zero intensity.
[[nodiscard]] double loglik_naive(const Cascade& cascade, const Params& params, const FeatureContext& ctx,
                                  const Kernel& kernel);

// R_c^(i): per recipient event i and influencing configuration c, the kernel
// mass of earlier events whose dyad configuration (source -> recipient) is c.
// Built with the recursive update R^(i) = k(t_i - t_{i-1}) R^(i-1) + new
// arrivals, subtracting arrivals whose lag reaches tau_star.
struct RecursiveMessages {
    std::vector<FeatureVector> configs; // influencing (non-empty) configurations
    std::size_t events{0};
    std::vector<double> values; // events x configs, row-major

    [[nodiscard]] double at(std::size_t event, std::size_t config) const {
        return values[event * configs.size() + config];
    }
};

[[nodiscard]] RecursiveMessages recursive_messages(const Cascade& cascade, const FeatureContext& ctx,
                                                   const ModelSpec& spec, const Kernel& kernel,
                                                   unsigned workers = 1);

// Parameter-independent quantities for the accelerated likelihood.
struct Precomputed {
    ModelSpec spec;
    Kernel kernel;
    double horizon{0.0};
    std::vector<UserId> users;            // adopters, ascending
    std::vector<std::uint32_t> event_slot; // event -> index into users
    std::vector<std::size_t> slot_offsets; // CSR over slot_events
    std::vector<std::uint32_t> slot_events;
    std::vector<FeatureCounts> aggregate;  // f(m -> *) per adopter
    RecursiveMessages messages;
    std::vector<ThetaVector> excitation;   // per event: sum_c c * R_c
    ThetaVector compensator{};             // sum_n f(m_n -> *) (1 - k(T - t_n)) / gamma

    [[nodiscard]] std::size_t event_count() const { return event_slot.size(); }
    [[nodiscard]] std::size_t slot_count() const { return users.size(); }
};

[[nodiscard]] Precomputed precompute(const Cascade& cascade, const FeatureContext& ctx, const ModelSpec& spec,
                                     const Kernel& kernel, unsigned workers = 1);

// Params aligned with pre.users: theta on the active features, mu per adopter.
[[nodiscard]] Params make_params(const Precomputed& pre, const ThetaVector& theta, double mu);

// Log-likelihood rearranged around sources, with kernel truncation.
[[nodiscard]] double loglik_fast(const Precomputed& pre, const Params& params, unsigned workers = 1);

struct Gradient {
    ThetaVector theta{}; // zero on inactive features
    std::vector<double> mu;
    double loglik{0.0};
};

[[nodiscard]] Gradient grad(const Precomputed& pre, const Params& params, unsigned workers = 1);

struct FitConfig {
    double tol_abs{1e-6};
    std::size_t max_iterations{500};
    double theta_init{1e-4};
    std::size_t max_theta_steps{25};
    // Keep theta at its initial value (theta_init, or initial_theta when set).
    bool freeze_theta{false};
    std::optional<ThetaVector> initial_theta;
    // Starting base intensities aligned with the adopters; default count / T.
    std::optional<std::vector<double>> initial_mu;
    unsigned workers{1};
};

struct FitResult {
    ModelSpec spec;
    Kernel kernel;
    FitConfig config;
    Params params;
    double loglik{-std::numeric_limits<double>::infinity()};
    std::vector<double> trace; // initial value, then one entry per outer iteration
    std::size_t iterations{0};
    bool converged{false};
    std::size_t events{0};
};

// Coordinate ascent: a projected Newton block on theta >= 0, then exact 1-D
// maximization of each base intensity. Throws InfeasibleError if the
// starting point has a non-finite likelihood.
[[nodiscard]] FitResult fit(const Precomputed& pre, const FitConfig& config = {});
[[nodiscard]] FitResult fit(const Cascade& cascade, const FeatureContext& ctx, const ModelSpec& spec,
                            const Kernel& kernel, const FitConfig& config = {});

} // namespace tiehawkes
