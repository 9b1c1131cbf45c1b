#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tiehawkes/graph.hpp"

namespace tiehawkes {

enum class Feature : std::uint8_t {
    self = 0,         // F1: m == m'
    mutual_reply = 1, // F2: dyad is an edge
    strong_tie = 2,   // F3: edge with Adamic-Adar at or above the word threshold
    local = 3,        // F4: edge whose endpoints share a tracked city
};

inline constexpr std::size_t kFeatureCount = 4;
inline constexpr std::array<Feature, kFeatureCount> kAllFeatures{Feature::self, Feature::mutual_reply,
                                                                 Feature::strong_tie, Feature::local};

[[nodiscard]] std::string_view feature_name(Feature f); // "F1".."F4"
[[nodiscard]] Feature parse_feature(std::string_view name);

// Binary dyad features packed into the low four bits.
class FeatureVector {
public:
    constexpr FeatureVector() = default;
    constexpr explicit FeatureVector(std::uint8_t bits) : bits_(bits & 0x0f) {}
    constexpr FeatureVector(std::initializer_list<Feature> on) {
        for (auto f : on) {
            set(f);
        }
    }

    [[nodiscard]] constexpr bool operator[](Feature f) const { return (bits_ >> static_cast<int>(f)) & 1u; }
    constexpr void set(Feature f) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<int>(f)); }
    [[nodiscard]] constexpr std::uint8_t bits() const { return bits_; }
    [[nodiscard]] constexpr bool none() const { return bits_ == 0; }
    [[nodiscard]] constexpr FeatureVector masked(FeatureVector mask) const {
        return FeatureVector(static_cast<std::uint8_t>(bits_ & mask.bits_));
    }
    [[nodiscard]] constexpr std::array<double, kFeatureCount> as_array() const {
        return {double(bits_ & 1u), double((bits_ >> 1) & 1u), double((bits_ >> 2) & 1u), double((bits_ >> 3) & 1u)};
    }

    friend constexpr bool operator==(FeatureVector, FeatureVector) = default;

private:
    std::uint8_t bits_{0};
};

[[nodiscard]] std::string to_string(FeatureVector v); // e.g. "{F2,F3}"

// Active feature subset of a nested model. F1 and F2 are always active.
class ModelSpec {
public:
    // F1+F2
    ModelSpec();
    // Throws ArgumentError if F1 or F2 is missing.
    explicit ModelSpec(FeatureVector active);
    // Parses "F1+F2+F3".
    [[nodiscard]] static ModelSpec parse(std::string_view text);

    [[nodiscard]] FeatureVector active() const { return active_; }
    [[nodiscard]] bool contains(Feature f) const { return active_[f]; }
    [[nodiscard]] ModelSpec with(Feature f) const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::string name() const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

private:
    FeatureVector active_;
};

// Word-scoped feature context, frozen before estimation.
class FeatureContext {
public:
    // The F3 pool holds every edge with at least one endpoint in `adopters`.
    // An empty pool leaves F3 permanently off.
    FeatureContext(const SocialGraph& graph, std::span<const UserId> adopters, double percentile = 90.0);
    // Explicit threshold (nullopt disables F3).
    FeatureContext(const SocialGraph& graph, std::optional<double> aa_threshold, std::size_t pool_size = 0);

    [[nodiscard]] const SocialGraph& graph() const { return *graph_; }
    [[nodiscard]] std::optional<double> aa_threshold() const { return threshold_; }
    [[nodiscard]] std::size_t pool_size() const { return pool_size_; }

    // f(m -> m')
    [[nodiscard]] FeatureVector feature_vector(UserId m, UserId m_prime) const;
    // f(m -> m') for m' a neighbor of m; skips the edge lookup.
    [[nodiscard]] FeatureVector edge_features(UserId m, UserId neighbor) const;

private:
    const SocialGraph* graph_;
    std::optional<double> threshold_;
    std::size_t pool_size_{0};
};

using FeatureCounts = std::array<std::size_t, kFeatureCount>;

// f(m -> *) = sum over all m' of f(m -> m').
struct AggregateFeatures {
    std::vector<UserId> senders;
    std::vector<FeatureCounts> counts;

    [[nodiscard]] const FeatureCounts& of(UserId sender) const; // throws LookupError
};

[[nodiscard]] FeatureCounts aggregate_features(const FeatureContext& ctx, UserId sender);
[[nodiscard]] AggregateFeatures aggregate_features(const FeatureContext& ctx, std::span<const UserId> senders);

// Feature configurations a dyad can take, restricted to the active features.
[[nodiscard]] std::vector<FeatureVector> enumerate_configs(const ModelSpec& spec);

} // namespace tiehawkes
