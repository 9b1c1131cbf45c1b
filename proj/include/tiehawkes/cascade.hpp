#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tiehawkes/graph.hpp"

namespace tiehawkes {

struct Event {
    UserId user;
    double time; // hours since the cascade origin

    friend bool operator==(const Event&, const Event&) = default;
};

// One word's usage events, ascending in time (ties keep input order),
// observed over [0, horizon].
struct Cascade {
    std::string word;
    std::vector<Event> events;
    double horizon{0.0};
    // Absolute time of t = 0, in hours since the Unix epoch. Needed to compare
    // event times with edge formation times.
    double origin_hours{0.0};

    [[nodiscard]] std::size_t size() const noexcept { return events.size(); }
    [[nodiscard]] bool empty() const noexcept { return events.empty(); }
    // Distinct users with at least one event, ascending.
    [[nodiscard]] std::vector<UserId> adopters() const;
    // First-usage time per adopter.
    [[nodiscard]] std::map<UserId, double> adoption_times() const;
    // Stable-sorts events and checks 0 <= t <= horizon for every event.
    void normalize();
};

using CascadeSet = std::map<std::string, Cascade>;

// Reads `word<TAB>user<TAB>epoch_seconds` lines. Events are grouped per word
// and rebased to hours after that word's earliest event. The horizon is the
// latest rebased time unless `horizon_hours` is given. Users missing from the
// graph are added as isolated nodes.
[[nodiscard]] CascadeSet ingest_events(const std::filesystem::path& path, SocialGraph& graph,
                                       std::optional<double> horizon_hours = std::nullopt);

// Writes events as whole epoch seconds, round(3600 * (origin + time)), in
// word order.
void write_events(const std::filesystem::path& path, const CascadeSet& cascades,
                  const SocialGraph& graph);

// Rounds event times to whole seconds and rebases them to the first event,
// using the same arithmetic as ingest_events, so that writing and re-reading
// the cascade reproduces it exactly. The horizon follows ingest_events too.
void quantize_to_seconds(Cascade& cascade, std::optional<double> horizon_hours = std::nullopt);

struct Exposure {
    UserId source;
    double time; // first qualifying use by `source`

    friend bool operator==(const Exposure&, const Exposure&) = default;
};

struct ExposureRecord {
    UserId target;
    // Distinct exposing neighbors, ordered by first exposure time.
    std::vector<Exposure> exposers;
    std::optional<double> adoption;
};

// Source i exposes target j at time t when i uses the word at t, j has not
// used it at or before t, and the edge i-j was formed strictly before t.
// Returns one record per exposed user, ascending by target.
[[nodiscard]] std::vector<ExposureRecord> exposures(const Cascade& cascade, const SocialGraph& graph);

inline constexpr std::size_t kRiskBuckets = 3; // 1, 2, 3+ distinct exposures

struct BucketCount {
    std::size_t at_risk{0};
    std::size_t infected{0};
    // infected / at_risk, or nullopt for an empty bucket.
    [[nodiscard]] std::optional<double> risk() const;
};

using RiskCounts = std::array<BucketCount, kRiskBuckets>;

// A user is at risk in bucket k once their k-th distinct exposure has happened
// (bucket 3 collects k >= 3), and infected in the last bucket they reached
// before adopting. Exposures at or after adoption are ignored.
[[nodiscard]] RiskCounts infection_risk(std::span<const ExposureRecord> records);

// Risks after reassigning event times: event n receives the time of event
// perm[n]. The identity permutation reproduces the observed risks.
[[nodiscard]] RiskCounts permuted_risk(const Cascade& cascade, const SocialGraph& graph,
                                       std::span<const std::size_t> perm);

struct BucketRisk {
    std::size_t at_risk{0};
    std::size_t infected{0};
    std::optional<double> observed;
    std::vector<double> null_risks;    // one per permutation with a non-empty bucket
    std::optional<double> null_mean;
    std::optional<double> ratio;       // observed / null_mean
    std::vector<double> ratio_samples; // observed / null risk, per permutation
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
};

struct RiskReport {
    std::string word;
    std::size_t permutations{0};
    std::uint64_t seed{0};
    std::array<BucketRisk, kRiskBuckets> buckets;

    [[nodiscard]] bool empty() const;
};

struct ShuffleConfig {
    std::size_t permutations{1000};
    std::uint64_t seed{0};
    unsigned workers{1};
};

// Shuffle test: compares observed risks with risks after randomly permuting
// event times across the word's events (each user keeps their event count).
[[nodiscard]] RiskReport shuffle_test(const Cascade& cascade, const SocialGraph& graph,
                                      const ShuffleConfig& config);

// Ratio with the conventions used throughout the risk pipeline:
// 0/0 is 1 (no excess risk) and x/0 for x > 0 is undefined.
[[nodiscard]] std::optional<double> risk_ratio(double observed, double null_risk);

struct PooledBucket {
    std::size_t words{0};
    std::size_t samples{0};
    std::optional<double> ratio;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
};

struct ClassRisk {
    std::string label;
    std::vector<std::string> words;
    std::array<PooledBucket, kRiskBuckets> buckets;
};

// Pools ratio samples across the words of each class. The point estimate is
// the mean of the word-level ratios; the CI comes from the 2.5/97.5 nearest
// rank percentiles of the concatenated samples. Words absent from `classes`
// are pooled under "unclassified".
[[nodiscard]] std::vector<ClassRisk> aggregate_risk(std::span<const RiskReport> reports,
                                                    const std::map<std::string, std::string>& classes);

// `word<TAB>class` lines.
[[nodiscard]] std::map<std::string, std::string> load_word_classes(const std::filesystem::path& path);

} // namespace tiehawkes
