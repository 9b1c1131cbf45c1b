#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tiehawkes/cascade.hpp"
#include "tiehawkes/features.hpp"
#include "tiehawkes/hawkes.hpp"

namespace tiehawkes {

// Upper tail of chi-squared with one degree of freedom: erfc(sqrt(x / 2)).
[[nodiscard]] double chi2_1_sf(double x);
// Inverse of chi2_1_sf on (0, 1].
[[nodiscard]] double chi2_1_isf(double p);

// Statistics below -kLrtFailureTolerance indicate that a nested fit did not
// reach its optimum.
inline constexpr double kLrtFailureTolerance = 1e-6;

struct LrtResult {
    double raw_statistic{0.0}; // 2 (ll_full - ll_base)
    double statistic{0.0};     // clamped at 0
    double p_value{1.0};
    bool optimization_failure{false};
};

// Requires fit_full's spec to be fit_base's plus exactly one feature, fitted
// to the same cascade.
[[nodiscard]] LrtResult lrt(const FitResult& fit_base, const FitResult& fit_full);

// Benjamini-Hochberg step-up: reject the hypotheses with the i smallest
// p-values, where i is the largest rank with p_(i) <= (i / m) alpha. Ties are
// ranked by original index. Decisions are returned in input order.
[[nodiscard]] std::vector<bool> bh_correct(std::span<const double> pvalues, double alpha);

// The realized BH cutoff on p-values: (k / m) alpha for k rejections, or
// alpha / m when nothing is rejected.
[[nodiscard]] double bh_threshold(std::span<const double> pvalues, double alpha);

struct KsResult {
    double statistic{0.0};
    double p_value{1.0};
};

// One-sample Kolmogorov-Smirnov test against Exponential(rate), with the
// asymptotic Kolmogorov distribution (Stephens' small-sample correction).
[[nodiscard]] KsResult ks_exponential(std::vector<double> samples, double rate = 1.0);

struct CompareEntry {
    std::string word;
    Feature feature{Feature::strong_tie};
    std::size_t events{0};
    double ll_base{0.0};
    double ll_full{0.0};
    LrtResult test;
    bool reject{false};
    std::optional<std::string> error; // fit failure for this word
    std::optional<double> aa_threshold;
    std::size_t pool_size{0};
};

struct CompareConfig {
    ModelSpec base_spec{};
    std::vector<Feature> added{Feature::strong_tie, Feature::local};
    double alpha{0.05};
    double tie_percentile{90.0};
    Kernel kernel{};
    FitConfig fit{};
    unsigned workers{1}; // words fitted concurrently
};

struct CompareReport {
    ModelSpec base_spec{};
    double alpha{0.05};
    std::size_t tests{0};
    std::vector<CompareEntry> entries; // ordered by word, then feature
    // Realized BH cutoff and the matching log-likelihood improvement
    // (half the chi-squared critical value). Both depend on the realized
    // p-values of the run.
    double p_threshold{0.0};
    double ll_threshold{0.0};
};

// Fits the base model and each one-feature extension per word, then applies
// BH jointly across every (word, feature) test. A word whose fit fails is
// reported with its error and left out of the correction.
[[nodiscard]] CompareReport compare_pipeline(const CascadeSet& cascades, const SocialGraph& graph,
                                             const CompareConfig& config);

} // namespace tiehawkes
