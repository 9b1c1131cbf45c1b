#include "tiehawkes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tiehawkes/errors.hpp"
#include "tiehawkes/parallel.hpp"

namespace tiehawkes {

double chi2_1_sf(double x) {
    if (std::isnan(x)) {
        throw ArgumentError("chi-squared statistic is NaN");
    }
    if (x <= 0.0) {
        return 1.0;
    }
    return std::erfc(std::sqrt(0.5 * x));
}

double chi2_1_isf(double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw ArgumentError("tail probability must lie in (0, 1]");
    }
    if (p == 1.0) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (chi2_1_sf(hi) > p) {
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chi2_1_sf(mid) > p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

LrtResult lrt(const FitResult& fit_base, const FitResult& fit_full) {
    const auto base = fit_base.spec.active().bits();
    const auto full = fit_full.spec.active().bits();
    if ((base & full) != base || fit_full.spec.size() != fit_base.spec.size() + 1) {
        throw ArgumentError("models " + fit_base.spec.name() + " and " + fit_full.spec.name() +
                            " are not nested by one feature");
    }
    if (fit_base.events != fit_full.events) {
        throw ArgumentError("nested fits were made on different cascades");
    }
    LrtResult r;
    r.raw_statistic = 2.0 * (fit_full.loglik - fit_base.loglik);
    r.optimization_failure = r.raw_statistic < -kLrtFailureTolerance;
    r.statistic = std::max(0.0, r.raw_statistic);
    r.p_value = chi2_1_sf(r.statistic);
    return r;
}

namespace {

std::size_t bh_rejections(std::span<const double> pvalues, double alpha, std::vector<std::size_t>& order) {
    for (double p : pvalues) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ArgumentError("p-values must lie in [0, 1]");
        }
    }
    order.resize(pvalues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    const auto m = static_cast<double>(pvalues.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (pvalues[order[i]] <= static_cast<double>(i + 1) / m * alpha) {
            k = i + 1;
        }
    }
    return k;
}

} // namespace

std::vector<bool> bh_correct(std::span<const double> pvalues, double alpha) {
    std::vector<std::size_t> order;
    const std::size_t k = bh_rejections(pvalues, alpha, order);
    std::vector<bool> reject(pvalues.size(), false);
    for (std::size_t i = 0; i < k; ++i) {
        reject[order[i]] = true;
    }
    return reject;
}

double bh_threshold(std::span<const double> pvalues, double alpha) {
    if (pvalues.empty()) {
        return alpha;
    }
    std::vector<std::size_t> order;
    const std::size_t k = bh_rejections(pvalues, alpha, order);
    const auto m = static_cast<double>(pvalues.size());
    return static_cast<double>(std::max<std::size_t>(k, 1)) / m * alpha;
}

KsResult ks_exponential(std::vector<double> samples, double rate) {
    if (samples.empty()) {
        throw InsufficientData("KS test on an empty sample");
    }
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = samples[i] <= 0.0 ? 0.0 : -std::expm1(-rate * samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    const double sq = std::sqrt(n);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    double q = 0.0;
    if (lambda < 0.2) {
        q = 1.0;
    } else {
        double sign = 1.0;
        for (int j = 1; j <= 100; ++j) {
            const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
            q += term;
            if (std::abs(term) < 1e-16) {
                break;
            }
            sign = -sign;
        }
        q = std::clamp(2.0 * q, 0.0, 1.0);
    }
    return KsResult{d, q};
}

CompareReport compare_pipeline(const CascadeSet& cascades, const SocialGraph& graph, const CompareConfig& config) {
    for (auto f : config.added) {
        if (config.base_spec.contains(f)) {
            throw ConfigError(std::string(feature_name(f)) + " is already in the base model " +
                              config.base_spec.name());
        }
    }
    std::vector<const Cascade*> words;
    for (const auto& [_, c] : cascades) {
        words.push_back(&c);
    }
    const std::size_t per_word = config.added.size();
    std::vector<CompareEntry> entries(words.size() * per_word);

    FitConfig inner = config.fit;
    inner.workers = 1;
    parallel_for(words.size(), config.workers, [&](std::size_t w) {
        const Cascade& c = *words[w];
        for (std::size_t k = 0; k < per_word; ++k) {
            auto& e = entries[w * per_word + k];
            e.word = c.word;
            e.feature = config.added[k];
            e.events = c.size();
        }
        try {
            const auto adopters = c.adopters();
            const FeatureContext ctx(graph, adopters, config.tie_percentile);
            const auto base = fit(c, ctx, config.base_spec, config.kernel, inner);
            for (std::size_t k = 0; k < per_word; ++k) {
                auto& e = entries[w * per_word + k];
                e.aa_threshold = ctx.aa_threshold();
                e.pool_size = ctx.pool_size();
                // warm start from the base optimum so the nested fit starts no worse
                FitConfig warm = inner;
                warm.initial_theta = base.params.theta;
                (*warm.initial_theta)[static_cast<std::size_t>(e.feature)] = inner.theta_init;
                warm.initial_mu = base.params.mu;
                const auto full = fit(c, ctx, config.base_spec.with(e.feature), config.kernel, warm);
                e.ll_base = base.loglik;
                e.ll_full = full.loglik;
                e.test = lrt(base, full);
            }
        } catch (const Error& err) {
            for (std::size_t k = 0; k < per_word; ++k) {
                entries[w * per_word + k].error = err.what();
            }
        }
    });

    CompareReport report;
    report.base_spec = config.base_spec;
    report.alpha = config.alpha;
    std::vector<double> pvalues;
    std::vector<std::size_t> tested;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].error) {
            pvalues.push_back(entries[i].test.p_value);
            tested.push_back(i);
        }
    }
    const auto decisions = bh_correct(pvalues, config.alpha);
    for (std::size_t j = 0; j < tested.size(); ++j) {
        entries[tested[j]].reject = decisions[j];
    }
    report.tests = pvalues.size();
    report.p_threshold = bh_threshold(pvalues, config.alpha);
    report.ll_threshold = 0.5 * chi2_1_isf(report.p_threshold);
    report.entries = std::move(entries);
    return report;
}

} // namespace tiehawkes
