#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tiehawkes/errors.hpp"

namespace tiehawkes {

// 1-based nearest-rank index ceil(pct/100 * n), clamped to [1, n].
[[nodiscard]] inline std::size_t nearest_rank_index(double percentile, std::size_t n) {
    if (n == 0) {
        throw InsufficientData("percentile of an empty sample");
    }
    // pct * n is exact for the integral and half-integral percentiles used here
    const double raw = percentile * static_cast<double>(n) / 100.0;
    auto rank = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::clamp<std::size_t>(rank, 1, n);
}

// Nearest-rank percentile of an ascending-sorted sample (no interpolation).
[[nodiscard]] inline double nearest_rank_sorted(std::span<const double> sorted, double percentile) {
    return sorted[nearest_rank_index(percentile, sorted.size()) - 1];
}

[[nodiscard]] inline double nearest_rank(std::vector<double> values, double percentile) {
    std::sort(values.begin(), values.end());
    return nearest_rank_sorted(values, percentile);
}

} // namespace tiehawkes
