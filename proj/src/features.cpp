#include "tiehawkes/features.hpp"

#include <algorithm>

#include "tiehawkes/errors.hpp"

namespace tiehawkes {

std::string_view feature_name(Feature f) {
    static constexpr std::array<std::string_view, kFeatureCount> names{"F1", "F2", "F3", "F4"};
    return names[static_cast<std::size_t>(f)];
}

Feature parse_feature(std::string_view name) {
    for (auto f : kAllFeatures) {
        if (feature_name(f) == name) {
            return f;
        }
    }
    throw ConfigError("unknown feature '" + std::string(name) + "'");
}

std::string to_string(FeatureVector v) {
    std::string s = "{";
    for (auto f : kAllFeatures) {
        if (v[f]) {
            if (s.size() > 1) {
                s += ',';
            }
            s += feature_name(f);
        }
    }
    return s + "}";
}

ModelSpec::ModelSpec() : active_{Feature::self, Feature::mutual_reply} {}

ModelSpec::ModelSpec(FeatureVector active) : active_(active) {
    if (!active[Feature::self] || !active[Feature::mutual_reply]) {
        throw ArgumentError("model spec must include F1 and F2");
    }
}

ModelSpec ModelSpec::parse(std::string_view text) {
    FeatureVector v;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('+', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto token = text.substr(start, end - start);
        while (!token.empty() && token.front() == ' ') {
            token.remove_prefix(1);
        }
        while (!token.empty() && token.back() == ' ') {
            token.remove_suffix(1);
        }
        v.set(parse_feature(token));
        start = end + 1;
    }
    if (!v[Feature::self] || !v[Feature::mutual_reply]) {
        throw ConfigError("model spec '" + std::string(text) + "' must include F1 and F2");
    }
    return ModelSpec(v);
}

ModelSpec ModelSpec::with(Feature f) const {
    FeatureVector v = active_;
    v.set(f);
    return ModelSpec(v);
}

std::size_t ModelSpec::size() const {
    std::size_t n = 0;
    for (auto f : kAllFeatures) {
        n += active_[f] ? 1 : 0;
    }
    return n;
}

std::string ModelSpec::name() const {
    std::string s;
    for (auto f : kAllFeatures) {
        if (active_[f]) {
            if (!s.empty()) {
                s += '+';
            }
            s += feature_name(f);
        }
    }
    return s;
}

FeatureContext::FeatureContext(const SocialGraph& graph, std::span<const UserId> adopters, double percentile)
    : graph_(&graph) {
    std::vector<bool> adopted(graph.node_count(), false);
    for (auto u : adopters) {
        adopted.at(u) = true;
    }
    std::vector<std::pair<UserId, UserId>> pool;
    for (const auto& [i, j] : graph.edges()) {
        if (adopted[i] || adopted[j]) {
            pool.emplace_back(i, j);
        }
    }
    pool_size_ = pool.size();
    if (!pool.empty()) {
        threshold_ = tie_strength_threshold(graph, pool, percentile);
    }
}

FeatureContext::FeatureContext(const SocialGraph& graph, std::optional<double> aa_threshold, std::size_t pool_size)
    : graph_(&graph), threshold_(aa_threshold), pool_size_(pool_size) {}

FeatureVector FeatureContext::edge_features(UserId m, UserId neighbor) const {
    FeatureVector v{Feature::mutual_reply};
    if (threshold_ && adamic_adar(*graph_, m, neighbor) >= *threshold_) {
        v.set(Feature::strong_tie);
    }
    const auto cm = graph_->tracked_city(m);
    if (cm && cm == graph_->tracked_city(neighbor)) {
        v.set(Feature::local);
    }
    return v;
}

FeatureVector FeatureContext::feature_vector(UserId m, UserId m_prime) const {
    if (m == m_prime) {
        return FeatureVector{Feature::self};
    }
    if (!graph_->has_edge(m, m_prime)) {
        return {};
    }
    return edge_features(m, m_prime);
}

const FeatureCounts& AggregateFeatures::of(UserId sender) const {
    auto it = std::lower_bound(senders.begin(), senders.end(), sender);
    if (it == senders.end() || *it != sender) {
        throw LookupError("no aggregate features for user " + std::to_string(sender));
    }
    return counts[static_cast<std::size_t>(it - senders.begin())];
}

FeatureCounts aggregate_features(const FeatureContext& ctx, UserId sender) {
    FeatureCounts c{1, 0, 0, 0};
    for (const auto& nb : ctx.graph().neighbors(sender)) {
        const auto v = ctx.edge_features(sender, nb.id);
        for (auto f : kAllFeatures) {
            c[static_cast<std::size_t>(f)] += v[f] ? 1 : 0;
        }
    }
    return c;
}

AggregateFeatures aggregate_features(const FeatureContext& ctx, std::span<const UserId> senders) {
    AggregateFeatures out;
    out.senders.assign(senders.begin(), senders.end());
    std::sort(out.senders.begin(), out.senders.end());
    out.senders.erase(std::unique(out.senders.begin(), out.senders.end()), out.senders.end());
    out.counts.reserve(out.senders.size());
    for (auto s : out.senders) {
        out.counts.push_back(aggregate_features(ctx, s));
    }
    return out;
}

std::vector<FeatureVector> enumerate_configs(const ModelSpec& spec) {
    static const std::array<FeatureVector, 6> realizable{
        FeatureVector{},
        FeatureVector{Feature::self},
        FeatureVector{Feature::mutual_reply},
        FeatureVector{Feature::mutual_reply, Feature::strong_tie},
        FeatureVector{Feature::mutual_reply, Feature::local},
        FeatureVector{Feature::mutual_reply, Feature::strong_tie, Feature::local},
    };
    std::vector<FeatureVector> out;
    for (auto v : realizable) {
        const auto m = v.masked(spec.active());
        if (std::find(out.begin(), out.end(), m) == out.end()) {
            out.push_back(m);
        }
    }
    return out;
}

} // namespace tiehawkes
