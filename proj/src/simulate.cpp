#include "tiehawkes/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "tiehawkes/errors.hpp"

namespace tiehawkes {

ContagionMode parse_contagion_mode(std::string_view name) {
    if (name == "hawkes") {
        return ContagionMode::hawkes;
    }
    if (name == "simple") {
        return ContagionMode::simple;
    }
    if (name == "complex-threshold") {
        return ContagionMode::complex_threshold;
    }
    throw ConfigError("unknown contagion mode '" + std::string(name) + "'");
}

std::string_view to_string(ContagionMode mode) {
    switch (mode) {
    case ContagionMode::hawkes:
        return "hawkes";
    case ContagionMode::simple:
        return "simple";
    case ContagionMode::complex_threshold:
        return "complex-threshold";
    }
    return "hawkes";
}

double adoption_probability(const ContagionParams& p, ContagionMode mode, std::size_t exposures) {
    if (mode != ContagionMode::complex_threshold || exposures < p.threshold) {
        return p.adopt_prob;
    }
    const double steps = static_cast<double>(exposures - p.threshold + 1);
    return std::min(1.0, p.adopt_prob * std::pow(p.boost, steps));
}

namespace {

// Outgoing influence weights alpha(m -> v) / gamma in adjacency order, plus self.
struct OutWeights {
    std::vector<double> self;
    std::vector<std::size_t> offsets;
    std::vector<double> edge;
};

OutWeights out_weights(const FeatureContext& features, const ThetaVector& theta) {
    const auto& g = features.graph();
    OutWeights w;
    w.self.assign(g.node_count(), theta[0]);
    w.offsets.assign(g.node_count() + 1, 0);
    for (UserId m = 0; m < g.node_count(); ++m) {
        w.offsets[m + 1] = w.offsets[m] + g.degree(m);
    }
    w.edge.resize(w.offsets.back());
    for (UserId m = 0; m < g.node_count(); ++m) {
        std::size_t k = w.offsets[m];
        for (const auto& nb : g.neighbors(m)) {
            w.edge[k++] = influence(theta, features.edge_features(m, nb.id));
        }
    }
    return w;
}

// Fenwick tree over non-negative weights with proportional sampling.
class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0.0) {}

    void add(std::size_t i, double v) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) {
            tree_[i] += v;
        }
    }
    [[nodiscard]] double total() const {
        double s = 0.0;
        for (std::size_t i = tree_.size() - 1; i > 0; i -= i & (~i + 1)) {
            s += tree_[i];
        }
        return s;
    }
    // Smallest index whose prefix sum exceeds target.
    [[nodiscard]] std::size_t find(double target) const {
        const std::size_t n = tree_.size() - 1;
        std::size_t pos = 0;
        std::size_t step = 1;
        while (step * 2 <= n) {
            step *= 2;
        }
        for (; step > 0; step /= 2) {
            if (pos + step <= n && tree_[pos + step] <= target) {
                pos += step;
                target -= tree_[pos];
            }
        }
        return std::min(pos, n - 1);
    }
    void rebuild(const std::vector<double>& values) {
        std::fill(tree_.begin(), tree_.end(), 0.0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            tree_[i + 1] += values[i];
            const std::size_t parent = (i + 1) + ((i + 1) & (~(i + 1) + 1));
            if (parent < tree_.size()) {
                tree_[parent] += tree_[i + 1];
            }
        }
    }

private:
    std::vector<double> tree_;
};

Cascade simulate_hawkes(const SimConfig& cfg) {
    const auto& g = cfg.features.graph();
    const std::size_t M = g.node_count();
    const double gamma = cfg.kernel.gamma;
    const auto w = out_weights(cfg.features, cfg.theta);

    std::vector<double> mu_cum(M + 1, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        mu_cum[m + 1] = mu_cum[m] + cfg.mu[m];
    }
    const double mu_total = mu_cum[M];

    // excitation of user m at time t is exp(-gamma (t - ref)) * level[m]
    std::vector<double> level(M, 0.0);
    Fenwick tree(M);
    double ref = 0.0;

    std::mt19937_64 rng(cfg.seed);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Cascade c;
    c.word = cfg.word;
    c.horizon = cfg.horizon;
    double t = 0.0;
    double excitation_total = 0.0;
    while (true) {
        const double bound = mu_total + std::exp(-gamma * (t - ref)) * excitation_total;
        if (!(bound > 0.0)) {
            break;
        }
        t += expo(rng) / bound;
        if (t > cfg.horizon) {
            break;
        }
        const double decayed = std::exp(-gamma * (t - ref)) * excitation_total;
        const double lambda = mu_total + decayed;
        if (unif(rng) * bound > lambda) {
            continue;
        }
        UserId user = 0;
        const double pick = unif(rng) * lambda;
        if (pick < mu_total) {
            const auto it = std::upper_bound(mu_cum.begin() + 1, mu_cum.end(), pick);
            user = static_cast<UserId>(std::min<std::size_t>(it - mu_cum.begin() - 1, M - 1));
            while (cfg.mu[user] == 0.0 && user + 1 < M) {
                ++user; // lands on a zero-width interval only through rounding
            }
        } else {
            const double target = (pick - mu_total) / std::exp(-gamma * (t - ref));
            user = static_cast<UserId>(tree.find(target));
        }
        c.events.push_back(Event{user, t});
        if (c.events.size() > cfg.max_events) {
            throw InfeasibleError("simulation exceeded " + std::to_string(cfg.max_events) + " events");
        }

        if (gamma * (t - ref) > 30.0) {
            const double shrink = std::exp(-gamma * (t - ref));
            for (auto& l : level) {
                l *= shrink;
            }
            tree.rebuild(level);
            ref = t;
        }
        const double lift = std::exp(gamma * (t - ref));
        if (w.self[user] != 0.0) {
            level[user] += w.self[user] * lift;
            tree.add(user, w.self[user] * lift);
        }
        const auto nbrs = g.neighbors(user);
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
            const double a = w.edge[w.offsets[user] + k];
            if (a != 0.0) {
                level[nbrs[k].id] += a * lift;
                tree.add(nbrs[k].id, a * lift);
            }
        }
        excitation_total = tree.total();
    }
    return c;
}

Cascade simulate_contagion(const SimConfig& cfg) {
    const auto& g = cfg.features.graph();
    const std::size_t M = g.node_count();
    const auto& p = cfg.contagion;
    if (!(p.background_rate >= 0.0) || !(p.adopt_prob >= 0.0 && p.adopt_prob <= 1.0) || !(p.boost >= 0.0) ||
        !(p.delay_rate > 0.0) || p.threshold == 0) {
        throw ArgumentError("invalid contagion parameters");
    }
    std::mt19937_64 rng(cfg.seed);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    struct Pending {
        double time;
        std::uint64_t seq;
        UserId user;
        bool operator>(const Pending& o) const { return time > o.time || (time == o.time && seq > o.seq); }
    };
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
    std::uint64_t seq = 0;
    if (p.background_rate > 0.0) {
        for (UserId m = 0; m < M; ++m) {
            const double t = expo(rng) / p.background_rate;
            if (t <= cfg.horizon) {
                queue.push(Pending{t, seq++, m});
            }
        }
    }
    std::vector<bool> adopted(M, false);
    std::vector<std::size_t> exposed(M, 0);
    Cascade c;
    c.word = cfg.word;
    c.horizon = cfg.horizon;
    while (!queue.empty()) {
        const auto next = queue.top();
        queue.pop();
        if (adopted[next.user]) {
            continue;
        }
        adopted[next.user] = true;
        c.events.push_back(Event{next.user, next.time});
        for (const auto& nb : g.neighbors(next.user)) {
            if (adopted[nb.id] || !(nb.formed_at - c.origin_hours < next.time)) {
                continue;
            }
            const std::size_t k = ++exposed[nb.id];
            if (unif(rng) < adoption_probability(p, cfg.mode, k)) {
                const double t = next.time + expo(rng) / p.delay_rate;
                if (t <= cfg.horizon) {
                    queue.push(Pending{t, seq++, nb.id});
                }
            }
        }
    }
    return c;
}

} // namespace

BranchingReport branching_bound(const FeatureContext& features, const ThetaVector& theta, const Kernel& kernel,
                                std::size_t iterations) {
    const auto& g = features.graph();
    const std::size_t M = g.node_count();
    BranchingReport r;
    if (M == 0) {
        return r;
    }
    const auto w = out_weights(features, theta);
    // the alpha matrix is symmetric apart from the diagonal, so incoming equals outgoing
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (UserId m = 0; m < M; ++m) {
            double s = w.self[m] * x[m];
            const auto nbrs = g.neighbors(m);
            for (std::size_t k = 0; k < nbrs.size(); ++k) {
                s += w.edge[w.offsets[m] + k] * x[nbrs[k].id];
            }
            y[m] = s / kernel.gamma;
        }
    };
    std::vector<double> x(M, 1.0);
    std::vector<double> y(M);
    r.spectral_upper = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < std::max<std::size_t>(1, iterations); ++it) {
        apply(x, y);
        double hi = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double norm = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const double ratio = y[m] / x[m];
            hi = std::max(hi, ratio);
            lo = std::min(lo, ratio);
            norm = std::max(norm, y[m]);
        }
        if (it == 0) {
            r.max_incoming = hi;
        }
        r.spectral_upper = std::min(r.spectral_upper, hi);
        r.spectral_lower = std::max(r.spectral_lower, lo);
        if (!(norm > 0.0)) {
            r.spectral_upper = 0.0;
            break;
        }
        for (std::size_t m = 0; m < M; ++m) {
            // keep every coordinate positive so the ratio bounds stay valid
            x[m] = std::max(y[m] / norm, 1e-250);
        }
    }
    return r;
}

Cascade simulate(const SimConfig& cfg) {
    cfg.kernel.validate();
    const auto& g = cfg.features.graph();
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
        throw ArgumentError("simulation horizon must be positive and finite");
    }
    Cascade c;
    if (cfg.mode == ContagionMode::hawkes) {
        if (cfg.mu.size() != g.node_count()) {
            throw ArgumentError("need one base intensity per graph node");
        }
        for (double m : cfg.mu) {
            if (!(m >= 0.0) || !std::isfinite(m)) {
                throw ArgumentError("base intensities must be finite and non-negative");
            }
        }
        for (double th : cfg.theta) {
            if (!(th >= 0.0) || !std::isfinite(th)) {
                throw ArgumentError("feature weights must be finite and non-negative");
            }
        }
        if (cfg.enforce_stability) {
            if (!(cfg.max_branching < 1.0)) {
                throw ArgumentError("stability factor must be below 1");
            }
            const auto b = branching_bound(cfg.features, cfg.theta, cfg.kernel);
            if (b.spectral_upper > cfg.max_branching) {
                std::ostringstream msg;
                msg << "unstable configuration: branching bound " << b.spectral_upper << " (max incoming "
                    << b.max_incoming << ") exceeds " << cfg.max_branching;
                throw InfeasibleError(msg.str());
            }
        }
        c = simulate_hawkes(cfg);
    } else {
        c = simulate_contagion(cfg);
    }
    return c;
}

std::vector<double> time_rescaled_intervals(const Cascade& cascade, const FeatureContext& features,
                                            const ThetaVector& theta, const std::vector<double>& mu,
                                            const Kernel& kernel) {
    const double mu_total = std::accumulate(mu.begin(), mu.end(), 0.0);
    std::vector<double> out;
    out.reserve(cascade.size());
    double excitation = 0.0; // sum_k A_k kappa(t - t_k) just after the previous event
    double prev = 0.0;
    for (const auto& e : cascade.events) {
        const double dt = e.time - prev;
        out.push_back(mu_total * dt + excitation * (1.0 - kernel(dt)) / kernel.gamma);
        excitation *= kernel(dt);
        excitation += influence(theta, FeatureVector{Feature::self});
        for (const auto& nb : features.graph().neighbors(e.user)) {
            excitation += influence(theta, features.edge_features(e.user, nb.id));
        }
        prev = e.time;
    }
    return out;
}

std::vector<double> expected_bin_counts(const Cascade& cascade, const FeatureContext& features,
                                        const ThetaVector& theta, const std::vector<double>& mu,
                                        const Kernel& kernel, double bin_hours) {
    if (!(bin_hours > 0.0)) {
        throw ArgumentError("bin width must be positive");
    }
    const double mu_total = std::accumulate(mu.begin(), mu.end(), 0.0);
    const auto bins = static_cast<std::size_t>(std::ceil(cascade.horizon / bin_hours));
    std::vector<double> out(bins, 0.0);
    double excitation = 0.0;
    double clock = 0.0;
    std::size_t next = 0;
    auto advance = [&](double to) {
        while (clock < to) {
            const auto bin = std::min(bins - 1, static_cast<std::size_t>(clock / bin_hours));
            const double stop = std::min(to, static_cast<double>(bin + 1) * bin_hours);
            const double dt = stop - clock;
            out[bin] += mu_total * dt + excitation * (1.0 - kernel(dt)) / kernel.gamma;
            excitation *= kernel(dt);
            clock = stop;
        }
    };
    for (; next < cascade.size(); ++next) {
        const auto& e = cascade.events[next];
        advance(e.time);
        excitation += influence(theta, FeatureVector{Feature::self});
        for (const auto& nb : features.graph().neighbors(e.user)) {
            excitation += influence(theta, features.edge_features(e.user, nb.id));
        }
    }
    advance(cascade.horizon);
    return out;
}

GraphKind parse_graph_kind(std::string_view name) {
    if (name == "erdos-renyi") {
        return GraphKind::erdos_renyi;
    }
    if (name == "planted-cities") {
        return GraphKind::planted_cities;
    }
    if (name == "embedded-core") {
        return GraphKind::embedded_core;
    }
    throw ConfigError("unknown graph kind '" + std::string(name) + "'");
}

SocialGraph synth_graph(const SynthGraphParams& p) {
    auto valid_prob = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!valid_prob(p.edge_prob) || !valid_prob(p.p_in) || !valid_prob(p.p_out) ||
        !valid_prob(p.city_assortativity)) {
        throw ArgumentError("probabilities must lie in [0, 1]");
    }
    if (p.kind == GraphKind::planted_cities && p.cities == 0) {
        throw ArgumentError("planted-cities needs at least one city");
    }
    if (p.kind == GraphKind::embedded_core && p.core_size < 2) {
        throw ArgumentError("embedded-core needs a core of at least two nodes");
    }

    SocialGraph g;
    for (std::size_t i = 0; i < p.nodes; ++i) {
        g.add_user("u" + std::to_string(i));
    }
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < p.cities; ++k) {
        labels.push_back("city" + std::to_string(k));
        g.add_city(labels.back());
    }
    g.set_tracked_cities(labels);

    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto n = static_cast<UserId>(p.nodes);

    switch (p.kind) {
    case GraphKind::erdos_renyi:
        for (UserId i = 0; i < n; ++i) {
            for (UserId j = i + 1; j < n; ++j) {
                if (unif(rng) < p.edge_prob) {
                    g.add_edge(i, j);
                }
            }
        }
        if (p.cities > 0) {
            std::uniform_int_distribution<std::size_t> pick(0, p.cities - 1);
            for (UserId i = 0; i < n; ++i) {
                g.set_city(i, static_cast<CityId>(pick(rng)));
            }
        }
        break;
    case GraphKind::planted_cities:
        for (UserId i = 0; i < n; ++i) {
            g.set_city(i, static_cast<CityId>(i % p.cities));
        }
        for (UserId i = 0; i < n; ++i) {
            for (UserId j = i + 1; j < n; ++j) {
                const double prob = (i % p.cities == j % p.cities) ? p.p_in : p.p_out;
                if (unif(rng) < prob) {
                    g.add_edge(i, j);
                }
            }
        }
        break;
    case GraphKind::embedded_core: {
        const std::size_t motif = p.core_size + p.periphery_per_core;
        const std::size_t motifs = p.nodes / motif;
        std::uniform_int_distribution<std::size_t> any_city(0, p.cities == 0 ? 0 : p.cities - 1);
        for (std::size_t k = 0; k < motifs; ++k) {
            const auto base = static_cast<UserId>(k * motif);
            for (UserId a = 0; a < p.core_size; ++a) {
                for (UserId b = a + 1; b < p.core_size; ++b) {
                    g.add_edge(base + a, base + b);
                }
            }
            for (std::size_t q = 0; q < p.periphery_per_core; ++q) {
                const auto anchor = static_cast<UserId>(q % (p.core_size - 1));
                g.add_edge(base + anchor, static_cast<UserId>(base + p.core_size + q));
            }
            if (p.cities > 0) {
                const std::size_t home = k % p.cities;
                for (std::size_t v = 0; v < motif; ++v) {
                    const std::size_t city = unif(rng) < p.city_assortativity ? home : any_city(rng);
                    g.set_city(static_cast<UserId>(base + v), static_cast<CityId>(city));
                }
            }
        }
        break;
    }
    }
    return g;
}

} // namespace tiehawkes
