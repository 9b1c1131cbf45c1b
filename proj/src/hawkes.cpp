#include "tiehawkes/hawkes.hpp"

#include <algorithm>
#include <numeric>

#include "tiehawkes/errors.hpp"
#include "tiehawkes/parallel.hpp"

namespace tiehawkes {

void Kernel::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw ArgumentError("kernel decay rate must be positive");
    }
    if (!(tau_star > 0.0)) {
        throw ArgumentError("kernel truncation horizon must be positive");
    }
}

double Params::base_rate(UserId user) const {
    auto it = std::lower_bound(users.begin(), users.end(), user);
    if (it == users.end() || *it != user) {
        return 0.0;
    }
    return mu[static_cast<std::size_t>(it - users.begin())];
}

double intensity(UserId user, double t, const Cascade& cascade, const Params& params, const FeatureContext& ctx,
                 const Kernel& kernel) {
    double lambda = params.base_rate(user);
    for (const auto& e : cascade.events) {
        if (!(e.time < t)) {
            break;
        }
        const double a = influence(params.theta, ctx.feature_vector(e.user, user));
        if (a != 0.0) {
            lambda += a * kernel(t - e.time);
        }
    }
    return lambda;
}

double intensity_integral(UserId user, double t1, double t2, const Cascade& cascade, const Params& params,
                          const FeatureContext& ctx, const Kernel& kernel) {
    if (t2 < t1) {
        throw ArgumentError("integration window ends before it starts");
    }
    double total = params.base_rate(user) * (t2 - t1);
    if (params.base_rate(user) == 0.0 && std::isinf(t2)) {
        total = 0.0;
    }
    for (const auto& e : cascade.events) {
        if (!(e.time < t2)) {
            break;
        }
        const double a = influence(params.theta, ctx.feature_vector(e.user, user));
        if (a == 0.0) {
            continue;
        }
        const double upper = kernel(std::max(t1 - e.time, 0.0));
        const double lower = std::isinf(t2) ? 0.0 : kernel(t2 - e.time);
        total += a * (upper - lower) / kernel.gamma;
    }
    return total;
}

double loglik_naive(const Cascade& cascade, const Params& params, const FeatureContext& ctx, const Kernel& kernel) {
    double log_term = 0.0;
    for (const auto& e : cascade.events) {
        const double lambda = intensity(e.user, e.time, cascade, params, ctx, kernel);
        if (!(lambda > 0.0)) {
            return -std::numeric_limits<double>::infinity();
        }
        log_term += std::log(lambda);
    }
    double integral = 0.0;
    const auto& g = ctx.graph();
    for (UserId m = 0; m < g.node_count(); ++m) {
        integral += intensity_integral(m, 0.0, cascade.horizon, cascade, params, ctx, kernel);
    }
    return log_term - integral;
}

namespace {

struct Slots {
    std::vector<UserId> users;
    std::vector<std::uint32_t> event_slot;
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> events;
    std::vector<std::int32_t> slot_of_user; // graph node -> slot or -1
};

Slots index_slots(const Cascade& cascade, const SocialGraph& graph) {
    Slots s;
    s.users = cascade.adopters();
    s.slot_of_user.assign(graph.node_count(), -1);
    for (std::size_t k = 0; k < s.users.size(); ++k) {
        s.slot_of_user.at(s.users[k]) = static_cast<std::int32_t>(k);
    }
    s.event_slot.reserve(cascade.size());
    s.offsets.assign(s.users.size() + 1, 0);
    for (const auto& e : cascade.events) {
        const auto slot = static_cast<std::uint32_t>(s.slot_of_user.at(e.user));
        s.event_slot.push_back(slot);
        ++s.offsets[slot + 1];
    }
    std::partial_sum(s.offsets.begin(), s.offsets.end(), s.offsets.begin());
    s.events.resize(cascade.size());
    std::vector<std::size_t> fill(s.offsets.begin(), s.offsets.end() - 1);
    for (std::size_t n = 0; n < cascade.size(); ++n) {
        s.events[fill[s.event_slot[n]]++] = static_cast<std::uint32_t>(n);
    }
    return s;
}

RecursiveMessages build_messages(const Cascade& cascade, const FeatureContext& ctx, const ModelSpec& spec,
                                 const Kernel& kernel, const Slots& slots, unsigned workers) {
    RecursiveMessages msg;
    for (auto c : enumerate_configs(spec)) {
        if (!c.none()) {
            msg.configs.push_back(c);
        }
    }
    std::array<int, 16> config_index{};
    config_index.fill(-1);
    for (std::size_t k = 0; k < msg.configs.size(); ++k) {
        config_index[msg.configs[k].bits()] = static_cast<int>(k);
    }
    const std::size_t K = msg.configs.size();
    msg.events = cascade.size();
    msg.values.assign(msg.events * K, 0.0);

    const auto& g = ctx.graph();
    const double tau = kernel.tau_star;
    parallel_for(slots.users.size(), workers, [&](std::size_t slot) {
        const UserId u = slots.users[slot];
        struct Source {
            double time;
            std::uint32_t event;
            int config;
        };
        std::vector<Source> sources;
        const int self_cfg = config_index[FeatureVector{Feature::self}.masked(spec.active()).bits()];
        for (std::size_t k = slots.offsets[slot]; k < slots.offsets[slot + 1]; ++k) {
            const auto n = slots.events[k];
            sources.push_back(Source{cascade.events[n].time, n, self_cfg});
        }
        for (const auto& nb : g.neighbors(u)) {
            const auto vs = slots.slot_of_user[nb.id];
            if (vs < 0) {
                continue;
            }
            const int cfg = config_index[ctx.edge_features(nb.id, u).masked(spec.active()).bits()];
            for (std::size_t k = slots.offsets[vs]; k < slots.offsets[vs + 1]; ++k) {
                const auto n = slots.events[k];
                sources.push_back(Source{cascade.events[n].time, n, cfg});
            }
        }
        std::sort(sources.begin(), sources.end(), [](const Source& a, const Source& b) {
            return a.time < b.time || (a.time == b.time && a.event < b.event);
        });

        std::vector<double> R(K, 0.0);
        std::size_t head = 0; // next source to admit
        std::size_t tail = 0; // oldest admitted source still inside the window
        double prev = 0.0;
        bool first = true;
        for (std::size_t k = slots.offsets[slot]; k < slots.offsets[slot + 1]; ++k) {
            const auto i = slots.events[k];
            const double s = cascade.events[i].time;
            if (!first) {
                const double decay = kernel(s - prev);
                for (auto& r : R) {
                    r *= decay;
                }
            }
            while (tail < head && s - sources[tail].time >= tau) {
                R[static_cast<std::size_t>(sources[tail].config)] -= kernel(s - sources[tail].time);
                ++tail;
            }
            while (head < sources.size() && sources[head].time < s) {
                const double lag = s - sources[head].time;
                if (lag >= tau) {
                    // everything admitted earlier is older still, so it has expired too
                    ++head;
                    tail = head;
                    continue;
                }
                R[static_cast<std::size_t>(sources[head].config)] += kernel(lag);
                ++head;
            }
            for (std::size_t c = 0; c < K; ++c) {
                R[c] = std::max(R[c], 0.0);
                msg.values[static_cast<std::size_t>(i) * K + c] = R[c];
            }
            prev = s;
            first = false;
        }
    });
    return msg;
}

} // namespace

RecursiveMessages recursive_messages(const Cascade& cascade, const FeatureContext& ctx, const ModelSpec& spec,
                                     const Kernel& kernel, unsigned workers) {
    kernel.validate();
    return build_messages(cascade, ctx, spec, kernel, index_slots(cascade, ctx.graph()), workers);
}

Precomputed precompute(const Cascade& cascade, const FeatureContext& ctx, const ModelSpec& spec,
                       const Kernel& kernel, unsigned workers) {
    kernel.validate();
    Precomputed pre;
    pre.spec = spec;
    pre.kernel = kernel;
    pre.horizon = cascade.horizon;
    auto slots = index_slots(cascade, ctx.graph());
    pre.messages = build_messages(cascade, ctx, spec, kernel, slots, workers);
    pre.users = std::move(slots.users);
    pre.event_slot = std::move(slots.event_slot);
    pre.slot_offsets = std::move(slots.offsets);
    pre.slot_events = std::move(slots.events);

    const auto active = spec.active();
    pre.aggregate.reserve(pre.users.size());
    for (auto u : pre.users) {
        auto counts = aggregate_features(ctx, u);
        for (auto f : kAllFeatures) {
            if (!active[f]) {
                counts[static_cast<std::size_t>(f)] = 0;
            }
        }
        pre.aggregate.push_back(counts);
    }

    const std::size_t K = pre.messages.configs.size();
    pre.excitation.assign(cascade.size(), ThetaVector{});
    for (std::size_t i = 0; i < cascade.size(); ++i) {
        auto& s = pre.excitation[i];
        for (std::size_t c = 0; c < K; ++c) {
            const double r = pre.messages.values[i * K + c];
            const auto cfg = pre.messages.configs[c];
            for (std::size_t d = 0; d < kFeatureCount; ++d) {
                if (cfg[static_cast<Feature>(d)]) {
                    s[d] += r;
                }
            }
        }
    }

    for (std::size_t n = 0; n < cascade.size(); ++n) {
        const double mass = (1.0 - kernel.truncated(cascade.horizon - cascade.events[n].time)) / kernel.gamma;
        const auto& agg = pre.aggregate[pre.event_slot[n]];
        for (std::size_t d = 0; d < kFeatureCount; ++d) {
            pre.compensator[d] += static_cast<double>(agg[d]) * mass;
        }
    }
    return pre;
}

Params make_params(const Precomputed& pre, const ThetaVector& theta, double mu) {
    Params p;
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
        p.theta[d] = pre.spec.contains(static_cast<Feature>(d)) ? theta[d] : 0.0;
    }
    p.users = pre.users;
    p.mu.assign(pre.users.size(), mu);
    return p;
}

namespace {

void check_alignment(const Precomputed& pre, const Params& params) {
    if (params.mu.size() != pre.users.size()) {
        throw ArgumentError("base intensities do not match the cascade's adopters");
    }
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
        if (!pre.spec.contains(static_cast<Feature>(d)) && params.theta[d] != 0.0) {
            throw ArgumentError("nonzero weight on an inactive feature");
        }
    }
}

double dot(const ThetaVector& a, const ThetaVector& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

// Per-slot sums of log-intensity, combined in slot order.
double log_term(const Precomputed& pre, const ThetaVector& theta, std::span<const double> mu, unsigned workers) {
    std::vector<double> partial(pre.slot_count(), 0.0);
    parallel_for(pre.slot_count(), workers, [&](std::size_t slot) {
        double s = 0.0;
        for (std::size_t k = pre.slot_offsets[slot]; k < pre.slot_offsets[slot + 1]; ++k) {
            s += std::log(mu[slot] + dot(theta, pre.excitation[pre.slot_events[k]]));
        }
        partial[slot] = s;
    });
    double total = 0.0;
    for (double p : partial) {
        total += p;
    }
    return total;
}

double loglik_raw(const Precomputed& pre, const ThetaVector& theta, std::span<const double> mu, unsigned workers) {
    const double logs = log_term(pre, theta, mu, workers);
    if (std::isnan(logs)) {
        return -std::numeric_limits<double>::infinity();
    }
    double mu_sum = 0.0;
    for (double m : mu) {
        mu_sum += m;
    }
    return logs - pre.horizon * mu_sum - dot(theta, pre.compensator);
}

} // namespace

double loglik_fast(const Precomputed& pre, const Params& params, unsigned workers) {
    check_alignment(pre, params);
    return loglik_raw(pre, params.theta, params.mu, workers);
}

Gradient grad(const Precomputed& pre, const Params& params, unsigned workers) {
    check_alignment(pre, params);
    struct Partial {
        ThetaVector theta{};
        double inv_sum{0.0};
        double log_sum{0.0};
    };
    std::vector<Partial> partial(pre.slot_count());
    parallel_for(pre.slot_count(), workers, [&](std::size_t slot) {
        Partial p;
        for (std::size_t k = pre.slot_offsets[slot]; k < pre.slot_offsets[slot + 1]; ++k) {
            const auto& s = pre.excitation[pre.slot_events[k]];
            const double lambda = params.mu[slot] + dot(params.theta, s);
            const double inv = 1.0 / lambda;
            p.inv_sum += inv;
            p.log_sum += std::log(lambda);
            for (std::size_t d = 0; d < kFeatureCount; ++d) {
                p.theta[d] += s[d] * inv;
            }
        }
        partial[slot] = p;
    });
    Gradient g;
    g.mu.resize(pre.slot_count());
    double logs = 0.0;
    double mu_sum = 0.0;
    for (std::size_t slot = 0; slot < partial.size(); ++slot) {
        for (std::size_t d = 0; d < kFeatureCount; ++d) {
            g.theta[d] += partial[slot].theta[d];
        }
        g.mu[slot] = partial[slot].inv_sum - pre.horizon;
        logs += partial[slot].log_sum;
        mu_sum += params.mu[slot];
    }
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
        g.theta[d] = pre.spec.contains(static_cast<Feature>(d)) ? g.theta[d] - pre.compensator[d] : 0.0;
    }
    g.loglik = logs - pre.horizon * mu_sum - dot(params.theta, pre.compensator);
    return g;
}

namespace {

// Solves A x = b for a small symmetric positive definite A (in place).
bool cholesky_solve(std::vector<double>& A, std::vector<double>& b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = A[j * n + j];
        for (std::size_t k = 0; k < j; ++k) {
            d -= A[j * n + k] * A[j * n + k];
        }
        if (!(d > 0.0)) {
            return false;
        }
        d = std::sqrt(d);
        A[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = A[i * n + j];
            for (std::size_t k = 0; k < j; ++k) {
                v -= A[i * n + k] * A[j * n + k];
            }
            A[i * n + j] = v / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) {
            v -= A[i * n + k] * b[k];
        }
        b[i] = v / A[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double v = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) {
            v -= A[k * n + ii] * b[k];
        }
        b[ii] = v / A[ii * n + ii];
    }
    return true;
}

class CoordinateAscent {
public:
    CoordinateAscent(const Precomputed& pre, const FitConfig& cfg) : pre_(pre), cfg_(cfg) {
        for (std::size_t d = 0; d < kFeatureCount; ++d) {
            if (!pre.spec.contains(static_cast<Feature>(d))) {
                continue;
            }
            // a feature that never fires carries no information; pin it at zero
            bool fires = pre.compensator[d] != 0.0;
            for (std::size_t i = 0; !fires && i < pre.event_count(); ++i) {
                fires = pre.excitation[i][d] != 0.0;
            }
            if (fires) {
                dims_.push_back(d);
            }
        }
    }

    [[nodiscard]] const std::vector<std::size_t>& dims() const { return dims_; }

    double evaluate(const ThetaVector& theta, std::span<const double> mu) const {
        return loglik_raw(pre_, theta, mu, cfg_.workers);
    }

    // Projected Newton iterations on theta with an active set at the bound.
    double theta_block(ThetaVector& theta, std::span<const double> mu, double ll) const {
        const std::size_t D = dims_.size();
        for (std::size_t step = 0; step < cfg_.max_theta_steps && D > 0; ++step) {
            std::vector<double> g(D, 0.0);
            std::vector<double> H(D * D, 0.0); // negated Hessian
            for (std::size_t i = 0; i < pre_.event_count(); ++i) {
                const auto& s = pre_.excitation[i];
                const double lambda = mu[pre_.event_slot[i]] + dot(theta, s);
                const double inv = 1.0 / lambda;
                for (std::size_t a = 0; a < D; ++a) {
                    const double sa = s[dims_[a]] * inv;
                    g[a] += sa;
                    for (std::size_t b = 0; b <= a; ++b) {
                        H[a * D + b] += sa * s[dims_[b]] * inv;
                    }
                }
            }
            for (std::size_t a = 0; a < D; ++a) {
                g[a] -= pre_.compensator[dims_[a]];
                for (std::size_t b = 0; b < a; ++b) {
                    H[b * D + a] = H[a * D + b];
                }
            }
            std::vector<std::size_t> free;
            for (std::size_t a = 0; a < D; ++a) {
                if (theta[dims_[a]] > 0.0 || g[a] > 0.0) {
                    free.push_back(a);
                }
            }
            if (free.empty()) {
                break;
            }
            const std::size_t F = free.size();
            std::vector<double> A(F * F);
            std::vector<double> p(F);
            double scale = 0.0;
            for (std::size_t a = 0; a < F; ++a) {
                scale = std::max(scale, H[free[a] * D + free[a]]);
            }
            for (std::size_t a = 0; a < F; ++a) {
                p[a] = g[free[a]];
                for (std::size_t b = 0; b < F; ++b) {
                    A[a * F + b] = H[free[a] * D + free[b]];
                }
                A[a * F + a] += 1e-12 * scale + 1e-300;
            }
            std::vector<double> dir(D, 0.0);
            if (cholesky_solve(A, p, F)) {
                for (std::size_t a = 0; a < F; ++a) {
                    dir[free[a]] = p[a];
                }
            }
            double slope = 0.0;
            for (std::size_t a = 0; a < D; ++a) {
                slope += g[a] * dir[a];
            }
            if (!(slope > 0.0)) {
                for (auto a : free) {
                    dir[a] = g[a];
                }
            }

            bool accepted = false;
            double t = 1.0;
            ThetaVector trial = theta;
            double trial_ll = ll;
            for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
                trial = theta;
                double predicted = 0.0;
                for (std::size_t a = 0; a < D; ++a) {
                    const auto d = dims_[a];
                    trial[d] = std::max(0.0, theta[d] + t * dir[a]);
                    predicted += g[a] * (trial[d] - theta[d]);
                }
                if (trial == theta) {
                    break;
                }
                trial_ll = evaluate(trial, mu);
                if (trial_ll >= ll && trial_ll >= ll + 1e-4 * predicted) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                break;
            }
            const double gain = trial_ll - ll;
            theta = trial;
            ll = trial_ll;
            if (gain < 1e-3 * cfg_.tol_abs) {
                break;
            }
        }
        return ll;
    }

    // Maximizes sum_i log(mu + b_i) - T mu over mu >= 0 for each adopter.
    void mu_block(const ThetaVector& theta, std::vector<double>& mu) const {
        const double T = pre_.horizon;
        parallel_for(pre_.slot_count(), cfg_.workers, [&](std::size_t slot) {
            std::vector<double> b;
            for (std::size_t k = pre_.slot_offsets[slot]; k < pre_.slot_offsets[slot + 1]; ++k) {
                b.push_back(dot(theta, pre_.excitation[pre_.slot_events[k]]));
            }
            mu[slot] = maximize_base_rate(b, T, mu[slot]);
        });
    }

    static double maximize_base_rate(std::span<const double> b, double T, double start) {
        auto slope = [&](double m, double& curvature) {
            double h = -T;
            curvature = 0.0;
            for (double bi : b) {
                const double inv = 1.0 / (m + bi);
                h += inv;
                curvature += inv * inv;
            }
            return h;
        };
        double c = 0.0;
        const bool zero_ok = std::all_of(b.begin(), b.end(), [](double v) { return v > 0.0; });
        if (zero_ok && slope(0.0, c) <= 0.0) {
            return 0.0;
        }
        // the root lies in (0, n/T] since the slope at n/T is <= 0
        double lo = 0.0;
        double hi = static_cast<double>(b.size()) / T;
        double m = (start > lo && start <= hi) ? start : 0.5 * hi;
        for (int it = 0; it < 200; ++it) {
            const double h = slope(m, c);
            if (h > 0.0) {
                lo = m;
            } else {
                hi = m;
            }
            if (h == 0.0 || hi - lo <= 1e-15 * hi) {
                break;
            }
            double next = m + h / c;
            if (!(next > lo && next < hi)) {
                next = 0.5 * (lo + hi);
            }
            if (std::abs(next - m) <= 1e-15 * m) {
                m = next;
                break;
            }
            m = next;
        }
        return m;
    }

private:
    const Precomputed& pre_;
    const FitConfig& cfg_;
    std::vector<std::size_t> dims_;
};

} // namespace

FitResult fit(const Precomputed& pre, const FitConfig& config) {
    if (pre.event_count() == 0) {
        throw ArgumentError("cannot fit an empty cascade");
    }
    if (!(pre.horizon > 0.0)) {
        throw InfeasibleError("cascade horizon must be positive");
    }
    FitResult result;
    result.spec = pre.spec;
    result.kernel = pre.kernel;
    result.config = config;
    result.events = pre.event_count();

    CoordinateAscent solver(pre, config);
    ThetaVector theta{};
    for (auto d : solver.dims()) {
        theta[d] = config.initial_theta ? (*config.initial_theta)[d] : config.theta_init;
        if (theta[d] < 0.0) {
            throw ArgumentError("initial feature weights must be non-negative");
        }
    }
    if (config.freeze_theta && config.initial_theta) {
        // frozen weights are taken as given, including features that never fire
        for (std::size_t d = 0; d < kFeatureCount; ++d) {
            theta[d] = pre.spec.contains(static_cast<Feature>(d)) ? (*config.initial_theta)[d] : 0.0;
        }
    }
    std::vector<double> mu(pre.slot_count());
    if (config.initial_mu) {
        if (config.initial_mu->size() != mu.size() ||
            std::any_of(config.initial_mu->begin(), config.initial_mu->end(), [](double m) { return !(m >= 0.0); })) {
            throw ArgumentError("initial base intensities must be non-negative, one per adopter");
        }
        mu = *config.initial_mu;
    } else {
        for (std::size_t slot = 0; slot < mu.size(); ++slot) {
            mu[slot] = static_cast<double>(pre.slot_offsets[slot + 1] - pre.slot_offsets[slot]) / pre.horizon;
        }
    }

    double ll = solver.evaluate(theta, mu);
    if (!std::isfinite(ll)) {
        throw InfeasibleError("log-likelihood is not finite at the starting point");
    }
    result.trace.push_back(ll);

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        const double before = ll;
        if (!config.freeze_theta) {
            ll = solver.theta_block(theta, mu, ll);
        }
        std::vector<double> next_mu = mu;
        solver.mu_block(theta, next_mu);
        const double mu_ll = solver.evaluate(theta, next_mu);
        if (mu_ll >= ll) {
            mu = std::move(next_mu);
            ll = mu_ll;
        }
        result.trace.push_back(ll);
        result.iterations = iter + 1;
        if (std::abs(ll - before) < config.tol_abs) {
            result.converged = true;
            break;
        }
    }

    result.loglik = ll;
    result.params.theta = theta;
    result.params.users = pre.users;
    result.params.mu = std::move(mu);
    return result;
}

FitResult fit(const Cascade& cascade, const FeatureContext& ctx, const ModelSpec& spec, const Kernel& kernel,
              const FitConfig& config) {
    if (cascade.empty()) {
        throw ArgumentError("cannot fit an empty cascade");
    }
    return fit(precompute(cascade, ctx, spec, kernel, config.workers), config);
}

} // namespace tiehawkes
