#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "tiehawkes/cascade.hpp"
#include "tiehawkes/features.hpp"
#include "tiehawkes/hawkes.hpp"

namespace testing_support {

using namespace tiehawkes;

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

// Adaptive Simpson quadrature of a smooth integrand on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) {
        return 0.0;
    }
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

// Direct evaluation of the intensity; shares nothing with the library's
// intensity() beyond the feature context.
inline double intensity_oracle(UserId user, double t, const Cascade& c, const Params& p,
                               const FeatureContext& ctx, double gamma) {
    double lam = p.base_rate(user);
    for (const auto& e : c.events) {
        if (e.time < t) {
            const auto f = ctx.feature_vector(e.user, user).as_array();
            double a = 0.0;
            for (std::size_t d = 0; d < kFeatureCount; ++d) {
                a += p.theta[d] * f[d];
            }
            lam += a * std::exp(-gamma * (t - e.time));
        }
    }
    return lam;
}

// Integral of intensity_oracle over [t1, t2], split at event times so each
// piece is smooth.
inline double integral_oracle(UserId user, double t1, double t2, const Cascade& c, const Params& p,
                              const FeatureContext& ctx, double gamma, double tol = 1e-13) {
    std::vector<double> cuts{t1};
    for (const auto& e : c.events) {
        if (e.time > t1 && e.time < t2) {
            cuts.push_back(e.time);
        }
    }
    cuts.push_back(t2);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        // right-continuous pieces: evaluate just inside (a, b]
        auto f = [&](double t) { return intensity_oracle(user, std::max(t, std::nextafter(a, b)), c, p, ctx, gamma); };
        s += adaptive_simpson(f, a, b, tol);
    }
    return s;
}

inline double loglik_oracle(const Cascade& c, const Params& p, const FeatureContext& ctx, double gamma) {
    double ll = 0.0;
    for (const auto& e : c.events) {
        ll += std::log(intensity_oracle(e.user, e.time, c, p, ctx, gamma));
    }
    for (UserId u = 0; u < ctx.graph().node_count(); ++u) {
        ll -= integral_oracle(u, 0.0, c.horizon, c, p, ctx, gamma);
    }
    return ll;
}

struct Instance {
    SocialGraph graph;
    Cascade cascade;
    std::vector<UserId> adopters;
};

// Random graph with city labels and a random cascade; every adopter's
// intensity is kept positive by the caller's mu draw.
inline Instance random_instance(std::size_t users, std::size_t events, double horizon, std::mt19937_64& rng,
                                double edge_prob = 0.2) {
    Instance in;
    in.graph = random_graph(users, edge_prob, rng);
    const std::vector<std::string> tracked{"c0", "c1"};
    in.graph.set_tracked_cities(tracked);
    std::uniform_int_distribution<int> city(0, 2);
    for (UserId i = 0; i < users; ++i) {
        const int c = city(rng);
        if (c < 2) {
            in.graph.set_city(i, in.graph.add_city("c" + std::to_string(c)));
        }
    }
    in.cascade = random_cascade(users, events, horizon, rng);
    in.adopters = in.cascade.adopters();
    return in;
}

inline Params random_params(const std::vector<UserId>& adopters, const ModelSpec& spec, std::mt19937_64& rng,
                            double theta_lo = 0.01, double theta_hi = 1.0, double mu_lo = 0.05,
                            double mu_hi = 1.0) {
    std::uniform_real_distribution<double> th(theta_lo, theta_hi);
    std::uniform_real_distribution<double> mu(mu_lo, mu_hi);
    Params p;
    for (auto f : kAllFeatures) {
        p.theta[static_cast<std::size_t>(f)] = spec.contains(f) ? th(rng) : 0.0;
    }
    p.users = adopters;
    for (std::size_t k = 0; k < adopters.size(); ++k) {
        p.mu.push_back(mu(rng));
    }
    return p;
}

// Upper bound on |loglik with truncation - loglik without| when only the
// excitation sums are truncated. Every dropped term has lag >= tau_star, so
// its kernel weight is at most exp(-gamma tau_star), and each log term moves
// by at most (dropped mass) / (truncated intensity) <= dropped mass / mu.
inline double truncation_bound(const Cascade& c, const Params& p, const FeatureContext& ctx, const Kernel& k) {
    const double tail = std::exp(-k.gamma * k.tau_star);
    double bound = 0.0;
    for (std::size_t i = 0; i < c.events.size(); ++i) {
        double dropped = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            if (c.events[i].time - c.events[j].time >= k.tau_star) {
                dropped += influence(p.theta, ctx.feature_vector(c.events[j].user, c.events[i].user));
            }
        }
        bound += tail * dropped / p.base_rate(c.events[i].user);
    }
    return bound;
}

} // namespace testing_support
