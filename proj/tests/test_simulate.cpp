#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "tiehawkes/errors.hpp"
#include "tiehawkes/simulate.hpp"
#include "tiehawkes/stats.hpp"

using namespace tiehawkes;
using testing_support::numbered_graph;

namespace {

SimConfig base_config(const FeatureContext& ctx, double mu, double horizon, std::uint64_t seed) {
    return SimConfig{.features = ctx,
                     .theta = {},
                     .mu = std::vector<double>(ctx.graph().node_count(), mu),
                     .kernel = {},
                     .horizon = horizon,
                     .seed = seed};
}

std::vector<UserId> everyone(const SocialGraph& g) {
    std::vector<UserId> v(g.node_count());
    std::iota(v.begin(), v.end(), UserId{0});
    return v;
}

} // namespace

TEST(Simulate, HomogeneousPoissonCounts) {
    const auto g = numbered_graph(1);
    const FeatureContext ctx(g, std::nullopt);
    double total = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto c = simulate(base_config(ctx, 0.5, 100.0, s));
        total += double(c.size());
        for (const auto& e : c.events) {
            EXPECT_GE(e.time, 0.0);
            EXPECT_LE(e.time, 100.0);
        }
    }
    const double mean = total / 200.0;
    EXPECT_NEAR(mean, 50.0, 3.0 * std::sqrt(50.0 / 200.0));
}

TEST(Simulate, SelfExcitingStationaryRate) {
    const auto g = numbered_graph(1);
    const FeatureContext ctx(g, std::nullopt);
    // mu / (1 - alpha / gamma) = 1 / (1 - 0.5) = 2 per hour. The count variance
    // per unit time is mu / (1 - n)^3 = 8, so the rate has sd sqrt(8 / T).
    const double T = 20000.0;
    auto cfg = base_config(ctx, 1.0, T, 12);
    cfg.theta = {0.5, 0.0, 0.0, 0.0};
    const auto c = simulate(cfg);
    const double rate = double(c.size()) / T;
    EXPECT_NEAR(rate, 2.0, 3.0 * std::sqrt(8.0 / T) + 1.0 / T);
}

TEST(Simulate, ReplayIsBitIdentical) {
    SynthGraphParams gp;
    gp.nodes = 200;
    gp.edge_prob = 0.02;
    gp.cities = 3;
    gp.seed = 4;
    const auto g = synth_graph(gp);
    const FeatureContext ctx(g, everyone(g));
    auto cfg = base_config(ctx, 0.05, 50.0, 99);
    cfg.theta = {0.2, 0.06, 0.04, 0.02};
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    EXPECT_EQ(a.events, b.events);
    cfg.seed = 100;
    EXPECT_NE(simulate(cfg).events, a.events);
    for (auto mode : {ContagionMode::simple, ContagionMode::complex_threshold}) {
        cfg.mode = mode;
        EXPECT_EQ(simulate(cfg).events, simulate(cfg).events);
    }
}

TEST(Simulate, RejectsUnstableAndInvalidConfigs) {
    auto g = numbered_graph(2);
    g.add_edge(0, 1);
    const FeatureContext ctx(g, std::nullopt);
    auto cfg = base_config(ctx, 0.1, 10.0, 1);
    cfg.theta = {0.3, 0.8, 0.0, 0.0}; // pair: rho = 0.3 + 0.8 > 0.99
    try {
        (void)simulate(cfg);
        FAIL() << "expected rejection";
    } catch (const InfeasibleError& e) {
        EXPECT_NE(std::string(e.what()).find("branching"), std::string::npos);
    }
    cfg.enforce_stability = false;
    cfg.horizon = 5.0;
    EXPECT_NO_THROW((void)simulate(cfg));
    cfg.max_events = 3;
    cfg.horizon = 1000.0;
    EXPECT_THROW((void)simulate(cfg), InfeasibleError);

    auto bad = base_config(ctx, 0.1, 10.0, 1);
    bad.mu.pop_back();
    EXPECT_THROW((void)simulate(bad), ArgumentError);
    bad = base_config(ctx, 0.1, -1.0, 1);
    EXPECT_THROW((void)simulate(bad), ArgumentError);
    bad = base_config(ctx, 0.1, 10.0, 1);
    bad.theta[0] = -0.1;
    EXPECT_THROW((void)simulate(bad), ArgumentError);
}

TEST(Branching, BoundsBracketTheSpectralRadius) {
    // isolated pair, alpha = 0.3 self + 0.2 cross: eigenvalues 0.5 and 0.1
    auto g = numbered_graph(2);
    g.add_edge(0, 1);
    const FeatureContext ctx(g, std::nullopt);
    const auto r = branching_bound(ctx, {0.3, 0.2, 0.0, 0.0}, Kernel{});
    EXPECT_NEAR(r.spectral_upper, 0.5, 1e-12);
    EXPECT_NEAR(r.spectral_lower, 0.5, 1e-12);
    EXPECT_NEAR(r.max_incoming, 0.5, 1e-12);
    const auto slow = branching_bound(ctx, {0.3, 0.2, 0.0, 0.0}, Kernel{2.0, 24.0});
    EXPECT_NEAR(slow.spectral_upper, 0.25, 1e-12);

    // triangle, no cities, threshold above every edge's AA (1/ln2): only F1
    // and F2 fire, the matrix is regular and its radius is the row sum
    auto t = numbered_graph(3);
    t.add_edge(0, 1);
    t.add_edge(1, 2);
    t.add_edge(0, 2);
    const FeatureContext tctx(t, std::optional<double>{1.0 / std::log(2.0) + 1e-9});
    const auto tri = branching_bound(tctx, {0.3, 0.2, 0.4, 0.1}, Kernel{});
    EXPECT_NEAR(tri.spectral_upper, 0.3 + 2 * 0.2, 1e-9);
    EXPECT_LE(tri.spectral_lower, tri.spectral_upper);
}

TEST(Contagion, AdoptionProbabilityShapes) {
    ContagionParams p;
    p.adopt_prob = 0.1;
    p.boost = 2.0;
    p.threshold = 2;
    EXPECT_EQ(adoption_probability(p, ContagionMode::simple, 1), 0.1);
    EXPECT_EQ(adoption_probability(p, ContagionMode::simple, 5), 0.1);
    EXPECT_EQ(adoption_probability(p, ContagionMode::complex_threshold, 1), 0.1);
    EXPECT_DOUBLE_EQ(adoption_probability(p, ContagionMode::complex_threshold, 2), 0.2);
    EXPECT_DOUBLE_EQ(adoption_probability(p, ContagionMode::complex_threshold, 3), 0.4);
    EXPECT_EQ(adoption_probability(p, ContagionMode::complex_threshold, 10), 1.0);
    EXPECT_EQ(parse_contagion_mode("complex-threshold"), ContagionMode::complex_threshold);
    EXPECT_EQ(to_string(ContagionMode::simple), "simple");
    EXPECT_THROW((void)parse_contagion_mode("viral"), ConfigError);
}

TEST(Contagion, EachUserAdoptsAtMostOnce) {
    SynthGraphParams gp;
    gp.nodes = 300;
    gp.edge_prob = 0.03;
    gp.seed = 2;
    const auto g = synth_graph(gp);
    const FeatureContext ctx(g, std::nullopt);
    auto cfg = base_config(ctx, 0.0, 50.0, 5);
    cfg.mode = ContagionMode::complex_threshold;
    cfg.contagion.background_rate = 0.005;
    cfg.contagion.adopt_prob = 0.2;
    const auto c = simulate(cfg);
    ASSERT_FALSE(c.empty());
    EXPECT_EQ(c.adopters().size(), c.size());
    EXPECT_TRUE(std::is_sorted(c.events.begin(), c.events.end(),
                               [](const Event& a, const Event& b) { return a.time < b.time; }));
}

TEST(SynthGraph, ErdosRenyiWithoutEdges) {
    SynthGraphParams gp;
    gp.nodes = 100;
    gp.edge_prob = 0.0;
    const auto g = synth_graph(gp);
    EXPECT_EQ(g.node_count(), 100u);
    EXPECT_EQ(g.edge_count(), 0u);
    EXPECT_EQ(degree_distribution(g), (DegreeHistogram{{0, 100}}));
}

TEST(SynthGraph, PlantedCitiesWithinOnlyIsFullyAssortative) {
    SynthGraphParams gp;
    gp.kind = GraphKind::planted_cities;
    gp.nodes = 200;
    gp.cities = 4;
    gp.p_in = 0.1;
    gp.p_out = 0.0;
    const auto g = synth_graph(gp);
    ASSERT_GT(g.edge_count(), 0u);
    EXPECT_EQ(geo_assortativity(g), 1.0);

    gp.p_out = 0.1;
    const auto mixed = synth_graph(gp);
    // equal probabilities: same-city share approaches the share of same-city pairs
    const double pairs_in = 4.0 * (50.0 * 49.0 / 2.0);
    const double pairs_all = 200.0 * 199.0 / 2.0;
    EXPECT_NEAR(geo_assortativity(mixed), pairs_in / pairs_all, 0.03);
}

TEST(SynthGraph, EmbeddedCoreCliqueDyadsOutrankPeriphery) {
    SynthGraphParams gp;
    gp.kind = GraphKind::embedded_core;
    gp.nodes = 90;
    gp.core_size = 10;
    gp.periphery_per_core = 20;
    gp.cities = 2;
    gp.seed = 8;
    const auto g = synth_graph(gp);
    EXPECT_EQ(g.edge_count(), 3u * (45u + 20u));
    double min_core = std::numeric_limits<double>::infinity();
    double max_periphery = -1.0;
    for (auto [i, j] : g.edges()) {
        const bool core = (i % 30) < 10 && (j % 30) < 10;
        // brute-force AA over all k
        double aa = 0.0;
        for (UserId k = 0; k < g.node_count(); ++k) {
            if (k != i && k != j && g.has_edge(i, k) && g.has_edge(j, k)) {
                aa += 1.0 / std::log(double(g.degree(k)));
            }
        }
        EXPECT_NEAR(adamic_adar(g, i, j), aa, 1e-12);
        (core ? min_core : max_periphery) = core ? std::min(min_core, aa) : std::max(max_periphery, aa);
    }
    EXPECT_GT(min_core, max_periphery);
    EXPECT_THROW((void)synth_graph(SynthGraphParams{.kind = GraphKind::embedded_core, .core_size = 1}), ArgumentError);
    EXPECT_THROW((void)synth_graph(SynthGraphParams{.edge_prob = 1.5}), ArgumentError);
    EXPECT_THROW((void)synth_graph(SynthGraphParams{.kind = GraphKind::planted_cities}), ArgumentError);
    EXPECT_EQ(parse_graph_kind("planted-cities"), GraphKind::planted_cities);
    EXPECT_THROW((void)parse_graph_kind("lattice"), ConfigError);
}

TEST(SimulateDiagnostics, BinnedCountsMatchCompensator) {
    SynthGraphParams gp;
    gp.nodes = 400;
    gp.edge_prob = 0.01;
    gp.cities = 2;
    gp.seed = 6;
    const auto g = synth_graph(gp);
    const FeatureContext ctx(g, everyone(g));
    auto cfg = base_config(ctx, 0.01, 500.0, 3);
    cfg.theta = {0.3, 0.06, 0.05, 0.03};
    const auto c = simulate(cfg);
    ASSERT_GT(c.size(), 1000u);
    const auto expected = expected_bin_counts(c, ctx, cfg.theta, cfg.mu, cfg.kernel, 5.0);
    ASSERT_EQ(expected.size(), 100u);
    std::vector<double> observed(expected.size(), 0.0);
    for (const auto& e : c.events) {
        observed[std::min<std::size_t>(expected.size() - 1, std::size_t(e.time / 5.0))] += 1.0;
    }
    std::size_t outside = 0;
    double total_obs = 0.0;
    double total_exp = 0.0;
    for (std::size_t b = 0; b < expected.size(); ++b) {
        outside += std::abs(observed[b] - expected[b]) > 3.0 * std::sqrt(expected[b]) ? 1 : 0;
        total_obs += observed[b];
        total_exp += expected[b];
    }
    // 3-sigma bins: 0.3% expected outside; allow a few
    EXPECT_LE(outside, 3u);
    EXPECT_NEAR(total_obs, total_exp, 3.0 * std::sqrt(total_exp));
}

TEST(SimulateDiagnostics, TimeRescalingGivesUnitExponentials) {
    SynthGraphParams gp;
    gp.nodes = 1000;
    gp.edge_prob = 0.004;
    gp.cities = 4;
    gp.seed = 10;
    const auto g = synth_graph(gp);
    const FeatureContext ctx(g, everyone(g));
    auto cfg = base_config(ctx, 0.02, 600.0, 17);
    cfg.theta = {0.25, 0.07, 0.05, 0.05};
    const auto c = simulate(cfg);
    ASSERT_GE(c.size(), 10000u);
    const auto iv = time_rescaled_intervals(c, ctx, cfg.theta, cfg.mu, cfg.kernel);
    ASSERT_EQ(iv.size(), c.size());
    EXPECT_GT(ks_exponential(iv).p_value, 0.01);
    // the wrong parameters are detected
    auto wrong = cfg.theta;
    wrong[0] = 0.0;
    EXPECT_LT(ks_exponential(time_rescaled_intervals(c, ctx, wrong, cfg.mu, cfg.kernel)).p_value, 0.01);
}
