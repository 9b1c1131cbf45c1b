#include "tiehawkes/commands.hpp"

#include <filesystem>

#include "text_io.hpp"
#include "tiehawkes/errors.hpp"
#include "tiehawkes/features.hpp"
#include "tiehawkes/parallel.hpp"
#include "tiehawkes/simulate.hpp"
#include "tiehawkes/stats.hpp"

namespace tiehawkes {

namespace fs = std::filesystem;

namespace {

fs::path prepare_out(const RunConfig& config) {
    const fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    return dir;
}

void require_path(const std::string& value, const char* key) {
    if (value.empty()) {
        throw ConfigError(std::string("config key '") + key + "' is required for this command");
    }
}

Json envelope(const RunConfig& config, const char* command) {
    return Json{{"command", command}, {"seed", config.seed}, {"config", config_json(config)}};
}

} // namespace

Kernel kernel_of(const RunConfig& config) {
    Kernel k{config.gamma_per_hour, config.tau_star_hours};
    k.validate();
    return k;
}

FitConfig fit_config_of(const RunConfig& config) {
    FitConfig f;
    f.tol_abs = config.tol_abs;
    f.max_iterations = config.max_iterations;
    f.theta_init = config.theta_init;
    f.workers = 1;
    return f;
}

std::uint64_t word_seed(std::uint64_t seed, std::string_view word) {
    return splitmix64(seed ^ stable_hash(word));
}

SocialGraph load_graph(const RunConfig& config, std::ostream& log) {
    require_path(config.edges, "edges");
    SocialGraph g;
    load_edges(config.edges, g);
    if (g.edge_count() == 0) {
        log << "warning: no edges in " << config.edges << '\n';
    }
    if (!config.cities.empty()) {
        load_cities(config.cities, g);
    }
    g.set_tracked_cities(config.tracked_cities);
    return g;
}

CascadeSet load_cascades(const RunConfig& config, SocialGraph& graph) {
    require_path(config.events, "events");
    return ingest_events(config.events, graph, config.horizon_hours);
}

std::vector<WordFit> fit_words(const CascadeSet& cascades, const SocialGraph& graph, const ModelSpec& spec,
                               const RunConfig& config) {
    std::vector<const Cascade*> words;
    for (const auto& [_, c] : cascades) {
        words.push_back(&c);
    }
    const Kernel kernel = kernel_of(config);
    const FitConfig fc = fit_config_of(config);
    std::vector<WordFit> out(words.size());
    parallel_for(words.size(), config.workers, [&](std::size_t w) {
        const Cascade& c = *words[w];
        auto& r = out[w];
        r.word = c.word;
        r.events = c.size();
        try {
            const auto adopters = c.adopters();
            const FeatureContext ctx(graph, adopters, config.tie_percentile);
            r.aa_threshold = ctx.aa_threshold();
            r.pool_size = ctx.pool_size();
            r.fit = fit(c, ctx, spec, kernel, fc);
        } catch (const Error& e) {
            r.error = e.what();
        }
    });
    return out;
}

void run_net_stats(const RunConfig& config, std::ostream& log) {
    const SocialGraph g = load_graph(config, log);
    const auto dir = prepare_out(config);
    write_degree_tsv(dir / "degree_histogram.tsv", degree_distribution(g));

    const auto counts = geo_assortativity_counts(g);
    Json doc = envelope(config, "net-stats");
    doc["nodes"] = g.node_count();
    doc["edges"] = g.edge_count();
    doc["max_degree"] = g.max_degree();
    doc["qualifying_edges"] = counts.qualifying_edges;
    doc["same_city_edges"] = counts.same_city_edges;
    doc["assortativity"] = counts.qualifying_edges > 0 ? Json(counts.fraction()) : Json(nullptr);
    if (counts.qualifying_edges == 0) {
        log << "warning: no edge joins two tracked-city users; assortativity not available\n";
    }
    write_json(dir / "assortativity.json", doc);
}

void run_risk(const RunConfig& config, std::ostream& log) {
    SocialGraph g = load_graph(config, log);
    const CascadeSet cascades = load_cascades(config, g);
    const auto classes = config.classes.empty() ? std::map<std::string, std::string>{}
                                                : load_word_classes(config.classes);
    const auto dir = prepare_out(config);

    std::vector<RiskReport> reports;
    for (const auto& [word, c] : cascades) {
        ShuffleConfig sc{config.permutations, word_seed(config.seed, word), config.workers};
        reports.push_back(shuffle_test(c, g, sc));
        if (reports.back().empty()) {
            log << "warning: word '" << word << "' has no exposures; risk not available\n";
        }
    }
    const auto pooled = aggregate_risk(reports, classes);

    write_risk_words_tsv(dir / "risk_words.tsv", reports, classes);
    write_risk_classes_tsv(dir / "risk_classes.tsv", pooled);
    Json doc = envelope(config, "risk");
    Json words = Json::array();
    for (const auto& r : reports) {
        words.push_back(to_json(r));
    }
    Json cls = Json::array();
    for (const auto& c : pooled) {
        cls.push_back(to_json(c));
    }
    doc["words"] = std::move(words);
    doc["classes"] = std::move(cls);
    write_json(dir / "risk.json", doc);
}

void run_fit(const RunConfig& config, std::ostream& log) {
    SocialGraph g = load_graph(config, log);
    const CascadeSet cascades = load_cascades(config, g);
    const ModelSpec spec = ModelSpec::parse(config.fit_spec);
    const auto dir = prepare_out(config);

    const auto fits = fit_words(cascades, g, spec, config);
    std::size_t failed = 0;
    for (const auto& w : fits) {
        if (w.error) {
            ++failed;
            log << "warning: fit failed for '" << w.word << "': " << *w.error << '\n';
        }
    }
    write_fit_tsv(dir / "fit.tsv", fits);
    write_threshold_tsv(dir / "thresholds.tsv", fits);
    Json doc = envelope(config, "fit");
    doc["spec"] = spec.name();
    Json words = Json::array();
    for (const auto& w : fits) {
        words.push_back(to_json(w));
    }
    doc["words"] = std::move(words);
    write_json(dir / "fit.json", doc);
    if (!fits.empty() && failed == fits.size()) {
        throw InfeasibleError("no word could be fitted");
    }
}

void run_compare(const RunConfig& config, std::ostream& log) {
    SocialGraph g = load_graph(config, log);
    const CascadeSet cascades = load_cascades(config, g);
    CompareConfig cc;
    cc.base_spec = ModelSpec::parse(config.base_spec);
    cc.added.clear();
    for (const auto& name : config.added_features) {
        cc.added.push_back(parse_feature(name));
    }
    cc.alpha = config.alpha;
    cc.tie_percentile = config.tie_percentile;
    cc.kernel = kernel_of(config);
    cc.fit = fit_config_of(config);
    cc.workers = config.workers;
    const auto dir = prepare_out(config);

    const CompareReport report = compare_pipeline(cascades, g, cc);
    for (const auto& e : report.entries) {
        if (e.error) {
            log << "warning: '" << e.word << "' " << feature_name(e.feature) << ": " << *e.error << '\n';
        } else if (e.test.optimization_failure) {
            log << "warning: '" << e.word << "' " << feature_name(e.feature)
                << ": negative likelihood ratio, nested fit did not converge\n";
        }
    }
    write_compare_tsv(dir / "compare.tsv", report);
    write_compare_plot_tsv(dir / "compare_plot.tsv", report);
    Json doc = envelope(config, "compare");
    doc["report"] = to_json(report);
    write_json(dir / "compare.json", doc);
}

void run_simulate(const RunConfig& config, std::ostream& log) {
    SynthGraphParams gp;
    gp.kind = parse_graph_kind(config.sim_graph);
    gp.nodes = config.sim_nodes;
    gp.edge_prob = config.sim_edge_prob;
    gp.cities = config.sim_cities;
    gp.p_in = config.sim_p_in;
    gp.p_out = config.sim_p_out;
    gp.core_size = config.sim_core_size;
    gp.periphery_per_core = config.sim_periphery_per_core;
    gp.city_assortativity = config.sim_city_assortativity;
    gp.seed = config.seed;
    const SocialGraph g = synth_graph(gp);

    std::vector<UserId> everyone(g.node_count());
    for (UserId i = 0; i < everyone.size(); ++i) {
        everyone[i] = i;
    }
    const FeatureContext ctx(g, everyone, config.tie_percentile);
    ThetaVector theta{};
    std::copy(config.sim_theta.begin(), config.sim_theta.end(), theta.begin());
    const ContagionMode mode = parse_contagion_mode(config.sim_mode);
    const Kernel kernel = kernel_of(config);
    const std::vector<double> mu(g.node_count(), config.sim_mu_per_hour);
    const auto dir = prepare_out(config);

    std::vector<Cascade> sims(config.sim_words);
    const std::size_t width = std::to_string(config.sim_words - 1).size();
    parallel_for(config.sim_words, config.workers, [&](std::size_t w) {
        std::string word = std::to_string(w);
        word = "sim" + std::string(width - word.size(), '0') + word;
        SimConfig sc{
            .features = ctx,
            .theta = theta,
            .mu = mu,
            .kernel = kernel,
            .horizon = config.sim_horizon_hours,
            .seed = word_seed(config.seed, word),
            .word = word,
            .mode = mode,
            .contagion = {config.sim_background_rate_per_hour, config.sim_adopt_prob, config.sim_boost,
                          config.sim_threshold, config.sim_delay_rate_per_hour},
            .enforce_stability = config.sim_enforce_stability,
            .max_branching = config.sim_max_branching,
            .max_events = config.sim_max_events,
        };
        sims[w] = simulate(sc);
        quantize_to_seconds(sims[w]);
    });

    CascadeSet set;
    Json words = Json::array();
    for (auto& c : sims) {
        if (c.empty()) {
            log << "warning: simulated word '" << c.word << "' has no events and is not written\n";
        }
        words.push_back(Json{{"word", c.word}, {"events", c.size()}, {"adopters", c.adopters().size()},
                             {"horizon_hours", c.horizon}});
        if (!c.empty()) {
            set.emplace(c.word, std::move(c));
        }
    }

    write_edges(dir / "edges.tsv", g);
    write_cities(dir / "cities.tsv", g);
    write_events(dir / "events.tsv", set, g);

    Json doc = envelope(config, "simulate");
    doc["nodes"] = g.node_count();
    doc["edges"] = g.edge_count();
    doc["aa_threshold"] = ctx.aa_threshold() ? Json(*ctx.aa_threshold()) : Json(nullptr);
    if (mode == ContagionMode::hawkes) {
        const auto b = branching_bound(ctx, theta, kernel);
        doc["branching"] = Json{{"max_incoming", b.max_incoming},
                                {"spectral_lower", b.spectral_lower},
                                {"spectral_upper", b.spectral_upper}};
    }
    doc["words"] = std::move(words);
    write_json(dir / "simulate.json", doc);

    RunConfig follow = config;
    follow.edges = (dir / "edges.tsv").string();
    follow.cities = (dir / "cities.tsv").string();
    follow.events = (dir / "events.tsv").string();
    follow.tracked_cities.clear();
    for (CityId c = 0; c < g.city_count(); ++c) {
        if (g.city_info(c).tracked) {
            follow.tracked_cities.push_back(g.city_info(c).label);
        }
    }
    auto out = detail::open_out(dir / "run.conf");
    out << "# analysis config for the simulated data\n" << render_config(follow);
}

} // namespace tiehawkes
