#include "tiehawkes/report.hpp"

#include "text_io.hpp"

namespace tiehawkes {

namespace {

Json opt(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

std::string na(const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string("NA");
}

std::string bucket_label(std::size_t b) {
    return b + 1 == kRiskBuckets ? std::to_string(b + 1) + "+" : std::to_string(b + 1);
}

Json theta_json(const ThetaVector& theta, const ModelSpec& spec) {
    Json out = Json::object();
    for (auto f : kAllFeatures) {
        if (spec.contains(f)) {
            out[std::string(feature_name(f))] = theta[static_cast<std::size_t>(f)];
        }
    }
    return out;
}

} // namespace

Json config_json(const RunConfig& config) {
    Json out = Json::object();
    for (const auto& [k, v] : config_entries(config)) {
        // where and how fast a run executes does not change its results
        if (k != "workers" && k != "out_dir") {
            out[k] = v;
        }
    }
    return out;
}

Json to_json(const RiskReport& report) {
    Json buckets = Json::array();
    for (std::size_t b = 0; b < kRiskBuckets; ++b) {
        const auto& r = report.buckets[b];
        buckets.push_back(Json{
            {"bucket", bucket_label(b)},
            {"at_risk", r.at_risk},
            {"infected", r.infected},
            {"risk", opt(r.observed)},
            {"null_mean", opt(r.null_mean)},
            {"ratio", opt(r.ratio)},
            {"ci_lo", opt(r.ci_lo)},
            {"ci_hi", opt(r.ci_hi)},
        });
    }
    return Json{
        {"word", report.word},
        {"status", report.empty() ? "not-available" : "ok"},
        {"permutations", report.permutations},
        {"seed", report.seed},
        {"buckets", std::move(buckets)},
    };
}

Json to_json(const ClassRisk& risk) {
    Json buckets = Json::array();
    for (std::size_t b = 0; b < kRiskBuckets; ++b) {
        const auto& p = risk.buckets[b];
        buckets.push_back(Json{
            {"bucket", bucket_label(b)},
            {"words", p.words},
            {"samples", p.samples},
            {"ratio", opt(p.ratio)},
            {"ci_lo", opt(p.ci_lo)},
            {"ci_hi", opt(p.ci_hi)},
        });
    }
    return Json{{"class", risk.label}, {"words", risk.words}, {"buckets", std::move(buckets)}};
}

Json to_json(const FitResult& fit) {
    Json mu = Json::array();
    for (std::size_t s = 0; s < fit.params.users.size(); ++s) {
        mu.push_back(fit.params.mu[s]);
    }
    return Json{
        {"spec", fit.spec.name()},
        {"theta", theta_json(fit.params.theta, fit.spec)},
        {"loglik", fit.loglik},
        {"events", fit.events},
        {"adopters", fit.params.users.size()},
        {"iterations", fit.iterations},
        {"converged", fit.converged},
        {"gamma_per_hour", fit.kernel.gamma},
        {"tau_star_hours", fit.kernel.tau_star},
        {"tol_abs", fit.config.tol_abs},
        {"max_iterations", fit.config.max_iterations},
        {"mu", std::move(mu)},
        {"trace", fit.trace},
    };
}

Json to_json(const WordFit& fit) {
    Json out{
        {"word", fit.word},
        {"events", fit.events},
        {"aa_threshold", opt(fit.aa_threshold)},
        {"pool_size", fit.pool_size},
    };
    if (fit.fit) {
        out["fit"] = to_json(*fit.fit);
    }
    if (fit.error) {
        out["error"] = *fit.error;
    }
    return out;
}

Json to_json(const CompareReport& report) {
    Json entries = Json::array();
    for (const auto& e : report.entries) {
        Json j{
            {"word", e.word},
            {"feature", std::string(feature_name(e.feature))},
            {"events", e.events},
            {"aa_threshold", opt(e.aa_threshold)},
            {"pool_size", e.pool_size},
        };
        if (e.error) {
            j["error"] = *e.error;
        } else {
            j["ll_base"] = e.ll_base;
            j["ll_full"] = e.ll_full;
            j["lr_stat"] = e.test.statistic;
            j["lr_raw"] = e.test.raw_statistic;
            j["p"] = e.test.p_value;
            j["optimization_failure"] = e.test.optimization_failure;
            j["bh_reject"] = e.reject;
        }
        entries.push_back(std::move(j));
    }
    return Json{
        {"base_spec", report.base_spec.name()},
        {"alpha", report.alpha},
        {"tests", report.tests},
        {"p_threshold", report.p_threshold},
        {"ll_threshold", report.ll_threshold},
        {"entries", std::move(entries)},
    };
}

void write_json(const std::filesystem::path& path, const Json& doc) {
    auto out = detail::open_out(path);
    out << doc.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_degree_tsv(const std::filesystem::path& path, const DegreeHistogram& hist) {
    auto out = detail::open_out(path);
    out << "degree\tcount\n";
    for (const auto& [d, n] : hist) {
        out << d << '\t' << n << '\n';
    }
}

void write_risk_words_tsv(const std::filesystem::path& path, std::span<const RiskReport> reports,
                          const std::map<std::string, std::string>& classes) {
    auto out = detail::open_out(path);
    out << "word\tclass\tbucket\tat_risk\tinfected\trisk\tnull_mean\tratio\tci_lo\tci_hi\n";
    for (const auto& r : reports) {
        auto it = classes.find(r.word);
        const std::string cls = it == classes.end() ? "unclassified" : it->second;
        for (std::size_t b = 0; b < kRiskBuckets; ++b) {
            const auto& k = r.buckets[b];
            out << r.word << '\t' << cls << '\t' << bucket_label(b) << '\t' << k.at_risk << '\t' << k.infected
                << '\t' << na(k.observed) << '\t' << na(k.null_mean) << '\t' << na(k.ratio) << '\t'
                << na(k.ci_lo) << '\t' << na(k.ci_hi) << '\n';
        }
    }
}

void write_risk_classes_tsv(const std::filesystem::path& path, std::span<const ClassRisk> classes) {
    auto out = detail::open_out(path);
    out << "class\tbucket\twords\tsamples\tratio\tci_lo\tci_hi\n";
    for (const auto& c : classes) {
        for (std::size_t b = 0; b < kRiskBuckets; ++b) {
            const auto& p = c.buckets[b];
            out << c.label << '\t' << bucket_label(b) << '\t' << p.words << '\t' << p.samples << '\t'
                << na(p.ratio) << '\t' << na(p.ci_lo) << '\t' << na(p.ci_hi) << '\n';
        }
    }
}

void write_fit_tsv(const std::filesystem::path& path, std::span<const WordFit> fits) {
    auto out = detail::open_out(path);
    out << "word\tN\tspec\tF1\tF2\tF3\tF4\tloglik\titerations\tconverged\n";
    for (const auto& w : fits) {
        out << w.word << '\t' << w.events << '\t';
        if (!w.fit) {
            out << "NA\tNA\tNA\tNA\tNA\tNA\tNA\tNA\n";
            continue;
        }
        const auto& f = *w.fit;
        out << f.spec.name();
        for (auto feat : kAllFeatures) {
            out << '\t'
                << (f.spec.contains(feat) ? detail::format_double(f.params.theta[static_cast<std::size_t>(feat)])
                                          : std::string("NA"));
        }
        out << '\t' << detail::format_double(f.loglik) << '\t' << f.iterations << '\t'
            << (f.converged ? "true" : "false") << '\n';
    }
}

void write_threshold_tsv(const std::filesystem::path& path, std::span<const WordFit> fits) {
    auto out = detail::open_out(path);
    out << "word\taa_threshold\tpool_size\n";
    for (const auto& w : fits) {
        out << w.word << '\t' << na(w.aa_threshold) << '\t' << w.pool_size << '\n';
    }
}

void write_compare_tsv(const std::filesystem::path& path, const CompareReport& report) {
    auto out = detail::open_out(path);
    out << "word\tfeature\tN\tll_base\tll_full\tlr_stat\tp\tbh_reject\n";
    for (const auto& e : report.entries) {
        out << e.word << '\t' << feature_name(e.feature) << '\t' << e.events << '\t';
        if (e.error) {
            out << "NA\tNA\tNA\tNA\tNA\n";
            continue;
        }
        out << detail::format_double(e.ll_base) << '\t' << detail::format_double(e.ll_full) << '\t'
            << detail::format_double(e.test.statistic) << '\t' << detail::format_double(e.test.p_value) << '\t'
            << (e.reject ? "true" : "false") << '\n';
    }
}

void write_compare_plot_tsv(const std::filesystem::path& path, const CompareReport& report) {
    auto out = detail::open_out(path);
    out << "word\tfeature\tN\tll_improvement\tll_threshold\n";
    for (const auto& e : report.entries) {
        if (e.error) {
            continue;
        }
        out << e.word << '\t' << feature_name(e.feature) << '\t' << e.events << '\t'
            << detail::format_double(e.ll_full - e.ll_base) << '\t' << detail::format_double(report.ll_threshold)
            << '\n';
    }
}

} // namespace tiehawkes
