#include "tiehawkes/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "text_io.hpp"
#include "tiehawkes/errors.hpp"
#include "tiehawkes/parallel.hpp"
#include "tiehawkes/percentile.hpp"

namespace tiehawkes {

std::vector<UserId> Cascade::adopters() const {
    std::vector<UserId> out;
    out.reserve(events.size());
    for (const auto& e : events) {
        out.push_back(e.user);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::map<UserId, double> Cascade::adoption_times() const {
    std::map<UserId, double> first;
    for (const auto& e : events) {
        first.try_emplace(e.user, e.time);
    }
    return first;
}

void Cascade::normalize() {
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
    for (const auto& e : events) {
        if (!std::isfinite(e.time) || e.time < 0.0 || e.time > horizon) {
            throw ArgumentError("event time outside [0, horizon] in cascade '" + word + "'");
        }
    }
}

namespace {

void finish_horizon(Cascade& c, std::optional<double> horizon_hours) {
    const double last = c.events.empty() ? 0.0 : c.events.back().time;
    if (horizon_hours) {
        if (!(*horizon_hours >= last) || !std::isfinite(*horizon_hours)) {
            throw ConfigError("horizon " + std::to_string(*horizon_hours) +
                              "h ends before the last event of '" + c.word + "'");
        }
        c.horizon = *horizon_hours;
    } else {
        c.horizon = last;
    }
}

} // namespace

CascadeSet ingest_events(const std::filesystem::path& path, SocialGraph& graph,
                         std::optional<double> horizon_hours) {
    struct Raw {
        double seconds;
        UserId user;
    };
    std::map<std::string, std::vector<Raw>> raw;
    detail::for_each_data_line(path, [&](std::string_view line, std::size_t lineno) {
        const auto f = detail::split_tabs(line);
        if (f.size() != 3) {
            detail::parse_fail(path, lineno, "expected word<TAB>user<TAB>epoch_seconds");
        }
        const auto word = detail::trim(f[0]);
        const auto user = detail::trim(f[1]);
        double secs = 0.0;
        if (word.empty() || user.empty()) {
            detail::parse_fail(path, lineno, "empty word or user");
        }
        if (!detail::parse_double(f[2], secs) || !std::isfinite(secs)) {
            detail::parse_fail(path, lineno, "bad timestamp");
        }
        raw[std::string(word)].push_back(Raw{secs, graph.add_user(user)});
    });

    CascadeSet out;
    for (auto& [word, rows] : raw) {
        double s0 = rows.front().seconds;
        for (const auto& r : rows) {
            s0 = std::min(s0, r.seconds);
        }
        Cascade c;
        c.word = word;
        c.origin_hours = s0 / 3600.0;
        c.events.reserve(rows.size());
        for (const auto& r : rows) {
            c.events.push_back(Event{r.user, (r.seconds - s0) / 3600.0});
        }
        std::stable_sort(c.events.begin(), c.events.end(),
                         [](const Event& a, const Event& b) { return a.time < b.time; });
        finish_horizon(c, horizon_hours);
        out.emplace(word, std::move(c));
    }
    return out;
}

void quantize_to_seconds(Cascade& cascade, std::optional<double> horizon_hours) {
    if (cascade.events.empty()) {
        finish_horizon(cascade, horizon_hours);
        return;
    }
    std::vector<long long> secs;
    secs.reserve(cascade.events.size());
    for (const auto& e : cascade.events) {
        secs.push_back(std::llround((cascade.origin_hours + e.time) * 3600.0));
    }
    const long long s0 = *std::min_element(secs.begin(), secs.end());
    const double s0d = static_cast<double>(s0);
    for (std::size_t n = 0; n < secs.size(); ++n) {
        cascade.events[n].time = (static_cast<double>(secs[n]) - s0d) / 3600.0;
    }
    cascade.origin_hours = s0d / 3600.0;
    std::stable_sort(cascade.events.begin(), cascade.events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
    finish_horizon(cascade, horizon_hours);
}

void write_events(const std::filesystem::path& path, const CascadeSet& cascades, const SocialGraph& graph) {
    auto out = detail::open_out(path);
    for (const auto& [word, c] : cascades) {
        for (const auto& e : c.events) {
            out << word << '\t' << graph.name(e.user) << '\t'
                << std::llround((c.origin_hours + e.time) * 3600.0) << '\n';
        }
    }
}

std::vector<ExposureRecord> exposures(const Cascade& cascade, const SocialGraph& graph) {
    const auto adoption = cascade.adoption_times();
    std::map<UserId, ExposureRecord> records;
    std::unordered_set<std::uint64_t> seen;
    for (const auto& e : cascade.events) {
        if (e.time > cascade.horizon) {
            break;
        }
        for (const auto& nb : graph.neighbors(e.user)) {
            if (!(nb.formed_at - cascade.origin_hours < e.time)) {
                continue;
            }
            const auto adopted = adoption.find(nb.id);
            if (adopted != adoption.end() && !(e.time < adopted->second)) {
                continue;
            }
            const std::uint64_t key = (static_cast<std::uint64_t>(nb.id) << 32) | e.user;
            if (!seen.insert(key).second) {
                continue;
            }
            auto& rec = records[nb.id];
            if (rec.exposers.empty()) {
                rec.target = nb.id;
                if (adopted != adoption.end()) {
                    rec.adoption = adopted->second;
                }
            }
            rec.exposers.push_back(Exposure{e.user, e.time});
        }
    }
    std::vector<ExposureRecord> out;
    out.reserve(records.size());
    for (auto& [_, rec] : records) {
        out.push_back(std::move(rec));
    }
    return out;
}

std::optional<double> BucketCount::risk() const {
    if (at_risk == 0) {
        return std::nullopt;
    }
    return static_cast<double>(infected) / static_cast<double>(at_risk);
}

RiskCounts infection_risk(std::span<const ExposureRecord> records) {
    RiskCounts counts{};
    for (const auto& rec : records) {
        std::size_t k = 0;
        for (const auto& x : rec.exposers) {
            if (!rec.adoption || x.time < *rec.adoption) {
                ++k;
            }
        }
        if (k == 0) {
            continue;
        }
        const std::size_t reached = std::min(k, kRiskBuckets);
        for (std::size_t b = 0; b < reached; ++b) {
            ++counts[b].at_risk;
        }
        if (rec.adoption) {
            ++counts[reached - 1].infected;
        }
    }
    return counts;
}

namespace {

// Same counts as infection_risk(exposures(c, g)) for time-sorted events,
// without materializing exposure records. A neighbor u exposes v at most
// once, at u's first event after the edge formed, if that precedes v's
// adoption.
RiskCounts count_risk(const Cascade& c, const SocialGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::size_t> offset(n + 1, 0);
    for (const auto& e : c.events) {
        ++offset[e.user + 1];
    }
    for (std::size_t v = 0; v < n; ++v) {
        offset[v + 1] += offset[v];
    }
    std::vector<double> times(c.events.size());
    std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
    for (const auto& e : c.events) {
        times[fill[e.user]++] = e.time;
    }
    const auto adoption = [&](UserId v) {
        return offset[v] < offset[v + 1] ? times[offset[v]] : std::numeric_limits<double>::infinity();
    };

    std::vector<std::uint32_t> exposed(n, 0);
    std::vector<UserId> touched;
    for (UserId u = 0; u < n; ++u) {
        if (offset[u] == offset[u + 1]) {
            continue;
        }
        const auto first = times.begin() + static_cast<std::ptrdiff_t>(offset[u]);
        const auto last = times.begin() + static_cast<std::ptrdiff_t>(offset[u + 1]);
        for (const auto& nb : g.neighbors(u)) {
            const double formed = nb.formed_at - c.origin_hours;
            const auto it = formed == -std::numeric_limits<double>::infinity() ? first
                                                                              : std::upper_bound(first, last, formed);
            if (it == last || *it > c.horizon || !(*it < adoption(nb.id))) {
                continue;
            }
            if (exposed[nb.id]++ == 0) {
                touched.push_back(nb.id);
            }
        }
    }

    RiskCounts counts{};
    for (UserId v : touched) {
        const std::size_t reached = std::min<std::size_t>(exposed[v], kRiskBuckets);
        for (std::size_t b = 0; b < reached; ++b) {
            ++counts[b].at_risk;
        }
        if (offset[v] < offset[v + 1]) {
            ++counts[reached - 1].infected;
        }
    }
    return counts;
}

} // namespace

RiskCounts permuted_risk(const Cascade& cascade, const SocialGraph& graph, std::span<const std::size_t> perm) {
    if (perm.size() != cascade.size()) {
        throw ArgumentError("permutation length does not match the cascade");
    }
    Cascade shuffled;
    shuffled.word = cascade.word;
    shuffled.horizon = cascade.horizon;
    shuffled.origin_hours = cascade.origin_hours;
    shuffled.events.reserve(cascade.size());
    for (std::size_t n = 0; n < cascade.size(); ++n) {
        shuffled.events.push_back(Event{cascade.events[n].user, cascade.events[perm[n]].time});
    }
    std::stable_sort(shuffled.events.begin(), shuffled.events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
    return count_risk(shuffled, graph);
}

std::optional<double> risk_ratio(double observed, double null_risk) {
    if (null_risk > 0.0) {
        return observed / null_risk;
    }
    if (observed == 0.0) {
        return 1.0;
    }
    return std::nullopt;
}

bool RiskReport::empty() const {
    return std::all_of(buckets.begin(), buckets.end(), [](const BucketRisk& b) { return b.at_risk == 0; });
}

namespace {

// The point ratio is reported even when it falls outside the sample
// percentiles; the interval is stretched to contain it.
void set_interval(std::vector<double> samples, double point, std::optional<double>& lo,
                  std::optional<double>& hi) {
    if (samples.empty()) {
        lo = point;
        hi = point;
        return;
    }
    std::sort(samples.begin(), samples.end());
    lo = std::min(point, nearest_rank_sorted(samples, 2.5));
    hi = std::max(point, nearest_rank_sorted(samples, 97.5));
}

} // namespace

RiskReport shuffle_test(const Cascade& cascade, const SocialGraph& graph, const ShuffleConfig& config) {
    if (config.permutations == 0) {
        throw ArgumentError("shuffle test needs at least one permutation");
    }
    RiskReport report;
    report.word = cascade.word;
    report.permutations = config.permutations;
    report.seed = config.seed;

    const RiskCounts observed = count_risk(cascade, graph);
    std::vector<RiskCounts> null(config.permutations);
    const bool any_exposed = std::any_of(observed.begin(), observed.end(),
                                         [](const BucketCount& b) { return b.at_risk > 0; });
    if (any_exposed) {
        parallel_for(config.permutations, config.workers, [&](std::size_t p) {
            auto rng = stream_rng(config.seed, p);
            std::vector<std::size_t> perm(cascade.size());
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            null[p] = permuted_risk(cascade, graph, perm);
        });
    }

    for (std::size_t b = 0; b < kRiskBuckets; ++b) {
        auto& out = report.buckets[b];
        out.at_risk = observed[b].at_risk;
        out.infected = observed[b].infected;
        out.observed = observed[b].risk();
        if (!out.observed) {
            continue;
        }
        for (const auto& counts : null) {
            if (auto r = counts[b].risk()) {
                out.null_risks.push_back(*r);
                if (auto s = risk_ratio(*out.observed, *r)) {
                    out.ratio_samples.push_back(*s);
                }
            }
        }
        if (out.null_risks.empty()) {
            continue;
        }
        out.null_mean = std::accumulate(out.null_risks.begin(), out.null_risks.end(), 0.0) /
                        static_cast<double>(out.null_risks.size());
        out.ratio = risk_ratio(*out.observed, *out.null_mean);
        if (out.ratio) {
            set_interval(out.ratio_samples, *out.ratio, out.ci_lo, out.ci_hi);
        }
    }
    return report;
}

std::vector<ClassRisk> aggregate_risk(std::span<const RiskReport> reports,
                                      const std::map<std::string, std::string>& classes) {
    std::map<std::string, std::vector<const RiskReport*>> grouped;
    for (const auto& r : reports) {
        auto it = classes.find(r.word);
        grouped[it == classes.end() ? std::string("unclassified") : it->second].push_back(&r);
    }
    std::vector<ClassRisk> out;
    for (const auto& [label, members] : grouped) {
        ClassRisk cls;
        cls.label = label;
        for (const auto* r : members) {
            cls.words.push_back(r->word);
        }
        bool any = false;
        for (std::size_t b = 0; b < kRiskBuckets; ++b) {
            auto& pooled = cls.buckets[b];
            double ratio_sum = 0.0;
            std::vector<double> samples;
            for (const auto* r : members) {
                const auto& wb = r->buckets[b];
                if (!wb.ratio) {
                    continue;
                }
                ++pooled.words;
                ratio_sum += *wb.ratio;
                samples.insert(samples.end(), wb.ratio_samples.begin(), wb.ratio_samples.end());
            }
            if (pooled.words == 0) {
                continue;
            }
            any = true;
            pooled.samples = samples.size();
            pooled.ratio = ratio_sum / static_cast<double>(pooled.words);
            set_interval(std::move(samples), *pooled.ratio, pooled.ci_lo, pooled.ci_hi);
        }
        if (any) {
            out.push_back(std::move(cls));
        }
    }
    return out;
}

std::map<std::string, std::string> load_word_classes(const std::filesystem::path& path) {
    std::map<std::string, std::string> out;
    detail::for_each_data_line(path, [&](std::string_view line, std::size_t lineno) {
        const auto f = detail::split_tabs(line);
        if (f.size() != 2 || detail::trim(f[0]).empty() || detail::trim(f[1]).empty()) {
            detail::parse_fail(path, lineno, "expected word<TAB>class");
        }
        out[std::string(detail::trim(f[0]))] = std::string(detail::trim(f[1]));
    });
    return out;
}

} // namespace tiehawkes
