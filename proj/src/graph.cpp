#include "tiehawkes/graph.hpp"

#include <algorithm>
#include <cmath>

#include "text_io.hpp"
#include "tiehawkes/errors.hpp"
#include "tiehawkes/percentile.hpp"

namespace tiehawkes {

namespace {

auto neighbor_less = [](const Neighbor& n, UserId id) { return n.id < id; };

} // namespace

UserId SocialGraph::add_user(std::string_view name) {
    std::string key(name);
    if (auto it = index_.find(key); it != index_.end()) {
        return it->second;
    }
    const auto id = static_cast<UserId>(adj_.size());
    adj_.emplace_back();
    names_.push_back(key);
    user_city_.emplace_back();
    index_.emplace(std::move(key), id);
    return id;
}

std::optional<UserId> SocialGraph::find_user(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

UserId SocialGraph::user(std::string_view name) const {
    if (auto id = find_user(name)) {
        return *id;
    }
    throw LookupError("unknown user '" + std::string(name) + "'");
}

const std::string& SocialGraph::name(UserId id) const {
    if (id >= names_.size()) {
        throw LookupError("unknown user id " + std::to_string(id));
    }
    return names_[id];
}

bool SocialGraph::add_edge(UserId i, UserId j, double formed_at) {
    if (i >= adj_.size() || j >= adj_.size()) {
        throw LookupError("edge endpoint out of range");
    }
    if (i == j) {
        throw ArgumentError("self-loop on user '" + names_[i] + "'");
    }
    if (std::isnan(formed_at) || formed_at == std::numeric_limits<double>::infinity()) {
        throw ArgumentError("edge formation time must be finite");
    }
    auto insert = [this](UserId from, UserId to, double t) {
        auto& list = adj_[from];
        auto it = std::lower_bound(list.begin(), list.end(), to, neighbor_less);
        if (it != list.end() && it->id == to) {
            it->formed_at = std::min(it->formed_at, t);
            return false;
        }
        list.insert(it, Neighbor{to, t});
        return true;
    };
    const bool fresh = insert(i, j, formed_at);
    insert(j, i, formed_at);
    if (fresh) {
        ++edges_;
    }
    return fresh;
}

std::optional<double> SocialGraph::edge_formed_at(UserId i, UserId j) const {
    const auto& list = adj_.at(i);
    auto it = std::lower_bound(list.begin(), list.end(), j, neighbor_less);
    if (it != list.end() && it->id == j) {
        return it->formed_at;
    }
    return std::nullopt;
}

std::size_t SocialGraph::max_degree() const noexcept {
    std::size_t m = 0;
    for (const auto& l : adj_) {
        m = std::max(m, l.size());
    }
    return m;
}

CityId SocialGraph::add_city(std::string_view label) {
    std::string key(label);
    if (auto it = city_index_.find(key); it != city_index_.end()) {
        return it->second;
    }
    const auto id = static_cast<CityId>(cities_.size());
    cities_.push_back(City{key, false});
    city_index_.emplace(std::move(key), id);
    return id;
}

void SocialGraph::set_city(UserId user, CityId city) {
    if (city >= cities_.size()) {
        throw LookupError("unknown city id " + std::to_string(city));
    }
    user_city_.at(user) = city;
}

std::optional<CityId> SocialGraph::city(UserId user) const { return user_city_.at(user); }

void SocialGraph::set_tracked_cities(std::span<const std::string> labels) {
    for (auto& c : cities_) {
        c.tracked = false;
    }
    for (const auto& l : labels) {
        cities_[add_city(l)].tracked = true;
    }
}

std::optional<CityId> SocialGraph::tracked_city(UserId user) const {
    const auto c = user_city_.at(user);
    if (c && cities_[*c].tracked) {
        return c;
    }
    return std::nullopt;
}

std::vector<std::pair<UserId, UserId>> SocialGraph::edges() const {
    std::vector<std::pair<UserId, UserId>> out;
    out.reserve(edges_);
    for (UserId i = 0; i < adj_.size(); ++i) {
        for (const auto& n : adj_[i]) {
            if (i < n.id) {
                out.emplace_back(i, n.id);
            }
        }
    }
    return out;
}

double adamic_adar(const SocialGraph& g, UserId i, UserId j) {
    if (i >= g.node_count() || j >= g.node_count()) {
        throw LookupError("adamic_adar: unknown user");
    }
    if (i == j) {
        throw ArgumentError("adamic_adar: dyad endpoints must differ");
    }
    const auto a = g.neighbors(i);
    const auto b = g.neighbors(j);
    // Walk the intersection in ascending k so the sum order is the same for (i,j) and (j,i).
    double s = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->id < ib->id) {
            ++ia;
        } else if (ib->id < ia->id) {
            ++ib;
        } else {
            // a common neighbor has degree >= 2, so the log is positive
            s += 1.0 / std::log(static_cast<double>(g.degree(ia->id)));
            ++ia;
            ++ib;
        }
    }
    return s;
}

double tie_strength_threshold(const SocialGraph& g, std::span<const std::pair<UserId, UserId>> dyads,
                              double percentile) {
    if (!(percentile > 0.0 && percentile < 100.0)) {
        throw ArgumentError("percentile must lie in (0, 100)");
    }
    if (dyads.empty()) {
        throw InsufficientData("tie-strength threshold needs at least one dyad");
    }
    std::vector<double> scores;
    scores.reserve(dyads.size());
    for (const auto& [i, j] : dyads) {
        scores.push_back(adamic_adar(g, i, j));
    }
    return nearest_rank(std::move(scores), percentile);
}

DegreeHistogram degree_distribution(const SocialGraph& g) {
    DegreeHistogram h;
    for (UserId i = 0; i < g.node_count(); ++i) {
        ++h[g.degree(i)];
    }
    return h;
}

double AssortativityStats::fraction() const {
    if (qualifying_edges == 0) {
        throw InsufficientData("no edge joins two users in tracked cities");
    }
    return static_cast<double>(same_city_edges) / static_cast<double>(qualifying_edges);
}

AssortativityStats geo_assortativity_counts(const SocialGraph& g) {
    AssortativityStats s;
    for (const auto& [i, j] : g.edges()) {
        const auto ci = g.tracked_city(i);
        const auto cj = g.tracked_city(j);
        if (ci && cj) {
            ++s.qualifying_edges;
            if (*ci == *cj) {
                ++s.same_city_edges;
            }
        }
    }
    return s;
}

double geo_assortativity(const SocialGraph& g) { return geo_assortativity_counts(g).fraction(); }

void load_edges(const std::filesystem::path& path, SocialGraph& g) {
    detail::for_each_data_line(path, [&](std::string_view line, std::size_t lineno) {
        const auto f = detail::split_tabs(line);
        if (f.size() != 2 && f.size() != 3) {
            detail::parse_fail(path, lineno, "expected 2 or 3 tab-separated fields");
        }
        const auto a = detail::trim(f[0]);
        const auto b = detail::trim(f[1]);
        if (a.empty() || b.empty()) {
            detail::parse_fail(path, lineno, "empty user id");
        }
        if (a == b) {
            detail::parse_fail(path, lineno, "self-loop");
        }
        double formed = kNeverFormed;
        if (f.size() == 3) {
            double secs = 0.0;
            if (!detail::parse_double(f[2], secs) || !std::isfinite(secs) || secs < 0.0) {
                detail::parse_fail(path, lineno, "bad formation time");
            }
            formed = secs / 3600.0;
        }
        g.add_edge(g.add_user(a), g.add_user(b), formed);
    });
}

void load_cities(const std::filesystem::path& path, SocialGraph& g) {
    detail::for_each_data_line(path, [&](std::string_view line, std::size_t lineno) {
        const auto f = detail::split_tabs(line);
        if (f.size() != 2 || detail::trim(f[0]).empty() || detail::trim(f[1]).empty()) {
            detail::parse_fail(path, lineno, "expected user<TAB>city");
        }
        g.set_city(g.add_user(detail::trim(f[0])), g.add_city(detail::trim(f[1])));
    });
}

void write_edges(const std::filesystem::path& path, const SocialGraph& g) {
    auto out = detail::open_out(path);
    for (const auto& [i, j] : g.edges()) {
        out << g.name(i) << '\t' << g.name(j);
        const double formed = *g.edge_formed_at(i, j);
        if (formed != kNeverFormed) {
            out << '\t' << formed * 3600.0;
        }
        out << '\n';
    }
}

void write_cities(const std::filesystem::path& path, const SocialGraph& g) {
    auto out = detail::open_out(path);
    for (UserId i = 0; i < g.node_count(); ++i) {
        if (auto c = g.city(i)) {
            out << g.name(i) << '\t' << g.city_info(*c).label << '\n';
        }
    }
}

} // namespace tiehawkes
