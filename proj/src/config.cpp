#include "tiehawkes/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "text_io.hpp"
#include "tiehawkes/errors.hpp"

namespace tiehawkes {

namespace {

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(',', start);
        if (end == std::string_view::npos) {
            end = s.size();
        }
        const auto item = detail::trim(s.substr(start, end - start));
        if (!item.empty()) {
            out.emplace_back(item);
        }
        start = end + 1;
    }
    return out;
}

template <typename T>
std::string join(const std::vector<T>& items) {
    std::string s;
    for (const auto& x : items) {
        if (!s.empty()) {
            s += ',';
        }
        if constexpr (std::is_same_v<T, double>) {
            s += detail::format_double(x);
        } else {
            s += x;
        }
    }
    return s;
}

double to_double(const std::string& key, std::string_view v) {
    double out = 0.0;
    if (!detail::parse_double(v, out)) {
        throw ConfigError("'" + key + "' expects a number, got '" + std::string(v) + "'");
    }
    return out;
}

std::uint64_t to_uint(const std::string& key, std::string_view v) {
    v = detail::trim(v);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
        throw ConfigError("'" + key + "' expects a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

bool to_bool(const std::string& key, std::string_view v) {
    v = detail::trim(v);
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("'" + key + "' expects true or false");
}

using Setter = std::function<void(RunConfig&, const std::string&, std::string_view)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto str = [&t](const char* k, std::string RunConfig::*m) {
            t[k] = [m](RunConfig& c, const std::string&, std::string_view v) { c.*m = std::string(v); };
        };
        auto dbl = [&t](const char* k, double RunConfig::*m) {
            t[k] = [m](RunConfig& c, const std::string& key, std::string_view v) { c.*m = to_double(key, v); };
        };
        auto size = [&t](const char* k, std::size_t RunConfig::*m) {
            t[k] = [m](RunConfig& c, const std::string& key, std::string_view v) {
                c.*m = static_cast<std::size_t>(to_uint(key, v));
            };
        };
        str("edges", &RunConfig::edges);
        str("cities", &RunConfig::cities);
        str("events", &RunConfig::events);
        str("classes", &RunConfig::classes);
        str("out_dir", &RunConfig::out_dir);
        dbl("gamma_per_hour", &RunConfig::gamma_per_hour);
        dbl("tau_star_hours", &RunConfig::tau_star_hours);
        t["horizon_hours"] = [](RunConfig& c, const std::string& key, std::string_view v) {
            if (detail::trim(v) == "auto") {
                c.horizon_hours.reset();
            } else {
                c.horizon_hours = to_double(key, v);
            }
        };
        t["tracked_cities"] = [](RunConfig& c, const std::string&, std::string_view v) {
            c.tracked_cities = split_list(v);
        };
        dbl("tie_percentile", &RunConfig::tie_percentile);
        str("fit_spec", &RunConfig::fit_spec);
        str("base_spec", &RunConfig::base_spec);
        t["added_features"] = [](RunConfig& c, const std::string&, std::string_view v) {
            c.added_features = split_list(v);
        };
        dbl("tol_abs", &RunConfig::tol_abs);
        size("max_iterations", &RunConfig::max_iterations);
        dbl("theta_init", &RunConfig::theta_init);
        size("permutations", &RunConfig::permutations);
        dbl("alpha", &RunConfig::alpha);
        t["seed"] = [](RunConfig& c, const std::string& key, std::string_view v) { c.seed = to_uint(key, v); };
        t["workers"] = [](RunConfig& c, const std::string& key, std::string_view v) {
            c.workers = static_cast<unsigned>(to_uint(key, v));
        };
        str("sim_graph", &RunConfig::sim_graph);
        size("sim_nodes", &RunConfig::sim_nodes);
        dbl("sim_edge_prob", &RunConfig::sim_edge_prob);
        size("sim_cities", &RunConfig::sim_cities);
        dbl("sim_p_in", &RunConfig::sim_p_in);
        dbl("sim_p_out", &RunConfig::sim_p_out);
        size("sim_core_size", &RunConfig::sim_core_size);
        size("sim_periphery_per_core", &RunConfig::sim_periphery_per_core);
        dbl("sim_city_assortativity", &RunConfig::sim_city_assortativity);
        str("sim_mode", &RunConfig::sim_mode);
        t["sim_theta"] = [](RunConfig& c, const std::string& key, std::string_view v) {
            c.sim_theta.clear();
            for (const auto& item : split_list(v)) {
                c.sim_theta.push_back(to_double(key, item));
            }
        };
        dbl("sim_mu_per_hour", &RunConfig::sim_mu_per_hour);
        dbl("sim_horizon_hours", &RunConfig::sim_horizon_hours);
        size("sim_words", &RunConfig::sim_words);
        t["sim_enforce_stability"] = [](RunConfig& c, const std::string& key, std::string_view v) {
            c.sim_enforce_stability = to_bool(key, v);
        };
        dbl("sim_max_branching", &RunConfig::sim_max_branching);
        size("sim_max_events", &RunConfig::sim_max_events);
        dbl("sim_background_rate_per_hour", &RunConfig::sim_background_rate_per_hour);
        dbl("sim_adopt_prob", &RunConfig::sim_adopt_prob);
        dbl("sim_boost", &RunConfig::sim_boost);
        size("sim_threshold", &RunConfig::sim_threshold);
        dbl("sim_delay_rate_per_hour", &RunConfig::sim_delay_rate_per_hour);
        return t;
    }();
    return table;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key(detail::trim(t.substr(0, eq)));
        const auto value = detail::trim(t.substr(eq + 1));
        const auto& table = setters();
        auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        it->second(cfg, key, value);
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
    auto d = detail::format_double;
    auto u = [](auto v) { return std::to_string(v); };
    return {
        {"edges", c.edges},
        {"cities", c.cities},
        {"events", c.events},
        {"classes", c.classes},
        {"out_dir", c.out_dir},
        {"gamma_per_hour", d(c.gamma_per_hour)},
        {"tau_star_hours", d(c.tau_star_hours)},
        {"horizon_hours", c.horizon_hours ? d(*c.horizon_hours) : std::string("auto")},
        {"tracked_cities", join(c.tracked_cities)},
        {"tie_percentile", d(c.tie_percentile)},
        {"fit_spec", c.fit_spec},
        {"base_spec", c.base_spec},
        {"added_features", join(c.added_features)},
        {"tol_abs", d(c.tol_abs)},
        {"max_iterations", u(c.max_iterations)},
        {"theta_init", d(c.theta_init)},
        {"permutations", u(c.permutations)},
        {"alpha", d(c.alpha)},
        {"seed", u(c.seed)},
        {"workers", u(c.workers)},
        {"sim_graph", c.sim_graph},
        {"sim_nodes", u(c.sim_nodes)},
        {"sim_edge_prob", d(c.sim_edge_prob)},
        {"sim_cities", u(c.sim_cities)},
        {"sim_p_in", d(c.sim_p_in)},
        {"sim_p_out", d(c.sim_p_out)},
        {"sim_core_size", u(c.sim_core_size)},
        {"sim_periphery_per_core", u(c.sim_periphery_per_core)},
        {"sim_city_assortativity", d(c.sim_city_assortativity)},
        {"sim_mode", c.sim_mode},
        {"sim_theta", join(c.sim_theta)},
        {"sim_mu_per_hour", d(c.sim_mu_per_hour)},
        {"sim_horizon_hours", d(c.sim_horizon_hours)},
        {"sim_words", u(c.sim_words)},
        {"sim_enforce_stability", c.sim_enforce_stability ? "true" : "false"},
        {"sim_max_branching", d(c.sim_max_branching)},
        {"sim_max_events", u(c.sim_max_events)},
        {"sim_background_rate_per_hour", d(c.sim_background_rate_per_hour)},
        {"sim_adopt_prob", d(c.sim_adopt_prob)},
        {"sim_boost", d(c.sim_boost)},
        {"sim_threshold", u(c.sim_threshold)},
        {"sim_delay_rate_per_hour", d(c.sim_delay_rate_per_hour)},
    };
}

std::string render_config(const RunConfig& config) {
    std::string out;
    for (const auto& [k, v] : config_entries(config)) {
        out += k + " = " + v + "\n";
    }
    return out;
}

void validate(const RunConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw ConfigError(what);
        }
    };
    require(c.gamma_per_hour > 0.0, "gamma_per_hour must be positive");
    require(c.tau_star_hours > 0.0, "tau_star_hours must be positive");
    require(!c.horizon_hours || *c.horizon_hours >= 0.0, "horizon_hours must be non-negative");
    require(c.tie_percentile > 0.0 && c.tie_percentile < 100.0, "tie_percentile must lie in (0, 100)");
    require(c.tol_abs > 0.0, "tol_abs must be positive");
    require(c.max_iterations > 0, "max_iterations must be positive");
    require(c.theta_init >= 0.0, "theta_init must be non-negative");
    require(c.permutations > 0, "permutations must be positive");
    require(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0, 1)");
    require(c.workers > 0, "workers must be positive");
    require(c.sim_theta.size() == 4, "sim_theta needs four weights (F1,F2,F3,F4)");
    for (double t : c.sim_theta) {
        require(t >= 0.0, "sim_theta weights must be non-negative");
    }
    require(c.sim_mu_per_hour >= 0.0, "sim_mu_per_hour must be non-negative");
    require(c.sim_horizon_hours > 0.0, "sim_horizon_hours must be positive");
    require(c.sim_words > 0, "sim_words must be positive");
}

} // namespace tiehawkes
