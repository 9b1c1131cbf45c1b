#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tiehawkes {

// Dense node index into a SocialGraph.
using UserId = std::uint32_t;
using CityId = std::uint32_t;

inline constexpr double kNeverFormed = -std::numeric_limits<double>::infinity();

struct Neighbor {
    UserId id;
    // Formation time in hours since the Unix epoch; kNeverFormed when the
    // edge list gives no time (treated as predating every event).
    double formed_at;
};

struct City {
    std::string label;
    bool tracked{false};
};

// Undirected mutual-reply network. Adjacency lists are kept sorted by
// neighbor id, which makes neighbor-set intersection linear.
class SocialGraph {
public:
    SocialGraph() = default;

    // Returns the id for `name`, adding an isolated node when unseen.
    UserId add_user(std::string_view name);
    [[nodiscard]] std::optional<UserId> find_user(std::string_view name) const;
    [[nodiscard]] UserId user(std::string_view name) const; // throws LookupError
    [[nodiscard]] const std::string& name(UserId id) const;

    // Adds i <-> j. Self-loops throw ArgumentError; a repeated edge keeps the
    // earlier formation time. Returns false when the edge already existed.
    bool add_edge(UserId i, UserId j, double formed_at = kNeverFormed);

    [[nodiscard]] std::size_t node_count() const noexcept { return adj_.size(); }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edges_; }
    [[nodiscard]] std::size_t degree(UserId i) const { return adj_.at(i).size(); }
    [[nodiscard]] std::span<const Neighbor> neighbors(UserId i) const { return adj_.at(i); }
    [[nodiscard]] std::optional<double> edge_formed_at(UserId i, UserId j) const;
    [[nodiscard]] bool has_edge(UserId i, UserId j) const { return edge_formed_at(i, j).has_value(); }
    [[nodiscard]] std::size_t max_degree() const noexcept;

    // Cities
    CityId add_city(std::string_view label);
    void set_city(UserId user, CityId city);
    [[nodiscard]] std::optional<CityId> city(UserId user) const;
    [[nodiscard]] const City& city_info(CityId c) const { return cities_.at(c); }
    [[nodiscard]] std::size_t city_count() const noexcept { return cities_.size(); }
    // Marks exactly the listed labels as tracked (labels not yet seen are added).
    void set_tracked_cities(std::span<const std::string> labels);
    // City id if the user is labeled with a tracked city.
    [[nodiscard]] std::optional<CityId> tracked_city(UserId user) const;

    // All edges as (i, j) with i < j, ascending.
    [[nodiscard]] std::vector<std::pair<UserId, UserId>> edges() const;

private:
    std::vector<std::vector<Neighbor>> adj_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, UserId> index_;
    std::vector<std::optional<CityId>> user_city_;
    std::vector<City> cities_;
    std::unordered_map<std::string, CityId> city_index_;
    std::size_t edges_{0};
};

// Sum over common neighbors k of 1 / ln|Γ(k)|.
[[nodiscard]] double adamic_adar(const SocialGraph& g, UserId i, UserId j);

// Nearest-rank percentile of Adamic-Adar scores over `dyads`.
// Throws InsufficientData on an empty dyad set.
[[nodiscard]] double tie_strength_threshold(const SocialGraph& g,
                                            std::span<const std::pair<UserId, UserId>> dyads,
                                            double percentile);

// degree -> number of nodes with that degree.
using DegreeHistogram = std::map<std::size_t, std::size_t>;
[[nodiscard]] DegreeHistogram degree_distribution(const SocialGraph& g);

struct AssortativityStats {
    std::size_t qualifying_edges{0};
    std::size_t same_city_edges{0};
    [[nodiscard]] double fraction() const;
};

// Counts over edges whose endpoints both carry tracked-city labels.
[[nodiscard]] AssortativityStats geo_assortativity_counts(const SocialGraph& g);
// Fraction of qualifying edges that stay within one city.
// Throws InsufficientData when no edge qualifies.
[[nodiscard]] double geo_assortativity(const SocialGraph& g);

// Edge list: `a<TAB>b[<TAB>formed_at_epoch_seconds]`, `#` comments.
void load_edges(const std::filesystem::path& path, SocialGraph& g);
// City file: `user<TAB>city_label`. Unknown users are added as isolated nodes.
void load_cities(const std::filesystem::path& path, SocialGraph& g);
void write_edges(const std::filesystem::path& path, const SocialGraph& g);
void write_cities(const std::filesystem::path& path, const SocialGraph& g);

} // namespace tiehawkes
