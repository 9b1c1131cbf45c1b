#pragma once

#include <ostream>
#include <vector>

#include "tiehawkes/cascade.hpp"
#include "tiehawkes/config.hpp"
#include "tiehawkes/graph.hpp"
#include "tiehawkes/hawkes.hpp"
#include "tiehawkes/report.hpp"

namespace tiehawkes {

[[nodiscard]] Kernel kernel_of(const RunConfig& config);
[[nodiscard]] FitConfig fit_config_of(const RunConfig& config);
// Per-word stream seed derived from the run seed and the word itself, so a
// word's result does not depend on which other words are in the run.
[[nodiscard]] std::uint64_t word_seed(std::uint64_t seed, std::string_view word);

// Edge list plus optional city labels and the tracked-city set. An empty edge
// list only produces a warning on `log`.
[[nodiscard]] SocialGraph load_graph(const RunConfig& config, std::ostream& log);
[[nodiscard]] CascadeSet load_cascades(const RunConfig& config, SocialGraph& graph);

// Fits `spec` to every word, words in parallel. Failures are kept per word.
[[nodiscard]] std::vector<WordFit> fit_words(const CascadeSet& cascades, const SocialGraph& graph,
                                             const ModelSpec& spec, const RunConfig& config);

// Subcommands. Each writes its files under config.out_dir and embeds the
// config echo in its JSON output.
void run_net_stats(const RunConfig& config, std::ostream& log);
void run_risk(const RunConfig& config, std::ostream& log);
void run_fit(const RunConfig& config, std::ostream& log);
void run_compare(const RunConfig& config, std::ostream& log);
// Writes edges.tsv, cities.tsv, events.tsv, simulate.json and run.conf, a
// config pointing at the generated files for follow-up analyses.
void run_simulate(const RunConfig& config, std::ostream& log);

} // namespace tiehawkes
