#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiehawkes/cascade.hpp"
#include "tiehawkes/config.hpp"
#include "tiehawkes/graph.hpp"
#include "tiehawkes/hawkes.hpp"
#include "tiehawkes/stats.hpp"

namespace tiehawkes {

using Json = nlohmann::ordered_json;

// Per-word fit outcome; `fit` is empty when estimation failed.
struct WordFit {
    std::string word;
    std::size_t events{0};
    std::optional<double> aa_threshold;
    std::size_t pool_size{0};
    std::optional<FitResult> fit;
    std::optional<std::string> error;
};

// Config echo for reports. Leaves out workers and out_dir so reports from
// the same inputs compare byte for byte.
[[nodiscard]] Json config_json(const RunConfig& config);
[[nodiscard]] Json to_json(const RiskReport& report);
[[nodiscard]] Json to_json(const ClassRisk& risk);
[[nodiscard]] Json to_json(const FitResult& fit);
[[nodiscard]] Json to_json(const WordFit& fit);
[[nodiscard]] Json to_json(const CompareReport& report);

// Pretty-printed, newline-terminated; no timestamps, so equal inputs give
// equal bytes.
void write_json(const std::filesystem::path& path, const Json& doc);

// Tabular outputs, each with a header row. Missing values are written as NA.
void write_degree_tsv(const std::filesystem::path& path, const DegreeHistogram& hist);
void write_risk_words_tsv(const std::filesystem::path& path, std::span<const RiskReport> reports,
                          const std::map<std::string, std::string>& classes);
void write_risk_classes_tsv(const std::filesystem::path& path, std::span<const ClassRisk> classes);
void write_fit_tsv(const std::filesystem::path& path, std::span<const WordFit> fits);
void write_threshold_tsv(const std::filesystem::path& path, std::span<const WordFit> fits);
void write_compare_tsv(const std::filesystem::path& path, const CompareReport& report);
// Log-likelihood improvement against event count, with the realized BH line.
void write_compare_plot_tsv(const std::filesystem::path& path, const CompareReport& report);

} // namespace tiehawkes
