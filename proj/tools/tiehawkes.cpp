// tiehawkes: tie-strength Hawkes analysis of word-adoption cascades.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "tiehawkes/commands.hpp"
#include "tiehawkes/errors.hpp"

using namespace tiehawkes;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
};

RunConfig resolve(const Overrides& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    if (o.workers) {
        cfg.workers = *o.workers;
    }
    if (o.out) {
        cfg.out_dir = *o.out;
    }
    validate(cfg);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hawkes-process analysis of social contagion with tie-strength features"};
    app.require_subcommand(1);

    Overrides o;
    using Runner = void (*)(const RunConfig&, std::ostream&);
    Runner runner = nullptr;

    auto add = [&](const char* name, const char* help, Runner fn) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config_path, "key = value run configuration");
        sub->add_option("--seed", o.seed, "random seed (overrides the config)");
        sub->add_option("--workers", o.workers, "maximum worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "output directory");
        sub->callback([&runner, fn] { runner = fn; });
    };
    add("net-stats", "degree distribution and geographic assortativity", run_net_stats);
    add("risk", "relative infection risks with the shuffle test", run_risk);
    add("fit", "fit the Hawkes model per word", run_fit);
    add("compare", "likelihood-ratio tests for added features with BH correction", run_compare);
    add("simulate", "generate a synthetic graph and cascades", run_simulate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc == 0) {
            return 0;
        }
        return static_cast<int>(ExitCode::config);
    }

    try {
        const RunConfig cfg = resolve(o);
        runner(cfg, std::cerr);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::infeasible);
    }
    return 0;
}
