// vacent: command-line driver for the vacuum-entanglement experiments.
//
//   vacent run <config.json>      run an experiment described by a config file
//   vacent preset <name>          run a built-in experiment (fig2, fig3, oracle-convergence, readout-demo)
//   vacent validate <config.json> parse and check a config without running it
//   vacent oracle <config.json>   run the exact-oracle checks with the config's parameters
//
// Exit codes: 0 success, 2 invalid config or parameter, 3 unstable regime,
// 4 numerical failure, 1 anything else.

#include "vacent/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <iostream>

namespace {

struct Overrides
{
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> propagator;
    std::string format = "both";
    bool dump_config = false;
};

void apply(vacent::ExperimentConfig& config, const Overrides& o)
{
    if (o.seed)
        config.seed = *o.seed;
    if (o.propagator) {
        try {
            config.propagator = vacent::parse_propagator_source(*o.propagator);
        } catch (const vacent::InvalidParameter& e) {
            throw vacent::ConfigError(fmt::format("--propagator: {}", e.what()));
        }
    }
}

void print_entanglement(const vacent::SweepResult& r)
{
    for (const auto& c : r.curves) {
        std::string peak = "none";
        if (c.peak)
            peak = fmt::format("{:.6g} ({:.4f} bits)", c.peak->t, c.peak->value);
        fmt::print("{:<24} max {:.4f} bits at gt={:.5g}  first peak {}  onset {}  HP max {:.2e}{}\n", c.id,
                   c.max_log_negativity, c.t_at_max, peak, c.onset ? fmt::format("{:.5g}", *c.onset) : "none",
                   c.series.hp.overall_max(), c.series.hp.exceeds_threshold ? " (HP threshold exceeded)" : "");
        if (c.series.hp.exceeds_threshold)
            fmt::print(stderr, "warning: {}: HP ratio {:.3g} exceeds {}\n", c.id, c.series.hp.overall_max(),
                       vacent::HpValidityReport::threshold);
    }
}

int run(vacent::ExperimentConfig config, const Overrides& o)
{
    apply(config, o);
    if (o.dump_config) {
        std::cout << vacent::to_json(config).dump(2) << "\n";
        return 0;
    }
    const auto format = vacent::parse_output_format(o.format);
    if (config.kind == vacent::ExperimentKind::entanglement) {
        const auto result = vacent::run_entanglement(config);
        print_entanglement(result);
    }
    for (const auto& path : vacent::run_experiment(config, o.out_dir, format))
        fmt::print("wrote {}\n", path.string());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Vacuum entanglement of two molecular ensembles coupled through a cavity"};
    app.require_subcommand(1);

    Overrides o;
    std::string config_path;
    std::string preset_name;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out-dir", o.out_dir, "Directory for output files")->capture_default_str();
        sub->add_option("--seed", o.seed, "Override the config seed");
        sub->add_option("--propagator", o.propagator, "normal-mode or expm")
            ->check(CLI::IsMember({"normal-mode", "expm", "matrix-exponential"}));
        sub->add_option("--format", o.format, "csv, svg or both")
            ->check(CLI::IsMember({"csv", "svg", "both"}))
            ->capture_default_str();
        sub->add_flag("--dump-config", o.dump_config, "Print the resolved config as JSON and exit");
    };

    auto* run_cmd = app.add_subcommand("run", "Run an experiment from a JSON config");
    run_cmd->add_option("config", config_path, "Config file")->required();
    add_common(run_cmd);

    auto* preset_cmd = app.add_subcommand("preset", "Run a built-in experiment");
    preset_cmd->add_option("name", preset_name, "fig2, fig3, oracle-convergence or readout-demo")->required();
    add_common(preset_cmd);

    auto* validate_cmd = app.add_subcommand("validate", "Check a config file without running it");
    validate_cmd->add_option("config", config_path, "Config file")->required();

    auto* oracle_cmd = app.add_subcommand("oracle", "Run the exact-oracle checks using a config's parameters");
    oracle_cmd->add_option("config", config_path, "Config file")->required();
    add_common(oracle_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd)
            return run(vacent::load_config(config_path), o);
        if (*preset_cmd)
            return run(vacent::preset_config(preset_name), o);
        if (*validate_cmd) {
            const auto config = vacent::load_config(config_path);
            vacent::check_stability(config);
            fmt::print("{}: ok ({}, {} parameter point(s))\n", config.name, vacent::to_string(config.kind),
                       vacent::sweep_points(config).size());
            return 0;
        }
        if (*oracle_cmd) {
            auto config = vacent::load_config(config_path);
            config.kind = vacent::ExperimentKind::oracle;
            config.sweep.reset();
            return run(config, o);
        }
    } catch (const vacent::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return 2;
    } catch (const vacent::InvalidParameter& e) {
        fmt::print(stderr, "invalid parameter: {}\n", e.what());
        return 2;
    } catch (const vacent::UnstableRegime& e) {
        fmt::print(stderr, "{}\n", e.what());
        return 3;
    } catch (const vacent::NumericalError& e) {
        fmt::print(stderr, "numerical error: {}\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 1;
}
