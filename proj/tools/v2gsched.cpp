// v2gsched: runs the charging-game studies and writes CSV/JSON plot data.

#include "v2g/config.hpp"
#include "v2g/errors.hpp"
#include "v2g/studies.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

v2g::StudyConfig resolve(const Options& o) {
    auto cfg = v2g::load_config(o.config, v2g::environment_overrides());
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (o.seed) cfg.seed = *o.seed;
    if (o.threads) cfg.threads = *o.threads;
    v2g::rehash(cfg);
    return cfg;
}

void report(const v2g::FileList& files) {
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

int run(const std::string& study, const Options& o) {
    const auto cfg = resolve(o);
    if (study == "validate") {
        std::cout << "config ok (hash " << cfg.hash << ")\n";
        return 0;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto& dir = cfg.output_dir;
    if (study == "temperature") {
        report(v2g::write_temperature_study(v2g::run_temperature_study(cfg), cfg, dir));
    } else if (study == "tariff-variance") {
        report(v2g::write_tariff_variance_study(v2g::run_tariff_variance_study(cfg), cfg, dir));
    } else if (study == "charger") {
        report(v2g::write_charger_study(v2g::run_charger_study(cfg), cfg, dir));
    } else if (study == "profiles") {
        report(v2g::write_profiles(v2g::run_profile_export(cfg), cfg, dir));
    } else if (study == "robustness") {
        report(v2g::write_robustness(v2g::run_robustness(cfg), cfg, dir));
    } else if (study == "projection") {
        report(v2g::write_projection(v2g::run_projection_year(cfg), cfg, dir));
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::cerr << study << " finished in " << dt.count() << " s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Game-theoretic V2G smart charging studies"};
    app.set_version_flag("--version", std::string(v2g::tool_version()));
    app.require_subcommand(1);

    Options opts;
    app.add_option("-c,--config", opts.config, "JSON study configuration")->check(CLI::ExistingFile);
    app.add_option("-o,--out", opts.out, "output directory (overrides output_dir)");
    app.add_option("--seed", opts.seed, "seed for tariffs and perturbation draws");
    app.add_option("-j,--threads", opts.threads, "worker threads, 0 = all cores");
    app.footer("Config keys can be overridden with V2GSCHED_<SECTION>__<KEY>=<json value>.");

    const std::pair<const char*, const char*> commands[] = {
        {"temperature", "w sweep for each ambient temperature"},
        {"tariff-variance", "w sweep for low/medium/high tariff variance"},
        {"charger", "w sweep for each charger rating"},
        {"profiles", "export schedules for selected w values"},
        {"robustness", "sensitivity and regret, game vs weighted sum"},
        {"projection", "one-year projection per capacity and w"},
        {"validate", "check a configuration and print every violation"},
    };
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help)->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string study = app.get_subcommands().front()->get_name();
    try {
        return run(study, opts);
    } catch (const v2g::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const v2g::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << study << " failed: " << e.what() << '\n';
        return 1;
    }
}
