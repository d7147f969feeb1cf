// Command-line entry point: list-presets, run, compare, plot-data.
#include <CLI11.hpp>
#include <iostream>

#include "scem/harness.hpp"

namespace {

struct CommonOpts {
    std::string preset;
    std::string config_path;
    std::string seeds;
    long budget = -1;
    std::string out;
    int jobs = 1;
};

scem::ExperimentConfig resolve_config(const CommonOpts& o) {
    if (o.preset.empty() == o.config_path.empty())
        throw std::invalid_argument("exactly one of --preset or --config is required");
    scem::ExperimentConfig cfg = o.preset.empty()
                                     ? scem::parse_config_file(o.config_path)
                                     : scem::preset(o.preset);
    if (!o.seeds.empty()) {
        cfg.seeds.clear();
        std::istringstream ss(o.seeds);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.seeds.push_back(std::stoull(tok));
    }
    if (o.budget >= 0) cfg.budget = o.budget;
    if (!o.out.empty()) cfg.out_dir = o.out;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--preset", o.preset, "named experiment preset");
    cmd->add_option("--config", o.config_path, "flat key=value config file");
    cmd->add_option("--seeds", o.seeds, "comma-separated seed list override");
    cmd->add_option("--budget", o.budget, "iteration budget override");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--jobs", o.jobs, "worker pool size");
}

int do_run(const CommonOpts& o, bool also_compare, bool also_plot) {
    const scem::ExperimentConfig cfg = resolve_config(o);
    const auto records = scem::run(cfg, o.jobs);
    bool unexpected = false;
    for (const auto& rec : records) {
        std::cout << rec.alg << " seed=" << rec.seed;
        if (cfg.model_seeds.size() > 1) std::cout << " model=" << rec.model_seed;
        std::cout << " status=" << rec.status
                  << " sqrt_mse=" << scem::detail::fmt9(rec.final_sqrt_mse)
                  << " sqrt_mspbe=" << scem::detail::fmt9(rec.final_sqrt_mspbe)
                  << " wallclock=" << scem::detail::fmt9(rec.wallclock_s) << "s\n";
        if (rec.status == "DIVERGED" && !cfg.expected_diverge.count(rec.alg))
            unexpected = true;
    }
    if (also_compare) std::cout << scem::compare(records);
    if (also_plot) scem::emit_plot_data(records, cfg);
    return unexpected ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"policy-evaluation benchmark harness"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list-presets", "print the preset names");

    CommonOpts run_opts;
    auto* run_cmd = app.add_subcommand("run", "execute an experiment");
    add_common(run_cmd, run_opts);

    CommonOpts cmp_opts;
    auto* cmp_cmd =
        app.add_subcommand("compare", "run and print the final-sqrt(MSE) table");
    add_common(cmp_cmd, cmp_opts);

    CommonOpts plot_opts;
    auto* plot_cmd =
        app.add_subcommand("plot-data", "run and emit plot-ready series files");
    add_common(plot_cmd, plot_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& name : scem::preset_names()) std::cout << name << '\n';
            return 0;
        }
        if (run_cmd->parsed()) return do_run(run_opts, false, false);
        if (cmp_cmd->parsed()) return do_run(cmp_opts, true, false);
        if (plot_cmd->parsed()) return do_run(plot_opts, false, true);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
