// Command-line front end for the spdcsim shared library. Talks to the
// simulator exclusively through the C API in spdcsim.h.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 physics
// non-convergence, 3 lock failure.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "spdcsim.h"

namespace {

struct CommonOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    bool analytic_only = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "Experiment configuration JSON")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "Override the config's random seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--out", opts.out_dir, "Output directory (default: config's output_dir)");
    cmd->add_flag("--analytic-only", opts.analytic_only,
                  "Skip Monte Carlo columns; emit analytic values only");
}

int exit_code_for(spdc_status status) {
    switch (status) {
        case SPDC_OK:
            return 0;
        case SPDC_ERR_NO_PHASE_MATCH:
        case SPDC_ERR_NOT_CONVERGED:
        case SPDC_ERR_UNDEFINED_RESULT:
            return 2;
        case SPDC_ERR_LOCK_FAILURE:
            return 3;
        default:
            return 1;
    }
}

using RunFn = spdc_status (*)(spdc_experiment*, const char*);

int run_command(const CommonOptions& opts, RunFn run) {
    spdc_experiment* exp = nullptr;
    spdc_status status = spdc_experiment_create(opts.config_path.c_str(), &exp);
    if (status != SPDC_OK) {
        std::fprintf(stderr, "error (%s): %s\n", spdc_status_name(status), spdc_last_error());
        return exit_code_for(status);
    }
    if (opts.seed_set) {
        spdc_experiment_set_seed(exp, opts.seed);
    }
    spdc_experiment_set_analytic_only(exp, opts.analytic_only ? 1 : 0);

    status = run(exp, opts.out_dir.empty() ? nullptr : opts.out_dir.c_str());
    const char* summary = spdc_experiment_summary_json(exp);
    if (summary) {
        std::fputs(summary, stdout);
    }
    if (status != SPDC_OK) {
        std::fprintf(stderr, "error (%s): %s\n", spdc_status_name(status), spdc_last_error());
    }
    spdc_experiment_destroy(exp);
    return exit_code_for(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spdc-sim: dual-pumped downconversion entanglement source simulator"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        RunFn fn;
        CommonOptions opts;
    };
    Sub subs[] = {
        {"fringe-scan", "Coincidence fringe vs analyzer angle in arm 2", spdc_experiment_run_fringe_scan, {}},
        {"iris-sweep", "45-degree visibility and pair flux vs iris diameter", spdc_experiment_run_iris_sweep, {}},
        {"tuning-sweep", "Signal/idler wavelengths and visibility vs crystal temperature", spdc_experiment_run_tuning_sweep, {}},
        {"bell-test", "CHSH measurement at the canonical analyzer settings", spdc_experiment_run_bell_test, {}},
        {"lock-sim", "Side-lock servo time series and residual phase", spdc_experiment_run_lock_sim, {}},
    };
    for (Sub& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, s.opts);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    for (Sub& s : subs) {
        if (app.got_subcommand(s.name)) {
            return run_command(s.opts, s.fn);
        }
    }
    return 1;
}
