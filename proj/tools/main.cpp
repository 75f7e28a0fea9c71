#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "vdreg/cli.hpp"
#include "vdreg/errors.hpp"

namespace {

using vdreg::RunConfig;

// file values sit between defaults and CLI flags, so the config file is read
// before CLI11 binds flag values into cfg
void preload_config_file(int argc, char** argv, RunConfig& cfg) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
    }
    if (!path.empty()) cfg.apply_file_values(vdreg::parse_config_file(path));
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path, std::string& include_new,
                      std::string& seed_str) {
    cmd->add_option("--config", config_path, "flat key=value config file; flags override file values");
    cmd->add_option("--out", cfg.out, "output directory");
    cmd->add_option("--seed", seed_str, "random seed (required; wall-clock seeding is not supported)");
    cmd->add_option("--jobs", cfg.jobs, "parallel worker cap");
    cmd->add_option("--mass", cfg.mass, "partition mass parameter M");
    cmd->add_option("--model", cfg.model, "vdreg | vdlreg");
    cmd->add_option("--iters", cfg.iters, "MCMC iterations");
    cmd->add_option("--burn", cfg.burn, "burn-in iterations");
    cmd->add_option("--thin", cfg.thin, "thinning interval");
    cmd->add_option("--n-aux", cfg.n_aux, "auxiliary components per allocation move");
    cmd->add_option("--sim-a", cfg.sim_a, "similarity inverse-gamma shape");
    cmd->add_option("--sim-b", cfg.sim_b, "similarity inverse-gamma rate");
    cmd->add_option("--sim-c", cfg.sim_c, "similarity prior-mean scaling");
    cmd->add_option("--sim-alpha0", cfg.sim_alpha0, "binary similarity pseudocount (ones)");
    cmd->add_option("--sim-beta0", cfg.sim_beta0, "binary similarity pseudocount (zeros)");
    cmd->add_option("--cat-sim", cfg.cat_sim, "categorical similarity: mode | dirichlet");
    cmd->add_option("--cat-alpha", cfg.cat_alpha, "dirichlet-multinomial pseudocount");
    cmd->add_option("--vdreg-m0", cfg.vdreg_m0, "");
    cmd->add_option("--vdreg-kappa0", cfg.vdreg_kappa0, "");
    cmd->add_option("--vdreg-a0", cfg.vdreg_a0, "");
    cmd->add_option("--vdreg-b0", cfg.vdreg_b0, "");
    cmd->add_option("--vdlreg-m0", cfg.vdlreg_m0, "");
    cmd->add_option("--vdlreg-v0", cfg.vdlreg_v0, "");
    cmd->add_option("--vdlreg-a0", cfg.vdlreg_a0, "");
    cmd->add_option("--vdlreg-b0", cfg.vdlreg_b0, "");
    cmd->add_option("--dl-a", cfg.dl_a, "Dirichlet-Laplace concentration (0 = 1/p)");
    cmd->add_option("--include-new-cluster", include_new, "on | off: opened-cluster slot in prediction");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        preload_config_file(argc, argv, cfg);
    } catch (const vdreg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    CLI::App app{"Bayesian regression with variable-dimension covariate vectors"};
    app.require_subcommand(1);
    std::string config_path, include_new, seed_str, prior_only_str;

    auto* fit = app.add_subcommand("fit", "run the MCMC sampler on a CSV dataset");
    fit->add_option("--data", cfg.data, "training CSV")->required();
    fit->add_option("--response", cfg.response, "response column name");
    fit->add_option("--na-token", cfg.na_token, "missing-value token");
    fit->add_option("--kinds", cfg.kinds, "comma list: continuous|binary|categorical (default: infer)");
    fit->add_option("--prior-only", prior_only_str, "on | off: disable the outcome likelihood");
    add_common_flags(fit, cfg, config_path, include_new, seed_str);

    auto* predict = app.add_subcommand("predict", "posterior predictive means (and densities) for query rows");
    predict->add_option("--fit", cfg.fit_dir, "fit output directory")->required();
    predict->add_option("--queries", cfg.queries, "query CSV (covariate columns, NA allowed)")->required();
    predict->add_option("--data", cfg.data, "training CSV (default: path recorded in the fit manifest)");
    predict->add_option("--ygrid", cfg.ygrid, "lo:hi:count for density output");
    predict->add_option("--new-cluster-mc", cfg.new_cluster_mc, "prior draws for the opened-cluster slot");
    add_common_flags(predict, cfg, config_path, include_new, seed_str);

    auto* simulate = app.add_subcommand("simulate", "synthetic benchmark with eight missingness patterns");
    simulate->add_option("--reps", cfg.reps, "replicate count");
    simulate->add_option("--methods", cfg.methods, "comma list of vdreg,vdlreg,ccls");
    simulate->add_option("--sigma-sim", cfg.sigma_sim, "residual sd of the generator");
    simulate->add_option("--x2-mode", cfg.x2_mode, "literal | centered second-covariate generator");
    simulate->add_option("--test-fraction", cfg.test_fraction, "held-out fraction per replicate");
    simulate->add_flag("--keep-datasets", cfg.keep_datasets, "write each replicate's generated CSV");
    add_common_flags(simulate, cfg, config_path, include_new, seed_str);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!seed_str.empty()) {
            cfg.seed = std::stoull(seed_str);
            cfg.seed_set = true;
        }
        if (!include_new.empty()) {
            if (include_new != "on" && include_new != "off") throw vdreg::ConfigError("--include-new-cluster takes on|off");
            cfg.include_new_cluster = include_new == "on";
        }
        if (!prior_only_str.empty()) {
            if (prior_only_str != "on" && prior_only_str != "off") throw vdreg::ConfigError("--prior-only takes on|off");
            cfg.prior_only = prior_only_str == "on";
        }
    } catch (const vdreg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception&) {
        std::fprintf(stderr, "config error: invalid --seed value\n");
        return 2;
    }

    if (fit->parsed()) {
        cfg.subcommand = "fit";
        return vdreg::cmd_fit(cfg);
    }
    if (predict->parsed()) {
        cfg.subcommand = "predict";
        return vdreg::cmd_predict(cfg);
    }
    cfg.subcommand = "simulate";
    return vdreg::cmd_simulate(cfg);
}
