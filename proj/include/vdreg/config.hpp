#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vdreg/dataset.hpp"
#include "vdreg/outcome.hpp"
#include "vdreg/partition.hpp"
#include "vdreg/sampler.hpp"
#include "vdreg/similarity.hpp"
#include "vdreg/simstudy.hpp"

namespace vdreg {

inline constexpr const char* kVersion = "vdreg 0.1.0";

// Flat key=value configuration; '#' starts a comment. Keys mirror the CLI
// long-flag names. CLI flags override file values.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Every tunable surfaced by the CLI, resolved (defaults < file < flags).
struct RunConfig {
    std::string subcommand;

    // io
    std::string data;
    std::string queries;
    std::string fit_dir;
    std::string out = "out";
    std::string response = "y";
    std::string na_token = "NA";
    std::string kinds;  // comma list of continuous|binary|categorical; empty = infer

    // model & mcmc
    std::string model = "vdreg";
    int iters = 5000;
    int burn = 1000;
    int thin = 5;
    int n_aux = 3;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double mass = 1.0;
    bool prior_only = false;

    // similarity
    double sim_a = 2.0, sim_b = 1.0, sim_c = 1.0;
    double sim_alpha0 = 1.0, sim_beta0 = 1.0;
    std::string cat_sim = "mode";  // mode | dirichlet
    double cat_alpha = 1.0;

    // outcome priors
    double vdreg_m0 = 0.0, vdreg_kappa0 = 0.1, vdreg_a0 = 2.0, vdreg_b0 = 1.0;
    double vdlreg_m0 = 0.0, vdlreg_v0 = 10.0, vdlreg_a0 = 2.0, vdlreg_b0 = 1.0;
    double dl_a = 0.0;  // 0 = 1/p

    // predict
    bool include_new_cluster = true;
    int new_cluster_mc = 100;
    std::string ygrid;  // "lo:hi:count", empty = no densities

    // simulate
    int reps = 20;
    double sigma_sim = 1.0;
    std::string x2_mode = "literal";
    std::string methods = "vdreg,vdlreg,ccls";
    double test_fraction = 0.10;
    bool keep_datasets = false;

    int jobs = 1;

    void apply_file_values(const std::map<std::string, std::string>& kv);  // throws ConfigError on unknown keys
    void validate() const;

    // canonical key=value serialization (sorted keys) used for hashing and the manifest
    std::map<std::string, std::string> as_map() const;

    CsvSchema csv_schema() const;
    McmcConfig mcmc_config() const;
    CohesionConfig cohesion_config() const;
    OutcomePriors outcome_priors() const;
    SimilarityConfig similarity_config(int p) const;
    SimConfig sim_config() const;
    std::vector<Method> method_list() const;
};

std::string config_hash(const RunConfig& cfg);
void write_manifest(const RunConfig& cfg, const std::string& path);
RunConfig read_manifest(const std::string& path);

}  // namespace vdreg
