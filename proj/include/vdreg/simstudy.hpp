#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vdreg/dataset.hpp"
#include "vdreg/outcome.hpp"
#include "vdreg/partition.hpp"
#include "vdreg/sampler.hpp"
#include "vdreg/similarity.hpp"

namespace vdreg {

enum class X2Mode { literal, centered };
enum class Method { vdreg, vdlreg, ccls };

std::string to_string(Method m);
std::optional<Method> method_from_string(const std::string& s);

// Synthetic benchmark: four continuous covariates, eight fixed missingness
// patterns with 20 rows each, linear response.
struct SimConfig {
    int n = 160;
    int p = 4;
    int m_per_pattern = 20;
    std::vector<double> beta = {2.0, 1.4, 1.0, 0.1, 2.0};  // intercept first
    double sigma_sim = 1.0;
    int replicates = 20;
    double test_fraction = 0.10;
    std::uint64_t base_seed = 1;
    X2Mode x2_mode = X2Mode::literal;
    bool full_masks = false;  // diagnostic switch: keep every covariate observed

    void validate() const;
};

// the eight masks; pattern 0 is fully observed
std::vector<std::vector<std::uint8_t>> missingness_patterns();

Dataset generate_dataset(const SimConfig& cfg, std::uint64_t seed);

struct ReplicateResult {
    int replicate = 0;
    std::vector<double> mspe;          // aligned with the method list; NaN on failure
    std::vector<std::string> errors;   // empty string when the fit succeeded
};

struct StudyResult {
    std::vector<Method> methods;
    std::vector<ReplicateResult> replicates;

    double mean_mspe(int method_index) const;
    int n_ok(int method_index) const;
};

struct StudySettings {
    McmcConfig mcmc;            // model field is overridden per method
    CohesionConfig cohesion;
    OutcomePriors priors;
    int jobs = 1;
};

StudyResult run_study(const SimConfig& cfg, const std::vector<Method>& methods, const StudySettings& settings);

// Complete-case least squares: ordinary least squares on fully observed
// training rows; missing query cells fall back to observed-training means.
struct CompleteCaseLS {
    std::vector<double> coef;    // intercept first
    std::vector<double> impute;  // per-covariate observed mean

    static CompleteCaseLS fit(const Dataset& train);
    double predict(std::span<const double> x, std::span<const std::uint8_t> r) const;
};

}  // namespace vdreg
