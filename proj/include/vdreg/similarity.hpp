#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vdreg/dataset.hpp"

namespace vdreg {

// Normal-Inverse-Gamma auxiliary model for one continuous covariate:
//   v_i ~ N(mu, s2),  s2 ~ IG(a, b) with mean b/(a-1),  mu | s2 ~ N(0, c*s2).
// Defaults target covariates standardized to unit scale.
struct GaussianSimHyper {
    double a = 2.0;
    double b = 1.0;
    double c = 1.0;
};

struct BinarySimHyper {
    double alpha0 = 1.0;
    double beta0 = 1.0;
};

enum class CategoricalSim {
    mode_frequency,          // degree-weighted: |v| * log(modal frequency)
    dirichlet_multinomial,   // marginal with symmetric pseudocount cat_alpha
};

struct SimilarityConfig {
    std::vector<GaussianSimHyper> gauss;  // indexed by covariate (ignored for other kinds)
    std::vector<BinarySimHyper> binary;
    CategoricalSim cat_sim = CategoricalSim::mode_frequency;
    double cat_alpha = 1.0;

    static SimilarityConfig defaults(const Dataset& d);
    static SimilarityConfig defaults(int p);
    void validate() const;  // throws ConfigError on nonpositive hyperparameters
};

// log of the closed-form marginal  integral prod_i N(v_i; mu, s2) dNIG(mu, s2);
// empty v gives 0
double log_marginal_gaussian(std::span<const double> v, const GaussianSimHyper& h);

// same marginal from sufficient statistics (m observations, sum, sum of squares)
double log_marginal_gaussian_stats(int m, double sum, double sumsq, const GaussianSimHyper& h);

// log Beta(alpha0 + s, beta0 + m - s) - log Beta(alpha0, beta0); v entries must be 0/1
double log_marginal_beta_binomial(std::span<const double> v, const BinarySimHyper& h);
double log_marginal_beta_binomial_counts(int m, int ones, const BinarySimHyper& h);

// relative frequency of the most common code; empty input gives 1 by convention
double categorical_mode_frequency(std::span<const int> codes);

double log_categorical_score(std::span<const int> counts, int m, const SimilarityConfig& cfg);

// Per-cluster per-covariate sufficient statistics with O(1) add/remove and
// O(1) similarity-ratio evaluation; this is the sampler's hot path.
class ClusterSimilarity {
  public:
    ClusterSimilarity() = default;
    explicit ClusterSimilarity(const Dataset& d);

    void add(const Dataset& d, int unit);
    void remove(const Dataset& d, int unit);

    double log_score(const Dataset& d, const SimilarityConfig& cfg) const;

    // change in log-score if unit were added
    double log_ratio_add(const Dataset& d, int unit, const SimilarityConfig& cfg) const;

    // change in log-score for a partial covariate vector (values where mask = 1)
    double log_ratio_add_query(const Dataset& d, std::span<const double> x_new,
                               std::span<const std::uint8_t> r_new, const SimilarityConfig& cfg) const;

    int observed_count(int j) const { return count_[j]; }

  private:
    struct Nothing {};
    std::vector<int> count_;       // observed members per covariate
    std::vector<double> sum_;      // continuous
    std::vector<double> sumsq_;
    std::vector<int> ones_;        // binary
    std::vector<std::vector<int>> cat_counts_;

    double log_score_one(const Dataset& d, int j, const SimilarityConfig& cfg) const;
    double log_ratio_one(const Dataset& d, int j, double value, const SimilarityConfig& cfg) const;
};

// Sum over covariates of log g_j over the observed members' values.
double log_similarity_cluster(const Dataset& d, std::span<const int> members, const SimilarityConfig& cfg);

// log g(members + new unit) - log g(members), summed over covariates observed in the new vector.
double log_similarity_ratio(const Dataset& d, std::span<const int> members, std::span<const double> x_new,
                            std::span<const std::uint8_t> r_new, const SimilarityConfig& cfg);

}  // namespace vdreg
