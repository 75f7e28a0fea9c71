#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vdreg/dataset.hpp"
#include "vdreg/outcome.hpp"
#include "vdreg/partition.hpp"
#include "vdreg/sampler.hpp"
#include "vdreg/similarity.hpp"

namespace vdreg {

// A query with any subset of covariates observed; values are on the original
// data scale and standardized internally.
struct PredictiveQuery {
    std::vector<double> x;
    std::vector<std::uint8_t> r;
};

struct PredictContext {
    SimilarityConfig sim;
    CohesionConfig coh;
    OutcomePriors priors;
    Standardization cov_scale;
    ResponseScale y_scale;
    bool include_new_cluster = true;
    int new_cluster_mc = 100;           // prior draws for the VDLReg opened-cluster slot
    std::uint64_t seed = 1;
};

// Posterior predictive machinery over a set of retained draws. Per-draw
// cluster covariate statistics are built once and shared across queries.
class Predictor {
  public:
    Predictor(const Dataset& train_std, const PosteriorDraws& draws, const PredictContext& ctx);

    // Allocation probabilities for one draw: entries 0..K-1 follow
    // size * similarity-ratio, entry K is the opened-cluster slot (mass M);
    // normalized to sum 1. Empty-mask queries reproduce the CRP weights exactly.
    std::vector<double> allocation_probs(const PredictiveQuery& q, int draw_index) const;

    double predictive_mean(const PredictiveQuery& q) const;  // original response scale

    std::vector<double> predictive_density(const PredictiveQuery& q, std::span<const double> y_grid) const;

    int n_draws() const { return static_cast<int>(draws_.draws.size()); }

  private:
    struct DrawStats {
        std::vector<ClusterSimilarity> sims;
        std::vector<int> sizes;
    };

    const Dataset& train_;
    const PosteriorDraws& draws_;
    PredictContext ctx_;
    std::vector<DrawStats> stats_;
    std::vector<ClusterParams> prior_thetas_;  // VDLReg opened-cluster Monte Carlo
    ClusterSimilarity empty_sim_;

    PredictiveQuery standardized(const PredictiveQuery& q) const;
    double new_cluster_mean(const PredictiveQuery& q_std) const;
    double new_cluster_density(double y_std, const PredictiveQuery& q_std) const;
};

// Spec-level conveniences over Predictor for one-off evaluations.
std::vector<double> allocation_probs(const PredictiveQuery& q, const Dataset& train_std, const PosteriorDraws& draws,
                                     int draw_index, const PredictContext& ctx);
double predictive_mean(const PredictiveQuery& q, const Dataset& train_std, const PosteriorDraws& draws,
                       const PredictContext& ctx);
std::vector<double> predictive_density(const PredictiveQuery& q, std::span<const double> y_grid,
                                       const Dataset& train_std, const PosteriorDraws& draws,
                                       const PredictContext& ctx);

double mspe(std::span<const double> predictions, std::span<const double> truths);

PredictiveQuery query_from_row(const Dataset& d, int i);

}  // namespace vdreg
