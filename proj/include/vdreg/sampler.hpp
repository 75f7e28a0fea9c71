#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vdreg/dataset.hpp"
#include "vdreg/outcome.hpp"
#include "vdreg/partition.hpp"
#include "vdreg/rng.hpp"
#include "vdreg/similarity.hpp"

namespace vdreg {

enum class ModelKind { vdreg, vdlreg };

std::string to_string(ModelKind m);
std::optional<ModelKind> model_from_string(const std::string& s);

struct McmcConfig {
    int iterations = 5000;
    int burn_in = 1000;
    int thin = 5;
    int n_aux = 3;  // auxiliary components per allocation move
    std::uint64_t seed = 1;
    ModelKind model = ModelKind::vdreg;
    bool prior_only = false;  // disable the outcome likelihood (partition prior simulation)

    void validate() const;  // throws ConfigError
    int expected_draws() const { return (iterations - burn_in) / thin; }
};

// one retained iteration: dense 0-based labels plus per-cluster parameters
struct Draw {
    std::vector<int> alloc;
    std::vector<ClusterParams> params;
    Partition partition() const { return Partition::from_alloc(alloc); }
};

struct PosteriorDraws {
    std::vector<Draw> draws;
    ModelKind model = ModelKind::vdreg;
    int n = 0;
    int p = 0;
    int iterations = 0, burn_in = 0, thin = 1;
    std::optional<double> accept_beta;      // VDLReg random-walk rates
    std::optional<double> accept_logsigma;
    double seconds = 0.0;
};

// Mutable MCMC state for one chain: partition bookkeeping with cached
// similarity sufficient statistics, cluster parameters, shrinkage state.
class Chain {
  public:
    Chain(const Dataset& d, const McmcConfig& cfg, const SimilarityConfig& sim, const CohesionConfig& coh,
          const OutcomePriors& priors);

    // all units in one cluster, parameters drawn fresh
    void init(Rng& rng);
    void init_with(std::span<const int> alloc, Rng& rng);

    // one Gibbs scan over units: remove, score against existing clusters plus
    // n_aux fresh candidates, reassign, drop empty clusters
    void allocation_sweep(Rng& rng);

    // per-cluster parameter refresh (conjugate draw or MH kernel) plus
    // Dirichlet-Laplace sweeps for VDLReg
    void param_sweep(Rng& rng, bool adapt);

    int K() const { return static_cast<int>(clusters_.size()); }
    std::span<const int> alloc() const { return alloc_; }
    const std::vector<int>& members(int k) const { return clusters_[k].members; }
    const ClusterParams& params(int k) const { return clusters_[k].theta; }
    const MhScales& mh_scales() const { return scales_; }

    Draw snapshot() const;  // labels normalized by first appearance

  private:
    struct Cluster {
        std::vector<int> members;
        ClusterSimilarity sim;
        ClusterParams theta;
        DLState dl;
    };

    const Dataset& d_;
    McmcConfig cfg_;
    const SimilarityConfig& sim_;
    CohesionConfig coh_;
    OutcomePriors priors_;
    std::vector<int> alloc_;
    std::vector<Cluster> clusters_;
    ClusterSimilarity empty_sim_;
    MhScales scales_;

    double outcome_loglik(int i, const ClusterParams& theta) const;
    Cluster make_cluster(Rng& rng) const;  // fresh parameters from the prior
    void detach_unit(int i, std::optional<Cluster>& stash);
    void attach_unit(int i, int k);
};

PosteriorDraws run_chain(const Dataset& d, const McmcConfig& cfg, const SimilarityConfig& sim,
                         const CohesionConfig& coh, const OutcomePriors& priors);

// autocorrelation-based effective sample size (Geyer initial positive sequence);
// NaN for traces with no variance
double effective_sample_size(std::span<const double> trace);

struct DiagnosticsSummary {
    int n_draws = 0;
    std::vector<double> trace_K;
    std::vector<double> trace_mean_sigma2;
    double ess_K = 0.0;
    double ess_mean_sigma2 = 0.0;
    bool degenerate_K = false;
    bool degenerate_sigma2 = false;
    std::optional<double> accept_beta;
    std::optional<double> accept_logsigma;
    double seconds = 0.0;
};

DiagnosticsSummary diagnostics(const PosteriorDraws& draws);

}  // namespace vdreg
