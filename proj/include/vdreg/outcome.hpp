#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vdreg/dataset.hpp"
#include "vdreg/rng.hpp"

namespace vdreg {

// Cluster-specific outcome parameters. VDReg uses (mu, sigma2) only; VDLReg
// adds local slopes on standardized covariates.
struct ClusterParams {
    double mu = 0.0;
    std::vector<double> beta;
    double sigma2 = 1.0;
};

// Dirichlet-Laplace shrinkage state for one cluster's slope vector:
// beta_j ~ N(0, psi_j phi_j^2 tau^2), psi_j ~ Exp(1/2), phi ~ Dir(a,..,a),
// tau ~ Gamma(p a, 1/2).
struct DLState {
    std::vector<double> psi;
    std::vector<double> phi;
    double tau = 1.0;
    double a = 0.5;

    double slope_var(int j) const { return psi[j] * phi[j] * phi[j] * tau * tau; }
};

struct VdregPriors {
    double m0 = 0.0;
    double kappa0 = 0.1;
    double a0 = 2.0;
    double b0 = 1.0;
};

struct VdlregPriors {
    double m0 = 0.0;
    double v0 = 10.0;
    double a0 = 2.0;
    double b0 = 1.0;
    double dl_a = 0.0;  // 0 = use 1/p
    double dl_concentration(int p) const { return dl_a > 0.0 ? dl_a : 1.0 / p; }
};

struct OutcomePriors {
    VdregPriors vdreg;
    VdlregPriors vdlreg;
};

double normal_logpdf(double x, double mean, double var);

double vdreg_loglik(double y, const ClusterParams& theta);

// N(y; m, V) with the missing covariates integrated out against their
// standardized auxiliary law: m = mu + sum_obs beta_j z_j,
// V = sigma2 + sum_miss beta_j^2.
double vdlreg_loglik(double y, std::span<const double> z, std::span<const std::uint8_t> r, const ClusterParams& theta);

double vdlreg_cluster_loglik(const Dataset& d, std::span<const int> members, const ClusterParams& theta);

struct ProjectionCheck {
    double closed_form = 0.0;  // exp(vdlreg_loglik), a density value
    double mc_estimate = 0.0;  // Monte-Carlo integral over missing z ~ N(0,1)
    double mc_std_error = 0.0;
};

ProjectionCheck projection_identity_check(const ClusterParams& theta, std::span<const std::uint8_t> r,
                                          std::span<const double> z, double y, int mc_samples, std::uint64_t seed);

// closed-form marginal of a response vector under the Normal-Inverse-Gamma prior
double vdreg_log_marginal(std::span<const double> ys, const VdregPriors& pr);

ClusterParams sample_vdreg_params(std::span<const double> ys, const VdregPriors& pr, Rng& rng);
ClusterParams sample_vdreg_prior(const VdregPriors& pr, Rng& rng);

DLState sample_dl_prior(int p, double a, Rng& rng);
ClusterParams sample_vdlreg_prior(int p, const VdlregPriors& pr, const DLState& dl, Rng& rng);

// one Gibbs sweep of the Dirichlet-Laplace conditionals given the slopes
void update_dl_state(std::span<const double> beta, DLState& dl, Rng& rng);

// Random-walk proposal scales with Robbins-Monro adaptation toward 0.44
// acceptance; shared across clusters and frozen after burn-in.
struct MhScales {
    std::vector<double> beta_step;
    double log_sigma_step = 0.3;
    long beta_attempts = 0, beta_accepts = 0;
    long sigma_attempts = 0, sigma_accepts = 0;
    long adapt_rounds = 0;

    explicit MhScales(int p) : beta_step(p, 0.3) {}
    double beta_accept_rate() const { return beta_attempts ? static_cast<double>(beta_accepts) / beta_attempts : 0.0; }
    double sigma_accept_rate() const { return sigma_attempts ? static_cast<double>(sigma_accepts) / sigma_attempts : 0.0; }
};

// single-coordinate random-walk move on beta[j]; returns acceptance
bool vdlreg_mh_beta(const Dataset& d, std::span<const int> members, ClusterParams& theta, int j, const DLState& dl,
                    double step, Rng& rng);

// random-walk move on log sigma2 (used when some member has missing covariates)
bool vdlreg_mh_logsigma(const Dataset& d, std::span<const int> members, ClusterParams& theta, const VdlregPriors& pr,
                        double step, Rng& rng);

// exact Gaussian conditional update of the intercept
void vdlreg_update_mu(const Dataset& d, std::span<const int> members, ClusterParams& theta, const VdlregPriors& pr,
                      Rng& rng);

// One Markov-kernel step leaving the cluster full conditional invariant:
// conjugate Gaussian/IG when every member is fully observed, otherwise
// Metropolis-within-Gibbs on the slopes and log variance.
void sample_vdlreg_params(const Dataset& d, std::span<const int> members, ClusterParams& theta, const DLState& dl,
                          const VdlregPriors& pr, Rng& rng, MhScales& scales, bool adapt);

}  // namespace vdreg
