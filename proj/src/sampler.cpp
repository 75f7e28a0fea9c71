#include "vdreg/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "vdreg/errors.hpp"

namespace vdreg {

std::string to_string(ModelKind m) {
    return m == ModelKind::vdreg ? "vdreg" : "vdlreg";
}

std::optional<ModelKind> model_from_string(const std::string& s) {
    if (s == "vdreg") return ModelKind::vdreg;
    if (s == "vdlreg") return ModelKind::vdlreg;
    return std::nullopt;
}

void McmcConfig::validate() const {
    if (burn_in < 0 || iterations <= burn_in) throw ConfigError("require iterations > burn_in >= 0");
    if (thin < 1) throw ConfigError("thin must be >= 1");
    if (n_aux < 1) throw ConfigError("n_aux must be >= 1");
}

Chain::Chain(const Dataset& d, const McmcConfig& cfg, const SimilarityConfig& sim, const CohesionConfig& coh,
             const OutcomePriors& priors)
    : d_(d), cfg_(cfg), sim_(sim), coh_(coh), priors_(priors), empty_sim_(d), scales_(d.p) {
    cfg_.validate();
    if (d.n == 0) throw DataError("cannot sample from an empty dataset");
    alloc_.assign(d.n, 0);
}

double Chain::outcome_loglik(int i, const ClusterParams& theta) const {
    if (cfg_.prior_only) return 0.0;
    if (cfg_.model == ModelKind::vdreg) return vdreg_loglik(d_.y[i], theta);
    return vdlreg_loglik(d_.y[i], d_.row(i), d_.row_mask(i), theta);
}

Chain::Cluster Chain::make_cluster(Rng& rng) const {
    Cluster c;
    c.sim = ClusterSimilarity(d_);
    if (cfg_.prior_only) return c;  // parameters never enter prior-only weights
    if (cfg_.model == ModelKind::vdreg) {
        c.theta = sample_vdreg_prior(priors_.vdreg, rng);
    } else {
        c.dl = sample_dl_prior(d_.p, priors_.vdlreg.dl_concentration(d_.p), rng);
        c.theta = sample_vdlreg_prior(d_.p, priors_.vdlreg, c.dl, rng);
    }
    return c;
}

void Chain::init(Rng& rng) {
    std::vector<int> all(d_.n, 0);
    init_with(all, rng);
}

void Chain::init_with(std::span<const int> alloc, Rng& rng) {
    const Partition part = normalize_labels(alloc);
    clusters_.clear();
    alloc_ = part.alloc;
    for (int k = 0; k < part.K(); ++k) {
        Cluster c = make_cluster(rng);
        for (int i : part.clusters[k]) {
            c.members.push_back(i);
            c.sim.add(d_, i);
        }
        clusters_.push_back(std::move(c));
    }
}

void Chain::detach_unit(int i, std::optional<Cluster>& stash) {
    const int k = alloc_[i];
    Cluster& c = clusters_[k];
    c.sim.remove(d_, i);
    c.members.erase(std::lower_bound(c.members.begin(), c.members.end(), i));
    if (c.members.empty()) {
        stash = std::move(clusters_[k]);
        if (k != K() - 1) {
            clusters_[k] = std::move(clusters_.back());
            for (int u : clusters_[k].members) alloc_[u] = k;
        }
        clusters_.pop_back();
    }
    alloc_[i] = -1;
}

void Chain::attach_unit(int i, int k) {
    Cluster& c = clusters_[k];
    c.members.insert(std::lower_bound(c.members.begin(), c.members.end(), i), i);
    c.sim.add(d_, i);
    alloc_[i] = k;
}

void Chain::allocation_sweep(Rng& rng) {
    const int n_aux = cfg_.n_aux;
    std::vector<double> logw;
    std::vector<Cluster> aux;
    aux.reserve(n_aux);

    for (int i = 0; i < d_.n; ++i) {
        std::optional<Cluster> stash;
        detach_unit(i, stash);

        // fresh candidate components; a vacated singleton keeps its parameters
        // as the first candidate
        aux.clear();
        if (!cfg_.prior_only) {
            if (stash) aux.push_back(std::move(*stash));
            while (static_cast<int>(aux.size()) < n_aux) aux.push_back(make_cluster(rng));
        }

        logw.clear();
        for (const Cluster& c : clusters_) {
            const double lw = std::log(static_cast<double>(c.members.size())) + c.sim.log_ratio_add(d_, i, sim_) +
                              outcome_loglik(i, c.theta);
            logw.push_back(lw);
        }
        const double new_sim = empty_sim_.log_ratio_add(d_, i, sim_);
        const double new_base = std::log(coh_.M / n_aux) + new_sim;
        if (cfg_.prior_only) {
            // weights do not involve parameters; a single slot carries mass M
            logw.push_back(std::log(coh_.M) + new_sim);
        } else {
            for (const Cluster& c : aux) logw.push_back(new_base + outcome_loglik(i, c.theta));
        }

        const int pick = rng.categorical_from_log_weights(logw);
        if (pick < K()) {
            attach_unit(i, pick);
        } else if (cfg_.prior_only) {
            clusters_.push_back(make_cluster(rng));
            attach_unit(i, K() - 1);
        } else {
            clusters_.push_back(std::move(aux[pick - K()]));
            attach_unit(i, K() - 1);
        }
    }
}

void Chain::param_sweep(Rng& rng, bool adapt) {
    if (cfg_.prior_only) return;
    for (Cluster& c : clusters_) {
        if (cfg_.model == ModelKind::vdreg) {
            std::vector<double> ys;
            ys.reserve(c.members.size());
            for (int i : c.members) ys.push_back(d_.y[i]);
            c.theta = sample_vdreg_params(ys, priors_.vdreg, rng);
        } else {
            sample_vdlreg_params(d_, c.members, c.theta, c.dl, priors_.vdlreg, rng, scales_, adapt);
            update_dl_state(c.theta.beta, c.dl, rng);
        }
    }
}

Draw Chain::snapshot() const {
    Draw out;
    const Partition part = normalize_labels(alloc_);
    out.alloc = part.alloc;
    out.params.resize(part.K());
    // map first-appearance labels back to internal cluster indices
    std::vector<int> internal_of(part.K(), -1);
    for (int i = 0; i < d_.n; ++i)
        if (internal_of[part.alloc[i]] < 0) internal_of[part.alloc[i]] = alloc_[i];
    for (int k = 0; k < part.K(); ++k) out.params[k] = clusters_[internal_of[k]].theta;
    return out;
}

PosteriorDraws run_chain(const Dataset& d, const McmcConfig& cfg, const SimilarityConfig& sim,
                         const CohesionConfig& coh, const OutcomePriors& priors) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    Chain chain(d, cfg, sim, coh, priors);
    Rng rng_init(derive_seed(cfg.seed, "chain/init"));
    Rng rng_alloc(derive_seed(cfg.seed, "chain/alloc"));
    Rng rng_param(derive_seed(cfg.seed, "chain/param"));
    chain.init(rng_init);

    PosteriorDraws out;
    out.model = cfg.model;
    out.n = d.n;
    out.p = d.p;
    out.iterations = cfg.iterations;
    out.burn_in = cfg.burn_in;
    out.thin = cfg.thin;
    out.draws.reserve(cfg.expected_draws());

    for (int it = 0; it < cfg.iterations; ++it) {
        chain.allocation_sweep(rng_alloc);
        chain.param_sweep(rng_param, it < cfg.burn_in);
        if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == cfg.thin - 1) out.draws.push_back(chain.snapshot());
    }

    const auto& sc = chain.mh_scales();
    if (sc.beta_attempts > 0) out.accept_beta = sc.beta_accept_rate();
    if (sc.sigma_attempts > 0) out.accept_logsigma = sc.sigma_accept_rate();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double effective_sample_size(std::span<const double> trace) {
    const int n = static_cast<int>(trace.size());
    if (n < 4) return std::numeric_limits<double>::quiet_NaN();
    double mean = 0.0;
    for (double v : trace) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : trace) var += (v - mean) * (v - mean);
    var /= n;
    if (var <= 0.0) return std::numeric_limits<double>::quiet_NaN();

    auto rho = [&](int lag) {
        double s = 0.0;
        for (int t = 0; t + lag < n; ++t) s += (trace[t] - mean) * (trace[t + lag] - mean);
        return s / (n * var);
    };
    // Geyer: sum adjacent-pair autocorrelations while positive and non-increasing
    double sum_pairs = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    const int max_pairs = std::min(n, 4000);  // keeps long traces O(n * lag)
    for (int m = 0; 2 * m + 1 < max_pairs; ++m) {
        double gamma = rho(2 * m) + rho(2 * m + 1);
        if (gamma <= 0.0) break;
        gamma = std::min(gamma, prev);
        sum_pairs += gamma;
        prev = gamma;
    }
    const double denom = std::max(2.0 * sum_pairs - 1.0, 1e-12);
    return n / denom;
}

DiagnosticsSummary diagnostics(const PosteriorDraws& draws) {
    if (draws.draws.size() < 10) throw ConfigError("diagnostics requires at least 10 draws");
    DiagnosticsSummary s;
    s.n_draws = static_cast<int>(draws.draws.size());
    for (const Draw& dr : draws.draws) {
        const int k = 1 + *std::max_element(dr.alloc.begin(), dr.alloc.end());
        s.trace_K.push_back(static_cast<double>(k));
        double ms = 0.0;
        for (const auto& th : dr.params) ms += th.sigma2;
        s.trace_mean_sigma2.push_back(ms / dr.params.size());
    }
    s.ess_K = effective_sample_size(s.trace_K);
    s.ess_mean_sigma2 = effective_sample_size(s.trace_mean_sigma2);
    s.degenerate_K = !std::isfinite(s.ess_K);
    s.degenerate_sigma2 = !std::isfinite(s.ess_mean_sigma2);
    s.accept_beta = draws.accept_beta;
    s.accept_logsigma = draws.accept_logsigma;
    s.seconds = draws.seconds;
    return s;
}

}  // namespace vdreg
