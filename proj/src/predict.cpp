#include "vdreg/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vdreg/errors.hpp"

namespace vdreg {

Predictor::Predictor(const Dataset& train_std, const PosteriorDraws& draws, const PredictContext& ctx)
    : train_(train_std), draws_(draws), ctx_(ctx), empty_sim_(train_std) {
    if (draws.draws.empty()) throw ConfigError("prediction requires at least one retained draw");
    stats_.reserve(draws.draws.size());
    for (const Draw& dr : draws.draws) {
        DrawStats ds;
        const Partition part = dr.partition();
        ds.sizes = part.sizes;
        ds.sims.reserve(part.K());
        for (int k = 0; k < part.K(); ++k) {
            ClusterSimilarity cs(train_std);
            for (int i : part.clusters[k]) cs.add(train_std, i);
            ds.sims.push_back(std::move(cs));
        }
        stats_.push_back(std::move(ds));
    }
    if (draws.model == ModelKind::vdlreg && ctx_.include_new_cluster) {
        Rng rng(derive_seed(ctx_.seed, "predict/new-cluster"));
        prior_thetas_.reserve(ctx_.new_cluster_mc);
        for (int s = 0; s < ctx_.new_cluster_mc; ++s) {
            const DLState dl = sample_dl_prior(train_std.p, ctx_.priors.vdlreg.dl_concentration(train_std.p), rng);
            prior_thetas_.push_back(sample_vdlreg_prior(train_std.p, ctx_.priors.vdlreg, dl, rng));
        }
    }
}

PredictiveQuery Predictor::standardized(const PredictiveQuery& q) const {
    if (static_cast<int>(q.x.size()) != train_.p || q.r.size() != q.x.size())
        throw DataError("query dimension does not match the fitted covariates");
    PredictiveQuery out = q;
    for (int j = 0; j < train_.p; ++j) {
        if (!out.r[j]) {
            out.x[j] = std::numeric_limits<double>::quiet_NaN();
        } else if (train_.kinds[j] == CovKind::continuous) {
            out.x[j] = (out.x[j] - ctx_.cov_scale.mu[j]) / ctx_.cov_scale.sd[j];
        }
    }
    return out;
}

std::vector<double> Predictor::allocation_probs(const PredictiveQuery& q, int draw_index) const {
    const PredictiveQuery qs = standardized(q);
    const DrawStats& ds = stats_[draw_index];
    const int K = static_cast<int>(ds.sims.size());
    std::vector<double> w(K + 1, 0.0);

    std::vector<double> delta(K + 1, 0.0);
    for (int k = 0; k < K; ++k) delta[k] = ds.sims[k].log_ratio_add_query(train_, qs.x, qs.r, ctx_.sim);
    delta[K] = empty_sim_.log_ratio_add_query(train_, qs.x, qs.r, ctx_.sim);

    // shift only when needed so the all-missing case stays bit-exact CRP
    double mx = 0.0;
    for (double v : delta) mx = std::max(mx, v);
    const double shift = mx > 50.0 ? mx : 0.0;

    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        w[k] = ds.sizes[k] * std::exp(delta[k] - shift);
        total += w[k];
    }
    w[K] = ctx_.include_new_cluster ? ctx_.coh.M * std::exp(delta[K] - shift) : 0.0;
    total += w[K];
    for (auto& v : w) v /= total;
    return w;
}

double Predictor::new_cluster_mean(const PredictiveQuery& q_std) const {
    if (draws_.model == ModelKind::vdreg) return ctx_.priors.vdreg.m0;
    double acc = 0.0;
    for (const ClusterParams& th : prior_thetas_) {
        double m = th.mu;
        for (int j = 0; j < train_.p; ++j)
            if (q_std.r[j]) m += th.beta[j] * q_std.x[j];
        acc += m;
    }
    return acc / prior_thetas_.size();
}

double Predictor::new_cluster_density(double y_std, const PredictiveQuery& q_std) const {
    if (draws_.model == ModelKind::vdreg) {
        const double single[1] = {y_std};
        return std::exp(vdreg_log_marginal(single, ctx_.priors.vdreg));
    }
    double acc = 0.0;
    for (const ClusterParams& th : prior_thetas_)
        acc += std::exp(vdlreg_loglik(y_std, q_std.x, q_std.r, th));
    return acc / prior_thetas_.size();
}

double Predictor::predictive_mean(const PredictiveQuery& q) const {
    const PredictiveQuery qs = standardized(q);
    double acc = 0.0;
    for (int t = 0; t < n_draws(); ++t) {
        const auto probs = allocation_probs(q, t);
        const Draw& dr = draws_.draws[t];
        const int K = static_cast<int>(dr.params.size());
        double m = 0.0;
        for (int k = 0; k < K; ++k) {
            double ey = dr.params[k].mu;
            if (draws_.model == ModelKind::vdlreg)
                for (int j = 0; j < train_.p; ++j)
                    if (qs.r[j]) ey += dr.params[k].beta[j] * qs.x[j];
            m += probs[k] * ey;
        }
        if (ctx_.include_new_cluster) m += probs[K] * new_cluster_mean(qs);
        acc += m;
    }
    return ctx_.y_scale.to_original(acc / n_draws());
}

std::vector<double> Predictor::predictive_density(const PredictiveQuery& q, std::span<const double> y_grid) const {
    if (y_grid.empty()) throw ConfigError("predictive_density requires a nonempty grid");
    const PredictiveQuery qs = standardized(q);
    std::vector<double> density(y_grid.size(), 0.0);
    for (int t = 0; t < n_draws(); ++t) {
        const auto probs = allocation_probs(q, t);
        const Draw& dr = draws_.draws[t];
        const int K = static_cast<int>(dr.params.size());
        for (std::size_t g = 0; g < y_grid.size(); ++g) {
            const double y_std = ctx_.y_scale.to_internal(y_grid[g]);
            double f = 0.0;
            for (int k = 0; k < K; ++k) {
                if (draws_.model == ModelKind::vdreg) {
                    f += probs[k] * std::exp(vdreg_loglik(y_std, dr.params[k]));
                } else {
                    f += probs[k] * std::exp(vdlreg_loglik(y_std, qs.x, qs.r, dr.params[k]));
                }
            }
            if (ctx_.include_new_cluster) f += probs[K] * new_cluster_density(y_std, qs);
            density[g] += f;
        }
    }
    for (auto& v : density) v /= n_draws() * ctx_.y_scale.sd;
    return density;
}

std::vector<double> allocation_probs(const PredictiveQuery& q, const Dataset& train_std, const PosteriorDraws& draws,
                                     int draw_index, const PredictContext& ctx) {
    return Predictor(train_std, draws, ctx).allocation_probs(q, draw_index);
}

double predictive_mean(const PredictiveQuery& q, const Dataset& train_std, const PosteriorDraws& draws,
                       const PredictContext& ctx) {
    return Predictor(train_std, draws, ctx).predictive_mean(q);
}

std::vector<double> predictive_density(const PredictiveQuery& q, std::span<const double> y_grid,
                                       const Dataset& train_std, const PosteriorDraws& draws,
                                       const PredictContext& ctx) {
    return Predictor(train_std, draws, ctx).predictive_density(q, y_grid);
}

double mspe(std::span<const double> predictions, std::span<const double> truths) {
    if (predictions.size() != truths.size() || predictions.empty())
        throw std::invalid_argument("mspe: length mismatch or empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - truths[i];
        acc += d * d;
    }
    return acc / predictions.size();
}

PredictiveQuery query_from_row(const Dataset& d, int i) {
    PredictiveQuery q;
    q.x.assign(d.row(i).begin(), d.row(i).end());
    q.r.assign(d.row_mask(i).begin(), d.row_mask(i).end());
    return q;
}

}  // namespace vdreg
