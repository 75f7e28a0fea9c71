#include "vdreg/simstudy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "vdreg/errors.hpp"
#include "vdreg/predict.hpp"

namespace vdreg {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(Method m) {
    switch (m) {
        case Method::vdreg: return "vdreg";
        case Method::vdlreg: return "vdlreg";
        case Method::ccls: return "ccls";
    }
    return "?";
}

std::optional<Method> method_from_string(const std::string& s) {
    if (s == "vdreg") return Method::vdreg;
    if (s == "vdlreg") return Method::vdlreg;
    if (s == "ccls") return Method::ccls;
    return std::nullopt;
}

void SimConfig::validate() const {
    if (n != 8 * m_per_pattern) throw ConfigError("simulation requires n = 8 * rows-per-pattern");
    if (static_cast<int>(beta.size()) != p + 1) throw ConfigError("simulation beta must have p+1 entries");
    if (replicates < 1) throw ConfigError("need at least one replicate");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0,1)");
}

std::vector<std::vector<std::uint8_t>> missingness_patterns() {
    return {
        {1, 1, 1, 1},
        {0, 1, 1, 1},
        {1, 0, 1, 1},
        {1, 1, 0, 1},
        {1, 1, 1, 0},
        {0, 0, 1, 1},
        {0, 1, 0, 1},
        {1, 0, 1, 0},
    };
}

Dataset generate_dataset(const SimConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(derive_seed(seed, "simdata"));
    const auto patterns = missingness_patterns();

    Dataset d;
    d.n = cfg.n;
    d.p = cfg.p;
    d.kinds.assign(cfg.p, CovKind::continuous);
    for (int j = 0; j < cfg.p; ++j) d.names.push_back("x" + std::to_string(j + 1));
    d.x.reserve(static_cast<std::size_t>(cfg.n) * cfg.p);
    d.r.reserve(static_cast<std::size_t>(cfg.n) * cfg.p);

    for (int i = 0; i < cfg.n; ++i) {
        const double x1 = 0.5 * rng.beta(4.0, 1.0);
        const double x2 = cfg.x2_mode == X2Mode::literal ? x1 + rng.normal(x1, 1.0) : rng.normal(x1, 1.0);
        const double x3 = rng.uniform() < 0.3 ? rng.normal(-3.0, 1.0) : rng.normal(3.0, 1.0);
        const double x4 = 5.0 * rng.beta(0.3, 0.3);
        const double full[4] = {x1, x2, x3, x4};
        double mean = cfg.beta[0];
        for (int j = 0; j < cfg.p; ++j) mean += cfg.beta[j + 1] * full[j];
        d.y.push_back(mean + cfg.sigma_sim * rng.normal());

        const auto& pat = patterns[i / cfg.m_per_pattern];
        for (int j = 0; j < cfg.p; ++j) {
            const bool obs = cfg.full_masks || pat[j] != 0;
            d.x.push_back(obs ? full[j] : kNaN);
            d.r.push_back(obs ? 1 : 0);
        }
    }
    d.finalize();
    return d;
}

CompleteCaseLS CompleteCaseLS::fit(const Dataset& train) {
    const int p = train.p;
    const int q = p + 1;
    std::vector<int> complete;
    for (int i = 0; i < train.n; ++i) {
        bool ok = true;
        for (int j = 0; j < p; ++j) ok = ok && train.observed(i, j);
        if (ok) complete.push_back(i);
    }
    if (static_cast<int>(complete.size()) < q) throw DataError("complete-case least squares: too few complete rows");

    // normal equations with a tiny ridge, solved by Gaussian elimination
    std::vector<double> a(q * q, 0.0), b(q, 0.0), xi(q);
    for (int i : complete) {
        xi[0] = 1.0;
        for (int j = 0; j < p; ++j) xi[j + 1] = train.value(i, j);
        for (int r0 = 0; r0 < q; ++r0) {
            b[r0] += xi[r0] * train.y[i];
            for (int c = 0; c < q; ++c) a[r0 * q + c] += xi[r0] * xi[c];
        }
    }
    double diag_max = 0.0;
    for (int r0 = 0; r0 < q; ++r0) diag_max = std::max(diag_max, a[r0 * q + r0]);
    for (int r0 = 0; r0 < q; ++r0) a[r0 * q + r0] += 1e-12 * diag_max;

    for (int col = 0; col < q; ++col) {
        int piv = col;
        for (int r0 = col + 1; r0 < q; ++r0)
            if (std::abs(a[r0 * q + col]) > std::abs(a[piv * q + col])) piv = r0;
        if (a[piv * q + col] == 0.0) throw DataError("complete-case least squares: singular design");
        if (piv != col) {
            for (int c = 0; c < q; ++c) std::swap(a[piv * q + c], a[col * q + c]);
            std::swap(b[piv], b[col]);
        }
        for (int r0 = col + 1; r0 < q; ++r0) {
            const double f = a[r0 * q + col] / a[col * q + col];
            for (int c = col; c < q; ++c) a[r0 * q + c] -= f * a[col * q + c];
            b[r0] -= f * b[col];
        }
    }
    CompleteCaseLS out;
    out.coef.assign(q, 0.0);
    for (int r0 = q - 1; r0 >= 0; --r0) {
        double s = b[r0];
        for (int c = r0 + 1; c < q; ++c) s -= a[r0 * q + c] * out.coef[c];
        out.coef[r0] = s / a[r0 * q + r0];
    }

    out.impute.assign(p, 0.0);
    for (int j = 0; j < p; ++j) {
        double sum = 0.0;
        int m = 0;
        for (int i = 0; i < train.n; ++i)
            if (train.observed(i, j)) {
                sum += train.value(i, j);
                ++m;
            }
        out.impute[j] = m > 0 ? sum / m : 0.0;
    }
    return out;
}

double CompleteCaseLS::predict(std::span<const double> x, std::span<const std::uint8_t> r) const {
    double yhat = coef[0];
    for (std::size_t j = 0; j < x.size(); ++j) yhat += coef[j + 1] * (r[j] ? x[j] : impute[j]);
    return yhat;
}

double StudyResult::mean_mspe(int method_index) const {
    double acc = 0.0;
    int m = 0;
    for (const auto& rep : replicates) {
        if (std::isfinite(rep.mspe[method_index])) {
            acc += rep.mspe[method_index];
            ++m;
        }
    }
    return m > 0 ? acc / m : kNaN;
}

int StudyResult::n_ok(int method_index) const {
    int m = 0;
    for (const auto& rep : replicates) m += std::isfinite(rep.mspe[method_index]);
    return m;
}

namespace {

double fit_and_score_mcmc(const Dataset& train, const Dataset& test, Method method, const StudySettings& settings,
                          std::uint64_t seed) {
    const Standardization cov_scale = standardize(train);
    const ResponseScale y_scale = fit_response_scale(train);
    const Dataset train_ready = apply_response_scale(y_scale, apply_standardization(cov_scale, train));

    McmcConfig mcmc = settings.mcmc;
    mcmc.model = method == Method::vdreg ? ModelKind::vdreg : ModelKind::vdlreg;
    mcmc.seed = seed;
    const SimilarityConfig sim = SimilarityConfig::defaults(train_ready);
    const PosteriorDraws draws = run_chain(train_ready, mcmc, sim, settings.cohesion, settings.priors);

    PredictContext ctx;
    ctx.sim = sim;
    ctx.coh = settings.cohesion;
    ctx.priors = settings.priors;
    ctx.cov_scale = cov_scale;
    ctx.y_scale = y_scale;
    ctx.seed = derive_seed(seed, "predict");
    Predictor predictor(train_ready, draws, ctx);

    std::vector<double> preds;
    preds.reserve(test.n);
    for (int i = 0; i < test.n; ++i) preds.push_back(predictor.predictive_mean(query_from_row(test, i)));
    return mspe(preds, test.y);
}

ReplicateResult run_replicate(int rep, const SimConfig& cfg, const std::vector<Method>& methods,
                              const StudySettings& settings) {
    ReplicateResult out;
    out.replicate = rep;
    out.mspe.assign(methods.size(), kNaN);
    out.errors.assign(methods.size(), "");

    const std::uint64_t rep_seed = derive_seed(cfg.base_seed, "rep/" + std::to_string(rep));
    const Dataset data = generate_dataset(cfg, rep_seed);
    const auto [train, test] = split_train_test(data, cfg.test_fraction, derive_seed(rep_seed, "split"));

    for (std::size_t m = 0; m < methods.size(); ++m) {
        try {
            if (methods[m] == Method::ccls) {
                const CompleteCaseLS ls = CompleteCaseLS::fit(train);
                std::vector<double> preds;
                preds.reserve(test.n);
                for (int i = 0; i < test.n; ++i) preds.push_back(ls.predict(test.row(i), test.row_mask(i)));
                out.mspe[m] = mspe(preds, test.y);
            } else {
                out.mspe[m] = fit_and_score_mcmc(train, test, methods[m], settings,
                                                 derive_seed(rep_seed, "fit/" + to_string(methods[m])));
            }
        } catch (const std::exception& e) {
            out.errors[m] = e.what();  // recorded; the study continues
        }
    }
    return out;
}

}  // namespace

StudyResult run_study(const SimConfig& cfg, const std::vector<Method>& methods, const StudySettings& settings) {
    cfg.validate();
    if (methods.empty()) throw ConfigError("no methods selected");

    StudyResult result;
    result.methods = methods;
    result.replicates.resize(cfg.replicates);

    const int jobs = std::max(1, settings.jobs);
    if (jobs == 1) {
        for (int rep = 0; rep < cfg.replicates; ++rep)
            result.replicates[rep] = run_replicate(rep, cfg, methods, settings);
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int rep = next.fetch_add(1);
                if (rep >= cfg.replicates) return;
                result.replicates[rep] = run_replicate(rep, cfg, methods, settings);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min(jobs, cfg.replicates); ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return result;
}

}  // namespace vdreg
