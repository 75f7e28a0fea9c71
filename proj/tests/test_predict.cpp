#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "vdreg/predict.hpp"
#include "vdreg/rng.hpp"

using namespace vdreg;

namespace {

Dataset two_group_data() {
    // two well-separated groups in one covariate, n=8
    Dataset d;
    d.n = 8;
    d.p = 1;
    d.kinds = {CovKind::continuous};
    d.names = {"z"};
    const double zs[8] = {-1.2, -1.0, -0.9, -1.1, 1.0, 1.2, 0.9, 1.1};
    const double ys[8] = {-2.0, -1.8, -2.2, -1.9, 2.1, 1.9, 2.2, 1.8};
    for (int i = 0; i < 8; ++i) {
        d.x.push_back(zs[i]);
        d.r.push_back(1);
        d.y.push_back(ys[i]);
    }
    d.finalize();
    return d;
}

PredictContext make_ctx(const Dataset& d, double M = 1.0) {
    PredictContext ctx;
    ctx.sim = SimilarityConfig::defaults(d);
    ctx.coh = CohesionConfig{M};
    ctx.priors = OutcomePriors{};
    ctx.cov_scale.mu.assign(d.p, 0.0);  // data already on model scale
    ctx.cov_scale.sd.assign(d.p, 1.0);
    ctx.y_scale = ResponseScale{};
    ctx.seed = 1234;
    return ctx;
}

PosteriorDraws single_cluster_draws(const Dataset& d, ModelKind model, double mu, double sigma2,
                                    std::vector<double> beta = {}) {
    PosteriorDraws draws;
    draws.model = model;
    draws.n = d.n;
    draws.p = d.p;
    Draw dr;
    dr.alloc.assign(d.n, 0);
    ClusterParams th;
    th.mu = mu;
    th.sigma2 = sigma2;
    th.beta = std::move(beta);
    dr.params.push_back(th);
    draws.draws.push_back(dr);
    return draws;
}

}  // namespace

TEST_CASE("allocation probabilities: CRP limit is exact for empty masks") {
    const Dataset d = two_group_data();
    McmcConfig cfg;
    cfg.iterations = 3000;
    cfg.burn_in = 1000;
    cfg.thin = 10;
    cfg.seed = 21;
    const PredictContext ctx = make_ctx(d, 1.7);
    const PosteriorDraws draws = run_chain(d, cfg, ctx.sim, ctx.coh, ctx.priors);
    Predictor pred(d, draws, ctx);

    PredictiveQuery q;
    q.x.assign(1, std::nan(""));
    q.r.assign(1, 0);
    for (int t = 0; t < pred.n_draws(); ++t) {
        const auto probs = pred.allocation_probs(q, t);
        const Partition part = draws.draws[t].partition();
        REQUIRE(static_cast<int>(probs.size()) == part.K() + 1);
        const double denom = d.n + ctx.coh.M;
        for (int k = 0; k < part.K(); ++k) CHECK(probs[k] == part.sizes[k] / denom);
        CHECK(probs[part.K()] == ctx.coh.M / denom);
    }
}

TEST_CASE("allocation probabilities sum to one for random queries") {
    const Dataset d = two_group_data();
    McmcConfig cfg;
    cfg.iterations = 2000;
    cfg.burn_in = 500;
    cfg.thin = 15;
    cfg.seed = 22;
    const PredictContext ctx = make_ctx(d);
    const PosteriorDraws draws = run_chain(d, cfg, ctx.sim, ctx.coh, ctx.priors);
    Predictor pred(d, draws, ctx);
    Rng rng(2);
    for (int rep = 0; rep < 30; ++rep) {
        PredictiveQuery q;
        const bool obs = rng.uniform() < 0.7;
        q.x.assign(1, obs ? rng.uniform(-2, 2) : std::nan(""));
        q.r.assign(1, obs ? 1 : 0);
        const auto probs = pred.allocation_probs(q, rep % pred.n_draws());
        const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
        CHECK(std::abs(total - 1.0) < 1e-12);
        for (double p : probs) CHECK(p >= 0.0);
    }
}

TEST_CASE("queries at a cluster center prefer that cluster") {
    const Dataset d = two_group_data();
    const PredictContext ctx = make_ctx(d);
    // hand-built draw: the true two-group partition
    PosteriorDraws draws;
    draws.model = ModelKind::vdreg;
    draws.n = d.n;
    draws.p = d.p;
    Draw dr;
    dr.alloc = {0, 0, 0, 0, 1, 1, 1, 1};
    ClusterParams a, b;
    a.mu = -2.0;
    b.mu = 2.0;
    a.sigma2 = b.sigma2 = 0.2;
    dr.params = {a, b};
    draws.draws.push_back(dr);

    Predictor pred(d, draws, ctx);
    PredictiveQuery q;
    q.x = {-1.05};
    q.r = {1};
    const auto probs = pred.allocation_probs(q, 0);
    CHECK(probs[0] > probs[1]);
}

TEST_CASE("single-cluster single-draw predictive means") {
    const Dataset d = two_group_data();

    SUBCASE("vdreg without the opened-cluster slot returns mu exactly") {
        PredictContext ctx = make_ctx(d);
        ctx.include_new_cluster = false;
        ctx.y_scale = ResponseScale{10.0, 2.0};  // verify the back-transform
        const PosteriorDraws draws = single_cluster_draws(d, ModelKind::vdreg, 0.7, 1.0);
        Predictor pred(d, draws, ctx);
        PredictiveQuery q;
        q.x = {0.5};
        q.r = {1};
        CHECK(pred.predictive_mean(q) == doctest::Approx(10.0 + 2.0 * 0.7).epsilon(1e-12));
    }
    SUBCASE("vdlreg all-missing query drops the slopes") {
        PredictContext ctx = make_ctx(d);
        ctx.include_new_cluster = false;
        ctx.y_scale = ResponseScale{-1.0, 3.0};
        const PosteriorDraws draws = single_cluster_draws(d, ModelKind::vdlreg, 0.4, 1.0, {2.5});
        Predictor pred(d, draws, ctx);
        PredictiveQuery q;
        q.x = {std::nan("")};
        q.r = {0};
        CHECK(pred.predictive_mean(q) == doctest::Approx(-1.0 + 3.0 * 0.4).epsilon(1e-12));
    }
    SUBCASE("with the opened slot the mean shrinks toward the prior") {
        PredictContext ctx = make_ctx(d);
        const PosteriorDraws draws = single_cluster_draws(d, ModelKind::vdreg, 0.7, 1.0);
        Predictor pred(d, draws, ctx);
        PredictiveQuery q;
        q.x = {std::nan("")};
        q.r = {0};
        const double mixed = pred.predictive_mean(q);
        // weights n/(n+M) on mu=0.7 and M/(n+M) on the prior mean 0
        CHECK(mixed == doctest::Approx(0.7 * d.n / (d.n + 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("prediction is invariant to cluster relabeling") {
    const Dataset d = two_group_data();
    PredictContext ctx = make_ctx(d);
    McmcConfig cfg;
    cfg.iterations = 4000;
    cfg.burn_in = 1000;
    cfg.thin = 5;
    cfg.seed = 77;
    cfg.model = ModelKind::vdlreg;
    PosteriorDraws draws = run_chain(d, cfg, ctx.sim, ctx.coh, ctx.priors);

    PredictiveQuery q;
    q.x = {0.95};
    q.r = {1};
    const double base = Predictor(d, draws, ctx).predictive_mean(q);

    // reverse every draw's labels
    for (auto& dr : draws.draws) {
        const int K = static_cast<int>(dr.params.size());
        for (auto& c : dr.alloc) c = K - 1 - c;
        std::reverse(dr.params.begin(), dr.params.end());
    }
    const double flipped = Predictor(d, draws, ctx).predictive_mean(q);
    CHECK(flipped == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("coarsening: a covariate with identically-zero ratios changes nothing") {
    // categorical covariate with a single shared code: mode-frequency ratios
    // are exactly zero for every cluster and for the opened slot
    Dataset d;
    d.n = 6;
    d.p = 2;
    d.kinds = {CovKind::continuous, CovKind::categorical};
    d.names = {"z", "k"};
    const double zs[6] = {-1.0, -1.2, -0.8, 1.0, 1.2, 0.8};
    for (int i = 0; i < 6; ++i) {
        d.x.push_back(zs[i]);
        d.x.push_back(0.0);
        d.r.push_back(1);
        d.r.push_back(1);
        d.y.push_back(zs[i]);
    }
    d.finalize();
    PredictContext ctx = make_ctx(d);
    McmcConfig cfg;
    cfg.iterations = 2000;
    cfg.burn_in = 500;
    cfg.thin = 10;
    cfg.seed = 13;
    const PosteriorDraws draws = run_chain(d, cfg, ctx.sim, ctx.coh, ctx.priors);
    Predictor pred(d, draws, ctx);

    PredictiveQuery narrow, wide;
    narrow.x = {0.9, std::nan("")};
    narrow.r = {1, 0};
    wide.x = {0.9, 0.0};
    wide.r = {1, 1};
    for (int t = 0; t < pred.n_draws(); ++t) {
        const auto pn = pred.allocation_probs(narrow, t);
        const auto pw = pred.allocation_probs(wide, t);
        REQUIRE(pn.size() == pw.size());
        for (std::size_t k = 0; k < pn.size(); ++k) CHECK(pn[k] == pw[k]);
    }
}

TEST_CASE("predictive density: single-component shape and normalization") {
    const Dataset d = two_group_data();

    SUBCASE("single cluster vdreg matches the component normal exactly") {
        PredictContext ctx = make_ctx(d);
        ctx.include_new_cluster = false;
        const PosteriorDraws draws = single_cluster_draws(d, ModelKind::vdreg, 0.3, 0.8);
        Predictor pred(d, draws, ctx);
        PredictiveQuery q;
        q.x = {0.0};
        q.r = {1};
        std::vector<double> grid;
        for (double y = -3.0; y <= 3.5; y += 0.5) grid.push_back(y);
        const auto dens = pred.predictive_density(q, grid);
        for (std::size_t g = 0; g < grid.size(); ++g)
            CHECK(dens[g] == doctest::Approx(std::exp(normal_logpdf(grid[g], 0.3, 0.8))).epsilon(1e-12));
    }
    SUBCASE("density integrates to one over a wide grid") {
        PredictContext ctx = make_ctx(d);
        McmcConfig cfg;
        cfg.iterations = 3000;
        cfg.burn_in = 1000;
        cfg.thin = 10;
        cfg.seed = 5;
        const PosteriorDraws draws = run_chain(d, cfg, ctx.sim, ctx.coh, ctx.priors);
        Predictor pred(d, draws, ctx);
        PredictiveQuery q;
        q.x = {1.0};
        q.r = {1};
        const int n_grid = 1601;
        std::vector<double> grid(n_grid);
        for (int g = 0; g < n_grid; ++g) grid[g] = -20.0 + 40.0 * g / (n_grid - 1);
        const auto dens = pred.predictive_density(q, grid);
        double integral = 0.0;
        for (int g = 1; g < n_grid; ++g) integral += 0.5 * (dens[g] + dens[g - 1]) * (grid[g] - grid[g - 1]);
        CHECK(integral == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("marginalizing the covariates widens the vdlreg density") {
        PredictContext ctx = make_ctx(d);
        ctx.include_new_cluster = false;
        const PosteriorDraws draws = single_cluster_draws(d, ModelKind::vdlreg, 0.0, 0.5, {1.5});
        Predictor pred(d, draws, ctx);
        const int n_grid = 4001;
        std::vector<double> grid(n_grid);
        for (int g = 0; g < n_grid; ++g) grid[g] = -15.0 + 30.0 * g / (n_grid - 1);
        auto variance_of = [&](const std::vector<double>& dens) {
            double z = 0.0, m1 = 0.0, m2 = 0.0;
            for (int g = 0; g < n_grid; ++g) {
                z += dens[g];
                m1 += grid[g] * dens[g];
                m2 += grid[g] * grid[g] * dens[g];
            }
            m1 /= z;
            return m2 / z - m1 * m1;
        };
        PredictiveQuery full, empty;
        full.x = {0.4};
        full.r = {1};
        empty.x = {std::nan("")};
        empty.r = {0};
        const double v_full = variance_of(pred.predictive_density(full, grid));
        const double v_empty = variance_of(pred.predictive_density(empty, grid));
        CHECK(v_full == doctest::Approx(0.5).epsilon(0.01));            // sigma2 alone
        CHECK(v_empty == doctest::Approx(0.5 + 1.5 * 1.5).epsilon(0.01));  // inflated by beta^2
        CHECK(v_empty > v_full);
    }
}

TEST_CASE("predictive mean agrees with the density first moment") {
    const Dataset d = two_group_data();
    PredictContext ctx = make_ctx(d);
    McmcConfig cfg;
    cfg.iterations = 2000;
    cfg.burn_in = 500;
    cfg.thin = 10;
    cfg.seed = 9;
    const PosteriorDraws draws = run_chain(d, cfg, ctx.sim, ctx.coh, ctx.priors);
    Predictor pred(d, draws, ctx);
    PredictiveQuery q;
    q.x = {-1.0};
    q.r = {1};
    const int n_grid = 4001;
    std::vector<double> grid(n_grid);
    for (int g = 0; g < n_grid; ++g) grid[g] = -25.0 + 50.0 * g / (n_grid - 1);
    const auto dens = pred.predictive_density(q, grid);
    double z = 0.0, m1 = 0.0;
    for (int g = 0; g < n_grid; ++g) {
        z += dens[g];
        m1 += grid[g] * dens[g];
    }
    CHECK(pred.predictive_mean(q) == doctest::Approx(m1 / z).epsilon(0.01));
}

TEST_CASE("predictive mean matches brute-force enumeration on a toy problem") {
    // VDReg, n=5: exact predictive mean from the partition posterior, with the
    // cluster means integrated in closed form
    Dataset d;
    d.n = 5;
    d.p = 1;
    d.kinds = {CovKind::continuous};
    d.names = {"z"};
    d.x = {-1.1, -0.9, 0.0, 1.0, 1.2};
    d.r = {1, 1, 0, 1, 1};
    d.y = {-1.0, -1.2, 0.3, 1.1, 0.9};
    d.finalize();
    const PredictContext ctx = make_ctx(d);
    const VdregPriors priors;

    PredictiveQuery q;
    q.x = {1.05};
    q.r = {1};

    // oracle: sum over partitions of p(C|y) * sum_k alloc_k(C) * E[mu_k | y_k]
    const auto posterior = oracle::vdreg_partition_posterior(d, ctx.sim, ctx.coh, priors);
    double want = 0.0;
    for (const auto& [key, prob] : posterior) {
        std::vector<int> labels;
        std::size_t pos = 0;
        while (pos < key.size()) {
            auto next = key.find(' ', pos);
            if (next == std::string::npos) next = key.size();
            labels.push_back(std::stoi(key.substr(pos, next - pos)));
            pos = next + 1;
        }
        const Partition part = Partition::from_alloc(labels);
        std::vector<double> w(part.K() + 1, 0.0);
        double total = 0.0;
        for (int k = 0; k < part.K(); ++k) {
            w[k] = part.sizes[k] * std::exp(log_similarity_ratio(d, part.clusters[k], q.x, q.r, ctx.sim));
            total += w[k];
        }
        w[part.K()] = ctx.coh.M * std::exp(log_similarity_ratio(d, {}, q.x, q.r, ctx.sim));
        total += w[part.K()];
        double mean_term = 0.0;
        for (int k = 0; k < part.K(); ++k) {
            double sum = 0.0;
            for (int i : part.clusters[k]) sum += d.y[i];
            const double post_mean = (priors.kappa0 * priors.m0 + sum) / (priors.kappa0 + part.sizes[k]);
            mean_term += w[k] / total * post_mean;
        }
        mean_term += w[part.K()] / total * priors.m0;
        want += prob * mean_term;
    }

    McmcConfig cfg;
    cfg.iterations = 60000;
    cfg.burn_in = 5000;
    cfg.thin = 5;
    cfg.seed = 4;
    const PosteriorDraws draws = run_chain(d, cfg, ctx.sim, ctx.coh, ctx.priors);
    const double got = Predictor(d, draws, ctx).predictive_mean(q);
    CHECK(std::abs(got - want) < 0.05);
}

TEST_CASE("mspe") {
    CHECK(mspe(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(mspe(std::vector<double>{0, 0}, std::vector<double>{1, 3}) == doctest::Approx(5.0));
    CHECK_THROWS(mspe(std::vector<double>{1}, std::vector<double>{1, 2}));
}
