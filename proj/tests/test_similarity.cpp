#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "vdreg/rng.hpp"
#include "vdreg/similarity.hpp"

using namespace vdreg;

namespace {

// small mixed dataset used by the cluster-level tests
Dataset mixed_dataset() {
    Dataset d;
    d.n = 6;
    d.p = 2;
    d.kinds = {CovKind::continuous, CovKind::binary};
    d.names = {"z", "b"};
    const double xs[6] = {0.3, -0.7, 1.2, 0.0, -1.1, 2.0};
    const double bs[6] = {1, 0, 1, 1, 0, 1};
    const std::uint8_t masks[6][2] = {{1, 1}, {1, 0}, {0, 1}, {1, 1}, {0, 0}, {1, 1}};
    for (int i = 0; i < 6; ++i) {
        d.x.push_back(masks[i][0] ? xs[i] : std::nan(""));
        d.x.push_back(masks[i][1] ? bs[i] : std::nan(""));
        d.r.push_back(masks[i][0]);
        d.r.push_back(masks[i][1]);
        d.y.push_back(0.0);
    }
    d.finalize();
    return d;
}

}  // namespace

TEST_CASE("gaussian marginal: empty set scores zero") {
    CHECK(log_marginal_gaussian({}, GaussianSimHyper{}) == 0.0);
}

TEST_CASE("gaussian marginal matches 2-D quadrature on the reference point") {
    const GaussianSimHyper h{2.0, 1.0, 1.0};
    const std::vector<double> v = {0.0};
    const double closed = log_marginal_gaussian(v, h);
    const double quad = oracle::log_nig_marginal_quadrature(v, h);
    CHECK(std::abs(closed - quad) <= 1e-8 * std::abs(quad));
}

TEST_CASE("gaussian marginal matches quadrature for random configurations") {
    Rng rng(2024);
    for (int rep = 0; rep < 25; ++rep) {
        const GaussianSimHyper h{rng.uniform(1.5, 4.0), rng.uniform(0.5, 2.5), rng.uniform(0.4, 2.5)};
        const int m = static_cast<int>(rng.uniform_int(6));
        std::vector<double> v(m);
        for (auto& x : v) x = rng.uniform(-2.5, 2.5);
        const double closed = log_marginal_gaussian(v, h);
        const double quad = m == 0 ? 0.0 : oracle::log_nig_marginal_quadrature(v, h);
        CAPTURE(rep);
        CAPTURE(m);
        CHECK(std::abs(closed - quad) <= 1e-6 * std::max(1.0, std::abs(quad)));
    }
}

TEST_CASE("tight pairs score higher than spread pairs") {
    const GaussianSimHyper h{2.0, 1.0, 1.0};
    CHECK(log_marginal_gaussian(std::vector<double>{1.0, 1.0}, h) >
          log_marginal_gaussian(std::vector<double>{0.0, 2.0}, h));
}

TEST_CASE("peakedness: score decreases as a centered pair spreads") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const GaussianSimHyper h{rng.uniform(1.2, 5.0), rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0)};
        const double center = rng.uniform(-2.0, 2.0);
        double prev = log_marginal_gaussian(std::vector<double>{center, center}, h);
        for (double delta = 0.1; delta <= 3.0; delta += 0.1) {
            const double cur = log_marginal_gaussian(std::vector<double>{center - delta, center + delta}, h);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("permutation invariance of the marginals") {
    const GaussianSimHyper h{2.5, 1.3, 0.8};
    std::vector<double> v = {0.4, -1.2, 0.9, 2.2};
    const double base = log_marginal_gaussian(v, h);
    std::sort(v.begin(), v.end());
    do {
        CHECK(log_marginal_gaussian(v, h) == doctest::Approx(base).epsilon(1e-13));
    } while (std::next_permutation(v.begin(), v.end()));
}

TEST_CASE("sample-size consistency: the predictive integrates back to the marginal") {
    const GaussianSimHyper h{2.0, 1.0, 1.0};
    const std::vector<std::vector<double>> sets = {{}, {0.5}, {0.5, -0.2}, {0.5, -0.2, 1.4}};
    for (const auto& v : sets) {
        const double g_v = std::exp(log_marginal_gaussian(v, h));
        const auto integrand = [&](double w) {
            std::vector<double> ext = v;
            ext.push_back(w);
            return std::exp(log_marginal_gaussian(ext, h));
        };
        const double total = oracle::integrate_real_line(integrand, 1e-9);
        CHECK(total == doctest::Approx(g_v).epsilon(1e-6));
    }
}

TEST_CASE("beta-binomial marginal closed form") {
    const BinarySimHyper h{1.0, 1.0};
    CHECK(log_marginal_beta_binomial({}, h) == 0.0);
    CHECK(log_marginal_beta_binomial(std::vector<double>{1.0}, h) == doctest::Approx(std::log(0.5)));
    // Polya urn: (1/2) * (2/3)
    CHECK(log_marginal_beta_binomial(std::vector<double>{1.0, 1.0}, h) == doctest::Approx(std::log(1.0 / 3.0)));
    CHECK_THROWS(log_marginal_beta_binomial(std::vector<double>{2.0}, h));
}

TEST_CASE("categorical mode frequency") {
    CHECK(categorical_mode_frequency(std::vector<int>{3, 3, 3}) == doctest::Approx(1.0));
    CHECK(categorical_mode_frequency(std::vector<int>{1, 2}) == doctest::Approx(0.5));
    CHECK(categorical_mode_frequency(std::vector<int>{1, 1, 2}) == doctest::Approx(2.0 / 3.0));
    CHECK(categorical_mode_frequency({}) == doctest::Approx(1.0));
}

TEST_CASE("cluster similarity composes per-covariate closed forms") {
    const Dataset d = mixed_dataset();
    const SimilarityConfig cfg = SimilarityConfig::defaults(d);

    SUBCASE("all covariates missing contributes nothing") {
        const std::vector<int> members = {4};
        CHECK(log_similarity_cluster(d, members, cfg) == 0.0);
    }
    SUBCASE("single continuous covariate equals the gaussian marginal") {
        const std::vector<int> members = {0, 3};  // both observe z and b
        const std::vector<double> zs = {d.value(0, 0), d.value(3, 0)};
        const std::vector<double> bs = {d.value(0, 1), d.value(3, 1)};
        const double want = log_marginal_gaussian(zs, cfg.gauss[0]) + log_marginal_beta_binomial(bs, cfg.binary[1]);
        CHECK(log_similarity_cluster(d, members, cfg) == doctest::Approx(want).epsilon(1e-14));
    }
    SUBCASE("mixed masks gather observed members only") {
        const std::vector<int> members = {0, 1, 2, 4};
        // z observed for units 0,1; b observed for units 0,2
        const double want = log_marginal_gaussian(std::vector<double>{0.3, -0.7}, cfg.gauss[0]) +
                            log_marginal_beta_binomial(std::vector<double>{1.0, 1.0}, cfg.binary[1]);
        CHECK(log_similarity_cluster(d, members, cfg) == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("similarity ratio: trivial cases and identity with cluster differences") {
    const Dataset d = mixed_dataset();
    const SimilarityConfig cfg = SimilarityConfig::defaults(d);
    const std::vector<int> members = {0, 1, 3};

    SUBCASE("fully missing query contributes zero") {
        const std::vector<double> x = {std::nan(""), std::nan("")};
        const std::vector<std::uint8_t> r = {0, 0};
        CHECK(log_similarity_ratio(d, members, x, r, cfg) == 0.0);
    }
    SUBCASE("empty cluster gives the singleton score") {
        const std::vector<double> x = {0.8, std::nan("")};
        const std::vector<std::uint8_t> r = {1, 0};
        const double want = log_marginal_gaussian(std::vector<double>{0.8}, cfg.gauss[0]);
        CHECK(log_similarity_ratio(d, {}, x, r, cfg) == doctest::Approx(want).epsilon(1e-14));
    }
    SUBCASE("ratio equals the difference of cluster scores on random inputs") {
        Rng rng(71);
        for (int rep = 0; rep < 50; ++rep) {
            // grow a random subset and compare against adding each leftover unit
            std::vector<int> sub;
            for (int i = 0; i < d.n; ++i)
                if (rng.uniform() < 0.5) sub.push_back(i);
            for (int unit = 0; unit < d.n; ++unit) {
                if (std::find(sub.begin(), sub.end(), unit) != sub.end()) continue;
                std::vector<int> grown = sub;
                grown.push_back(unit);
                const double diff = log_similarity_cluster(d, grown, cfg) - log_similarity_cluster(d, sub, cfg);
                const double ratio = log_similarity_ratio(d, sub, d.row(unit), d.row_mask(unit), cfg);
                CHECK(std::abs(ratio - diff) < 1e-12);
            }
        }
    }
}

TEST_CASE("incremental cache agrees with from-scratch evaluation after churn") {
    const Dataset d = mixed_dataset();
    const SimilarityConfig cfg = SimilarityConfig::defaults(d);
    ClusterSimilarity cs(d);
    std::vector<int> members;
    Rng rng(17);
    for (int step = 0; step < 200; ++step) {
        if (!members.empty() && rng.uniform() < 0.45) {
            const int idx = static_cast<int>(rng.uniform_int(members.size()));
            cs.remove(d, members[idx]);
            members.erase(members.begin() + idx);
        } else {
            const int unit = static_cast<int>(rng.uniform_int(d.n));
            if (std::find(members.begin(), members.end(), unit) != members.end()) continue;
            cs.add(d, unit);
            members.push_back(unit);
        }
        CHECK(cs.log_score(d, cfg) == doctest::Approx(log_similarity_cluster(d, members, cfg)).epsilon(1e-11));
    }
}

TEST_CASE("degree-weighted mode-frequency favors larger pure clusters") {
    const SimilarityConfig cfg = SimilarityConfig::defaults(1);
    CHECK(log_categorical_score(std::vector<int>{3, 0}, 3, cfg) == doctest::Approx(0.0));
    CHECK(log_categorical_score(std::vector<int>{2, 1}, 3, cfg) == doctest::Approx(3.0 * std::log(2.0 / 3.0)));
}

TEST_CASE("dirichlet-multinomial alternative keeps the ratio identity") {
    Dataset d;
    d.n = 5;
    d.p = 1;
    d.kinds = {CovKind::categorical};
    d.names = {"k"};
    d.x = {0, 1, 0, 2, 1};
    d.r = {1, 1, 1, 1, 1};
    d.y.assign(5, 0.0);
    d.finalize();
    SimilarityConfig cfg = SimilarityConfig::defaults(d);
    cfg.cat_sim = CategoricalSim::dirichlet_multinomial;
    cfg.cat_alpha = 1.0;

    // one observation with three levels and alpha 1: marginal is 1/3
    CHECK(log_similarity_cluster(d, std::vector<int>{0}, cfg) == doctest::Approx(std::log(1.0 / 3.0)));

    const std::vector<int> sub = {0, 1, 3};
    const double diff = log_similarity_cluster(d, std::vector<int>{0, 1, 3, 4}, cfg) - log_similarity_cluster(d, sub, cfg);
    const double ratio = log_similarity_ratio(d, sub, d.row(4), d.row_mask(4), cfg);
    CHECK(ratio == doctest::Approx(diff).epsilon(1e-12));
}
