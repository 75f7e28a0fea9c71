#include "vdreg/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vdreg/errors.hpp"

namespace vdreg {

SimilarityConfig SimilarityConfig::defaults(int p) {
    SimilarityConfig cfg;
    cfg.gauss.assign(p, GaussianSimHyper{});
    cfg.binary.assign(p, BinarySimHyper{});
    return cfg;
}

SimilarityConfig SimilarityConfig::defaults(const Dataset& d) {
    return defaults(d.p);
}

void SimilarityConfig::validate() const {
    for (const auto& g : gauss)
        if (g.a <= 0.0 || g.b <= 0.0 || g.c <= 0.0) throw ConfigError("similarity hyperparameters a, b, c must be positive");
    for (const auto& b : binary)
        if (b.alpha0 <= 0.0 || b.beta0 <= 0.0) throw ConfigError("beta-binomial pseudocounts must be positive");
    if (cat_alpha <= 0.0) throw ConfigError("categorical pseudocount must be positive");
}

double log_marginal_gaussian_stats(int m, double sum, double sumsq, const GaussianSimHyper& h) {
    if (m == 0) return 0.0;
    // integrating mu then s2 gives a Student-t-type marginal:
    //   -(m/2) log(2 pi) - log(1 + m c)/2 + a log b - lgamma(a)
    //   + lgamma(a + m/2) - (a + m/2) log(b + S/2),  S = sumsq - c sum^2/(1 + m c)
    const double s_quad = sumsq - h.c * sum * sum / (1.0 + m * h.c);
    return -0.5 * m * std::log(2.0 * M_PI) - 0.5 * std::log1p(m * h.c) + h.a * std::log(h.b) - std::lgamma(h.a) +
           std::lgamma(h.a + 0.5 * m) - (h.a + 0.5 * m) * std::log(h.b + 0.5 * std::max(s_quad, 0.0));
}

double log_marginal_gaussian(std::span<const double> v, const GaussianSimHyper& h) {
    double sum = 0.0, sumsq = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument("log_marginal_gaussian: non-finite value");
        sum += x;
        sumsq += x * x;
    }
    return log_marginal_gaussian_stats(static_cast<int>(v.size()), sum, sumsq, h);
}

double log_marginal_beta_binomial_counts(int m, int ones, const BinarySimHyper& h) {
    if (m == 0) return 0.0;
    const auto log_beta = [](double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); };
    return log_beta(h.alpha0 + ones, h.beta0 + (m - ones)) - log_beta(h.alpha0, h.beta0);
}

double log_marginal_beta_binomial(std::span<const double> v, const BinarySimHyper& h) {
    int ones = 0;
    for (double x : v) {
        if (x != 0.0 && x != 1.0) throw std::invalid_argument("log_marginal_beta_binomial: value outside {0,1}");
        ones += (x == 1.0);
    }
    return log_marginal_beta_binomial_counts(static_cast<int>(v.size()), ones, h);
}

double categorical_mode_frequency(std::span<const int> codes) {
    if (codes.empty()) return 1.0;
    int max_code = 0;
    for (int c : codes) max_code = std::max(max_code, c);
    std::vector<int> counts(max_code + 1, 0);
    for (int c : codes) ++counts[c];
    return static_cast<double>(*std::max_element(counts.begin(), counts.end())) / codes.size();
}

double log_categorical_score(std::span<const int> counts, int m, const SimilarityConfig& cfg) {
    if (m == 0) return 0.0;
    if (cfg.cat_sim == CategoricalSim::mode_frequency) {
        const int modal = *std::max_element(counts.begin(), counts.end());
        // degree-weighted so pure clusters of different sizes multiply like the marginals
        return m * std::log(static_cast<double>(modal) / m);
    }
    const double alpha = cfg.cat_alpha;
    const double tot = alpha * counts.size();
    double lg = std::lgamma(tot) - std::lgamma(tot + m);
    for (int c : counts)
        if (c > 0) lg += std::lgamma(alpha + c) - std::lgamma(alpha);
    return lg;
}

ClusterSimilarity::ClusterSimilarity(const Dataset& d) {
    count_.assign(d.p, 0);
    sum_.assign(d.p, 0.0);
    sumsq_.assign(d.p, 0.0);
    ones_.assign(d.p, 0);
    cat_counts_.resize(d.p);
    for (int j = 0; j < d.p; ++j)
        if (d.kinds[j] == CovKind::categorical) cat_counts_[j].assign(std::max(d.n_levels[j], 1), 0);
}

void ClusterSimilarity::add(const Dataset& d, int unit) {
    for (int j = 0; j < d.p; ++j) {
        if (!d.observed(unit, j)) continue;
        const double v = d.value(unit, j);
        ++count_[j];
        switch (d.kinds[j]) {
            case CovKind::continuous:
                sum_[j] += v;
                sumsq_[j] += v * v;
                break;
            case CovKind::binary:
                ones_[j] += (v == 1.0);
                break;
            case CovKind::categorical:
                ++cat_counts_[j][static_cast<int>(v)];
                break;
        }
    }
}

void ClusterSimilarity::remove(const Dataset& d, int unit) {
    for (int j = 0; j < d.p; ++j) {
        if (!d.observed(unit, j)) continue;
        const double v = d.value(unit, j);
        --count_[j];
        switch (d.kinds[j]) {
            case CovKind::continuous:
                sum_[j] -= v;
                sumsq_[j] -= v * v;
                if (count_[j] == 0) {
                    sum_[j] = 0.0;  // clear accumulated rounding
                    sumsq_[j] = 0.0;
                }
                break;
            case CovKind::binary:
                ones_[j] -= (v == 1.0);
                break;
            case CovKind::categorical:
                --cat_counts_[j][static_cast<int>(v)];
                break;
        }
    }
}

double ClusterSimilarity::log_score_one(const Dataset& d, int j, const SimilarityConfig& cfg) const {
    switch (d.kinds[j]) {
        case CovKind::continuous:
            return log_marginal_gaussian_stats(count_[j], sum_[j], sumsq_[j], cfg.gauss[j]);
        case CovKind::binary:
            return log_marginal_beta_binomial_counts(count_[j], ones_[j], cfg.binary[j]);
        case CovKind::categorical:
            return log_categorical_score(cat_counts_[j], count_[j], cfg);
    }
    return 0.0;
}

double ClusterSimilarity::log_score(const Dataset& d, const SimilarityConfig& cfg) const {
    double total = 0.0;
    for (int j = 0; j < d.p; ++j) total += log_score_one(d, j, cfg);
    return total;
}

double ClusterSimilarity::log_ratio_one(const Dataset& d, int j, double value, const SimilarityConfig& cfg) const {
    switch (d.kinds[j]) {
        case CovKind::continuous:
            return log_marginal_gaussian_stats(count_[j] + 1, sum_[j] + value, sumsq_[j] + value * value, cfg.gauss[j]) -
                   log_marginal_gaussian_stats(count_[j], sum_[j], sumsq_[j], cfg.gauss[j]);
        case CovKind::binary:
            return log_marginal_beta_binomial_counts(count_[j] + 1, ones_[j] + (value == 1.0), cfg.binary[j]) -
                   log_marginal_beta_binomial_counts(count_[j], ones_[j], cfg.binary[j]);
        case CovKind::categorical: {
            const int code = static_cast<int>(value);
            if (code >= static_cast<int>(cat_counts_[j].size())) {
                // query code outside the training range: give it its own slot
                std::vector<int> ext(cat_counts_[j]);
                ext.resize(code + 1, 0);
                const double before = log_categorical_score(ext, count_[j], cfg);
                ++ext[code];
                return log_categorical_score(ext, count_[j] + 1, cfg) - before;
            }
            std::vector<int> ext(cat_counts_[j]);
            ++ext[code];
            return log_categorical_score(ext, count_[j] + 1, cfg) - log_categorical_score(cat_counts_[j], count_[j], cfg);
        }
    }
    return 0.0;
}

double ClusterSimilarity::log_ratio_add(const Dataset& d, int unit, const SimilarityConfig& cfg) const {
    double total = 0.0;
    for (int j = 0; j < d.p; ++j)
        if (d.observed(unit, j)) total += log_ratio_one(d, j, d.value(unit, j), cfg);
    return total;
}

double ClusterSimilarity::log_ratio_add_query(const Dataset& d, std::span<const double> x_new,
                                              std::span<const std::uint8_t> r_new, const SimilarityConfig& cfg) const {
    double total = 0.0;
    for (int j = 0; j < d.p; ++j)
        if (r_new[j]) total += log_ratio_one(d, j, x_new[j], cfg);
    return total;
}

double log_similarity_cluster(const Dataset& d, std::span<const int> members, const SimilarityConfig& cfg) {
    ClusterSimilarity cs(d);
    for (int i : members) cs.add(d, i);
    return cs.log_score(d, cfg);
}

double log_similarity_ratio(const Dataset& d, std::span<const int> members, std::span<const double> x_new,
                            std::span<const std::uint8_t> r_new, const SimilarityConfig& cfg) {
    ClusterSimilarity cs(d);
    for (int i : members) cs.add(d, i);
    return cs.log_ratio_add_query(d, x_new, r_new, cfg);
}

}  // namespace vdreg
