#include "vdreg/outcome.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vdreg {

namespace {

constexpr double kBetaFloor = 1e-12;   // keeps GIG/inverse-Gaussian conditionals proper
constexpr double kPhiFloor = 1e-20;

// mean and variance of the projected member likelihood
inline void member_moments(const Dataset& d, int i, const ClusterParams& theta, double& m, double& v) {
    m = theta.mu;
    v = theta.sigma2;
    for (int j = 0; j < d.p; ++j) {
        if (d.observed(i, j)) m += theta.beta[j] * d.value(i, j);
        else v += theta.beta[j] * theta.beta[j];
    }
}

bool all_members_complete(const Dataset& d, std::span<const int> members) {
    for (int i : members)
        for (int j = 0; j < d.p; ++j)
            if (!d.observed(i, j)) return false;
    return true;
}

// lower-triangular Cholesky of a small SPD matrix (row-major)
void cholesky(std::vector<double>& a, int q) {
    for (int i = 0; i < q; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * q + j];
            for (int t = 0; t < j; ++t) s -= a[i * q + t] * a[j * q + t];
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
                a[i * q + i] = std::sqrt(s);
            } else {
                a[i * q + j] = s / a[j * q + j];
            }
        }
        for (int j = i + 1; j < q; ++j) a[i * q + j] = 0.0;
    }
}

}  // namespace

double normal_logpdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

double vdreg_loglik(double y, const ClusterParams& theta) {
    return normal_logpdf(y, theta.mu, theta.sigma2);
}

double vdlreg_loglik(double y, std::span<const double> z, std::span<const std::uint8_t> r, const ClusterParams& theta) {
    double m = theta.mu;
    double v = theta.sigma2;
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j]) m += theta.beta[j] * z[j];
        else v += theta.beta[j] * theta.beta[j];
    }
    return normal_logpdf(y, m, v);
}

double vdlreg_cluster_loglik(const Dataset& d, std::span<const int> members, const ClusterParams& theta) {
    double total = 0.0;
    for (int i : members) {
        double m, v;
        member_moments(d, i, theta, m, v);
        total += normal_logpdf(d.y[i], m, v);
    }
    return total;
}

ProjectionCheck projection_identity_check(const ClusterParams& theta, std::span<const std::uint8_t> r,
                                          std::span<const double> z, double y, int mc_samples, std::uint64_t seed) {
    if (mc_samples < 1000) throw std::invalid_argument("projection_identity_check: need at least 1000 samples");
    ProjectionCheck out;
    out.closed_form = std::exp(vdlreg_loglik(y, z, r, theta));

    double base_mean = theta.mu;
    std::vector<int> missing;
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j]) base_mean += theta.beta[j] * z[j];
        else missing.push_back(static_cast<int>(j));
    }
    if (missing.empty()) {
        out.mc_estimate = out.closed_form;
        out.mc_std_error = 0.0;
        return out;
    }
    Rng rng(seed);
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < mc_samples; ++s) {
        double m = base_mean;
        for (int j : missing) m += theta.beta[j] * rng.normal();
        const double dens = std::exp(normal_logpdf(y, m, theta.sigma2));
        sum += dens;
        sumsq += dens * dens;
    }
    out.mc_estimate = sum / mc_samples;
    const double var = std::max(0.0, sumsq / mc_samples - out.mc_estimate * out.mc_estimate);
    out.mc_std_error = std::sqrt(var / mc_samples);
    return out;
}

double vdreg_log_marginal(std::span<const double> ys, const VdregPriors& pr) {
    const int m = static_cast<int>(ys.size());
    if (m == 0) return 0.0;
    double sum = 0.0;
    for (double y : ys) sum += y;
    const double mean = sum / m;
    double ss = 0.0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    const double kn = pr.kappa0 + m;
    const double an = pr.a0 + 0.5 * m;
    const double bn = pr.b0 + 0.5 * (ss + pr.kappa0 * m * (mean - pr.m0) * (mean - pr.m0) / kn);
    return -0.5 * m * std::log(2.0 * M_PI) + 0.5 * std::log(pr.kappa0 / kn) + pr.a0 * std::log(pr.b0) -
           std::lgamma(pr.a0) + std::lgamma(an) - an * std::log(bn);
}

ClusterParams sample_vdreg_params(std::span<const double> ys, const VdregPriors& pr, Rng& rng) {
    const int m = static_cast<int>(ys.size());
    if (m == 0) throw std::invalid_argument("sample_vdreg_params: empty cluster");
    double sum = 0.0;
    for (double y : ys) sum += y;
    const double mean = sum / m;
    double ss = 0.0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    const double kn = pr.kappa0 + m;
    const double mn = (pr.kappa0 * pr.m0 + sum) / kn;
    const double an = pr.a0 + 0.5 * m;
    const double bn = pr.b0 + 0.5 * (ss + pr.kappa0 * m * (mean - pr.m0) * (mean - pr.m0) / kn);
    ClusterParams theta;
    theta.sigma2 = rng.inv_gamma(an, bn);
    theta.mu = rng.normal(mn, std::sqrt(theta.sigma2 / kn));
    return theta;
}

ClusterParams sample_vdreg_prior(const VdregPriors& pr, Rng& rng) {
    ClusterParams theta;
    theta.sigma2 = rng.inv_gamma(pr.a0, pr.b0);
    theta.mu = rng.normal(pr.m0, std::sqrt(theta.sigma2 / pr.kappa0));
    return theta;
}

DLState sample_dl_prior(int p, double a, Rng& rng) {
    DLState dl;
    dl.a = a;
    dl.psi.resize(p);
    dl.phi.resize(p);
    for (int j = 0; j < p; ++j) dl.psi[j] = rng.exponential(0.5);
    std::vector<double> alpha(p, a);
    rng.dirichlet(alpha, dl.phi);
    for (auto& v : dl.phi) v = std::max(v, kPhiFloor);
    dl.tau = rng.gamma(p * a, 0.5);
    return dl;
}

ClusterParams sample_vdlreg_prior(int p, const VdlregPriors& pr, const DLState& dl, Rng& rng) {
    ClusterParams theta;
    theta.mu = rng.normal(pr.m0, std::sqrt(pr.v0));
    theta.sigma2 = rng.inv_gamma(pr.a0, pr.b0);
    theta.beta.resize(p);
    for (int j = 0; j < p; ++j) theta.beta[j] = rng.normal(0.0, std::sqrt(dl.slope_var(j)));
    return theta;
}

void update_dl_state(std::span<const double> beta, DLState& dl, Rng& rng) {
    const int p = static_cast<int>(beta.size());
    // local scales: 1/psi_j ~ InvGauss(phi_j tau / |beta_j|, 1)
    for (int j = 0; j < p; ++j) {
        const double abs_b = std::max(std::abs(beta[j]), kBetaFloor);
        const double mu_ig = dl.phi[j] * dl.tau / abs_b;
        dl.psi[j] = 1.0 / rng.inverse_gaussian(mu_ig, 1.0);
    }
    // global scale: GIG(p(a-1), 2 sum |beta_j|/phi_j, 1)
    double chi = 0.0;
    for (int j = 0; j < p; ++j) chi += std::abs(beta[j]) / dl.phi[j];
    dl.tau = rng.gig(p * dl.a - p, 2.0 * std::max(chi, kBetaFloor), 1.0);
    // simplex weights: T_j ~ GIG(a-1, 2|beta_j|, 1), phi_j = T_j / sum T
    std::vector<double> t(p);
    double total = 0.0;
    for (int j = 0; j < p; ++j) {
        t[j] = rng.gig(dl.a - 1.0, 2.0 * std::max(std::abs(beta[j]), kBetaFloor), 1.0);
        total += t[j];
    }
    double renorm = 0.0;
    for (int j = 0; j < p; ++j) {
        dl.phi[j] = std::max(t[j] / total, kPhiFloor);
        renorm += dl.phi[j];
    }
    for (int j = 0; j < p; ++j) dl.phi[j] /= renorm;
}

bool vdlreg_mh_beta(const Dataset& d, std::span<const int> members, ClusterParams& theta, int j, const DLState& dl,
                    double step, Rng& rng) {
    const double old = theta.beta[j];
    const double prop = old + step * rng.normal();
    const double prior_var = std::max(dl.slope_var(j), 1e-300);

    double delta = 0.5 * (old * old - prop * prop) / prior_var;
    for (int i : members) {
        double m, v;
        member_moments(d, i, theta, m, v);
        if (d.observed(i, j)) {
            const double m_new = m + (prop - old) * d.value(i, j);
            delta += normal_logpdf(d.y[i], m_new, v) - normal_logpdf(d.y[i], m, v);
        } else {
            const double v_new = v - old * old + prop * prop;
            delta += normal_logpdf(d.y[i], m, v_new) - normal_logpdf(d.y[i], m, v);
        }
    }
    if (std::log(rng.uniform()) < delta) {
        theta.beta[j] = prop;
        return true;
    }
    return false;
}

bool vdlreg_mh_logsigma(const Dataset& d, std::span<const int> members, ClusterParams& theta, const VdlregPriors& pr,
                        double step, Rng& rng) {
    const double old = theta.sigma2;
    const double log_prop = std::log(old) + step * rng.normal();
    const double prop = std::exp(log_prop);

    // IG(a0, b0) prior plus the log-scale Jacobian
    auto log_prior = [&](double s2) { return -(pr.a0 + 1.0) * std::log(s2) - pr.b0 / s2 + std::log(s2); };
    double delta = log_prior(prop) - log_prior(old);
    ClusterParams prop_theta = theta;
    prop_theta.sigma2 = prop;
    delta += vdlreg_cluster_loglik(d, members, prop_theta) - vdlreg_cluster_loglik(d, members, theta);
    if (std::log(rng.uniform()) < delta) {
        theta.sigma2 = prop;
        return true;
    }
    return false;
}

void vdlreg_update_mu(const Dataset& d, std::span<const int> members, ClusterParams& theta, const VdlregPriors& pr,
                      Rng& rng) {
    double prec = 1.0 / pr.v0;
    double wsum = pr.m0 / pr.v0;
    for (int i : members) {
        double m, v;
        member_moments(d, i, theta, m, v);
        const double resid = d.y[i] - (m - theta.mu);
        prec += 1.0 / v;
        wsum += resid / v;
    }
    const double var = 1.0 / prec;
    theta.mu = rng.normal(wsum * var, std::sqrt(var));
}

namespace {

void vdlreg_conjugate_update(const Dataset& d, std::span<const int> members, ClusterParams& theta, const DLState& dl,
                             const VdlregPriors& pr, Rng& rng) {
    const int p = d.p;
    const int q = p + 1;
    const int m = static_cast<int>(members.size());

    // gamma = (mu, beta); A = X'X/sigma2 + prior precision, rhs = X'y/sigma2 + prior part
    std::vector<double> a(q * q, 0.0), rhs(q, 0.0), xi(q);
    for (int i : members) {
        xi[0] = 1.0;
        for (int j = 0; j < p; ++j) xi[j + 1] = d.value(i, j);
        for (int r0 = 0; r0 < q; ++r0) {
            rhs[r0] += xi[r0] * d.y[i] / theta.sigma2;
            for (int c = 0; c <= r0; ++c) a[r0 * q + c] += xi[r0] * xi[c] / theta.sigma2;
        }
    }
    for (int r0 = 0; r0 < q; ++r0)
        for (int c = r0 + 1; c < q; ++c) a[r0 * q + c] = a[c * q + r0];
    a[0] += 1.0 / pr.v0;
    rhs[0] += pr.m0 / pr.v0;
    for (int j = 0; j < p; ++j) a[(j + 1) * q + (j + 1)] += 1.0 / std::max(dl.slope_var(j), 1e-300);

    cholesky(a, q);
    // mean: solve L L' mean = rhs
    std::vector<double> w(q), gamma(q);
    for (int i = 0; i < q; ++i) {
        double s = rhs[i];
        for (int t = 0; t < i; ++t) s -= a[i * q + t] * w[t];
        w[i] = s / a[i * q + i];
    }
    for (int i = q - 1; i >= 0; --i) {
        double s = w[i];
        for (int t = i + 1; t < q; ++t) s -= a[t * q + i] * gamma[t];
        gamma[i] = s / a[i * q + i];
    }
    // draw: gamma += L^-T z
    std::vector<double> z(q);
    for (auto& v : z) v = rng.normal();
    for (int i = q - 1; i >= 0; --i) {
        double s = z[i];
        for (int t = i + 1; t < q; ++t) s -= a[t * q + i] * z[t];
        z[i] = s / a[i * q + i];
    }
    theta.mu = gamma[0] + z[0];
    for (int j = 0; j < p; ++j) theta.beta[j] = gamma[j + 1] + z[j + 1];

    // sigma2 | gamma ~ IG(a0 + m/2, b0 + rss/2)
    double rss = 0.0;
    for (int i : members) {
        double fit = theta.mu;
        for (int j = 0; j < p; ++j) fit += theta.beta[j] * d.value(i, j);
        rss += (d.y[i] - fit) * (d.y[i] - fit);
    }
    theta.sigma2 = rng.inv_gamma(pr.a0 + 0.5 * m, pr.b0 + 0.5 * rss);
}

void robbins_monro(double& step, bool accepted, long round) {
    const double gain = 1.0 / std::pow(static_cast<double>(round) + 10.0, 0.6);
    step = std::exp(std::log(step) + gain * ((accepted ? 1.0 : 0.0) - 0.44));
    step = std::clamp(step, 1e-4, 50.0);
}

}  // namespace

void sample_vdlreg_params(const Dataset& d, std::span<const int> members, ClusterParams& theta, const DLState& dl,
                          const VdlregPriors& pr, Rng& rng, MhScales& scales, bool adapt) {
    if (members.empty()) throw std::invalid_argument("sample_vdlreg_params: empty cluster");
    if (static_cast<int>(theta.beta.size()) != d.p) theta.beta.assign(d.p, 0.0);

    if (all_members_complete(d, members)) {
        vdlreg_conjugate_update(d, members, theta, dl, pr, rng);
        return;
    }
    vdlreg_update_mu(d, members, theta, pr, rng);
    for (int j = 0; j < d.p; ++j) {
        const bool acc = vdlreg_mh_beta(d, members, theta, j, dl, scales.beta_step[j], rng);
        ++scales.beta_attempts;
        scales.beta_accepts += acc;
        if (adapt) robbins_monro(scales.beta_step[j], acc, ++scales.adapt_rounds);
    }
    const bool acc = vdlreg_mh_logsigma(d, members, theta, pr, scales.log_sigma_step, rng);
    ++scales.sigma_attempts;
    scales.sigma_accepts += acc;
    if (adapt) robbins_monro(scales.log_sigma_step, acc, ++scales.adapt_rounds);
}

}  // namespace vdreg
