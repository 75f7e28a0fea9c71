#include "vdreg/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vdreg {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream_name) {
    std::uint64_t state = seed ^ rotl(fnv1a64(stream_name), 17);
    // one extra round so nearby seeds with equal names decorrelate
    splitmix64(state);
    return splitmix64(state);
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t state = seed;
    for (auto& w : s_) w = splitmix64(state);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    for (;;) {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        if (u > 0.0 && u < 1.0) return u;
    }
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    // rejection to avoid modulo bias
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    for (;;) {
        const std::uint64_t v = next_u64();
        if (v < limit) return v % n;
    }
}

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::normal(double mean, double sd) {
    return mean + sd * normal();
}

double Rng::exponential(double rate) {
    return -std::log(uniform()) / rate;
}

double Rng::gamma(double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0) throw std::invalid_argument("gamma: shape and rate must be positive");
    if (shape < 1.0) {
        // boost via Gamma(shape+1) and a uniform power
        const double g = gamma(shape + 1.0, 1.0);
        return g * std::pow(uniform(), 1.0 / shape) / rate;
    }
    // Marsaglia-Tsang squeeze
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

double Rng::inv_gamma(double shape_a, double rate_b) {
    return rate_b == 0.0 ? 0.0 : 1.0 / gamma(shape_a, rate_b);
}

double Rng::beta(double a, double b) {
    const double g1 = gamma(a, 1.0);
    const double g2 = gamma(b, 1.0);
    return g1 / (g1 + g2);
}

void Rng::dirichlet(std::span<const double> alpha, std::span<double> out) {
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out[i] = gamma(alpha[i], 1.0);
        total += out[i];
    }
    for (auto& v : out) v /= total;
}

double Rng::inverse_gaussian(double mu, double lambda) {
    // Michael-Schucany-Haas, rearranged so the root stays positive for huge mu*y
    const double nu = normal();
    const double y = nu * nu;
    if (y == 0.0) return mu;
    const double u = 4.0 * lambda / (mu * y);
    const double root = std::sqrt(1.0 + u);
    const double x = mu * (root - 1.0) / (root + 1.0);
    if (uniform() <= mu / (mu + x)) return x;
    return mu * mu / x;
}

double Rng::gig(double lambda, double chi, double psi) {
    // limiting cases reduce to gamma / inverse gamma
    constexpr double kTiny = 1e-14;
    if (chi < kTiny) {
        if (lambda > 0.0) return gamma(lambda, psi / 2.0);
        chi = kTiny;  // lambda <= 0 with chi -> 0 degenerates at 0; keep proper
    }
    if (psi < kTiny) {
        if (lambda < 0.0) return inv_gamma(-lambda, chi / 2.0);
        psi = kTiny;
    }
    const double omega = std::sqrt(chi * psi);
    const double scale = std::sqrt(chi / psi);
    if (lambda >= 0.0) return scale * gig_symmetric(lambda, omega);
    return scale / gig_symmetric(-lambda, omega);
}

double Rng::gig_symmetric(double lambda, double omega) {
    // Devroye (2014): sample T = log X shifted to its mode, where the
    // log-density is psi(t) = -A (cosh t - 1) - lambda (sinh t - t),
    // A = sqrt(lambda^2 + omega^2), using a uniform-center / exponential-tail
    // envelope built from tangents at t and -s.
    const double big_a = std::sqrt(lambda * lambda + omega * omega);
    const double alpha = big_a - lambda;  // exp-tail coefficient, > 0

    auto psi_fn = [&](double t) { return -big_a * (std::cosh(t) - 1.0) - lambda * (std::sinh(t) - t); };
    auto dpsi_fn = [&](double t) { return -big_a * std::sinh(t) - lambda * (std::cosh(t) - 1.0); };

    double t = 1.0;
    {
        const double v = -psi_fn(1.0);
        if (v > 2.0) t = std::sqrt(2.0 / big_a);
        else if (v < 0.5) t = std::log(4.0 / (alpha + 2.0 * lambda));
    }
    double s = 1.0;
    {
        const double v = -psi_fn(-1.0);
        if (v > 2.0) {
            s = std::sqrt(4.0 / (alpha * std::cosh(1.0) + lambda));
        } else if (v < 0.5) {
            const double b = std::log(1.0 + 1.0 / alpha + std::sqrt(1.0 / (alpha * alpha) + 2.0 / alpha));
            s = (lambda > 0.0) ? std::min(1.0 / lambda, b) : b;
        }
    }

    const double eta = -psi_fn(t);
    const double theta = -dpsi_fn(t);
    const double zeta = -psi_fn(-s);
    const double xi = dpsi_fn(-s);
    const double p = 1.0 / xi;
    const double r = 1.0 / theta;
    const double t_prime = t - r * eta;
    const double s_prime = s - p * zeta;
    const double q = t_prime + s_prime;

    const double w_total = q + r + p;
    double draw = 0.0;
    for (;;) {
        const double u = uniform();
        const double v = uniform();
        const double w = uniform();
        double tt;
        if (u < q / w_total) {
            tt = -s_prime + q * v;
        } else if (u < (q + r) / w_total) {
            tt = t_prime - r * std::log(v);
        } else {
            tt = -s_prime + p * std::log(v);
        }
        double log_env;
        if (tt > t_prime) {
            log_env = -eta - theta * (tt - t);
        } else if (tt < -s_prime) {
            log_env = -zeta + xi * (tt + s);
        } else {
            log_env = 0.0;
        }
        if (std::log(w) + log_env <= psi_fn(tt)) {
            draw = tt;
            break;
        }
    }
    // undo the mode shift: X = exp(T + t*), exp(t*) = lambda/omega + sqrt(1 + (lambda/omega)^2)
    const double lo = lambda / omega;
    return std::exp(draw) * (lo + std::sqrt(1.0 + lo * lo));
}

int Rng::categorical_from_log_weights(std::span<const double> logw) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logw) mx = std::max(mx, v);
    double total = 0.0;
    for (double v : logw) total += std::exp(v - mx);
    const double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
        acc += std::exp(logw[i] - mx);
        if (u <= acc) return static_cast<int>(i);
    }
    return static_cast<int>(logw.size()) - 1;
}

double log_sum_exp(std::span<const double> v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double total = 0.0;
    for (double x : v) total += std::exp(x - mx);
    return mx + std::log(total);
}

}  // namespace vdreg
