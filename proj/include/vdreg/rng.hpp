#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace vdreg {

// Derives an independent child seed from a root seed and a stream name.
// All randomness in a run flows from one user seed through named streams,
// so results are reproducible regardless of thread scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream_name);

// xoshiro256++ with explicit samplers. The standard-library distributions
// are avoided on purpose: their draw sequences are implementation-defined,
// which would break the bit-exact reproducibility contract.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform on (0,1), never returns 0 or 1
    double uniform();
    double uniform(double lo, double hi);

    // integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n);

    double normal();  // standard normal (Box-Muller, no cached spare)
    double normal(double mean, double sd);

    double exponential(double rate);

    // shape/rate parameterization, mean = shape/rate
    double gamma(double shape, double rate);

    // inverse gamma with mean rate_b/(shape_a - 1)
    double inv_gamma(double shape_a, double rate_b);

    double beta(double a, double b);

    void dirichlet(std::span<const double> alpha, std::span<double> out);

    // Inverse-Gaussian(mu, lambda), density
    //   sqrt(lambda/(2 pi x^3)) exp(-lambda (x-mu)^2 / (2 mu^2 x))
    double inverse_gaussian(double mu, double lambda);

    // Generalized inverse Gaussian with density proportional to
    //   x^(lambda-1) exp(-(psi x + chi / x) / 2),  x > 0.
    double gig(double lambda, double chi, double psi);

    // index sampled proportionally to exp(logw[i] - max logw)
    int categorical_from_log_weights(std::span<const double> logw);

  private:
    std::uint64_t s_[4];

    // symmetric two-parameter form, density ~ x^(lambda-1) exp(-omega (x + 1/x)/2),
    // lambda >= 0, omega > 0
    double gig_symmetric(double lambda, double omega);
};

double log_sum_exp(std::span<const double> v);

}  // namespace vdreg
