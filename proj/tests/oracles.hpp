#pragma once

// Independent reference implementations used only by tests. None of these
// share a code path with the library functions they check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "optlab/pricing.hpp"
#include "optlab/quadrature.hpp"
#include "optlab/rng.hpp"
#include "optlab/threads.hpp"

namespace oracles {

// Standard normal CDF by composite Gauss-Legendre integration of the density
// from 0 to |x|, folded with symmetry. Accurate to ~1e-15.
inline double norm_cdf_by_integration(double x) {
    const double ax = std::abs(x);
    auto density = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
    const int panels = 8;
    const double cap = std::min(ax, 40.0);
    double integral = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = cap * p / panels;
        const double hi = cap * (p + 1) / panels;
        integral += optlab::integrate_gauss_legendre(density, lo, hi, 64);
    }
    const double half = 0.5 + integral;
    return x >= 0.0 ? half : 1.0 - half;
}

// Black-Scholes call by integrating the discounted payoff against the
// lognormal risk-neutral density, transformed to the standard normal axis:
//   C = e^{-rT} Integral_{z*}^{inf} (S e^{(r - s^2/2)T + s sqrt(T) z} - K) phi(z) dz
// The lower limit z* is the payoff kink, so the integrand is smooth.
inline double bs_call_by_density_integration(const optlab::PricingInputs& in) {
    if (in.maturity == 0.0) return std::max(in.spot - in.strike, 0.0);
    if (in.vol == 0.0) {
        return std::max(in.spot - in.strike * std::exp(-in.rate * in.maturity), 0.0);
    }
    const double s_sqrt_t = in.vol * std::sqrt(in.maturity);
    const double drift = (in.rate - 0.5 * in.vol * in.vol) * in.maturity;
    const double z_star = (std::log(in.strike / in.spot) - drift) / s_sqrt_t;
    auto integrand = [&](double z) {
        const double st = in.spot * std::exp(drift + s_sqrt_t * z);
        const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        return (st - in.strike) * phi;
    };
    const double z_hi = std::max(z_star, 0.0) + 40.0;
    double integral = 0.0;
    const int panels = 16;
    for (int p = 0; p < panels; ++p) {
        const double lo = z_star + (z_hi - z_star) * p / panels;
        const double hi = z_star + (z_hi - z_star) * (p + 1) / panels;
        integral += optlab::integrate_gauss_legendre(integrand, lo, hi, 96);
    }
    return std::exp(-in.rate * in.maturity) * integral;
}

// Heston characteristic function evaluated in extended precision (long
// double), following the same published recursion but through an independent
// instantiation of the complex arithmetic.
inline std::complex<double> heston_cf_long_double(std::complex<double> u,
                                                  const optlab::PricingInputs& in,
                                                  const optlab::HestonParams& p, int j) {
    using C = std::complex<long double>;
    const C i(0.0L, 1.0L);
    const C uu(static_cast<long double>(u.real()), static_cast<long double>(u.imag()));
    const long double x = std::log(static_cast<long double>(in.spot));
    const long double a = static_cast<long double>(p.kappa) * static_cast<long double>(p.theta);
    const long double sigma = static_cast<long double>(p.sigma_v);
    const long double uj = (j == 1) ? 0.5L : -0.5L;
    const long double bj =
        (j == 1) ? static_cast<long double>(p.kappa) - static_cast<long double>(p.rho) * sigma
                 : static_cast<long double>(p.kappa);
    const long double tau = static_cast<long double>(in.maturity);
    const long double rho = static_cast<long double>(p.rho);

    const C beta = bj - rho * sigma * i * uu;
    const C d = std::sqrt(beta * beta - sigma * sigma * (2.0L * uj * i * uu - uu * uu));
    const C c = (beta - d) / (beta + d);
    const C e = std::exp(-d * tau);
    const C G = (1.0L - c * e) / (1.0L - c);
    const C Cterm = static_cast<long double>(in.rate) * i * uu * tau +
                    (a / (sigma * sigma)) * ((beta - d) * tau - 2.0L * std::log(G));
    const C D = ((beta - d) / (sigma * sigma)) * ((1.0L - e) / (1.0L - c * e));
    const C f = std::exp(Cterm + D * static_cast<long double>(p.v0) + i * uu * x);
    return {static_cast<double>(f.real()), static_cast<double>(f.imag())};
}

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
};

// Heston call by Euler full-truncation simulation: variance clipped at zero
// inside the drift and diffusion, spot stepped in log space. Path chunks get
// independent seeds, so the estimate does not depend on thread scheduling.
inline McEstimate heston_call_monte_carlo(const optlab::PricingInputs& in,
                                          const optlab::HestonParams& p, std::size_t paths,
                                          int steps_per_year, std::uint64_t seed) {
    const int steps = std::max(1, static_cast<int>(std::lround(steps_per_year * in.maturity)));
    const double dt = in.maturity / steps;
    const double sqrt_dt = std::sqrt(dt);
    const double rho_bar = std::sqrt(1.0 - p.rho * p.rho);

    const std::size_t chunk = 4096;
    const std::size_t n_chunks = (paths + chunk - 1) / chunk;
    std::vector<double> sum_per_chunk(n_chunks, 0.0);
    std::vector<double> sumsq_per_chunk(n_chunks, 0.0);

    optlab::parallel_for(n_chunks, [&](std::size_t ci) {
        optlab::Rng rng(optlab::derive_seed(seed, "mc-chunk", ci));
        const std::size_t begin = ci * chunk;
        const std::size_t end = std::min(paths, begin + chunk);
        double s_sum = 0.0, s_sumsq = 0.0;
        for (std::size_t path = begin; path < end; ++path) {
            double log_s = std::log(in.spot);
            double v = p.v0;
            for (int k = 0; k < steps; ++k) {
                const double zv = rng.normal();
                const double zs = p.rho * zv + rho_bar * rng.normal();
                const double v_plus = std::max(v, 0.0);
                const double sq = std::sqrt(v_plus);
                log_s += (in.rate - 0.5 * v_plus) * dt + sq * sqrt_dt * zs;
                v += p.kappa * (p.theta - v_plus) * dt + p.sigma_v * sq * sqrt_dt * zv;
            }
            const double payoff = std::max(std::exp(log_s) - in.strike, 0.0);
            s_sum += payoff;
            s_sumsq += payoff * payoff;
        }
        sum_per_chunk[ci] = s_sum;
        sumsq_per_chunk[ci] = s_sumsq;
    });

    double total = 0.0, total_sq = 0.0;
    for (std::size_t ci = 0; ci < n_chunks; ++ci) {
        total += sum_per_chunk[ci];
        total_sq += sumsq_per_chunk[ci];
    }
    const double n = static_cast<double>(paths);
    const double mean = total / n;
    const double var = std::max(total_sq / n - mean * mean, 0.0);
    const double disc = std::exp(-in.rate * in.maturity);
    return {disc * mean, disc * std::sqrt(var / n)};
}

}  // namespace oracles
