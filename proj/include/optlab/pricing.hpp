#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include "optlab/errors.hpp"
#include "optlab/quadrature.hpp"

// European call pricing: Black-Scholes closed form and Heston stochastic
// volatility via characteristic-function quadrature. Everything here is a
// pure function of its arguments and safe to call from any thread.

namespace optlab {

// One pricing scenario: spot, strike, continuously-compounded rate, maturity
// in years, annualized volatility.
struct PricingInputs {
    double spot = 0.0;
    double strike = 0.0;
    double rate = 0.0;
    double maturity = 0.0;
    double vol = 0.0;

    void validate() const {
        if (!(std::isfinite(spot) && std::isfinite(strike) && std::isfinite(rate) &&
              std::isfinite(maturity) && std::isfinite(vol))) {
            throw InvalidArgument("pricing inputs must be finite");
        }
        if (spot <= 0.0) throw InvalidArgument("spot must be > 0");
        if (strike <= 0.0) throw InvalidArgument("strike must be > 0");
        if (maturity < 0.0) throw InvalidArgument("maturity must be >= 0");
        if (vol < 0.0) throw InvalidArgument("vol must be >= 0");
    }
};

// Heston parameters: initial variance, mean-reversion speed, long-run
// variance, vol of vol, spot/vol correlation.
struct HestonParams {
    double v0 = 0.04;
    double kappa = 2.0;
    double theta = 0.04;
    double sigma_v = 0.5;
    double rho = -0.7;

    void validate() const {
        if (!(std::isfinite(v0) && std::isfinite(kappa) && std::isfinite(theta) &&
              std::isfinite(sigma_v) && std::isfinite(rho))) {
            throw InvalidArgument("Heston parameters must be finite");
        }
        if (v0 < 0.0) throw InvalidArgument("v0 must be >= 0");
        if (kappa <= 0.0) throw InvalidArgument("kappa must be > 0");
        if (theta < 0.0) throw InvalidArgument("theta must be >= 0");
        if (sigma_v < 0.0) throw InvalidArgument("sigma_v must be >= 0");
        if (rho < -1.0 || rho > 1.0) throw InvalidArgument("rho must be in [-1, 1]");
    }
};

enum class QuadScheme { GaussLegendre, AdaptiveSimpson };

// Integration settings for the Heston probabilities P1/P2 on [0, U].
struct QuadratureConfig {
    int node_count = 128;
    double truncation_bound = 200.0;
    QuadScheme scheme = QuadScheme::GaussLegendre;
    // Bound for the one-step refinement check (nodes vs 2x nodes).
    double convergence_tol = 1e-6;

    void validate() const {
        if (node_count < 16) throw InvalidArgument("node_count must be >= 16");
        if (!(truncation_bound > 0.0)) throw InvalidArgument("truncation_bound must be > 0");
        if (!(convergence_tol > 0.0)) throw InvalidArgument("convergence_tol must be > 0");
    }
};

/// Standard normal CDF, accurate to ~1e-16 absolute.
inline double norm_cdf(double x) {
    if (!std::isfinite(x)) throw InvalidArgument("norm_cdf: non-finite input");
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

/// Black-Scholes European call. T = 0 returns intrinsic payoff; sigma = 0
/// returns discounted intrinsic value.
inline double bs_call(const PricingInputs& in) {
    in.validate();
    if (in.maturity == 0.0) return std::max(in.spot - in.strike, 0.0);
    const double disc_strike = in.strike * std::exp(-in.rate * in.maturity);
    if (in.vol == 0.0) return std::max(in.spot - disc_strike, 0.0);
    const double sq = in.vol * std::sqrt(in.maturity);
    const double d1 =
        (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.vol * in.vol) * in.maturity) / sq;
    const double d2 = d1 - sq;
    return in.spot * norm_cdf(d1) - disc_strike * norm_cdf(d2);
}

/// Black-Scholes European put (closed form, not parity).
inline double bs_put(const PricingInputs& in) {
    in.validate();
    if (in.maturity == 0.0) return std::max(in.strike - in.spot, 0.0);
    const double disc_strike = in.strike * std::exp(-in.rate * in.maturity);
    if (in.vol == 0.0) return std::max(disc_strike - in.spot, 0.0);
    const double sq = in.vol * std::sqrt(in.maturity);
    const double d1 =
        (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.vol * in.vol) * in.maturity) / sq;
    const double d2 = d1 - sq;
    return disc_strike * norm_cdf(-d2) - in.spot * norm_cdf(-d1);
}

namespace detail {

// Heston characteristic function phi_j, j in {1, 2}, in the branch-cut-safe
// arrangement: the log argument G stays away from the negative real axis for
// all maturities, so no winding correction is needed.
template <typename Complex>
Complex heston_cf(Complex u, const PricingInputs& in, const HestonParams& p, int j) {
    using Real = typename Complex::value_type;
    const Complex i(Real(0), Real(1));
    const Real x = std::log(Real(in.spot));
    const Real a = Real(p.kappa) * Real(p.theta);
    const Real sigma = Real(p.sigma_v);
    const Real sigma2 = sigma * sigma;
    const Real uj = (j == 1) ? Real(0.5) : Real(-0.5);
    const Real bj = (j == 1) ? Real(p.kappa) - Real(p.rho) * sigma : Real(p.kappa);
    const Real tau = Real(in.maturity);

    const Complex beta = bj - Real(p.rho) * sigma * i * u;
    const Complex d = std::sqrt(beta * beta - sigma2 * (Real(2) * uj * i * u - u * u));
    // c = 1/g; computing it as a direct ratio keeps u = 0 finite.
    const Complex c = (beta - d) / (beta + d);
    const Complex e = std::exp(-d * tau);
    const Complex G = (Real(1) - c * e) / (Real(1) - c);
    const Complex C =
        Real(in.rate) * i * u * tau + (a / sigma2) * ((beta - d) * tau - Real(2) * std::log(G));
    const Complex D = ((beta - d) / sigma2) * ((Real(1) - e) / (Real(1) - c * e));
    return std::exp(C + D * Real(p.v0) + i * u * x);
}

// With sigma_v = 0 the variance path is the deterministic mean-reversion ODE;
// the price is Black-Scholes at the root-mean-square volatility.
inline double heston_deterministic_vol(const PricingInputs& in, const HestonParams& p) {
    const double kt = p.kappa * in.maturity;
    const double integrated_var =
        p.theta * in.maturity + (p.v0 - p.theta) * (1.0 - std::exp(-kt)) / p.kappa;
    PricingInputs bs = in;
    bs.vol = std::sqrt(std::max(integrated_var, 0.0) / in.maturity);
    return bs_call(bs);
}

struct HestonProbs {
    double p1 = 0.0;
    double p2 = 0.0;
};

inline HestonProbs heston_probabilities(const PricingInputs& in, const HestonParams& p,
                                        const QuadratureConfig& quad, int node_count) {
    const double log_strike = std::log(in.strike);
    auto integrand = [&](int j) {
        return [&, j](double phi) {
            const std::complex<double> u(phi, 0.0);
            const std::complex<double> i(0.0, 1.0);
            const std::complex<double> f = heston_cf(u, in, p, j);
            return (std::exp(-i * u * log_strike) * f / (i * u)).real();
        };
    };
    HestonProbs probs;
    if (quad.scheme == QuadScheme::GaussLegendre) {
        probs.p1 = 0.5 + integrate_gauss_legendre(integrand(1), 0.0, quad.truncation_bound,
                                                  node_count) / M_PI;
        probs.p2 = 0.5 + integrate_gauss_legendre(integrand(2), 0.0, quad.truncation_bound,
                                                  node_count) / M_PI;
    } else {
        // Simpson needs the integrand at 0; nudge off the removable pole.
        const double lo = 1e-10;
        probs.p1 = 0.5 + integrate_adaptive_simpson(integrand(1), lo, quad.truncation_bound,
                                                    quad.convergence_tol * 0.1,
                                                    node_count * 64) / M_PI;
        probs.p2 = 0.5 + integrate_adaptive_simpson(integrand(2), lo, quad.truncation_bound,
                                                    quad.convergence_tol * 0.1,
                                                    node_count * 64) / M_PI;
    }
    probs.p1 = std::clamp(probs.p1, 0.0, 1.0);
    probs.p2 = std::clamp(probs.p2, 0.0, 1.0);
    return probs;
}

inline void heston_validate(const PricingInputs& in, const HestonParams& p) {
    in.validate();
    p.validate();
    if (in.maturity <= 0.0) throw InvalidArgument("Heston pricing requires T > 0");
    if (p.v0 == 0.0 && p.sigma_v > 0.0) {
        throw InvalidArgument("Heston with v0 = 0 and sigma_v > 0 is not supported");
    }
}

}  // namespace detail

/// Heston characteristic function phi_j(u) for j in {1, 2}. Requires T > 0
/// and sigma_v > 0 (the sigma_v = 0 limit is handled inside heston_call).
inline std::complex<double> heston_char_fn(std::complex<double> u, const PricingInputs& in,
                                           const HestonParams& params, int j) {
    in.validate();
    params.validate();
    if (in.maturity <= 0.0) throw InvalidArgument("heston_char_fn requires T > 0");
    if (params.sigma_v <= 0.0) throw InvalidArgument("heston_char_fn requires sigma_v > 0");
    if (j != 1 && j != 2) throw InvalidArgument("characteristic function index must be 1 or 2");
    return detail::heston_cf(u, in, params, j);
}

/// Heston European call C = S*P1 - K*exp(-rT)*P2 with P1, P2 integrated on
/// [0, U]. A one-step refinement (node_count vs 2*node_count) guards
/// convergence; disagreement beyond convergence_tol raises NumericalError
/// with both estimates.
inline double heston_call(const PricingInputs& in, const HestonParams& params,
                          const QuadratureConfig& quad = {}) {
    detail::heston_validate(in, params);
    quad.validate();
    if (params.sigma_v < 1e-12) return detail::heston_deterministic_vol(in, params);

    const double disc_strike = in.strike * std::exp(-in.rate * in.maturity);
    auto price_with = [&](int nodes) {
        const auto probs = detail::heston_probabilities(in, params, quad, nodes);
        return in.spot * probs.p1 - disc_strike * probs.p2;
    };
    if (quad.scheme == QuadScheme::AdaptiveSimpson) {
        return price_with(quad.node_count);  // convergence handled inside
    }
    const double coarse = price_with(quad.node_count);
    const double fine = price_with(quad.node_count * 2);
    if (std::abs(fine - coarse) > quad.convergence_tol) {
        std::ostringstream msg;
        msg << "Heston quadrature did not converge: " << quad.node_count << " nodes -> " << coarse
            << ", " << 2 * quad.node_count << " nodes -> " << fine << " on [0, "
            << quad.truncation_bound << "]";
        throw NumericalError(msg.str());
    }
    return fine;
}

/// Heston European put from the same probabilities, integrated afresh:
/// P = K*exp(-rT)*(1 - P2) - S*(1 - P1).
inline double heston_put(const PricingInputs& in, const HestonParams& params,
                         const QuadratureConfig& quad = {}) {
    detail::heston_validate(in, params);
    quad.validate();
    if (params.sigma_v < 1e-12) {
        const double call = detail::heston_deterministic_vol(in, params);
        return call - in.spot + in.strike * std::exp(-in.rate * in.maturity);
    }
    const auto probs = detail::heston_probabilities(in, params, quad, quad.node_count * 2);
    const double disc_strike = in.strike * std::exp(-in.rate * in.maturity);
    return disc_strike * (1.0 - probs.p2) - in.spot * (1.0 - probs.p1);
}

}  // namespace optlab
