#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <utility>
#include <vector>

#include "optlab/errors.hpp"

namespace optlab {

struct GaussLegendreRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

// Nodes by Newton iteration on the Legendre recurrence; cached per order.
inline const GaussLegendreRule& gauss_legendre(int n) {
    if (n < 1) throw InvalidArgument("Gauss-Legendre order must be >= 1");
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

inline double integrate_gauss_legendre(const std::function<double(double)>& f, double lo,
                                        double hi, int n) {
    const auto& rule = gauss_legendre(n);
    const double c = 0.5 * (hi - lo);
    const double m = 0.5 * (hi + lo);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += rule.weights[i] * f(m + c * rule.nodes[i]);
    }
    return c * sum;
}

// Composite Simpson that doubles panel count until two passes agree, kept to a
// total evaluation budget.
inline double integrate_adaptive_simpson(const std::function<double(double)>& f, double lo,
                                          double hi, double tol, int max_evals) {
    auto simpson = [&](int panels) {
        const double h = (hi - lo) / panels;
        double sum = f(lo) + f(hi);
        for (int i = 1; i < panels; ++i) {
            sum += f(lo + i * h) * ((i % 2) ? 4.0 : 2.0);
        }
        return sum * h / 3.0;
    };
    int panels = 16;
    double prev = simpson(panels);
    double before_last = prev, last = prev;
    while (2 * panels + 1 <= max_evals) {
        panels *= 2;
        const double cur = simpson(panels);
        before_last = prev;
        last = cur;
        if (std::abs(cur - prev) <= tol) return cur;
        prev = cur;
    }
    std::ostringstream msg;
    msg << "adaptive Simpson did not converge within " << max_evals << " evaluations on [" << lo
        << ", " << hi << "]: last two estimates " << before_last << ", " << last;
    throw NumericalError(msg.str());
}

}  // namespace optlab
