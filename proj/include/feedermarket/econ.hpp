#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fm {

using PlayerId = std::string;

// Buying participant with a saturating quadratic utility
// U(d) = omega*d - mu*d^2 below the knee omega/(2*mu), constant above it.
struct ConsumerParams {
    PlayerId id;
    int area = 0;
    double omega = 0.0;  // willingness, currency/kWh
    double mu = 0.0;     // curvature, currency/kWh^2
    double d_min = 0.0;  // kWh
    double d_max = 0.0;  // kWh

    double knee() const { return omega / (2.0 * mu); }
};

// Selling participant with quadratic generation cost
// C(s) = a*s^2 + b*s + gamma.
struct ProsumerParams {
    PlayerId id;
    int area = 0;
    double a = 0.0;      // currency/kWh^2
    double b = 0.0;      // currency/kWh
    double gamma = 0.0;  // fixed cost, currency
    double s_min = 0.0;  // kWh
    double s_max = 0.0;  // kWh
};

// Composed intra/inter quantities for one player after a two-step run.
struct PlayerAllocation {
    PlayerId id;
    double q_intra = 0.0;
    double q_inter = 0.0;
    double q_total = 0.0;
};

// Unclamped stationary points of the per-player subproblems. The bounded
// best responses below clamp these; the clearing engine evaluates them on
// flat parameter arrays, so keep them inline and branch-free.
inline double consumer_interior_demand(double omega, double mu, double lambda,
                                       double committed) {
    return (omega - lambda) / (2.0 * mu) - committed;
}

inline double prosumer_interior_supply(double a, double b, double lambda, double committed) {
    return (lambda - b) / (2.0 * a) - committed;
}

double utility_value(const ConsumerParams& c, double d);
double cost_value(const ProsumerParams& p, double s);

double consumer_surplus(const ConsumerParams& c, double d, double lambda);
double prosumer_surplus(const ProsumerParams& p, double s, double lambda);

// Incremental demand maximizing U(committed + q) - lambda*q over q in [lo, hi].
// Closed form clamp((omega - lambda)/(2*mu) - committed, lo, hi).
double consumer_best_response(const ConsumerParams& c, double lambda, double committed,
                              double lo, double hi);

// Incremental supply maximizing lambda*q - [C(committed + q) - C(committed)]
// over q in [lo, hi]. Closed form clamp((lambda - b)/(2*a) - committed, lo, hi).
double prosumer_best_response(const ProsumerParams& p, double lambda, double committed,
                              double lo, double hi);

// Total utility minus total cost at the given per-player totals. Quantities
// must lie within player bounds.
double social_welfare(const std::vector<std::pair<ConsumerParams, double>>& demands,
                      const std::vector<std::pair<ProsumerParams, double>>& supplies);

}  // namespace fm
