#include "feedermarket/econ.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fm {

namespace {

[[noreturn]] void domain_fail(const std::string& what, const PlayerId& id) {
    throw std::domain_error(what + " (player " + id + ")");
}

}  // namespace

double utility_value(const ConsumerParams& c, double d) {
    if (d < 0.0) domain_fail("utility_value: negative demand", c.id);
    const double knee = c.knee();
    if (d < knee) return c.omega * d - c.mu * d * d;
    return c.omega * c.omega / (4.0 * c.mu);
}

double cost_value(const ProsumerParams& p, double s) {
    if (s < 0.0) domain_fail("cost_value: negative supply", p.id);
    return p.a * s * s + p.b * s + p.gamma;
}

double consumer_surplus(const ConsumerParams& c, double d, double lambda) {
    return utility_value(c, d) - lambda * d;
}

double prosumer_surplus(const ProsumerParams& p, double s, double lambda) {
    return lambda * s - cost_value(p, s);
}

double consumer_best_response(const ConsumerParams& c, double lambda, double committed,
                              double lo, double hi) {
    if (hi < lo) domain_fail("consumer_best_response: hi < lo", c.id);
    return std::clamp(consumer_interior_demand(c.omega, c.mu, lambda, committed), lo, hi);
}

double prosumer_best_response(const ProsumerParams& p, double lambda, double committed,
                              double lo, double hi) {
    if (hi < lo) domain_fail("prosumer_best_response: hi < lo", p.id);
    return std::clamp(prosumer_interior_supply(p.a, p.b, lambda, committed), lo, hi);
}

double social_welfare(const std::vector<std::pair<ConsumerParams, double>>& demands,
                      const std::vector<std::pair<ProsumerParams, double>>& supplies) {
    // Small slack so composed totals sitting exactly on a bound never trip.
    constexpr double kSlack = 1e-9;
    double w = 0.0;
    for (const auto& [c, d] : demands) {
        if (d < c.d_min - kSlack || d > c.d_max + kSlack)
            domain_fail("social_welfare: demand out of bounds", c.id);
        w += utility_value(c, std::max(d, 0.0));
    }
    for (const auto& [p, s] : supplies) {
        if (s < p.s_min - kSlack || s > p.s_max + kSlack)
            domain_fail("social_welfare: supply out of bounds", p.id);
        w -= cost_value(p, std::max(s, 0.0));
    }
    return w;
}

}  // namespace fm
