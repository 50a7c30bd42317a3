#include "feedermarket/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace fm {

namespace {

struct Aggregates {
    double supply = 0.0;
    double demand = 0.0;
};

Aggregates aggregates_at(const std::vector<SellerSlot>& sellers,
                         const std::vector<BuyerSlot>& buyers, double lambda) {
    Aggregates agg;
    for (const auto& s : sellers)
        agg.supply += prosumer_best_response(s.params, lambda, s.committed, s.lo, s.hi);
    for (const auto& b : buyers)
        agg.demand += consumer_best_response(b.params, lambda, b.committed, b.lo, b.hi);
    return agg;
}

}  // namespace

double aggregate_excess(const std::vector<SellerSlot>& sellers,
                        const std::vector<BuyerSlot>& buyers, double lambda) {
    const auto agg = aggregates_at(sellers, buyers, lambda);
    return agg.supply - agg.demand;
}

EquilibriumResult bisect_equilibrium(const std::vector<SellerSlot>& sellers,
                                     const std::vector<BuyerSlot>& buyers, double tol_price,
                                     double tol_qty) {
    if (sellers.empty() || buyers.empty())
        throw OneSidedMarket(sellers.empty() ? "no sellers in market" : "no buyers in market");
    if (!(tol_price > 0.0)) throw std::domain_error("bisect_equilibrium: tol_price must be > 0");

    auto result_at = [&](double price, double width) {
        const auto agg = aggregates_at(sellers, buyers, price);
        EquilibriumResult r;
        r.price = price;
        r.traded = std::min(agg.supply, agg.demand);
        r.residual = agg.supply - agg.demand;
        r.bracket_width = width;
        return r;
    };

    double lo = 0.0;
    if (aggregate_excess(sellers, buyers, lo) >= 0.0) return result_at(0.0, 0.0);

    // Demand vanishes above every omega, so excess is nonnegative there.
    double hi = 0.0;
    for (const auto& b : buyers) hi = std::max(hi, b.params.omega);

    // Excess is nondecreasing in lambda: keep excess(lo) < 0 <= excess(hi).
    int guard = 0;
    while ((hi - lo > tol_price ||
            std::abs(aggregate_excess(sellers, buyers, 0.5 * (lo + hi))) > tol_qty) &&
           ++guard <= 200) {
        const double mid = 0.5 * (lo + hi);
        if (aggregate_excess(sellers, buyers, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return result_at(0.5 * (lo + hi), hi - lo);
}

}  // namespace fm
