#pragma once

#include <vector>

#include "feedermarket/clearing.hpp"

namespace fm {

// Ground truth for one clearing, obtained by bisection on the aggregate
// excess-supply curve instead of dual ascent.
struct EquilibriumResult {
    double price = 0.0;
    double traded = 0.0;
    double residual = 0.0;       // excess supply at price
    double bracket_width = 0.0;  // at termination
};

// Sum of seller best responses minus sum of buyer best responses at lambda.
// Nondecreasing and piecewise linear in lambda.
double aggregate_excess(const std::vector<SellerSlot>& sellers,
                        const std::vector<BuyerSlot>& buyers, double lambda);

// Bisects [0, max omega]. If excess supply is already nonnegative at price 0
// the degenerate result {0, ...} is returned. Flat segments containing the
// root yield the midpoint of the final bracket.
EquilibriumResult bisect_equilibrium(const std::vector<SellerSlot>& sellers,
                                     const std::vector<BuyerSlot>& buyers,
                                     double tol_price = 1e-6, double tol_qty = 1e-3);

}  // namespace fm
