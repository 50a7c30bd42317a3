#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "feedermarket/config.hpp"
#include "feedermarket/econ.hpp"
#include "feedermarket/scenario.hpp"

namespace fm {

struct OneSidedMarket : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One participant of a single clearing: the player, what it has already
// committed in an earlier step, and the bounds on the incremental quantity.
struct SellerSlot {
    ProsumerParams params;
    double committed = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct BuyerSlot {
    ConsumerParams params;
    double committed = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct TrajectoryPoint {
    int iteration = 0;
    double lambda = 0.0;
    double supply = 0.0;
    double demand = 0.0;
};

struct ClearingOutcome {
    double price = 0.0;
    int iterations = 0;
    bool converged = false;
    bool one_sided = false;  // area cleared trivially at zero trade
    double wall_time = 0.0;  // seconds, the iteration loop only
    double traded = 0.0;
    // Incremental quantities per participant, in slot order.
    std::vector<std::pair<PlayerId, double>> seller_quantities;
    std::vector<std::pair<PlayerId, double>> buyer_quantities;
    std::vector<TrajectoryPoint> trajectory;
};

struct TwoStepOutcome {
    std::map<int, ClearingOutcome> area_outcomes;
    std::optional<ClearingOutcome> inter_outcome;
    std::vector<PlayerAllocation> consumer_allocations;
    std::vector<PlayerAllocation> prosumer_allocations;
    double welfare = 0.0;
    double traded_energy = 0.0;
    double step1_max_time = 0.0;
    double step2_time = 0.0;
    double composed_time = 0.0;  // max step-1 area time + step-2 time

    bool converged() const;
};

// Projected dual-ascent update: max(0, lambda + eta * (demand - supply)).
double price_update(double lambda, double eta, double agg_supply, double agg_demand);

// 1 / (sum_buyers 1/(2*mu) + sum_sellers 1/(2*a)); with this step size the
// price iteration is a contraction on the interior region.
double default_step_size(const std::vector<SellerSlot>& sellers,
                         const std::vector<BuyerSlot>& buyers);

// Produces the next price of the ascent. A fixed cfg.eta is applied verbatim
// every iteration. In auto mode the step starts at default_step_size and
// adapts to a secant estimate of the local mismatch slope — never below the
// contraction-safe base — with a bisection fallback once the root is
// bracketed, so badly conditioned markets (global slope bound far above the
// local slope) still converge in few iterations. Shared by clear_market and
// the distributed runtime so both produce identical trajectories.
class PriceStepper {
  public:
    PriceStepper(const SolverConfig& cfg, const std::vector<SellerSlot>& sellers,
                 const std::vector<BuyerSlot>& buyers);
    double next(double lambda, double supply, double demand);

  private:
    bool adaptive_;
    double eta_;
    double eta_base_;
    bool has_prev_ = false;
    double prev_lambda_ = 0.0;
    double prev_mismatch_ = 0.0;
    double lo_ = 0.0, hi_ = 0.0;  // price bracket around the root
    double m_lo_ = 0.0, m_hi_ = 0.0;
    bool has_lo_ = false, has_hi_ = false;
    int last_side_ = 0;  // +1 lo moved, -1 hi moved
};

// One dual-ascent clearing over the given slots. Deterministic: aggregates
// sum in slot order. Throws OneSidedMarket if either side is empty;
// non-convergence within max_iters is flagged, not thrown.
ClearingOutcome clear_market(const std::vector<SellerSlot>& sellers,
                             const std::vector<BuyerSlot>& buyers, const SolverConfig& cfg);

struct Step2Participants {
    std::vector<SellerSlot> sellers;
    std::vector<BuyerSlot> buyers;
    int buyer_area = -1;  // paper_rule: the unique highest-price area (-1 for all_residual)
};

// Returns empty participant sets when all area prices agree within epsilon.
Step2Participants select_step2_participants(const Scenario& sc,
                                            const std::map<int, ClearingOutcome>& area_outcomes,
                                            const SolverConfig& cfg);

// Composition of per-area and inter-area outcomes into totals, welfare and
// traded energy. Shared by the in-process engine and the distributed runtime.
TwoStepOutcome compose_two_step(const Scenario& sc,
                                std::map<int, ClearingOutcome> area_outcomes,
                                std::optional<ClearingOutcome> inter_outcome);

TwoStepOutcome run_2smc(const Scenario& sc, const SolverConfig& cfg);
ClearingOutcome run_1smc(const Scenario& sc, const SolverConfig& cfg);

// Slot builders shared with the distributed runtime.
std::vector<SellerSlot> area_seller_slots(const Scenario& sc, int area);
std::vector<BuyerSlot> area_buyer_slots(const Scenario& sc, int area);

// Trivial flagged outcome for an area missing one side: zero trade at the
// initial price.
ClearingOutcome one_sided_outcome(const std::vector<SellerSlot>& sellers,
                                  const std::vector<BuyerSlot>& buyers, const SolverConfig& cfg);

// Scales the long side's increments above their lower bounds so supply and
// demand match exactly; responses already balance within epsilon/eta.
void balance_quantities(const std::vector<SellerSlot>& sellers,
                        const std::vector<BuyerSlot>& buyers, std::vector<double>& sq,
                        std::vector<double>& bq);

}  // namespace fm
