#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "feedermarket/clearing.hpp"
#include "feedermarket/oracle.hpp"
#include "feedermarket/scenario.hpp"
#include "testutil.hpp"

using namespace fm;

namespace {

std::vector<SellerSlot> toy_sellers() { return {{fmtest::toy_seller(), 0.0, 0.0, 1000.0}}; }
std::vector<BuyerSlot> toy_buyers() { return {{fmtest::toy_buyer(), 0.0, 0.0, 1000.0}}; }

double sum_qty(const std::vector<std::pair<PlayerId, double>>& qs) {
    double t = 0.0;
    for (const auto& [id, q] : qs) t += q;
    return t;
}

}  // namespace

TEST_CASE("price update: fixed point, descent, floor") {
    CHECK(price_update(5.0, 0.01, 100.0, 100.0) == 5.0);
    CHECK(price_update(5.0, 0.01, 150.0, 100.0) == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(price_update(0.2, 0.01, 150.0, 100.0) == 0.0);
}

TEST_CASE("default step size") {
    CHECK(default_step_size(toy_sellers(), toy_buyers()) ==
          doctest::Approx(0.005).epsilon(1e-12));
    std::vector<SellerSlot> stiff{{{"P", 1, 1e9, 2.0, 0.0, 0.0, 10.0}, 0.0, 0.0, 10.0}};
    std::vector<BuyerSlot> one{{{"C", 1, 10.0, 0.05, 0.0, 100.0}, 0.0, 0.0, 100.0}};
    CHECK(default_step_size(stiff, one) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK_THROWS_AS(default_step_size({}, {}), std::domain_error);
}

TEST_CASE("toy market clears at the analytic intersection") {
    SolverConfig cfg;
    auto out = clear_market(toy_sellers(), toy_buyers(), cfg);
    CHECK(out.converged);
    CHECK(std::abs(out.price - 6.0) <= 1e-3);
    CHECK(std::abs(out.traded - 400.0) <= 1e-2);
    CHECK(out.trajectory.front().lambda == cfg.lambda_init);
    CHECK(out.trajectory.front().iteration == 0);
    const double eta = default_step_size(toy_sellers(), toy_buyers());
    CHECK(std::abs(sum_qty(out.seller_quantities) - sum_qty(out.buyer_quantities)) <=
          cfg.epsilon / eta + 1e-9);
}

TEST_CASE("one-sided and non-converged markets") {
    SolverConfig cfg;
    CHECK_THROWS_AS(clear_market(toy_sellers(), {}, cfg), OneSidedMarket);
    CHECK_THROWS_AS(clear_market({}, toy_buyers(), cfg), OneSidedMarket);

    cfg.eta = 300.0;  // wildly over the contraction threshold
    cfg.max_iters = 20;
    auto out = clear_market(toy_sellers(), toy_buyers(), cfg);
    CHECK_FALSE(out.converged);
    CHECK(out.iterations == 20);
}

TEST_CASE("bundled scenario: per-area prices match the oracle, area 2 highest") {
    auto sc = load_scenario(fmtest::table1_path());
    std::map<int, double> price;
    for (int area : sc.areas) {
        auto sellers = area_seller_slots(sc, area);
        auto buyers = area_buyer_slots(sc, area);
        auto out = clear_market(sellers, buyers, sc.solver);
        auto oracle = bisect_equilibrium(sellers, buyers, 1e-9);
        CHECK(out.converged);
        CHECK(std::abs(out.price - oracle.price) <= 1e-3 * std::max(1.0, oracle.price));
        price[area] = out.price;
    }
    CHECK(price[2] > price[1]);
    CHECK(price[2] > price[3]);
}

TEST_CASE("step-2 participants on the bundled scenario match the known set") {
    auto sc = load_scenario(fmtest::table1_path());
    std::map<int, ClearingOutcome> outs;
    for (int area : sc.areas)
        outs.emplace(area, clear_market(area_seller_slots(sc, area), area_buyer_slots(sc, area),
                                        sc.solver));
    auto parts = select_step2_participants(sc, outs, sc.solver);
    CHECK(parts.buyer_area == 2);
    std::set<PlayerId> buyers, sellers;
    for (const auto& b : parts.buyers) buyers.insert(b.params.id);
    for (const auto& s : parts.sellers) sellers.insert(s.params.id);
    CHECK(buyers == std::set<PlayerId>{"C5", "C6", "C7", "C8", "C9"});
    CHECK(sellers == std::set<PlayerId>{"P1", "P2", "P3", "P6", "P7", "P8", "P9"});
}

TEST_CASE("identical area prices: step 2 skipped") {
    Scenario sc;
    sc.name = "mirror";
    sc.areas = {1, 2};
    sc.prosumers = {fmtest::toy_seller("S1", 1), fmtest::toy_seller("S2", 2)};
    sc.consumers = {fmtest::toy_buyer("B1", 1), fmtest::toy_buyer("B2", 2)};
    auto out = run_2smc(sc, sc.solver);
    CHECK_FALSE(out.inter_outcome.has_value());
    // and 1SMC over the duplicated toy still clears at 6
    auto one = run_1smc(sc, sc.solver);
    CHECK(std::abs(one.price - 6.0) <= 1e-3);
}

TEST_CASE("all_residual selects the same nonzero inter-area traders") {
    auto sc = load_scenario(fmtest::table1_path());
    auto paper = run_2smc(sc, sc.solver);
    SolverConfig alt = sc.solver;
    alt.step2_selection = Step2Selection::all_residual;
    auto residual = run_2smc(sc, alt);
    REQUIRE(paper.inter_outcome.has_value());
    REQUIRE(residual.inter_outcome.has_value());
    auto active = [](const TwoStepOutcome& o) {
        std::set<PlayerId> ids;
        for (const auto& a : o.consumer_allocations)
            if (std::abs(a.q_inter) > 1e-3) ids.insert(a.id);
        for (const auto& a : o.prosumer_allocations)
            if (std::abs(a.q_inter) > 1e-3) ids.insert(a.id);
        return ids;
    };
    CHECK(active(paper) == active(residual));
}

TEST_CASE("bundled scenario 2SMC: price sandwich and welfare accounting") {
    auto sc = load_scenario(fmtest::table1_path());
    auto out = run_2smc(sc, sc.solver);
    CHECK(out.converged());
    REQUIRE(out.inter_outcome.has_value());
    const double l1 = out.area_outcomes.at(1).price;
    const double l2 = out.area_outcomes.at(2).price;
    const double l3 = out.area_outcomes.at(3).price;
    const double lc = out.inter_outcome->price;
    CHECK(lc > std::max(l1, l3));
    CHECK(lc < l2);

    // welfare must equal direct recomputation from the composed totals
    double w = 0.0;
    for (const auto& a : out.consumer_allocations) {
        for (const auto& c : sc.consumers)
            if (c.id == a.id) w += utility_value(c, a.q_total);
    }
    for (const auto& a : out.prosumer_allocations) {
        for (const auto& p : sc.prosumers)
            if (p.id == a.id) w -= cost_value(p, a.q_total);
    }
    CHECK(std::abs(out.welfare - w) <= 1e-9 * std::max(1.0, std::abs(w)));

    // composed totals stay within bounds and within intra/inter split
    for (const auto& a : out.consumer_allocations) {
        CHECK(a.q_intra >= 0.0);
        CHECK(a.q_inter >= 0.0);
        CHECK(a.q_total == a.q_intra + a.q_inter);
    }
    CHECK(out.composed_time == doctest::Approx(out.step1_max_time + out.step2_time));
}

TEST_CASE("single-area scenario: 2SMC equals plain clearing") {
    Scenario sc;
    sc.name = "single";
    sc.areas = {1};
    sc.prosumers = {fmtest::toy_seller()};
    sc.consumers = {fmtest::toy_buyer()};
    auto two = run_2smc(sc, sc.solver);
    auto one = run_1smc(sc, sc.solver);
    CHECK_FALSE(two.inter_outcome.has_value());
    CHECK(two.area_outcomes.at(1).price == one.price);
    CHECK(two.area_outcomes.at(1).iterations == one.iterations);
}

TEST_CASE("1SMC price lies between the area prices on the bundled scenario") {
    auto sc = load_scenario(fmtest::table1_path());
    auto two = run_2smc(sc, sc.solver);
    auto one = run_1smc(sc, sc.solver);
    double lo = 1e300, hi = -1e300;
    for (const auto& [area, ao] : two.area_outcomes) {
        lo = std::min(lo, ao.price);
        hi = std::max(hi, ao.price);
    }
    CHECK(one.price >= lo - 1e-6);
    CHECK(one.price <= hi + 1e-6);
    auto oracle = bisect_equilibrium(fmtest::full_seller_slots(sc), fmtest::full_buyer_slots(sc),
                                     1e-9);
    CHECK(std::abs(one.price - oracle.price) <= 1e-3 * std::max(1.0, oracle.price));
}

TEST_CASE("one-sided area clears trivially and its sellers join step 2") {
    Scenario sc;
    sc.name = "lopsided";
    sc.areas = {1, 2};
    sc.prosumers = {fmtest::toy_seller("S1", 1), fmtest::toy_seller("S2", 2)};
    sc.consumers = {fmtest::toy_buyer("B1", 1)};  // area 2 has no buyers
    auto out = run_2smc(sc, sc.solver);
    CHECK(out.area_outcomes.at(2).one_sided);
    REQUIRE(out.inter_outcome.has_value());
    double s2_inter = 0.0;
    for (const auto& a : out.prosumer_allocations)
        if (a.id == "S2") s2_inter = a.q_inter;
    CHECK(s2_inter > 0.0);
}

TEST_CASE("determinism: identical runs produce identical outcomes") {
    auto sc = load_scenario(fmtest::table1_path());
    auto a = run_2smc(sc, sc.solver);
    auto b = run_2smc(sc, sc.solver);
    REQUIRE(a.area_outcomes.size() == b.area_outcomes.size());
    for (const auto& [area, ao] : a.area_outcomes) {
        CHECK(ao.price == b.area_outcomes.at(area).price);
        CHECK(ao.iterations == b.area_outcomes.at(area).iterations);
    }
    CHECK(a.welfare == b.welfare);
    CHECK(a.traded_energy == b.traded_energy);
    REQUIRE(a.consumer_allocations.size() == b.consumer_allocations.size());
    for (std::size_t i = 0; i < a.consumer_allocations.size(); ++i)
        CHECK(a.consumer_allocations[i].q_total == b.consumer_allocations[i].q_total);
}

TEST_CASE("price stays nonnegative along every trajectory") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 10; ++t) {
        auto sc = fmtest::random_scenario(rng);
        auto out = run_1smc(sc, sc.solver);
        for (const auto& p : out.trajectory) CHECK(p.lambda >= 0.0);
    }
}
