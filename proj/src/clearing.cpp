#include "feedermarket/clearing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

namespace fm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::string to_string(Step2Selection s) {
    return s == Step2Selection::paper_rule ? "paper_rule" : "all_residual";
}

std::string to_string(Step2Response r) {
    return r == Step2Response::coupled ? "coupled" : "literal";
}

Step2Selection step2_selection_from_string(const std::string& s) {
    if (s == "paper_rule") return Step2Selection::paper_rule;
    if (s == "all_residual") return Step2Selection::all_residual;
    throw std::domain_error("unknown step2_selection: " + s);
}

Step2Response step2_response_from_string(const std::string& s) {
    if (s == "coupled") return Step2Response::coupled;
    if (s == "literal") return Step2Response::literal;
    throw std::domain_error("unknown step2_response: " + s);
}

bool TwoStepOutcome::converged() const {
    for (const auto& [area, out] : area_outcomes)
        if (!out.converged) return false;
    return !inter_outcome || inter_outcome->converged;
}

double price_update(double lambda, double eta, double agg_supply, double agg_demand) {
    return std::max(0.0, lambda + eta * (agg_demand - agg_supply));
}

double default_step_size(const std::vector<SellerSlot>& sellers,
                         const std::vector<BuyerSlot>& buyers) {
    if (sellers.empty() && buyers.empty())
        throw std::domain_error("default_step_size: empty player set");
    double slope = 0.0;
    for (const auto& b : buyers) slope += 1.0 / (2.0 * b.params.mu);
    for (const auto& s : sellers) slope += 1.0 / (2.0 * s.params.a);
    return 1.0 / slope;
}

PriceStepper::PriceStepper(const SolverConfig& cfg, const std::vector<SellerSlot>& sellers,
                           const std::vector<BuyerSlot>& buyers)
    : adaptive_(cfg.eta <= 0.0),
      eta_(cfg.eta > 0.0 ? cfg.eta : default_step_size(sellers, buyers)),
      eta_base_(eta_) {}

double PriceStepper::next(double lambda, double supply, double demand) {
    const double mismatch = demand - supply;
    // a machine-zero mismatch is a fixed point; don't let the bracket logic
    // step off the root it just hit
    if (adaptive_ && std::abs(mismatch) <= 1e-12 * (supply + demand)) return lambda;
    if (adaptive_) {
        if (has_prev_ && lambda != prev_lambda_) {
            // mismatch is nonincreasing in lambda, so the secant slope is >= 0
            const double slope = (prev_mismatch_ - mismatch) / (lambda - prev_lambda_);
            if (slope > 0.0) eta_ = std::max(eta_base_, 1.0 / slope);
        }
        if (mismatch > 0.0) {
            lo_ = lambda;
            m_lo_ = mismatch;
            has_lo_ = true;
            if (last_side_ == 1) m_hi_ *= 0.5;  // Illinois: devalue the stale endpoint
            last_side_ = 1;
        } else if (mismatch < 0.0) {
            hi_ = lambda;
            m_hi_ = mismatch;
            has_hi_ = true;
            if (last_side_ == -1) m_lo_ *= 0.5;
            last_side_ = -1;
        }
    }
    has_prev_ = true;
    prev_lambda_ = lambda;
    prev_mismatch_ = mismatch;

    if (adaptive_ && has_lo_ && has_hi_) {
        // once the root is bracketed, Illinois false position beats the
        // plain ascent on staircase-shaped mismatch curves
        const double denom = m_lo_ - m_hi_;
        double fp = denom > 0.0 ? lo_ + m_lo_ * (hi_ - lo_) / denom : 0.5 * (lo_ + hi_);
        if (!(fp > lo_ && fp < hi_)) fp = 0.5 * (lo_ + hi_);
        return fp;
    }
    return price_update(lambda, eta_, supply, demand);
}

void balance_quantities(const std::vector<SellerSlot>& sellers,
                        const std::vector<BuyerSlot>& buyers, std::vector<double>& sq,
                        std::vector<double>& bq) {
    double supply = 0.0, demand = 0.0;
    for (double q : sq) supply += q;
    for (double q : bq) demand += q;
    if (supply == demand) return;
    if (supply > demand) {
        double scalable = 0.0;
        for (std::size_t i = 0; i < sq.size(); ++i) scalable += sq[i] - sellers[i].lo;
        if (scalable <= 0.0) return;
        const double f = std::max(0.0, 1.0 - (supply - demand) / scalable);
        for (std::size_t i = 0; i < sq.size(); ++i)
            sq[i] = sellers[i].lo + f * (sq[i] - sellers[i].lo);
    } else {
        double scalable = 0.0;
        for (std::size_t j = 0; j < bq.size(); ++j) scalable += bq[j] - buyers[j].lo;
        if (scalable <= 0.0) return;
        const double f = std::max(0.0, 1.0 - (demand - supply) / scalable);
        for (std::size_t j = 0; j < bq.size(); ++j)
            bq[j] = buyers[j].lo + f * (bq[j] - buyers[j].lo);
    }
}

ClearingOutcome clear_market(const std::vector<SellerSlot>& sellers,
                             const std::vector<BuyerSlot>& buyers, const SolverConfig& cfg) {
    if (sellers.empty() || buyers.empty())
        throw OneSidedMarket(sellers.empty() ? "no sellers in market" : "no buyers in market");
    validate(cfg);

    PriceStepper stepper(cfg, sellers, buyers);

    ClearingOutcome out;
    std::vector<double> sq(sellers.size()), bq(buyers.size());

    const auto t0 = Clock::now();
    // Flat copies of the active slots keep the iteration cache-friendly.
    // Zero-width slots answer lo at every price; those with lo == 0 add
    // nothing to the aggregates either and drop out of the loop entirely.
    std::vector<std::size_t> act_s, act_b;
    std::vector<double> s_a, s_b, s_cm, s_lo, s_hi, s_q;
    std::vector<double> b_om, b_mu, b_cm, b_lo, b_hi, b_q;
    for (std::size_t i = 0; i < sellers.size(); ++i) {
        const auto& s = sellers[i];
        if (s.hi < s.lo) prosumer_best_response(s.params, 0.0, s.committed, s.lo, s.hi);
        sq[i] = s.lo;
        if (s.hi == s.lo && s.lo == 0.0) continue;
        act_s.push_back(i);
        s_a.push_back(s.params.a);
        s_b.push_back(s.params.b);
        s_cm.push_back(s.committed);
        s_lo.push_back(s.lo);
        s_hi.push_back(s.hi);
    }
    for (std::size_t j = 0; j < buyers.size(); ++j) {
        const auto& b = buyers[j];
        if (b.hi < b.lo) consumer_best_response(b.params, 0.0, b.committed, b.lo, b.hi);
        bq[j] = b.lo;
        if (b.hi == b.lo && b.lo == 0.0) continue;
        act_b.push_back(j);
        b_om.push_back(b.params.omega);
        b_mu.push_back(b.params.mu);
        b_cm.push_back(b.committed);
        b_lo.push_back(b.lo);
        b_hi.push_back(b.hi);
    }
    s_q.assign(act_s.size(), 0.0);
    b_q.assign(act_b.size(), 0.0);

    double lambda = cfg.lambda_init;
    for (int k = 0; k < cfg.max_iters; ++k) {
        double supply = 0.0, demand = 0.0;
        for (std::size_t t = 0; t < act_s.size(); ++t) {
            const double q = std::clamp(prosumer_interior_supply(s_a[t], s_b[t], lambda, s_cm[t]),
                                        s_lo[t], s_hi[t]);
            s_q[t] = q;
            supply += q;
        }
        for (std::size_t t = 0; t < act_b.size(); ++t) {
            const double q = std::clamp(consumer_interior_demand(b_om[t], b_mu[t], lambda, b_cm[t]),
                                        b_lo[t], b_hi[t]);
            b_q[t] = q;
            demand += q;
        }
        out.trajectory.push_back({k, lambda, supply, demand});
        const double next = stepper.next(lambda, supply, demand);
        if (std::abs(next - lambda) <= cfg.epsilon) {
            // Keep lambda: the recorded quantities answered exactly this price.
            out.converged = true;
            break;
        }
        if (k + 1 < cfg.max_iters) lambda = next;
    }
    for (std::size_t t = 0; t < act_s.size(); ++t) sq[act_s[t]] = s_q[t];
    for (std::size_t t = 0; t < act_b.size(); ++t) bq[act_b[t]] = b_q[t];
    out.wall_time = seconds_since(t0);
    out.price = lambda;
    out.iterations = static_cast<int>(out.trajectory.size());

    balance_quantities(sellers, buyers, sq, bq);
    double supply = 0.0, demand = 0.0;
    out.seller_quantities.reserve(sellers.size());
    out.buyer_quantities.reserve(buyers.size());
    for (std::size_t i = 0; i < sellers.size(); ++i) {
        out.seller_quantities.emplace_back(sellers[i].params.id, sq[i]);
        supply += sq[i];
    }
    for (std::size_t j = 0; j < buyers.size(); ++j) {
        out.buyer_quantities.emplace_back(buyers[j].params.id, bq[j]);
        demand += bq[j];
    }
    out.traded = std::min(supply, demand);
    return out;
}

std::vector<SellerSlot> area_seller_slots(const Scenario& sc, int area) {
    std::vector<SellerSlot> slots;
    for (const auto& p : sc.prosumers)
        if (p.area == area) slots.push_back({p, 0.0, p.s_min, p.s_max});
    return slots;
}

std::vector<BuyerSlot> area_buyer_slots(const Scenario& sc, int area) {
    std::vector<BuyerSlot> slots;
    for (const auto& c : sc.consumers)
        if (c.area == area) slots.push_back({c, 0.0, c.d_min, c.d_max});
    return slots;
}

ClearingOutcome one_sided_outcome(const std::vector<SellerSlot>& sellers,
                                  const std::vector<BuyerSlot>& buyers,
                                  const SolverConfig& cfg) {
    ClearingOutcome out;
    out.price = cfg.lambda_init;
    out.converged = true;
    out.one_sided = true;
    for (const auto& s : sellers) out.seller_quantities.emplace_back(s.params.id, 0.0);
    for (const auto& b : buyers) out.buyer_quantities.emplace_back(b.params.id, 0.0);
    return out;
}

namespace {

std::unordered_map<PlayerId, double> quantity_map(
    const std::vector<std::pair<PlayerId, double>>& qs) {
    std::unordered_map<PlayerId, double> m;
    for (const auto& [id, q] : qs) m.emplace(id, q);
    return m;
}

}  // namespace

Step2Participants select_step2_participants(const Scenario& sc,
                                            const std::map<int, ClearingOutcome>& area_outcomes,
                                            const SolverConfig& cfg) {
    Step2Participants parts;
    if (area_outcomes.size() < 2) return parts;

    double lo_price = 0.0, hi_price = 0.0;
    int hi_area = -1;
    bool first = true;
    for (const auto& [area, out] : area_outcomes) {
        if (first || out.price < lo_price) lo_price = first ? out.price : std::min(lo_price, out.price);
        if (first || out.price > hi_price) {
            hi_price = out.price;
            hi_area = area;  // map order breaks price ties toward the lowest area id
        }
        first = false;
    }
    if (hi_price - lo_price <= cfg.epsilon) return parts;  // nothing to arbitrage

    const bool literal = cfg.step2_response == Step2Response::literal;
    auto intra_of = [&](int area) -> const ClearingOutcome& { return area_outcomes.at(area); };

    // Players at capacity stay in with a zero-width bound; membership is a
    // function of the area only.
    auto add_seller = [&](const ProsumerParams& p, double committed_full) {
        const double hi = std::max(0.0, p.s_max - committed_full);
        parts.sellers.push_back({p, literal ? 0.0 : committed_full, 0.0, hi});
    };
    auto add_buyer = [&](const ConsumerParams& c, double committed_full) {
        const double hi = std::max(0.0, c.d_max - committed_full);
        // Any unmet minimum demand is carried into step 2.
        const double lo = std::min(hi, std::max(0.0, c.d_min - committed_full));
        parts.buyers.push_back({c, literal ? 0.0 : committed_full, lo, hi});
    };

    if (cfg.step2_selection == Step2Selection::paper_rule) {
        parts.buyer_area = hi_area;
        std::unordered_map<PlayerId, double> committed;
        for (const auto& [area, out] : area_outcomes) {
            auto m = quantity_map(area == hi_area ? out.buyer_quantities : out.seller_quantities);
            committed.merge(m);
        }
        for (const auto& c : sc.consumers)
            if (c.area == hi_area) add_buyer(c, committed.count(c.id) ? committed[c.id] : 0.0);
        for (const auto& p : sc.prosumers)
            if (p.area != hi_area) add_seller(p, committed.count(p.id) ? committed[p.id] : 0.0);
    } else {
        std::unordered_map<PlayerId, double> committed;
        for (const auto& [area, out] : area_outcomes) {
            auto ms = quantity_map(out.seller_quantities);
            auto mb = quantity_map(out.buyer_quantities);
            committed.merge(ms);
            committed.merge(mb);
        }
        for (const auto& c : sc.consumers) add_buyer(c, committed.count(c.id) ? committed[c.id] : 0.0);
        for (const auto& p : sc.prosumers) add_seller(p, committed.count(p.id) ? committed[p.id] : 0.0);
    }
    if (parts.sellers.empty() || parts.buyers.empty()) {
        parts.sellers.clear();
        parts.buyers.clear();
    }
    return parts;
}

TwoStepOutcome compose_two_step(const Scenario& sc, std::map<int, ClearingOutcome> area_outcomes,
                                std::optional<ClearingOutcome> inter_outcome) {
    TwoStepOutcome out;

    std::unordered_map<PlayerId, double> intra;
    for (const auto& [area, ao] : area_outcomes) {
        for (const auto& [id, q] : ao.seller_quantities) intra[id] = q;
        for (const auto& [id, q] : ao.buyer_quantities) intra[id] = q;
        out.step1_max_time = std::max(out.step1_max_time, ao.wall_time);
    }
    std::unordered_map<PlayerId, double> inter;
    if (inter_outcome) {
        for (const auto& [id, q] : inter_outcome->seller_quantities) inter[id] = q;
        for (const auto& [id, q] : inter_outcome->buyer_quantities) inter[id] = q;
        out.step2_time = inter_outcome->wall_time;
    }
    out.composed_time = out.step1_max_time + out.step2_time;

    auto alloc_of = [&](const PlayerId& id) {
        PlayerAllocation a;
        a.id = id;
        if (auto it = intra.find(id); it != intra.end()) a.q_intra = it->second;
        if (auto it = inter.find(id); it != inter.end()) a.q_inter = it->second;
        a.q_total = a.q_intra + a.q_inter;
        return a;
    };

    std::vector<std::pair<ConsumerParams, double>> demands;
    std::vector<std::pair<ProsumerParams, double>> supplies;
    for (const auto& c : sc.consumers) {
        auto a = alloc_of(c.id);
        out.traded_energy += a.q_total;
        demands.emplace_back(c, a.q_total);
        out.consumer_allocations.push_back(std::move(a));
    }
    for (const auto& p : sc.prosumers) {
        auto a = alloc_of(p.id);
        supplies.emplace_back(p, a.q_total);
        out.prosumer_allocations.push_back(std::move(a));
    }
    out.welfare = social_welfare(demands, supplies);
    out.area_outcomes = std::move(area_outcomes);
    out.inter_outcome = std::move(inter_outcome);
    return out;
}

TwoStepOutcome run_2smc(const Scenario& sc, const SolverConfig& cfg) {
    if (sc.areas.empty()) throw ScenarioError("scenario has no areas");
    validate(cfg);

    std::map<int, ClearingOutcome> area_outcomes;
    for (int area : sc.areas) {
        auto sellers = area_seller_slots(sc, area);
        auto buyers = area_buyer_slots(sc, area);
        if (sellers.empty() || buyers.empty())
            area_outcomes.emplace(area, one_sided_outcome(sellers, buyers, cfg));
        else
            area_outcomes.emplace(area, clear_market(sellers, buyers, cfg));
    }

    std::optional<ClearingOutcome> inter;
    auto parts = select_step2_participants(sc, area_outcomes, cfg);
    if (!parts.sellers.empty() && !parts.buyers.empty())
        inter = clear_market(parts.sellers, parts.buyers, cfg);

    return compose_two_step(sc, std::move(area_outcomes), std::move(inter));
}

ClearingOutcome run_1smc(const Scenario& sc, const SolverConfig& cfg) {
    std::vector<SellerSlot> sellers;
    std::vector<BuyerSlot> buyers;
    for (const auto& p : sc.prosumers) sellers.push_back({p, 0.0, p.s_min, p.s_max});
    for (const auto& c : sc.consumers) buyers.push_back({c, 0.0, c.d_min, c.d_max});
    return clear_market(sellers, buyers, cfg);
}

}  // namespace fm
