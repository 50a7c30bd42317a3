#include "feedermarket/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

namespace fm {

std::string to_string(MsgKind k) {
    switch (k) {
        case MsgKind::PriceSignal: return "PriceSignal";
        case MsgKind::QuantityReply: return "QuantityReply";
        case MsgKind::AreaResult: return "AreaResult";
        case MsgKind::Step2Invite: return "Step2Invite";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

// A smart-meter actor. Holds only its own parameters; per-market trading
// state (commitment and bounds) is installed when the player joins a market.
struct PlayerActor {
    PlayerId id;
    bool is_seller = false;
    ConsumerParams consumer;
    ProsumerParams prosumer;

    struct Slot {
        double committed = 0.0, lo = 0.0, hi = 0.0;
    };
    std::unordered_map<std::string, Slot> slots;

    double respond(const std::string& market, double lambda) const {
        const Slot& s = slots.at(market);
        return is_seller ? prosumer_best_response(prosumer, lambda, s.committed, s.lo, s.hi)
                         : consumer_best_response(consumer, lambda, s.committed, s.lo, s.hi);
    }
};

struct Runtime;

// Data-centre actor for one market (an area, or the synthetic inter-area
// market "C"). Advances one iteration per round; the round barrier requires
// a reply from every registered player.
struct CentreActor {
    std::string market;
    std::vector<SellerSlot> sellers;
    std::vector<BuyerSlot> buyers;
    SolverConfig cfg;
    std::optional<PriceStepper> stepper;

    double lambda = 0.0;
    int k = 0;
    bool done = false;
    ClearingOutcome outcome;
    std::vector<double> sq, bq;
    double elapsed = 0.0;

    void start() {
        lambda = cfg.lambda_init;
        stepper.emplace(cfg, sellers, buyers);
        sq.assign(sellers.size(), 0.0);
        bq.assign(buyers.size(), 0.0);
    }

    void run_round(Runtime& rt);
    void finish(bool converged);
};

struct Runtime {
    const Scenario& sc;
    SolverConfig cfg;
    RuntimeOptions opts;
    std::unordered_map<PlayerId, PlayerActor> players;
    std::vector<TraceEntry> trace;
    long seq = 0;

    Runtime(const Scenario& scenario, const SolverConfig& config, const RuntimeOptions& options)
        : sc(scenario), cfg(config), opts(options) {
        for (const auto& c : sc.consumers) {
            PlayerActor a;
            a.id = c.id;
            a.consumer = c;
            players.emplace(c.id, std::move(a));
        }
        for (const auto& p : sc.prosumers) {
            PlayerActor a;
            a.id = p.id;
            a.is_seller = true;
            a.prosumer = p;
            players.emplace(p.id, std::move(a));
        }
    }

    void log(const std::string& market, MsgKind kind, const std::string& sender,
             const std::string& recipient, int iteration, double value,
             std::string payload = {}) {
        if (!opts.tracing) return;
        trace.push_back({seq++, market, kind, sender, recipient, iteration, value,
                         std::move(payload)});
    }

    bool dropped(const PlayerId& id, int iteration) const {
        return opts.drop_replies.count({id, iteration}) > 0;
    }

    TwoStepOutcome run();
};

void CentreActor::run_round(Runtime& rt) {
    const auto t0 = Clock::now();
    rt.log(market, MsgKind::PriceSignal, market, "*", k, lambda);

    std::size_t replies = 0;
    PlayerId missing;
    auto collect = [&](const PlayerId& id, double& dst) {
        if (rt.dropped(id, k)) {
            if (missing.empty()) missing = id;
            return;
        }
        dst = rt.players.at(id).respond(market, lambda);
        rt.log(market, MsgKind::QuantityReply, id, market, k, dst);
        ++replies;
    };
    for (std::size_t i = 0; i < sellers.size(); ++i) collect(sellers[i].params.id, sq[i]);
    for (std::size_t j = 0; j < buyers.size(); ++j) collect(buyers[j].params.id, bq[j]);
    if (replies != sellers.size() + buyers.size())
        throw ProtocolError("missing reply from player " + missing + " at iteration " +
                            std::to_string(k) + " in market " + market);

    double supply = 0.0, demand = 0.0;
    for (double q : sq) supply += q;
    for (double q : bq) demand += q;
    outcome.trajectory.push_back({k, lambda, supply, demand});

    const double next = stepper->next(lambda, supply, demand);
    if (std::abs(next - lambda) <= cfg.epsilon) {
        finish(true);
    } else if (k + 1 >= cfg.max_iters) {
        finish(false);
    } else {
        lambda = next;
        ++k;
    }
    elapsed += std::chrono::duration<double>(Clock::now() - t0).count();
}

void CentreActor::finish(bool converged) {
    done = true;
    outcome.converged = converged;
    outcome.price = lambda;
    outcome.iterations = static_cast<int>(outcome.trajectory.size());
    outcome.wall_time = elapsed;
    balance_quantities(sellers, buyers, sq, bq);
    double supply = 0.0, demand = 0.0;
    for (std::size_t i = 0; i < sellers.size(); ++i) {
        outcome.seller_quantities.emplace_back(sellers[i].params.id, sq[i]);
        supply += sq[i];
    }
    for (std::size_t j = 0; j < buyers.size(); ++j) {
        outcome.buyer_quantities.emplace_back(buyers[j].params.id, bq[j]);
        demand += bq[j];
    }
    outcome.traded = std::min(supply, demand);
}

TwoStepOutcome Runtime::run() {
    validate(cfg);
    std::mt19937_64 sched(opts.schedule_seed);

    // Step 1: one centre per two-sided area, all progressing in interleaved
    // rounds. Scheduling order must not affect results, only the trace.
    std::map<int, ClearingOutcome> area_outcomes;
    std::vector<std::pair<int, CentreActor>> centres;
    for (int area : sc.areas) {
        auto sellers = area_seller_slots(sc, area);
        auto buyers = area_buyer_slots(sc, area);
        if (sellers.empty() || buyers.empty()) {
            area_outcomes.emplace(area, one_sided_outcome(sellers, buyers, cfg));
            continue;
        }
        CentreActor centre;
        centre.market = "area_" + std::to_string(area);
        centre.sellers = std::move(sellers);
        centre.buyers = std::move(buyers);
        centre.cfg = cfg;
        for (const auto& s : centre.sellers)
            players.at(s.params.id).slots[centre.market] = {s.committed, s.lo, s.hi};
        for (const auto& b : centre.buyers)
            players.at(b.params.id).slots[centre.market] = {b.committed, b.lo, b.hi};
        centres.emplace_back(area, std::move(centre));
    }
    for (auto& [area, centre] : centres) centre.start();

    std::vector<std::size_t> order(centres.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    bool active = !centres.empty();
    while (active) {
        std::shuffle(order.begin(), order.end(), sched);
        active = false;
        for (std::size_t idx : order) {
            auto& centre = centres[idx].second;
            if (centre.done) continue;
            centre.run_round(*this);
            active = active || !centre.done;
        }
    }
    for (auto& [area, centre] : centres) area_outcomes.emplace(area, std::move(centre.outcome));

    // Step 2: the data centre of the highest-price area coordinates; every
    // area reports its result to it.
    auto parts = select_step2_participants(sc, area_outcomes, cfg);
    std::optional<ClearingOutcome> inter;
    if (!parts.sellers.empty() && !parts.buyers.empty()) {
        int hi_area = -1;
        double hi_price = 0.0;
        for (const auto& [area, ao] : area_outcomes)
            if (hi_area < 0 || ao.price > hi_price) {
                hi_area = area;
                hi_price = ao.price;
            }
        const std::string coord = "area_" + std::to_string(hi_area);
        for (const auto& [area, ao] : area_outcomes)
            log("C", MsgKind::AreaResult, "area_" + std::to_string(area), coord, ao.iterations,
                ao.price, ao.converged ? "converged=1" : "converged=0");

        CentreActor centre;
        centre.market = "C";
        centre.sellers = parts.sellers;
        centre.buyers = parts.buyers;
        centre.cfg = cfg;
        auto invite = [&](const PlayerId& id, double committed, double lo, double hi) {
            players.at(id).slots["C"] = {committed, lo, hi};
            char buf[96];
            std::snprintf(buf, sizeof(buf), "committed=%.17g,lo=%.17g,hi=%.17g", committed, lo,
                          hi);
            log("C", MsgKind::Step2Invite, coord, id, 0, 0.0, buf);
        };
        for (const auto& s : parts.sellers) invite(s.params.id, s.committed, s.lo, s.hi);
        for (const auto& b : parts.buyers) invite(b.params.id, b.committed, b.lo, b.hi);
        centre.start();
        while (!centre.done) centre.run_round(*this);
        inter = std::move(centre.outcome);
    }

    return compose_two_step(sc, std::move(area_outcomes), std::move(inter));
}

}  // namespace

TwoStepOutcome run_distributed(const Scenario& sc, const SolverConfig& cfg) {
    Runtime rt(sc, cfg, {});
    return rt.run();
}

DistributedRun run_distributed_traced(const Scenario& sc, const SolverConfig& cfg,
                                      const RuntimeOptions& opts) {
    Runtime rt(sc, cfg, opts);
    DistributedRun run;
    run.outcome = rt.run();
    run.trace = std::move(rt.trace);
    return run;
}

std::vector<TraceEntry> message_trace(const DistributedRun& run, const std::string& market) {
    std::vector<TraceEntry> out;
    for (const auto& e : run.trace)
        if (e.market == market) out.push_back(e);
    return out;
}

void write_trace(const std::vector<TraceEntry>& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file " + path.string());
    out << "seq,market,variant,sender,recipient,iteration,value,payload\n";
    char buf[32];
    for (const auto& e : trace) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.value);
        out << e.seq << ',' << e.market << ',' << to_string(e.kind) << ',' << e.sender << ','
            << e.recipient << ',' << e.iteration << ',' << buf << ',' << e.payload << '\n';
    }
}

}  // namespace fm
