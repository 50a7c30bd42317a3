#include "feedermarket/results.hpp"

#include <cstdio>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

namespace fm {

namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

void write_trajectory(const ClearingOutcome& out, const std::filesystem::path& p) {
    auto f = open_out(p);
    f << "iteration,lambda,supply,demand\n";
    for (const auto& t : out.trajectory)
        f << t.iteration << ',' << num(t.lambda) << ',' << num(t.supply) << ','
          << num(t.demand) << '\n';
}

struct AllocationRow {
    PlayerId id;
    char side;  // 'C' or 'P'
    int area;
    double q_intra, q_inter, q_total, surplus;
};

void write_allocations(const std::vector<AllocationRow>& rows, const std::filesystem::path& p) {
    auto f = open_out(p);
    f << "player_id,side,area,q_intra,q_inter,q_total,surplus\n";
    for (const auto& r : rows)
        f << r.id << ',' << r.side << ',' << r.area << ',' << num(r.q_intra) << ','
          << num(r.q_inter) << ',' << num(r.q_total) << ',' << num(r.surplus) << '\n';
}

}  // namespace

void write_results(const Scenario& sc, const TwoStepOutcome& outcome,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    json summary;
    summary["mode"] = "2smc";
    summary["scenario"] = sc.name;
    summary["converged"] = outcome.converged();
    summary["welfare"] = outcome.welfare;
    summary["traded_energy"] = outcome.traded_energy;
    json areas = json::object();
    std::unordered_map<int, double> area_price;
    for (const auto& [area, ao] : outcome.area_outcomes) {
        area_price[area] = ao.price;
        areas[std::to_string(area)] = {{"price", ao.price},
                                       {"iterations", ao.iterations},
                                       {"converged", ao.converged},
                                       {"one_sided", ao.one_sided},
                                       {"traded", ao.traded},
                                       {"wall_time", ao.wall_time}};
        write_trajectory(ao, dir / ("trajectory_area_" + std::to_string(area) + ".csv"));
    }
    summary["areas"] = areas;
    if (outcome.inter_outcome) {
        const auto& io = *outcome.inter_outcome;
        summary["lambda_C"] = io.price;
        summary["step2"] = {{"iterations", io.iterations},
                            {"converged", io.converged},
                            {"traded", io.traded},
                            {"wall_time", io.wall_time}};
        write_trajectory(io, dir / "trajectory_C.csv");
    }
    summary["timing"] = {{"step1_max_time", outcome.step1_max_time},
                         {"step2_time", outcome.step2_time},
                         {"composed_time", outcome.composed_time}};
    open_out(dir / "summary.json") << summary.dump(2) << '\n';

    const double lambda_c = outcome.inter_outcome ? outcome.inter_outcome->price : 0.0;
    std::vector<AllocationRow> rows;
    std::unordered_map<PlayerId, const ConsumerParams*> cons;
    for (const auto& c : sc.consumers) cons[c.id] = &c;
    std::unordered_map<PlayerId, const ProsumerParams*> pros;
    for (const auto& p : sc.prosumers) pros[p.id] = &p;
    for (const auto& a : outcome.consumer_allocations) {
        const auto* c = cons.at(a.id);
        const double paid = area_price[c->area] * a.q_intra + lambda_c * a.q_inter;
        rows.push_back({a.id, 'C', c->area, a.q_intra, a.q_inter, a.q_total,
                        utility_value(*c, a.q_total) - paid});
    }
    for (const auto& a : outcome.prosumer_allocations) {
        const auto* p = pros.at(a.id);
        const double earned = area_price[p->area] * a.q_intra + lambda_c * a.q_inter;
        rows.push_back({a.id, 'P', p->area, a.q_intra, a.q_inter, a.q_total,
                        earned - cost_value(*p, a.q_total)});
    }
    write_allocations(rows, dir / "allocations.csv");
}

void write_results(const Scenario& sc, const ClearingOutcome& outcome,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::unordered_map<PlayerId, double> qty;
    for (const auto& [id, q] : outcome.seller_quantities) qty[id] = q;
    for (const auto& [id, q] : outcome.buyer_quantities) qty[id] = q;

    std::vector<std::pair<ConsumerParams, double>> demands;
    std::vector<std::pair<ProsumerParams, double>> supplies;
    std::vector<AllocationRow> rows;
    double traded = 0.0;
    for (const auto& c : sc.consumers) {
        const double d = qty.count(c.id) ? qty[c.id] : 0.0;
        traded += d;
        demands.emplace_back(c, d);
        rows.push_back({c.id, 'C', c.area, d, 0.0, d, consumer_surplus(c, d, outcome.price)});
    }
    for (const auto& p : sc.prosumers) {
        const double s = qty.count(p.id) ? qty[p.id] : 0.0;
        supplies.emplace_back(p, s);
        rows.push_back({p.id, 'P', p.area, s, 0.0, s, prosumer_surplus(p, s, outcome.price)});
    }

    json summary;
    summary["mode"] = "1smc";
    summary["scenario"] = sc.name;
    summary["converged"] = outcome.converged;
    summary["lambda_T"] = outcome.price;
    summary["iterations"] = outcome.iterations;
    summary["welfare"] = social_welfare(demands, supplies);
    summary["traded_energy"] = traded;
    summary["timing"] = {{"wall_time", outcome.wall_time}};
    open_out(dir / "summary.json") << summary.dump(2) << '\n';
    write_trajectory(outcome, dir / "trajectory_T.csv");
    write_allocations(rows, dir / "allocations.csv");
}

}  // namespace fm
