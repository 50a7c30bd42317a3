#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "feedermarket/clearing.hpp"
#include "feedermarket/oracle.hpp"
#include "feedermarket/results.hpp"
#include "feedermarket/runtime.hpp"
#include "feedermarket/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

struct ModeResult {
    double welfare = 0.0;
    double traded = 0.0;
    double time = 0.0;
    bool converged = true;
};

ModeResult run_2smc_summary(const fm::Scenario& sc) {
    auto out = fm::run_2smc(sc, sc.solver);
    return {out.welfare, out.traded_energy, out.composed_time, out.converged()};
}

ModeResult run_1smc_summary(const fm::Scenario& sc) {
    auto out = fm::run_1smc(sc, sc.solver);
    double traded = 0.0;
    for (const auto& [id, q] : out.buyer_quantities) traded += q;
    std::vector<std::pair<fm::ConsumerParams, double>> demands;
    std::vector<std::pair<fm::ProsumerParams, double>> supplies;
    std::map<fm::PlayerId, double> qty;
    for (const auto& [id, q] : out.seller_quantities) qty[id] = q;
    for (const auto& [id, q] : out.buyer_quantities) qty[id] = q;
    for (const auto& c : sc.consumers) demands.emplace_back(c, qty.count(c.id) ? qty[c.id] : 0.0);
    for (const auto& p : sc.prosumers) supplies.emplace_back(p, qty.count(p.id) ? qty[p.id] : 0.0);
    return {fm::social_welfare(demands, supplies), traded, out.wall_time, out.converged};
}

int cmd_run(const std::string& scenario_path, const std::string& mode, const fs::path& out_dir,
            bool distributed, bool trace, std::uint64_t seed) {
    auto sc = fm::load_scenario(scenario_path);
    bool converged = true;
    if (mode == "1smc") {
        auto out = fm::run_1smc(sc, sc.solver);
        fm::write_results(sc, out, out_dir);
        converged = out.converged;
        std::printf("1SMC: lambda_T=%.6f iterations=%d converged=%s\n", out.price, out.iterations,
                    converged ? "yes" : "no");
    } else {
        fm::TwoStepOutcome out;
        if (distributed) {
            fm::RuntimeOptions opts;
            opts.tracing = trace;
            opts.schedule_seed = seed;
            auto run = fm::run_distributed_traced(sc, sc.solver, opts);
            out = std::move(run.outcome);
            if (trace) {
                fs::create_directories(out_dir);
                fm::write_trace(run.trace, out_dir / "trace.csv");
            }
        } else {
            out = fm::run_2smc(sc, sc.solver);
        }
        if (trace && !distributed)
            std::fprintf(stderr, "note: --trace only records messages under --distributed\n");
        fm::write_results(sc, out, out_dir);
        converged = out.converged();
        for (const auto& [area, ao] : out.area_outcomes)
            std::printf("area %d: lambda=%.6f iterations=%d%s\n", area, ao.price, ao.iterations,
                        ao.one_sided ? " (one-sided, zero trade)" : "");
        if (out.inter_outcome)
            std::printf("area C: lambda_C=%.6f iterations=%d\n", out.inter_outcome->price,
                        out.inter_outcome->iterations);
        std::printf("welfare=%.4f traded=%.4f composed_time=%.6fs\n", out.welfare,
                    out.traded_energy, out.composed_time);
    }
    std::printf("results written to %s\n", out_dir.string().c_str());
    return converged ? kExitOk : kExitNotConverged;
}

int cmd_compare(const std::string& scenario_path, const fs::path& out_dir) {
    auto sc = fm::load_scenario(scenario_path);
    auto two = run_2smc_summary(sc);
    auto one = run_1smc_summary(sc);

    auto pct = [](double v2, double v1) { return v1 != 0.0 ? 100.0 * (v2 - v1) / v1 : 0.0; };
    std::printf("%-22s %14s %14s %14s\n", "", "2SMC", "1SMC", "variation (%)");
    std::printf("%-22s %14.4f %14.4f %+13.1f%%\n", "Social Welfare", two.welfare, one.welfare,
                pct(two.welfare, one.welfare));
    std::printf("%-22s %14.4f %14.4f %+13.1f%%\n", "Traded Energy (kWh)", two.traded, one.traded,
                pct(two.traded, one.traded));
    std::printf("%-22s %14.6f %14.6f %+13.1f%%\n", "Computational Time (s)", two.time, one.time,
                pct(two.time, one.time));

    fs::create_directories(out_dir);
    json j;
    j["scenario"] = sc.name;
    j["2smc"] = {{"welfare", two.welfare}, {"traded_energy", two.traded}, {"time", two.time}};
    j["1smc"] = {{"welfare", one.welfare}, {"traded_energy", one.traded}, {"time", one.time}};
    j["variation_pct"] = {{"welfare", pct(two.welfare, one.welfare)},
                          {"traded_energy", pct(two.traded, one.traded)},
                          {"time", pct(two.time, one.time)}};
    std::ofstream(out_dir / "compare.json") << j.dump(2) << '\n';
    return (two.converged && one.converged) ? kExitOk : kExitNotConverged;
}

int cmd_generate(int areas, int sellers, int buyers, std::uint64_t seed, const fs::path& out) {
    fm::PopulationSpec spec;
    spec.num_areas = areas;
    spec.sellers = sellers;
    spec.buyers = buyers;
    spec.seed = seed;
    spec.name = "generated_s" + std::to_string(sellers) + "_b" + std::to_string(buyers) +
                "_seed" + std::to_string(seed);
    auto sc = fm::generate_population(spec);
    fm::save_scenario(sc, out);
    std::printf("wrote %s (%d areas, %d prosumers, %d consumers)\n", out.string().c_str(), areas,
                sellers, buyers);
    return kExitOk;
}

int cmd_bench(const std::vector<int>& sizes, std::uint64_t seed, const fs::path& out_dir) {
    if (sizes.empty()) {
        std::fprintf(stderr, "bench: empty sizes list\n");
        return kExitInput;
    }
    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "bench.csv");
    csv << "players,sellers,buyers,t_1smc,t_2smc_composed,welfare_1smc,welfare_2smc\n";
    std::printf("%8s %12s %16s %16s %16s\n", "players", "t_1smc (s)", "t_2smc (s)",
                "welfare_1smc", "welfare_2smc");
    for (int n : sizes) {
        if (n < 2) {
            std::fprintf(stderr, "bench: size %d too small\n", n);
            return kExitInput;
        }
        // same seller share as the 2000-player case study (900/2000)
        const int sellers = std::max(1, static_cast<int>(n * 0.45));
        const int buyers = std::max(1, n - sellers);
        fm::PopulationSpec spec;
        spec.num_areas = 3;
        spec.sellers = sellers;
        spec.buyers = buyers;
        spec.seed = seed;
        auto sc = fm::generate_population(spec);
        auto two = run_2smc_summary(sc);
        auto one = run_1smc_summary(sc);
        csv << n << ',' << sellers << ',' << buyers << ',' << one.time << ',' << two.time << ','
            << one.welfare << ',' << two.welfare << '\n';
        std::printf("%8d %12.6f %16.6f %16.4f %16.4f\n", n, one.time, two.time, one.welfare,
                    two.welfare);
    }
    std::printf("raw data written to %s\n", (out_dir / "bench.csv").string().c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feeder-based local energy market clearing (two-step and one-step)"};
    app.require_subcommand(1);

    std::string scenario_path, mode = "2smc";
    std::string out_dir = "results";
    bool distributed = false, trace = false;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Clear one scenario and write result files");
    run->add_option("--scenario", scenario_path, "Scenario file")->required();
    run->add_option("--mode", mode, "2smc or 1smc")->check(CLI::IsMember({"2smc", "1smc"}));
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--distributed", distributed, "Use the message-passing runtime");
    run->add_flag("--trace", trace, "Record the message trace (with --distributed)");
    run->add_option("--seed", seed, "Scheduler seed for the distributed runtime");

    auto* compare = app.add_subcommand("compare", "Run both modes and report deltas");
    compare->add_option("--scenario", scenario_path, "Scenario file")->required();
    compare->add_option("--out", out_dir, "Output directory");

    int areas = 3, sellers = 0, buyers = 0;
    std::string gen_out = "scenario.json";
    auto* generate = app.add_subcommand("generate", "Write a seeded synthetic scenario");
    generate->add_option("--areas", areas, "Number of areas")->check(CLI::PositiveNumber);
    generate->add_option("--sellers", sellers, "Prosumer count")->required();
    generate->add_option("--buyers", buyers, "Consumer count")->required();
    generate->add_option("--seed", seed, "Generator seed");
    generate->add_option("--out", gen_out, "Output scenario file");

    std::vector<int> sizes;
    auto* bench = app.add_subcommand("bench", "Scaling benchmark over generated scenarios");
    bench->add_option("--sizes", sizes, "Total player counts, e.g. --sizes 20,200,2000")
        ->delimiter(',');
    bench->add_option("--seed", seed, "Generator seed");
    bench->add_option("--out", out_dir, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(scenario_path, mode, out_dir, distributed, trace, seed);
        if (compare->parsed()) return cmd_compare(scenario_path, out_dir);
        if (generate->parsed()) {
            if (sellers <= 0 || buyers <= 0) {
                std::fprintf(stderr, "generate: seller and buyer counts must be positive\n");
                return kExitInput;
            }
            return cmd_generate(areas, sellers, buyers, seed, gen_out);
        }
        if (bench->parsed()) return cmd_bench(sizes, seed, out_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return kExitInput;
}
