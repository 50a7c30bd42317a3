#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "feedermarket/results.hpp"
#include "feedermarket/scenario.hpp"
#include "testutil.hpp"

using namespace fm;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    auto d = fs::temp_directory_path() / ("fm_test_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("bundled scenario loads with the published parameters") {
    auto sc = load_scenario(fmtest::table1_path());
    CHECK(sc.areas == std::vector<int>{1, 2, 3});
    CHECK(sc.prosumers.size() == 9);
    CHECK(sc.consumers.size() == 11);

    const auto& p6 = sc.prosumers[5];
    CHECK(p6.id == "P6");
    CHECK(p6.a == 0.0014);
    CHECK(p6.b == 2.25);
    CHECK(p6.area == 3);
    CHECK(p6.s_max == 37.19);
    CHECK(p6.gamma == 0.0);
    CHECK(p6.s_min == 0.0);

    const auto& c11 = sc.consumers[10];
    CHECK(c11.id == "C11");
    CHECK(c11.omega == 19.04);
    CHECK(c11.mu == 0.0650);
    CHECK(c11.area == 3);
    CHECK(c11.d_max == 146.46);
}

TEST_CASE("validation errors name the offending player") {
    auto sc = load_scenario(fmtest::table1_path());
    sc.consumers[2].mu = 0.0;
    CHECK_THROWS_WITH_AS(validate(sc), doctest::Contains("C3"), ScenarioError);

    sc = load_scenario(fmtest::table1_path());
    sc.prosumers[0].a = 0.0;
    CHECK_THROWS_WITH_AS(validate(sc), doctest::Contains("P1"), ScenarioError);

    sc = load_scenario(fmtest::table1_path());
    sc.prosumers[1].id = "P1";
    CHECK_THROWS_WITH_AS(validate(sc), doctest::Contains("P1"), ScenarioError);

    sc = load_scenario(fmtest::table1_path());
    sc.consumers[0].area = 9;
    CHECK_THROWS_AS(validate(sc), ScenarioError);
}

TEST_CASE("unknown fields are rejected") {
    auto d = temp_dir("unknown_field");
    std::ofstream(d / "bad.json")
        << R"({"areas":[1],"prosumers":[],"consumers":[],"frobnicate":1})";
    CHECK_THROWS_WITH_AS(load_scenario(d / "bad.json"), doctest::Contains("frobnicate"),
                         ScenarioError);
    std::ofstream(d / "bad2.json")
        << R"({"areas":[1],"prosumers":[{"id":"P1","area":1,"a":0.1,"b":1,"s_max":5,"oops":2}],"consumers":[]})";
    CHECK_THROWS_WITH_AS(load_scenario(d / "bad2.json"), doctest::Contains("oops"),
                         ScenarioError);
}

TEST_CASE("scenario round-trips exactly") {
    auto sc = load_scenario(fmtest::table1_path());
    auto d = temp_dir("roundtrip");
    save_scenario(sc, d / "copy.json");
    auto rt = load_scenario(d / "copy.json");
    CHECK(rt.name == sc.name);
    CHECK(rt.areas == sc.areas);
    REQUIRE(rt.prosumers.size() == sc.prosumers.size());
    for (std::size_t i = 0; i < sc.prosumers.size(); ++i) {
        CHECK(rt.prosumers[i].id == sc.prosumers[i].id);
        CHECK(rt.prosumers[i].a == sc.prosumers[i].a);
        CHECK(rt.prosumers[i].b == sc.prosumers[i].b);
        CHECK(rt.prosumers[i].gamma == sc.prosumers[i].gamma);
        CHECK(rt.prosumers[i].s_min == sc.prosumers[i].s_min);
        CHECK(rt.prosumers[i].s_max == sc.prosumers[i].s_max);
    }
    REQUIRE(rt.consumers.size() == sc.consumers.size());
    for (std::size_t i = 0; i < sc.consumers.size(); ++i) {
        CHECK(rt.consumers[i].omega == sc.consumers[i].omega);
        CHECK(rt.consumers[i].mu == sc.consumers[i].mu);
        CHECK(rt.consumers[i].d_min == sc.consumers[i].d_min);
        CHECK(rt.consumers[i].d_max == sc.consumers[i].d_max);
    }
    CHECK(rt.solver.epsilon == sc.solver.epsilon);
    CHECK(rt.solver.max_iters == sc.solver.max_iters);

    // saving again yields the identical byte stream
    save_scenario(rt, d / "copy2.json");
    CHECK(slurp(d / "copy.json") == slurp(d / "copy2.json"));
}

TEST_CASE("population generator is seed-deterministic") {
    PopulationSpec spec;
    spec.sellers = 9;
    spec.buyers = 11;
    spec.seed = 42;
    auto a = generate_population(spec);
    auto b = generate_population(spec);
    auto d = temp_dir("gen");
    save_scenario(a, d / "a.json");
    save_scenario(b, d / "b.json");
    CHECK(slurp(d / "a.json") == slurp(d / "b.json"));

    spec.seed = 43;
    save_scenario(generate_population(spec), d / "c.json");
    CHECK(slurp(d / "a.json") != slurp(d / "c.json"));

    // round-robin assignment covers every area
    for (int area = 1; area <= 3; ++area) {
        bool found = false;
        for (const auto& p : a.prosumers) found = found || p.area == area;
        CHECK(found);
    }

    PopulationSpec bad;
    bad.sellers = -1;
    bad.buyers = 2;
    CHECK_THROWS_AS(generate_population(bad), std::domain_error);
}

TEST_CASE("result files: trajectories, allocations, recomputable welfare") {
    auto sc = load_scenario(fmtest::table1_path());
    auto out = run_2smc(sc, sc.solver);
    auto d = temp_dir("results");
    write_results(sc, out, d);

    CHECK(fs::exists(d / "summary.json"));
    CHECK(fs::exists(d / "trajectory_area_1.csv"));
    CHECK(fs::exists(d / "trajectory_area_2.csv"));
    CHECK(fs::exists(d / "trajectory_area_3.csv"));
    CHECK(fs::exists(d / "trajectory_C.csv"));
    CHECK(fs::exists(d / "allocations.csv"));

    // first trajectory row starts at the configured initial price (zero)
    for (const auto& name : {"trajectory_area_1.csv", "trajectory_C.csv", "trajectory_T.csv"}) {
        if (!fs::exists(d / name)) continue;
        std::ifstream in(d / name);
        std::string header, row0;
        std::getline(in, header);
        std::getline(in, row0);
        CHECK(header == "iteration,lambda,supply,demand");
        CHECK(row0.substr(0, 4) == "0,0,");
    }

    // welfare recomputed from the allocation file matches the summary
    std::ifstream in(d / "allocations.csv");
    std::string line;
    std::getline(in, line);
    double welfare = 0.0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string id, side, area, qi, qe, qt, surplus;
        std::getline(ss, id, ',');
        std::getline(ss, side, ',');
        std::getline(ss, area, ',');
        std::getline(ss, qi, ',');
        std::getline(ss, qe, ',');
        std::getline(ss, qt, ',');
        const double q_total = std::stod(qt);
        if (side == "C") {
            for (const auto& c : sc.consumers)
                if (c.id == id) welfare += utility_value(c, q_total);
        } else {
            for (const auto& p : sc.prosumers)
                if (p.id == id) welfare -= cost_value(p, q_total);
        }
    }
    CHECK(std::abs(welfare - out.welfare) <= 1e-9 * std::max(1.0, std::abs(out.welfare)));

    // written values parse back to the in-memory doubles
    const auto& alloc = out.consumer_allocations.front();
    std::ifstream in2(d / "allocations.csv");
    std::getline(in2, line);  // header
    std::getline(in2, line);  // first consumer row (scenario order)
    std::stringstream ss(line);
    std::string f;
    for (int i = 0; i < 6; ++i) std::getline(ss, f, ',');
    CHECK(std::stod(f) == alloc.q_total);
}
