#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "feedermarket/config.hpp"
#include "feedermarket/econ.hpp"

namespace fm {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Complete input artifact: areas, players and solver settings.
struct Scenario {
    std::string name;
    std::vector<int> areas;
    std::vector<ConsumerParams> consumers;
    std::vector<ProsumerParams> prosumers;
    SolverConfig solver;
};

// Throws ScenarioError naming the offending player on any invariant violation.
void validate(const Scenario& sc);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& sc, const std::filesystem::path& path);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

// Seeded parameter-range description for synthetic scenarios. Default ranges
// are the envelope of the bundled 20-player scenario's values; a documented
// reconstruction, not published data.
struct PopulationSpec {
    std::string name = "generated";
    int num_areas = 3;
    int sellers = 0;
    int buyers = 0;
    Range a{0.001, 0.008};
    Range b{2.0, 9.0};
    Range omega{7.0, 20.0};
    Range mu{0.04, 0.15};
    Range caps{30.0, 200.0};
    std::uint64_t seed = 0;
    SolverConfig solver;
};

// Deterministic: the same spec always yields the same scenario. Players are
// assigned round-robin to areas.
Scenario generate_population(const PopulationSpec& spec);

}  // namespace fm
