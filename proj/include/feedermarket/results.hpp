#pragma once

#include <filesystem>

#include "feedermarket/clearing.hpp"
#include "feedermarket/scenario.hpp"

namespace fm {

// Writes summary.json, one trajectory_<clearing>.csv per clearing and
// allocations.csv into dir (created if missing).
void write_results(const Scenario& sc, const TwoStepOutcome& outcome,
                   const std::filesystem::path& dir);
void write_results(const Scenario& sc, const ClearingOutcome& outcome,
                   const std::filesystem::path& dir);

}  // namespace fm
