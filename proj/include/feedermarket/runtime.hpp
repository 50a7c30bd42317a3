#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "feedermarket/clearing.hpp"

namespace fm {

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MsgKind { PriceSignal, QuantityReply, AreaResult, Step2Invite };

std::string to_string(MsgKind k);

// One logged message. PriceSignal broadcasts are logged once per round;
// recipient "*" stands for every player of the market.
struct TraceEntry {
    long seq = 0;
    std::string market;  // "area_<id>" or "C"
    MsgKind kind{};
    std::string sender;
    std::string recipient;
    int iteration = 0;
    double value = 0.0;   // lambda for PriceSignal, quantity for QuantityReply
    std::string payload;  // extra fields, comma-separated
};

struct DistributedRun {
    TwoStepOutcome outcome;
    std::vector<TraceEntry> trace;
};

struct RuntimeOptions {
    bool tracing = false;
    std::uint64_t schedule_seed = 0;  // shuffles round interleaving across areas
    // Fault injection: (player, iteration) replies to drop. A dropped reply
    // surfaces as a ProtocolError at the round barrier.
    std::set<std::pair<PlayerId, int>> drop_replies;
};

// Round-synchronous message-passing execution of the two-step clearing:
// one data-centre actor per area, one actor per player. Produces prices and
// quantities bit-identical to run_2smc under the same config.
TwoStepOutcome run_distributed(const Scenario& sc, const SolverConfig& cfg);
DistributedRun run_distributed_traced(const Scenario& sc, const SolverConfig& cfg,
                                      const RuntimeOptions& opts);

// Messages of one market's log, in total order. Empty when tracing was off.
std::vector<TraceEntry> message_trace(const DistributedRun& run, const std::string& market);

void write_trace(const std::vector<TraceEntry>& trace, const std::filesystem::path& path);

}  // namespace fm
