#pragma once

#include "parcomm/config.hpp"
#include "parcomm/metrics.hpp"
#include "parcomm/smart.hpp"
#include "parcomm/trace.hpp"

#include <iosfwd>
#include <map>
#include <vector>

namespace parcomm {

struct RunOptions {
    std::ostream* trace = nullptr;  // CSV destination, optional
    bool keep_records = false;      // keep every trace row in RunResult::records
    bool plant_rows = true;         // emit per-node plant rows (only when tracing or keeping records)
};

/// One adaptation step of a platoon's supervision node.
struct AdaptEvent {
    Slot slot = 0;
    int platoon = 0;
    double window_cost = 0.0;
    long long collisions = 0;
    double m = 0.0;  // auxiliary cost after the step
};

struct RunResult {
    TraceHeader header;
    RunSummary summary;
    std::vector<TraceRecord> records;
    std::vector<AdaptEvent> adaptation;
    std::map<int, Slot> first_adoption;  // pair -> first model switch slot at the source
    std::map<int, PolicyBank> banks;     // pair -> SMART bank used (SMART runs only)
};

/// Header describing a scenario's trace.
TraceHeader trace_header(const ScenarioConfig& cfg);

/// Run one scenario. Throws ConfigError for an invalid config. A crash (a
/// negative gap) does not stop the run; it is flagged in the summary.
RunResult run(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Same engine loop with periodic raw updates every `interval` slots.
RunResult run_baseline(ScenarioConfig cfg, int interval, const RunOptions& opts = {});

/// Silent error-transition counts per pair, from an open-loop shadow of each
/// source estimate that is re-seeded every `smart.reseed_epochs` epochs.
std::map<int, TransitionCounter> calibrate_transitions(const ScenarioConfig& cfg);

/// Per-pair SMART policy banks from calibrate_transitions, through the
/// `smart.bank_dir` cache when one is set.
std::map<int, PolicyBank> build_banks(const ScenarioConfig& cfg);

}  // namespace parcomm
