#pragma once

#include "parcomm/trace.hpp"

#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace parcomm {

/// Mean age of information over slots [first delivery, horizon). Deliveries
/// are (slot, generation stamp) pairs in slot order; AoI(t) = t - freshest
/// stamp delivered at or before t. Returns NaN without deliveries.
double compute_aoi(const std::vector<std::pair<Slot, Slot>>& deliveries, Slot horizon);

struct PairSummary {
    int pair = -1;
    NodeId src = -1;
    NodeId dst = -1;
    double min_distance = 0.0;
    double min_safe_distance = 0.0;  // d_des - min distance
    double distance_rms = 0.0;       // sqrt(mean (d - d_des)^2)
    double distance_bias = 0.0;      // mean (d - d_des)
    bool crash = false;
    double mean_error = 0.0;         // status recovery error
    double max_error = 0.0;
    long long misaligned_slots = 0;
    std::array<long long, 4> misalignment_runs{};  // run lengths [1,10) [10,100) [100,1000) [1000,inf)
    long long epochs = 0;
    long long triggers = 0;
    long long gated = 0;
    double mean_aoi = 0.0;
    long long slots = 0;
};

struct NodeSummary {
    NodeId node = -1;
    long long status_ota = 0;
    long long calibration = 0;
    long long confirmation = 0;
    long long correction = 0;
    long long control = 0;
};

struct RunSummary {
    Slot duration = 0;
    long long status_ota = 0;
    long long calibration = 0;
    long long confirmation = 0;
    long long correction = 0;
    long long control = 0;
    long long used_resources = 0;
    double occupancy = 0.0;
    long long delivered = 0;
    long long collision = 0;
    long long half_duplex = 0;
    long long channel_loss = 0;
    long long dropped = 0;
    double min_safe_distance = 0.0;  // worst over pairs
    bool crash = false;
    double mean_error = 0.0;
    double max_error = 0.0;
    double distance_rms = 0.0;
    double mean_aoi = 0.0;
    long long misaligned_slots = 0;
    std::vector<PairSummary> pairs;
    std::vector<NodeSummary> nodes;
};

/// Builds a RunSummary from trace rows only, so a summary can always be
/// recomputed from its trace file.
class SummaryBuilder {
public:
    explicit SummaryBuilder(const TraceHeader& header);
    void add(const TraceRecord& r);
    RunSummary finish() const;

private:
    struct PairAcc {
        NodeId src = -1;
        NodeId dst = -1;
        double min_d = std::numeric_limits<double>::infinity();
        double sq = 0.0;
        double bias = 0.0;
        double err_sum = 0.0;
        double err_max = 0.0;
        long long slots = 0;
        long long misaligned = 0;
        long long run = 0;
        std::array<long long, 4> runs{};
        long long epochs = 0, triggers = 0, gated = 0;
        std::vector<std::pair<Slot, Slot>> deliveries;
    };

    static void close_run(PairAcc& a);

    TraceHeader header_;
    std::map<int, PairAcc> pairs_;
    std::map<NodeId, NodeSummary> nodes_;
    std::set<std::pair<Slot, int>> resources_;
    RunSummary totals_;
};

RunSummary summarize(const TraceFile& trace);

std::string summary_json(const RunSummary& s);

}  // namespace parcomm
