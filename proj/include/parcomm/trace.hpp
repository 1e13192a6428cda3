#pragma once

#include "parcomm/core.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace parcomm {

enum class EventKind { Plant, State, Trigger, Tx, Rx, Deliver, Adapt };

std::string to_string(EventKind e);
EventKind parse_event_kind(const std::string& s);

/// One trace row. Unused fields stay at their defaults (-1, empty, NaN) and
/// are written as empty cells.
struct TraceRecord {
    Slot slot = 0;
    NodeId node = -1;
    int pair = -1;
    EventKind event = EventKind::State;
    std::string kind;     // packet kind for tx/rx/deliver rows
    int subframe = -1;
    int subchannel = -1;
    std::string outcome;  // MAC outcome, or transmit/gated/silent on trigger rows
    Slot stamp = -1;
    Eigen::VectorXd status;
    Eigen::VectorXd s_hat;
    Eigen::VectorXd s_hat_dst;
    double error = std::numeric_limits<double>::quiet_NaN();
    double m = std::numeric_limits<double>::quiet_NaN();
};

/// Parameters a summary needs besides the rows; stored in the trace header.
struct TraceHeader {
    Slot duration = 0;
    int rri = 10;
    int subchannels = 2;
    double d_des = 10.0;
    int distance_component = 0;  // index of the gap in pair statuses; -1 if none
};

inline constexpr const char* kTraceColumns =
    "slot,node,pair,event,kind,subframe,subchannel,outcome,stamp,status,s_hat,s_hat_dst,error,m";

class TraceWriter {
public:
    TraceWriter(std::ostream& out, const TraceHeader& header);
    void write(const TraceRecord& r);

private:
    std::ostream& out_;
    std::string line_;
};

struct TraceFile {
    TraceHeader header;
    std::vector<TraceRecord> records;
};

/// Parse a trace written by TraceWriter. Throws std::runtime_error on malformed input.
TraceFile read_trace(std::istream& in);
TraceFile read_trace_file(const std::string& path);

}  // namespace parcomm
