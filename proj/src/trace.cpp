#include "parcomm/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace parcomm {

std::string to_string(EventKind e) {
    switch (e) {
        case EventKind::Plant: return "plant";
        case EventKind::State: return "state";
        case EventKind::Trigger: return "trigger";
        case EventKind::Tx: return "tx";
        case EventKind::Rx: return "rx";
        case EventKind::Deliver: return "deliver";
        case EventKind::Adapt: return "adapt";
    }
    return "?";
}

EventKind parse_event_kind(const std::string& s) {
    for (auto e : {EventKind::Plant, EventKind::State, EventKind::Trigger, EventKind::Tx, EventKind::Rx,
                   EventKind::Deliver, EventKind::Adapt})
        if (to_string(e) == s) return e;
    throw std::runtime_error("unknown trace event '" + s + "'");
}

namespace {

void append_double(std::string& out, double v) {
    if (std::isnan(v)) return;
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void append_int(std::string& out, long long v, bool skip_negative) {
    if (skip_negative && v < 0) return;
    char buf[24];
    const int n = std::snprintf(buf, sizeof buf, "%lld", v);
    out.append(buf, static_cast<std::size_t>(n));
}

void append_vec(std::string& out, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out.push_back(';');
        append_double(out, v[i]);
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_d(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::strtod(s.c_str(), nullptr);
}

long long parse_i(const std::string& s, long long fallback) {
    if (s.empty()) return fallback;
    return std::stoll(s);
}

Eigen::VectorXd parse_vec(const std::string& s) {
    if (s.empty()) return {};
    std::vector<double> v;
    std::string cur;
    for (char c : s) {
        if (c == ';') {
            v.push_back(parse_d(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    v.push_back(parse_d(cur));
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TraceWriter::TraceWriter(std::ostream& out, const TraceHeader& h) : out_(out) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "# parcomm-trace v1 duration=%lld rri=%d subchannels=%d d_des=%.17g distance_component=%d\n",
                  static_cast<long long>(h.duration), h.rri, h.subchannels, h.d_des, h.distance_component);
    out_ << buf << kTraceColumns << "\n";
}

void TraceWriter::write(const TraceRecord& r) {
    std::string& l = line_;
    l.clear();
    append_int(l, r.slot, false);
    l.push_back(',');
    append_int(l, r.node, true);
    l.push_back(',');
    append_int(l, r.pair, true);
    l.push_back(',');
    l += to_string(r.event);
    l.push_back(',');
    l += r.kind;
    l.push_back(',');
    append_int(l, r.subframe, true);
    l.push_back(',');
    append_int(l, r.subchannel, true);
    l.push_back(',');
    l += r.outcome;
    l.push_back(',');
    append_int(l, r.stamp, true);
    l.push_back(',');
    append_vec(l, r.status);
    l.push_back(',');
    append_vec(l, r.s_hat);
    l.push_back(',');
    append_vec(l, r.s_hat_dst);
    l.push_back(',');
    append_double(l, r.error);
    l.push_back(',');
    append_double(l, r.m);
    l.push_back('\n');
    out_.write(l.data(), static_cast<std::streamsize>(l.size()));
}

TraceFile read_trace(std::istream& in) {
    TraceFile tf;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# parcomm-trace v1", 0) != 0)
        throw std::runtime_error("trace: missing header line");
    {
        long long duration = 0;
        int dc = 0;
        if (std::sscanf(line.c_str(), "# parcomm-trace v1 duration=%lld rri=%d subchannels=%d d_des=%lf distance_component=%d",
                        &duration, &tf.header.rri, &tf.header.subchannels, &tf.header.d_des, &dc) != 5)
            throw std::runtime_error("trace: malformed header line");
        tf.header.duration = duration;
        tf.header.distance_component = dc;
    }
    if (!std::getline(in, line) || line != kTraceColumns) throw std::runtime_error("trace: unexpected column header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 14) throw std::runtime_error("trace: expected 14 columns, got " + std::to_string(f.size()));
        TraceRecord r;
        r.slot = parse_i(f[0], 0);
        r.node = static_cast<NodeId>(parse_i(f[1], -1));
        r.pair = static_cast<int>(parse_i(f[2], -1));
        r.event = parse_event_kind(f[3]);
        r.kind = f[4];
        r.subframe = static_cast<int>(parse_i(f[5], -1));
        r.subchannel = static_cast<int>(parse_i(f[6], -1));
        r.outcome = f[7];
        r.stamp = parse_i(f[8], -1);
        r.status = parse_vec(f[9]);
        r.s_hat = parse_vec(f[10]);
        r.s_hat_dst = parse_vec(f[11]);
        r.error = parse_d(f[12]);
        r.m = parse_d(f[13]);
        tf.records.push_back(std::move(r));
    }
    return tf;
}

TraceFile read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read trace " + path);
    return read_trace(in);
}

}  // namespace parcomm
