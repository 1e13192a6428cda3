#include "parcomm/metrics.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace parcomm {

double compute_aoi(const std::vector<std::pair<Slot, Slot>>& deliveries, Slot horizon) {
    if (deliveries.empty()) return std::numeric_limits<double>::quiet_NaN();
    const Slot start = deliveries.front().first;
    if (start >= horizon) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    Slot freshest = deliveries.front().second;
    std::size_t next = 0;
    for (Slot t = start; t < horizon; ++t) {
        while (next < deliveries.size() && deliveries[next].first <= t) {
            freshest = std::max(freshest, deliveries[next].second);
            ++next;
        }
        sum += static_cast<double>(t - freshest);
    }
    return sum / static_cast<double>(horizon - start);
}

SummaryBuilder::SummaryBuilder(const TraceHeader& header) : header_(header) { totals_.duration = header.duration; }

void SummaryBuilder::close_run(PairAcc& a) {
    if (a.run == 0) return;
    const std::size_t bucket = a.run < 10 ? 0 : a.run < 100 ? 1 : a.run < 1000 ? 2 : 3;
    ++a.runs[bucket];
    a.run = 0;
}

void SummaryBuilder::add(const TraceRecord& r) {
    switch (r.event) {
        case EventKind::State: {
            PairAcc& a = pairs_[r.pair];
            a.src = r.node;
            ++a.slots;
            if (header_.distance_component >= 0 && r.status.size() > header_.distance_component) {
                const double d = r.status[header_.distance_component];
                a.min_d = std::min(a.min_d, d);
                a.sq += (d - header_.d_des) * (d - header_.d_des);
                a.bias += d - header_.d_des;
            }
            a.err_sum += r.error;
            a.err_max = std::max(a.err_max, r.error);
            if (r.s_hat != r.s_hat_dst) {
                ++a.misaligned;
                ++a.run;
            } else {
                close_run(a);
            }
            break;
        }
        case EventKind::Trigger: {
            PairAcc& a = pairs_[r.pair];
            ++a.epochs;
            if (r.outcome == "transmit") ++a.triggers;
            if (r.outcome == "gated") {
                ++a.triggers;
                ++a.gated;
            }
            break;
        }
        case EventKind::Tx: {
            NodeSummary& n = nodes_[r.node];
            n.node = r.node;
            if (r.kind == "StatusOTA") ++n.status_ota, ++totals_.status_ota;
            else if (r.kind == "ModelCalibration") ++n.calibration, ++totals_.calibration;
            else if (r.kind == "ModelConfirmation") ++n.confirmation, ++totals_.confirmation;
            else if (r.kind == "Correction") ++n.correction, ++totals_.correction;
            else if (r.kind == "Control") ++n.control, ++totals_.control;
            resources_.insert({r.slot, r.subchannel});
            break;
        }
        case EventKind::Rx: {
            if (r.outcome == "Delivered") ++totals_.delivered;
            else if (r.outcome == "Collision") ++totals_.collision;
            else if (r.outcome == "HalfDuplex") ++totals_.half_duplex;
            else if (r.outcome == "ChannelLoss") ++totals_.channel_loss;
            else if (r.outcome == "Dropped") ++totals_.dropped;
            if (r.pair >= 0 && r.kind != "Control") {
                PairAcc& a = pairs_[r.pair];
                if (r.kind == "StatusOTA" || r.kind == "Correction" || r.kind == "ModelCalibration") a.dst = r.node;
            }
            break;
        }
        case EventKind::Deliver:
            pairs_[r.pair].deliveries.emplace_back(r.slot, r.stamp);
            break;
        case EventKind::Plant:
        case EventKind::Adapt:
            break;
    }
}

RunSummary SummaryBuilder::finish() const {
    RunSummary s = totals_;
    s.used_resources = static_cast<long long>(resources_.size());
    const auto windows = static_cast<std::size_t>((header_.duration + header_.rri - 1) / header_.rri);
    s.occupancy = windows == 0 ? 0.0
                               : static_cast<double>(resources_.size()) /
                                     (static_cast<double>(windows) * header_.rri * header_.subchannels);
    s.min_safe_distance = header_.distance_component >= 0 && !pairs_.empty()
                              ? -std::numeric_limits<double>::infinity()
                              : 0.0;
    double err_sum = 0.0, sq_sum = 0.0, aoi_sum = 0.0;
    long long slot_sum = 0, aoi_n = 0;
    for (const auto& [id, acc] : pairs_) {
        PairAcc a = acc;
        close_run(a);
        PairSummary p;
        p.pair = id;
        p.src = a.src;
        p.dst = a.dst;
        p.slots = a.slots;
        if (header_.distance_component >= 0 && a.slots > 0) {
            p.min_distance = a.min_d;
            p.min_safe_distance = header_.d_des - a.min_d;
            p.distance_rms = std::sqrt(a.sq / static_cast<double>(a.slots));
            p.distance_bias = a.bias / static_cast<double>(a.slots);
            p.crash = a.min_d < 0.0;
            s.min_safe_distance = std::max(s.min_safe_distance, p.min_safe_distance);
        }
        p.mean_error = a.slots ? a.err_sum / static_cast<double>(a.slots) : 0.0;
        p.max_error = a.err_max;
        p.misaligned_slots = a.misaligned;
        p.misalignment_runs = a.runs;
        p.epochs = a.epochs;
        p.triggers = a.triggers;
        p.gated = a.gated;
        p.mean_aoi = compute_aoi(a.deliveries, header_.duration);
        s.crash = s.crash || p.crash;
        s.max_error = std::max(s.max_error, p.max_error);
        s.misaligned_slots += p.misaligned_slots;
        err_sum += a.err_sum;
        sq_sum += a.sq;
        slot_sum += a.slots;
        if (!std::isnan(p.mean_aoi)) {
            aoi_sum += p.mean_aoi;
            ++aoi_n;
        }
        s.pairs.push_back(p);
    }
    if (!std::isfinite(s.min_safe_distance)) s.min_safe_distance = 0.0;
    s.mean_error = slot_sum ? err_sum / static_cast<double>(slot_sum) : 0.0;
    s.distance_rms = slot_sum && header_.distance_component >= 0 ? std::sqrt(sq_sum / static_cast<double>(slot_sum)) : 0.0;
    s.mean_aoi = aoi_n ? aoi_sum / static_cast<double>(aoi_n) : std::numeric_limits<double>::quiet_NaN();
    for (const auto& [id, n] : nodes_) s.nodes.push_back(n);
    return s;
}

RunSummary summarize(const TraceFile& trace) {
    SummaryBuilder b(trace.header);
    for (const TraceRecord& r : trace.records) b.add(r);
    return b.finish();
}

namespace {

nlohmann::json num(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

}  // namespace

std::string summary_json(const RunSummary& s) {
    using nlohmann::json;
    json j;
    j["format"] = "parcomm-summary v1";
    j["duration"] = s.duration;
    j["tx"] = {{"status_ota", s.status_ota},   {"calibration", s.calibration}, {"confirmation", s.confirmation},
               {"correction", s.correction},   {"control", s.control}};
    j["used_resources"] = s.used_resources;
    j["occupancy"] = s.occupancy;
    j["rx"] = {{"delivered", s.delivered},     {"collision", s.collision}, {"half_duplex", s.half_duplex},
               {"channel_loss", s.channel_loss}, {"dropped", s.dropped}};
    j["min_safe_distance"] = s.min_safe_distance;
    j["crash"] = s.crash;
    j["mean_error"] = s.mean_error;
    j["max_error"] = s.max_error;
    j["distance_rms"] = s.distance_rms;
    j["mean_aoi"] = num(s.mean_aoi);
    j["misaligned_slots"] = s.misaligned_slots;
    json pairs = json::array();
    for (const PairSummary& p : s.pairs) {
        pairs.push_back({{"pair", p.pair},
                         {"src", p.src},
                         {"dst", p.dst},
                         {"slots", p.slots},
                         {"min_distance", p.min_distance},
                         {"min_safe_distance", p.min_safe_distance},
                         {"distance_rms", p.distance_rms},
                         {"distance_bias", p.distance_bias},
                         {"crash", p.crash},
                         {"mean_error", p.mean_error},
                         {"max_error", p.max_error},
                         {"misaligned_slots", p.misaligned_slots},
                         {"misalignment_runs", p.misalignment_runs},
                         {"epochs", p.epochs},
                         {"triggers", p.triggers},
                         {"gated", p.gated},
                         {"mean_aoi", num(p.mean_aoi)}});
    }
    j["pairs"] = pairs;
    json nodes = json::array();
    for (const NodeSummary& n : s.nodes) {
        nodes.push_back({{"node", n.node},
                         {"status_ota", n.status_ota},
                         {"calibration", n.calibration},
                         {"confirmation", n.confirmation},
                         {"correction", n.correction},
                         {"control", n.control}});
    }
    j["nodes"] = nodes;
    return j.dump(2) + "\n";
}

}  // namespace parcomm
