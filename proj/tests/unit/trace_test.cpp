#include "doctest.h"
#include "parcomm/engine.hpp"
#include "parcomm/metrics.hpp"

#include <cmath>
#include <sstream>

using namespace parcomm;

TEST_CASE("age of information") {
    CHECK(std::isnan(compute_aoi({}, 10)));
    // One fresh delivery at slot 0: ages 0..T-1.
    CHECK(compute_aoi({{0, 0}}, 11) == doctest::Approx(5.0));
    std::vector<std::pair<Slot, Slot>> every;
    for (Slot t = 1; t < 100; ++t) every.push_back({t, t - 1});
    CHECK(compute_aoi(every, 100) == doctest::Approx(1.0));
    // A stale packet never makes the age worse.
    CHECK(compute_aoi({{0, 0}, {5, 4}, {6, 1}}, 10) == compute_aoi({{0, 0}, {5, 4}}, 10));
}

TEST_CASE("trace rows survive a write and read") {
    std::stringstream ss;
    TraceHeader h;
    h.duration = 50;
    {
        TraceWriter w(ss, h);
        TraceRecord r;
        r.slot = 3;
        r.node = 1;
        r.pair = 0;
        r.event = EventKind::Tx;
        r.kind = "StatusOTA";
        r.subframe = 2;
        r.subchannel = 1;
        r.outcome = "Delivered";
        r.stamp = 3;
        r.status = Eigen::Vector2d(0.1, 1.0 / 3.0);
        r.error = 0.125;
        w.write(r);
        TraceRecord blank;
        blank.slot = 4;
        w.write(blank);
    }
    const TraceFile f = read_trace(ss);
    CHECK(f.header.duration == 50);
    REQUIRE(f.records.size() == 2);
    const TraceRecord& r = f.records[0];
    CHECK(r.event == EventKind::Tx);
    CHECK(r.kind == "StatusOTA");
    CHECK(r.subframe == 2);
    CHECK(r.outcome == "Delivered");
    CHECK(r.status[1] == 1.0 / 3.0);
    CHECK(r.error == 0.125);
    CHECK(std::isnan(r.m));
    CHECK(f.records[1].node == -1);
    CHECK(f.records[1].status.size() == 0);
}

TEST_CASE("malformed traces are rejected") {
    std::istringstream bad("not a trace\n");
    CHECK_THROWS(read_trace(bad));
}

TEST_CASE("event names round-trip") {
    for (auto e : {EventKind::Plant, EventKind::State, EventKind::Trigger, EventKind::Tx, EventKind::Rx,
                   EventKind::Deliver, EventKind::Adapt})
        CHECK(parse_event_kind(to_string(e)) == e);
}

TEST_CASE("a summary recomputed from the trace file equals the in-run summary") {
    for (const char* name : {"single-link", "multi-platoon"}) {
        CAPTURE(name);
        ScenarioConfig cfg = parse_config(std::string("scenario = ") + name + "\nduration = 3000");
        std::stringstream ss;
        RunOptions o;
        o.trace = &ss;
        const RunResult res = run(cfg, o);
        CHECK(summary_json(summarize(read_trace(ss))) == summary_json(res.summary));
    }
}
