#include "doctest.h"
#include "parcomm/mac.hpp"

#include <set>

using namespace parcomm;

namespace {

Packet status_packet(NodeId src, int pair, Slot stamp) {
    Packet p;
    p.kind = PacketKind::StatusOTA;
    p.src = src;
    p.pair = pair;
    p.sent_at = stamp;
    p.status = StatusVector(Eigen::Vector2d(static_cast<double>(stamp), 0.0), stamp);
    return p;
}

auto never = [] { return 1.0; };

}  // namespace

TEST_CASE("a one-resource pool always selects it") {
    RngStream rng(7, RngStream::kResourceSelection);
    for (int i = 0; i < 100; ++i) CHECK(select_resource(ResourcePool{1, 1}, rng) == Resource{0, 0});
}

TEST_CASE("resource selection is deterministic per seed and stays in the pool") {
    RngStream a(3, RngStream::kResourceSelection), b(3, RngStream::kResourceSelection);
    const ResourcePool pool{10, 4};
    for (int i = 0; i < 1000; ++i) {
        const Resource r = select_resource(pool, a);
        CHECK(r == select_resource(pool, b));
        CHECK(r.subframe >= 0);
        CHECK(r.subframe < 10);
        CHECK(r.subchannel >= 0);
        CHECK(r.subchannel < 4);
    }
}

TEST_CASE("subframe resolution") {
    const std::vector<NodeId> listeners{0, 1, 2};

    SUBCASE("a lone transmitter reaches everyone else") {
        const auto r = resolve_subframe({{0, 0}}, listeners, 0.0, never);
        CHECK(r[0][0] == Outcome::HalfDuplex);
        CHECK(r[0][1] == Outcome::Delivered);
        CHECK(r[0][2] == Outcome::Delivered);
    }
    SUBCASE("same subchannel collides at every listener") {
        const auto r = resolve_subframe({{0, 1}, {1, 1}}, listeners, 0.0, never);
        for (const auto& row : r)
            for (Outcome o : row) CHECK(o == Outcome::Collision);
    }
    SUBCASE("different subchannels block only the transmitters") {
        const auto r = resolve_subframe({{0, 0}, {1, 1}}, listeners, 0.0, never);
        CHECK(r[0][1] == Outcome::HalfDuplex);
        CHECK(r[1][0] == Outcome::HalfDuplex);
        CHECK(r[0][2] == Outcome::Delivered);
        CHECK(r[1][2] == Outcome::Delivered);
    }
    SUBCASE("certain channel loss drops every clean reception") {
        const auto r = resolve_subframe({{0, 0}}, listeners, 1.0, [] { return 0.5; });
        CHECK(r[0][0] == Outcome::HalfDuplex);
        CHECK(r[0][1] == Outcome::ChannelLoss);
        CHECK(r[0][2] == Outcome::ChannelLoss);
    }
}

TEST_CASE("occupancy") {
    const ResourcePool pool{10, 2};
    CHECK(occupancy(0, pool, 5) == 0.0);
    CHECK(occupancy(100, pool, 5) == 1.0);
    CHECK(occupancy(5, pool, 1) == 0.25);
}

TEST_CASE("supersede rules") {
    const Packet a = status_packet(0, 0, 10), b = status_packet(0, 0, 11);
    CHECK(supersedes(b, a));
    CHECK_FALSE(supersedes(status_packet(0, 1, 11), a));
    CHECK_FALSE(supersedes(status_packet(1, 0, 11), a));
    Packet c = a, d = b;
    c.kind = d.kind = PacketKind::ModelConfirmation;
    CHECK_FALSE(supersedes(d, c));
}

TEST_CASE("a fresher status replaces the queued one and keeps its slot") {
    MacParams p;
    p.pool = ResourcePool{10, 2};
    Medium m(p, {0, 1}, 5);
    const Slot s1 = m.enqueue(status_packet(0, 0, 0), 0);
    const Slot s2 = m.enqueue(status_packet(0, 0, 1), 1);
    CHECK(s1 == s2);
    for (Slot t = 0; t <= s1; ++t) m.resolve(t);
    REQUIRE(m.sent().size() == 1);
    REQUIRE(m.sent()[0].packets.size() == 1);
    CHECK(m.sent()[0].packets[0].status.stamp == 1);
    REQUIRE(m.receptions().size() == 1);
    CHECK(m.receptions()[0].rx == 1);
    CHECK(m.receptions()[0].outcome == Outcome::Delivered);
}

TEST_CASE("repeated copies land on distinct subframes") {
    MacParams p;
    p.pool = ResourcePool{10, 2};
    Medium m(p, {0, 1, 2}, 9);
    Packet c = status_packet(1, 0, 0);
    c.kind = PacketKind::ModelConfirmation;
    m.enqueue_repeated(c, 3, 0);
    std::set<Slot> slots;
    for (Slot t = 0; t < 30; ++t) {
        m.resolve(t);
        for (const Transmission& tx : m.sent()) {
            CHECK(tx.packets.size() == 1);
            slots.insert(tx.slot);
        }
    }
    CHECK(slots.size() == 3);
}

TEST_CASE("the ideal medium delivers everything in the next free slot") {
    MacParams p;
    p.kind = MacKind::Ideal;
    Medium m(p, {0, 1, 2}, 1);
    CHECK(m.enqueue(status_packet(0, 0, 0), 0) == 0);
    CHECK(m.enqueue(status_packet(1, 1, 0), 0) == 0);
    m.resolve(0);
    CHECK(m.enqueue(status_packet(2, 2, 0), 0) == 1);
    CHECK(m.receptions().size() == 4);
    for (const Reception& r : m.receptions()) {
        CHECK(r.outcome == Outcome::Delivered);
        CHECK(r.rx != r.tx->tx);
    }
}

TEST_CASE("medium runs are reproducible") {
    MacParams p;
    p.pool = ResourcePool{4, 1};
    p.p_loss = 0.3;
    auto outcomes = [&] {
        Medium m(p, {0, 1, 2, 3}, 42);
        std::vector<int> out;
        for (Slot t = 0; t < 500; ++t) {
            if (t % 3 == 0)
                for (NodeId n = 0; n < 4; ++n) m.enqueue(status_packet(n, n, t), t);
            m.resolve(t);
            for (const Reception& r : m.receptions()) out.push_back(static_cast<int>(r.outcome) + 4 * r.rx);
        }
        return out;
    };
    const auto a = outcomes();
    CHECK(!a.empty());
    CHECK(a == outcomes());
}
