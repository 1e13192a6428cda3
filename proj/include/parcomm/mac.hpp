#pragma once

#include "parcomm/link.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace parcomm {

struct ResourcePool {
    int rri = 10;         // subframes per selection window
    int subchannels = 2;

    int size() const { return rri * subchannels; }
    void validate() const;
};

enum class Outcome { Delivered, Collision, HalfDuplex, ChannelLoss };

std::string to_string(Outcome o);

struct Resource {
    int subframe = 0;
    int subchannel = 0;
    bool operator==(const Resource&) const = default;
};

/// Uniform draw over the rri x subchannels pool.
Resource select_resource(const ResourcePool& pool, RngStream& rng);

/// One transmission inside a subframe.
struct Attempt {
    NodeId tx = 0;
    int subchannel = 0;
};

/// Outcome of every attempt at every listener: result[a][l]. A listener that
/// is itself the transmitter of attempt a gets HalfDuplex for its own attempt.
/// `loss_draw` supplies a uniform [0,1) draw per (attempt, listener) that
/// survived collision and half-duplex; it is only called when p_loss > 0.
template <class Draw>
std::vector<std::vector<Outcome>> resolve_subframe(const std::vector<Attempt>& attempts,
                                                   const std::vector<NodeId>& listeners, double p_loss,
                                                   Draw&& loss_draw) {
    std::vector<std::vector<Outcome>> out(attempts.size(), std::vector<Outcome>(listeners.size()));
    for (std::size_t a = 0; a < attempts.size(); ++a) {
        bool collided = false;
        for (std::size_t b = 0; b < attempts.size(); ++b)
            if (b != a && attempts[b].subchannel == attempts[a].subchannel) collided = true;
        for (std::size_t l = 0; l < listeners.size(); ++l) {
            bool transmitting = false;
            for (const Attempt& other : attempts)
                if (other.tx == listeners[l]) transmitting = true;
            if (collided) {
                out[a][l] = Outcome::Collision;
            } else if (transmitting) {
                out[a][l] = Outcome::HalfDuplex;
            } else if (p_loss > 0.0 && loss_draw() < p_loss) {
                out[a][l] = Outcome::ChannelLoss;
            } else {
                out[a][l] = Outcome::Delivered;
            }
        }
    }
    return out;
}

/// Fraction of resources carrying at least one attempt.
double occupancy(std::size_t used_resources, const ResourcePool& pool, std::size_t windows);

enum class MacKind { Cv2x, Ideal };

struct MacParams {
    MacKind kind = MacKind::Cv2x;
    ResourcePool pool;
    double p_loss = 0.0;
};

/// True when `fresh` replaces `queued` while the latter waits for its slot:
/// same sender, pair and kind, except confirmations.
bool supersedes(const Packet& fresh, const Packet& queued);

/// One scheduled over-the-air transmission: all packets a node sends in one
/// subframe share a resource.
struct Transmission {
    Slot slot = 0;
    NodeId tx = 0;
    int subchannel = 0;
    int subframe = 0;
    std::vector<Packet> packets;
};

/// Per-receiver result of a resolved transmission.
struct Reception {
    const Transmission* tx = nullptr;
    NodeId rx = 0;
    Outcome outcome = Outcome::Delivered;
};

/// The shared medium. Nodes enqueue packets; each packet draws a resource in
/// the next selection window. Resolution is per slot.
class Medium {
public:
    Medium(MacParams params, std::vector<NodeId> nodes, std::uint64_t seed);

    /// Enqueue a packet at slot `now`. Returns the slot it will be sent in.
    /// A queued packet it supersedes is replaced in place and keeps its resource.
    Slot enqueue(Packet pkt, Slot now);

    /// Enqueue `copies` repetitions of a packet on distinct subframes of the
    /// same window where the pool allows it.
    void enqueue_repeated(const Packet& pkt, int copies, Slot now);

    /// Resolve every transmission scheduled at slot t.
    void resolve(Slot t);

    const std::vector<Transmission>& sent() const { return sent_; }
    const std::vector<Reception>& receptions() const { return receptions_; }

    const MacParams& params() const { return params_; }
    std::size_t used_resources() const { return used_resources_; }
    Slot resolved_through() const { return resolved_through_; }

private:
    Slot schedule_slot(Slot now, int subframe) const;
    void place(Packet pkt, Slot slot, int subframe, int subchannel);

    MacParams params_;
    std::vector<NodeId> nodes_;
    RngStream select_rng_;
    RngStream loss_rng_;
    Slot resolved_through_ = -1;
    std::map<Slot, std::vector<Transmission>> queue_;
    std::vector<Transmission> sent_;
    std::vector<Reception> receptions_;
    std::size_t used_resources_ = 0;
};

}  // namespace parcomm
