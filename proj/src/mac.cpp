#include "parcomm/mac.hpp"

#include <algorithm>
#include <set>

namespace parcomm {

void ResourcePool::validate() const {
    if (rri < 1) throw std::invalid_argument("mac.rri must be >= 1");
    if (subchannels < 1) throw std::invalid_argument("mac.subchannels must be >= 1");
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Delivered: return "Delivered";
        case Outcome::Collision: return "Collision";
        case Outcome::HalfDuplex: return "HalfDuplex";
        case Outcome::ChannelLoss: return "ChannelLoss";
    }
    return "?";
}

Resource select_resource(const ResourcePool& pool, RngStream& rng) {
    const auto r = static_cast<int>(rng.below(static_cast<std::uint64_t>(pool.size())));
    return Resource{r / pool.subchannels, r % pool.subchannels};
}

double occupancy(std::size_t used_resources, const ResourcePool& pool, std::size_t windows) {
    if (windows == 0) return 0.0;
    return static_cast<double>(used_resources) / (static_cast<double>(windows) * pool.size());
}

bool supersedes(const Packet& fresh, const Packet& queued) {
    // Confirmations are sent as deliberate repeats and never replace each other.
    if (fresh.kind == PacketKind::ModelConfirmation) return false;
    return fresh.kind == queued.kind && fresh.src == queued.src && fresh.pair == queued.pair;
}

Medium::Medium(MacParams params, std::vector<NodeId> nodes, std::uint64_t seed)
    : params_(params),
      nodes_(std::move(nodes)),
      select_rng_(seed, RngStream::kResourceSelection),
      loss_rng_(seed, RngStream::kChannelLoss) {
    params_.pool.validate();
    if (!(params_.p_loss >= 0.0 && params_.p_loss <= 1.0)) throw std::invalid_argument("mac.p_loss must be in [0,1]");
}

Slot Medium::schedule_slot(Slot now, int subframe) const {
    if (params_.kind == MacKind::Ideal) return std::max(now, resolved_through_ + 1);
    const Slot rri = params_.pool.rri;
    const Slot window = (now / rri + 1) * rri;
    return window + subframe;
}

void Medium::place(Packet pkt, Slot slot, int subframe, int subchannel) {
    auto& list = queue_[slot];
    for (Transmission& tx : list) {
        if (tx.tx != pkt.src) continue;
        for (Packet& q : tx.packets) {
            if (supersedes(pkt, q)) {
                q = std::move(pkt);
                return;
            }
        }
        tx.packets.push_back(std::move(pkt));
        return;
    }
    Transmission tx;
    tx.slot = slot;
    tx.tx = pkt.src;
    tx.subframe = subframe;
    tx.subchannel = subchannel;
    tx.packets.push_back(std::move(pkt));
    list.push_back(std::move(tx));
}

Slot Medium::enqueue(Packet pkt, Slot now) {
    // Freshest first: an unsent packet of the same node, pair and kind is
    // overwritten in place and keeps its resource.
    for (auto it = queue_.lower_bound(resolved_through_ + 1); it != queue_.end(); ++it) {
        for (Transmission& tx : it->second) {
            if (tx.tx != pkt.src) continue;
            for (Packet& q : tx.packets) {
                if (supersedes(pkt, q)) {
                    q = std::move(pkt);
                    return it->first;
                }
            }
        }
    }
    if (params_.kind == MacKind::Ideal) {
        const Slot slot = schedule_slot(now, 0);
        place(std::move(pkt), slot, 0, 0);
        return slot;
    }
    const Resource r = select_resource(params_.pool, select_rng_);
    const Slot slot = schedule_slot(now, r.subframe);
    place(std::move(pkt), slot, r.subframe, r.subchannel);
    return slot;
}

void Medium::enqueue_repeated(const Packet& pkt, int copies, Slot now) {
    if (params_.kind == MacKind::Ideal) {
        for (int c = 0; c < copies; ++c) enqueue(pkt, now);
        return;
    }
    std::set<int> used;
    for (int c = 0; c < copies; ++c) {
        Resource r = select_resource(params_.pool, select_rng_);
        if (static_cast<int>(used.size()) < params_.pool.rri) {
            // Redraw until the subframe is fresh; the pool has enough subframes.
            while (used.count(r.subframe)) r = select_resource(params_.pool, select_rng_);
        }
        used.insert(r.subframe);
        place(pkt, schedule_slot(now, r.subframe), r.subframe, r.subchannel);
    }
}

void Medium::resolve(Slot t) {
    sent_.clear();
    receptions_.clear();
    resolved_through_ = t;
    auto it = queue_.find(t);
    if (it == queue_.end()) {
        queue_.erase(queue_.begin(), queue_.lower_bound(t + 1));
        return;
    }
    sent_ = std::move(it->second);
    queue_.erase(queue_.begin(), std::next(it));

    std::set<int> channels;
    for (const Transmission& tx : sent_) channels.insert(tx.subchannel);
    used_resources_ += channels.size();

    if (params_.kind == MacKind::Ideal) {
        for (const Transmission& tx : sent_)
            for (NodeId n : nodes_)
                if (n != tx.tx) receptions_.push_back(Reception{&tx, n, Outcome::Delivered});
        return;
    }

    std::vector<Attempt> attempts;
    attempts.reserve(sent_.size());
    for (const Transmission& tx : sent_) attempts.push_back(Attempt{tx.tx, tx.subchannel});
    const auto table =
        resolve_subframe(attempts, nodes_, params_.p_loss, [this] { return loss_rng_.uniform(); });
    for (std::size_t a = 0; a < sent_.size(); ++a)
        for (std::size_t l = 0; l < nodes_.size(); ++l)
            if (nodes_[l] != sent_[a].tx) receptions_.push_back(Reception{&sent_[a], nodes_[l], table[a][l]});
}

}  // namespace parcomm
