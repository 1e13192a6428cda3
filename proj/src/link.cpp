#include "parcomm/link.hpp"

namespace parcomm {

std::string to_string(PacketKind k) {
    switch (k) {
        case PacketKind::StatusOTA: return "StatusOTA";
        case PacketKind::ModelCalibration: return "ModelCalibration";
        case PacketKind::ModelConfirmation: return "ModelConfirmation";
        case PacketKind::Correction: return "Correction";
        case PacketKind::Control: return "Control";
    }
    return "?";
}

PacketKind parse_packet_kind(const std::string& name) {
    for (auto k : {PacketKind::StatusOTA, PacketKind::ModelCalibration, PacketKind::ModelConfirmation,
                   PacketKind::Correction, PacketKind::Control})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown packet kind: " + name);
}

bool tx_decide(const StatusVector& s, const StatusVector& s_bar, double delta, ErrorMeasure g) {
    return status_error(s, s_bar, g) > delta;
}

void LinkParams::validate() const {
    if (!(delta >= 0.0)) throw std::invalid_argument("link.delta must be >= 0");
    if (decision_period < 1) throw std::invalid_argument("link.decision_period must be >= 1");
    if (t_model < 1) throw std::invalid_argument("link.t_model must be >= 1");
    if (t_corr < 0) throw std::invalid_argument("link.t_corr must be >= 0");
    if (window < 1) throw std::invalid_argument("link.window must be >= 1");
    if (!(rcond >= 0.0 && rcond < 1.0)) throw std::invalid_argument("link.rcond must be in [0, 1)");
    if (n_input < 1) throw std::invalid_argument("link.n_input must be >= 1");
    if (confirm_timeout < 1) throw std::invalid_argument("link.confirm_timeout must be >= 1");
    if (confirm_repeats < 1) throw std::invalid_argument("link.confirm_repeats must be >= 1");
    if (adopt_lead < 0) throw std::invalid_argument("link.adopt_lead must be >= 0");
    if (baseline_interval < 1) throw std::invalid_argument("baseline.interval must be >= 1");
    if (baseline_phase < 0) throw std::invalid_argument("baseline phase must be >= 0");
    if (calib_phase < 0 || corr_phase < 0) throw std::invalid_argument("tick phases must be >= 0");
}

namespace {

std::shared_ptr<const LinearModel> initial_model(const LinkParams& p, std::size_t dim,
                                                 const std::vector<std::size_t>& predicted) {
    if (p.baseline || p.initial_model == InitialModel::Hold) return nullptr;
    return std::make_shared<const LinearModel>(LinearModel::zero(dim, predicted, p.n_input, 0));
}

Slot round_up(Slot t, Slot period) { return ((t + period - 1) / period) * period; }

}  // namespace

Source::Source(int pair, NodeId self, NodeId peer, LinkParams params, std::size_t status_dim,
               std::vector<std::size_t> predicted, const Eigen::VectorXd& initial)
    : pair_(pair),
      self_(self),
      peer_(peer),
      params_(params),
      predicted_(predicted),
      window_(static_cast<std::size_t>(params.window + params.n_input)),
      track_(status_dim, predicted, params.n_input) {
    params_.validate();
    track_.set_initial(initial);
    if (auto m = initial_model(params_, status_dim, predicted_)) track_.adopt(0, m);
    if (params_.hold_prior) prior_ = LinearModel::hold(status_dim, predicted_, params_.n_input).A;
}

void Source::observe(Slot t, const StatusVector& sensed, const Eigen::VectorXd& exo) {
    last_sensed_ = sensed;
    if (!params_.baseline) window_.push(sensed);
    track_.advance(t, exo);
}

Packet Source::make(PacketKind kind, Slot t) const {
    Packet p;
    p.kind = kind;
    p.src = self_;
    p.dst = peer_;
    p.pair = pair_;
    p.sent_at = t;
    if (auto m = track_.latest_model()) {
        p.model_version = m->version;
        p.model_switch = track_.latest_switch_slot();
    }
    return p;
}

EpochDecision Source::tick(Slot t, const std::function<bool(double)>& gate) {
    EpochDecision d;

    if (params_.baseline) {
        if (t >= params_.baseline_phase && (t - params_.baseline_phase) % params_.baseline_interval == 0) {
            d.epoch = true;
            d.triggered = true;
            Packet p = make(PacketKind::StatusOTA, t);
            p.status = last_sensed_;
            if (!params_.feedback) track_.pin(t, last_sensed_.values);
            outbox_.push_back(std::move(p));
        }
        return d;
    }

    if (pending_) {
        const Slot base = pending_->air >= 0 ? pending_->air : (params_.feedback ? -1 : pending_->calib_stamp);
        if (base >= 0 && t > base + params_.confirm_timeout) pending_.reset();
    }

    if (t > params_.calib_phase && (t - params_.calib_phase) % params_.t_model == 0) {
        try {
            auto model = std::make_shared<const LinearModel>(fit_lms(window_, predicted_, params_.n_input, t, params_.rcond,
                                                                        params_.hold_prior ? &prior_ : nullptr));
            Packet p = make(PacketKind::ModelCalibration, t);
            p.model = model;
            p.status = last_sensed_;
            p.calib_stamp = t;
            pending_ = Pending{model, t, -1};
            outbox_.push_back(std::move(p));
        } catch (const InsufficientData&) {
            // Not enough samples yet; the next tick retries.
        }
    }

    if (params_.t_corr > 0 && t > params_.corr_phase && (t - params_.corr_phase) % params_.t_corr == 0) {
        if (auto model = track_.model_at(t)) {
            Packet p = make(PacketKind::Correction, t);
            p.model = model;
            p.model_from = track_.switch_slot_at(t);
            p.status = last_sensed_;
            if (!params_.feedback) track_.pin(t, last_sensed_.values);
            outbox_.push_back(std::move(p));
        }
    }

    if (t % params_.decision_period == 0) {
        d.epoch = true;
        const Eigen::VectorXd s_bar = track_.unpinned_at(t);
        d.error = masked_error(last_sensed_.values, s_bar, predicted_, params_.g);
        const bool forced = !track_.model_at(t);
        d.triggered = forced || d.error > params_.delta;
        if (d.triggered && gate && !forced && !gate(d.error)) d.gated = true;
        if (d.triggered && !d.gated) {
            Packet p = make(PacketKind::StatusOTA, t);
            p.status = last_sensed_;
            if (!params_.feedback) track_.pin(t, last_sensed_.values);
            outbox_.push_back(std::move(p));
        }
    }
    return d;
}

void Source::on_tx_outcome(const Packet& pkt, Slot air, bool delivered) {
    if (pkt.src != self_ || pkt.pair != pair_) return;
    switch (pkt.kind) {
        case PacketKind::StatusOTA:
        case PacketKind::Correction:
            if (params_.feedback && delivered) {
                const Slot at = params_.timestamps ? pkt.status.stamp : air;
                track_.pin(std::min(at, track_.last_slot()), pkt.status.values);
            }
            break;
        case PacketKind::ModelCalibration:
            if (pending_ && pending_->calib_stamp == pkt.calib_stamp) pending_->air = air;
            break;
        default:
            break;
    }
}

void Source::on_receive(const Packet& pkt, Slot now) {
    if (pkt.kind != PacketKind::ModelConfirmation || pkt.src != peer_ || pkt.pair != pair_) return;
    if (!pending_ || pending_->calib_stamp != pkt.calib_stamp) return;
    const Slot base = pending_->air >= 0 ? pending_->air : pending_->calib_stamp;
    if (now > base + params_.confirm_timeout) {
        pending_.reset();
        return;
    }
    const Slot switch_at = round_up(now + 1 + params_.adopt_lead, params_.decision_period);
    track_.adopt(switch_at, pending_->model);
    Packet notice = make(PacketKind::ModelConfirmation, now);
    notice.calib_stamp = pkt.calib_stamp;
    notice.adopt_slot = switch_at;
    outbox_.push_back(std::move(notice));
    pending_.reset();
}

std::vector<Packet> Source::take_outbox() {
    std::vector<Packet> out;
    out.swap(outbox_);
    return out;
}

Destination::Destination(int pair, NodeId self, NodeId peer, LinkParams params, std::size_t status_dim,
                         std::vector<std::size_t> predicted, const Eigen::VectorXd& initial)
    : pair_(pair), self_(self), peer_(peer), params_(params), track_(status_dim, predicted, params.n_input) {
    params_.validate();
    track_.set_initial(initial);
    if (auto m = initial_model(params_, status_dim, predicted)) track_.adopt(0, m);
}

void Destination::advance(Slot t, const Eigen::VectorXd& exo) { track_.advance(t, exo); }

void Destination::check_staged(const Packet& pkt) {
    if (staged_.empty() || pkt.model_version < 0) return;
    auto hit = staged_.find(pkt.model_version);
    if (hit != staged_.end() && pkt.model_switch >= 0) {
        track_.adopt(pkt.model_switch, hit->second.model);
        staged_.erase(staged_.begin(), std::next(hit));
        return;
    }
    // Older staged models can no longer be agreed on.
    staged_.erase(staged_.begin(), staged_.lower_bound(pkt.model_version));
    // A model the source still has not switched to long after our
    // confirmations went out was never confirmed at the source.
    const Slot slack = params_.confirm_timeout + params_.adopt_lead + params_.decision_period;
    std::erase_if(staged_, [&](const auto& kv) {
        return kv.first > pkt.model_version && pkt.sent_at > kv.second.received_at + slack;
    });
}

std::optional<Slot> Destination::on_receive(const Packet& pkt, Slot now) {
    if (pkt.pair != pair_ || pkt.src != peer_) return std::nullopt;
    std::optional<Slot> effect;
    switch (pkt.kind) {
        case PacketKind::ModelCalibration: {
            if (pkt.calib_stamp > track_.version_at(track_.last_slot()) && !staged_.count(pkt.calib_stamp)) {
                staged_[pkt.calib_stamp] = Staged{pkt.model, pkt.calib_stamp, now};
                while (staged_.size() > 4) staged_.erase(staged_.begin());
                last_calib_ = pkt.calib_stamp;
                // The MAC sends confirm_repeats copies of this packet.
                Packet c;
                c.kind = PacketKind::ModelConfirmation;
                c.src = self_;
                c.dst = peer_;
                c.pair = pair_;
                c.sent_at = now;
                c.calib_stamp = pkt.calib_stamp;
                outbox_.push_back(std::move(c));
            }
            check_staged(pkt);
            break;
        }
        case PacketKind::StatusOTA: {
            check_staged(pkt);
            const Slot at = std::min(effect_slot(pkt.status.stamp, now), track_.last_slot());
            track_.pin(at, pkt.status.values);
            effect = at;
            break;
        }
        case PacketKind::Correction: {
            track_.adopt(pkt.model_from, pkt.model);
            std::erase_if(staged_, [&](const auto& kv) { return kv.first <= pkt.model->version; });
            check_staged(pkt);
            const Slot at = std::min(effect_slot(pkt.status.stamp, now), track_.last_slot());
            track_.pin(at, pkt.status.values);
            effect = at;
            break;
        }
        case PacketKind::ModelConfirmation:
        case PacketKind::Control:
            check_staged(pkt);
            break;
    }
    return effect;
}

std::vector<Packet> Destination::take_outbox() {
    std::vector<Packet> out;
    out.swap(outbox_);
    return out;
}

}  // namespace parcomm
