#pragma once

#include "parcomm/estimate_track.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace parcomm {

enum class PacketKind { StatusOTA, ModelCalibration, ModelConfirmation, Correction, Control };

std::string to_string(PacketKind k);
PacketKind parse_packet_kind(const std::string& name);

/// In-memory packet. Only the fields relevant to `kind` are meaningful.
struct Packet {
    PacketKind kind = PacketKind::StatusOTA;
    NodeId src = 0;
    NodeId dst = kBroadcast;
    int pair = -1;      // pair the packet belongs to; -1 for Control
    Slot sent_at = 0;   // sender clock when handed to the MAC

    StatusVector status;                       // StatusOTA, ModelCalibration (piggyback), Correction
    std::shared_ptr<const LinearModel> model;  // ModelCalibration, Correction
    Slot model_from = -1;                      // Correction: first slot the carried model is in force
    Slot calib_stamp = -1;  // ModelCalibration: stamp; ModelConfirmation: echo; Control: last calib stamp seen
    Slot adopt_slot = -1;   // ModelConfirmation sent by the source: agreed switch slot

    // Every source packet advertises the newest model it has agreed on.
    Slot model_version = -1;
    Slot model_switch = -1;

    std::vector<NodeId> targets;   // Control: one commanded acceleration per target
    std::vector<double> commands;  // flattened, `targets.size() * axes` values
};

/// Event trigger: true iff the error strictly exceeds delta.
bool tx_decide(const StatusVector& s, const StatusVector& s_bar, double delta, ErrorMeasure g);

enum class InitialModel { Hold, Zero };

struct LinkParams {
    double delta = 0.1;
    ErrorMeasure g = ErrorMeasure::L1;
    int decision_period = 10;
    int t_model = 100;
    int t_corr = 1000;           // 0 disables correction packets
    int window = 100;            // regression columns
    double rcond = 1e-10;        // relative singular-value cutoff of the fit
    bool hold_prior = false;     // fit the residual over a hold model
    int n_input = 1;
    int confirm_timeout = 10;
    int confirm_repeats = 3;
    int adopt_lead = 0;          // extra slots between confirmation and the agreed switch
    bool timestamps = true;
    bool feedback = true;
    InitialModel initial_model = InitialModel::Hold;
    bool baseline = false;       // periodic raw updates instead of the trigger
    int baseline_interval = 40;
    int baseline_phase = 0;
    bool stagger = false;        // the engine draws per-pair tick phases
    int calib_phase = 0;         // calibration ticks at phase + k * t_model
    int corr_phase = 0;          // correction ticks at phase + k * t_corr

    void validate() const;
};

/// What the source did at a decision epoch, for tracing.
struct EpochDecision {
    bool epoch = false;
    bool triggered = false;  // trigger fired (or forced before any model)
    bool gated = false;      // SMART gate blocked the trigger
    double error = 0.0;      // g(s, s_bar) on the predicted components
};

/// Parallel transmit function block for one pair.
class Source {
public:
    Source(int pair, NodeId self, NodeId peer, LinkParams params, std::size_t status_dim,
           std::vector<std::size_t> predicted, const Eigen::VectorXd& initial);

    /// Record the sensed status of slot t and roll the estimate forward.
    void observe(Slot t, const StatusVector& sensed, const Eigen::VectorXd& exo);

    /// Calibration, correction, timeout and decision-epoch processing for slot
    /// t. `gate` (optional) sees the epoch error and may veto a triggered
    /// StatusOTA. New packets are appended to the outbox.
    EpochDecision tick(Slot t, const std::function<bool(double)>& gate = {});

    /// MAC outcome of a packet this source sent, reported at the end of the
    /// air slot. Without feedback every packet is reported as delivered.
    void on_tx_outcome(const Packet& pkt, Slot air, bool delivered);

    /// A packet addressed to this source (confirmations).
    void on_receive(const Packet& pkt, Slot now);

    std::vector<Packet> take_outbox();

    const EstimateTrack& track() const { return track_; }
    EstimateTrack& track() { return track_; }
    const SampleWindow& window() const { return window_; }
    const LinkParams& params() const { return params_; }
    bool pending() const { return pending_.has_value(); }
    Slot pending_stamp() const { return pending_ ? pending_->calib_stamp : -1; }
    int pair() const { return pair_; }
    NodeId node() const { return self_; }
    NodeId peer() const { return peer_; }
    const StatusVector& last_sensed() const { return last_sensed_; }

private:
    struct Pending {
        std::shared_ptr<const LinearModel> model;
        Slot calib_stamp;
        Slot air = -1;  // slot the calibration went over the air, once known
    };

    Packet make(PacketKind kind, Slot t) const;

    int pair_;
    NodeId self_;
    NodeId peer_;
    LinkParams params_;
    std::vector<std::size_t> predicted_;
    SampleWindow window_;
    Eigen::MatrixXd prior_;  // empty unless hold_prior
    EstimateTrack track_;
    std::optional<Pending> pending_;
    StatusVector last_sensed_;
    std::vector<Packet> outbox_;
};

/// Parallel receive function block for one pair.
class Destination {
public:
    Destination(int pair, NodeId self, NodeId peer, LinkParams params, std::size_t status_dim,
                std::vector<std::size_t> predicted, const Eigen::VectorXd& initial);

    void advance(Slot t, const Eigen::VectorXd& exo);

    /// Process a decoded packet for this pair at slot `now`. Returns the slot
    /// at which a carried status took effect, if any.
    std::optional<Slot> on_receive(const Packet& pkt, Slot now);

    std::vector<Packet> take_outbox();

    /// Slot at which a status stamped `stamp` and processed at `now` is indexed.
    Slot effect_slot(Slot stamp, Slot now) const { return params_.timestamps ? stamp : now; }

    const EstimateTrack& track() const { return track_; }
    bool staged() const { return !staged_.empty(); }
    Slot staged_stamp() const { return staged_.empty() ? -1 : staged_.rbegin()->first; }
    Slot last_calib_stamp() const { return last_calib_; }
    int pair() const { return pair_; }

private:
    struct Staged {
        std::shared_ptr<const LinearModel> model;
        Slot calib_stamp;
        Slot received_at;
    };

    void check_staged(const Packet& pkt);

    int pair_;
    NodeId self_;
    NodeId peer_;
    LinkParams params_;
    EstimateTrack track_;
    std::map<Slot, Staged> staged_;  // by calib stamp, newest few kept
    Slot last_calib_ = -1;
    std::vector<Packet> outbox_;
};

}  // namespace parcomm
