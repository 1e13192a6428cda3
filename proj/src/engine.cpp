#include "parcomm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

namespace parcomm {

namespace {

using Axes = std::array<double, 3>;

/// Applied acceleration with at most one update waiting for its effect slot.
/// Commands older than the last accepted one are ignored.
struct Command {
    Axes now{};
    Axes next{};
    Slot effect = -1;
    Slot sent = -1;

    void schedule(const Axes& v, Slot at, Slot sent_at) {
        if (sent_at <= sent) return;
        sent = sent_at;
        next = v;
        effect = at;
    }
    const Axes& at(Slot t) {
        if (effect >= 0 && t >= effect) {
            now = next;
            effect = -1;
        }
        return now;
    }
};

struct NodeRt {
    NodeId id = 0;
    int platoon = 0;
    int rank = 0;  // 0 for a leader
    VehicleState veh;
    UavState uav;
    Axes offset{};  // UAV formation slot relative to the leader
    Command cmd;
};

struct PairRt {
    int id = 0;
    NodeId src = 0;
    NodeId dst = 0;
    int platoon = 0;
    std::unique_ptr<Source> source;
    std::unique_ptr<Destination> dest;
    Command belief;  // what the destination knows of the source's applied command
    Eigen::VectorXd truth;
    Eigen::VectorXd sensed;
    Eigen::VectorXd exo_src;
    Eigen::VectorXd exo_dst;
    double deviation = 0.0;  // formation deviation this slot
    double window_sq = 0.0;
    long long window_n = 0;
    const PolicyBank* bank = nullptr;
    double m = std::numeric_limits<double>::quiet_NaN();

    // Shadow estimate for transition counting.
    std::unique_ptr<EstimateTrack> shadow;
    Slot shadow_switch = -1;
    long long shadow_epochs = 0;
    std::optional<std::size_t> shadow_prev;
};

struct Inbound {
    Slot ready;
    NodeId rx;
    Packet pkt;
};

struct PlatoonAdapt {
    AdaptationState state;
    long long collisions = 0;
};

// Leader UAV velocity breakpoints per axis: 0 -> v1 over [0, 0.5] s, v1 -> v2 over [0.5, 1] s.
const std::array<SpeedSchedule, 3>& uav_leader_schedule() {
    static const std::array<SpeedSchedule, 3> s{
        SpeedSchedule{{{0.0, 0.5, 0.0, 0.49}, {0.5, 1.0, 0.49, 0.245}}},
        SpeedSchedule{{{0.0, 0.5, 0.0, 1.715}, {0.5, 1.0, 1.715, 1.0682}}},
        SpeedSchedule{{{0.0, 0.5, 0.0, 0.49}, {0.5, 1.0, 0.49, 0.0}}},
    };
    return s;
}

Slot record_stamp(const Packet& p) {
    switch (p.kind) {
        case PacketKind::StatusOTA:
        case PacketKind::Correction:
            return p.status.stamp;
        default:
            return p.calib_stamp;
    }
}

class Engine {
public:
    Engine(const ScenarioConfig& cfg, const RunOptions& opts, bool shadow)
        : cfg_(cfg),
          opts_(opts),
          shadow_(shadow),
          uav_(cfg.scenario == ScenarioKind::Uav),
          header_(trace_header(cfg)),
          builder_(header_),
          sense_rng_(cfg.seed, RngStream::kSensing),
          scenario_rng_(cfg.seed, RngStream::kScenario),
          grid_(scaled_levels(cfg)),
          drops_left_(cfg.drops.size()) {
        for (std::size_t i = 0; i < cfg.drops.size(); ++i) drops_left_[i] = cfg.drops[i].count;
        if (opts_.trace) writer_.emplace(*opts_.trace, header_);
        build_nodes();
        build_pairs();
        std::vector<NodeId> ids;
        for (const NodeRt& n : nodes_) ids.push_back(n.id);
        medium_ = std::make_unique<Medium>(cfg.mac, ids, cfg.seed);
        adapt_.resize(static_cast<std::size_t>(uav_ ? 1 : cfg.platoon_count));
        for (PlatoonAdapt& a : adapt_) {
            a.state.m = cfg.smart.grid.snap(cfg.smart.m_init);
            a.state.delta_fraction = cfg.smart.adapt_fraction;
        }
    }

    void set_banks(std::map<int, PolicyBank> banks) {
        banks_ = std::move(banks);
        for (PairRt& p : pairs_) {
            auto it = banks_.find(p.id);
            p.bank = it == banks_.end() ? nullptr : &it->second;
            p.m = adapt_[static_cast<std::size_t>(p.platoon)].state.m;
        }
    }

    RunResult run() {
        for (Slot t = 0; t < cfg_.duration; ++t) step(t);
        RunResult r;
        r.header = header_;
        r.summary = builder_.finish();
        r.records = std::move(records_);
        r.adaptation = std::move(adaptation_);
        r.first_adoption = first_adoption_;
        r.banks = banks_;
        return r;
    }

    std::map<int, TransitionCounter> counters() const { return counters_; }

private:
    static std::vector<double> scaled_levels(const ScenarioConfig& cfg) {
        std::vector<double> v;
        for (double l : cfg.smart.levels) v.push_back(l * cfg.link.delta);
        return v;
    }

    std::size_t status_dim() const { return (uav_ ? 9 : 3) + (cfg_.model_constant ? 1 : 0); }

    std::vector<std::size_t> predicted() const {
        if (uav_) return {0, 1, 3, 4, 6, 7};
        return {0, 1};
    }

    std::vector<double> sigmas() const {
        std::vector<double> s;
        for (int axis = 0; axis < (uav_ ? 3 : 1); ++axis) {
            s.push_back(cfg_.noise_distance);
            s.push_back(cfg_.noise_velocity);
            s.push_back(cfg_.noise_acceleration);
        }
        if (cfg_.model_constant) s.push_back(0.0);
        return s;
    }

    void build_nodes() {
        if (uav_) {
            for (int i = 0; i < cfg_.uav_count; ++i) {
                NodeRt n;
                n.id = i;
                n.rank = i;
                if (i > 0) {
                    const int r = (i + 1) / 2;
                    const double side = (i % 2 == 1) ? 1.0 : -1.0;
                    n.offset = {-r * cfg_.uav_spacing, side * r * cfg_.uav_spacing, 0.0};
                }
                for (int c = 0; c < 3; ++c) {
                    n.uav.axis[static_cast<std::size_t>(c)].position = n.offset[static_cast<std::size_t>(c)];
                    n.uav.axis[static_cast<std::size_t>(c)].velocity = cfg_.v0;
                }
                nodes_.push_back(n);
            }
            return;
        }
        const double pitch = cfg_.vehicle_length + cfg_.cacc.d_des;
        for (int p = 0; p < cfg_.platoon_count; ++p) {
            const double lead_x = -p * (cfg_.platoon_size * pitch + cfg_.platoon_gap);
            for (int k = 0; k < cfg_.platoon_size; ++k) {
                NodeRt n;
                n.id = p * cfg_.platoon_size + k;
                n.platoon = p;
                n.rank = k;
                n.veh.position = lead_x - k * pitch;
                n.veh.velocity = cfg_.v0;
                n.veh.length = cfg_.vehicle_length;
                nodes_.push_back(n);
            }
        }
    }

    void build_pairs() {
        LinkParams lp = cfg_.link;
        lp.baseline = cfg_.mode == RunMode::Baseline;
        const auto dim = status_dim();
        int id = 0;
        for (const NodeRt& n : nodes_) {
            if (n.rank == 0) continue;
            PairRt p;
            p.id = id++;
            p.src = n.id;
            p.dst = uav_ ? 0 : n.platoon * cfg_.platoon_size;
            p.platoon = n.platoon;
            p.truth = true_status(n);
            LinkParams pl = lp;
            if (lp.baseline) pl.baseline_phase = static_cast<int>(scenario_rng_.below(static_cast<std::uint64_t>(lp.baseline_interval)));
            if (!lp.baseline && lp.stagger) {
                pl.calib_phase = static_cast<int>(scenario_rng_.below(static_cast<std::uint64_t>(lp.t_model)));
                if (lp.t_corr > 0) pl.corr_phase = static_cast<int>(scenario_rng_.below(static_cast<std::uint64_t>(lp.t_corr)));
            }
            p.source = std::make_unique<Source>(p.id, p.src, p.dst, pl, dim, predicted(), p.truth);
            p.dest = std::make_unique<Destination>(p.id, p.dst, p.src, pl, dim, predicted(), p.truth);
            p.exo_src = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
            if (cfg_.model_constant) p.exo_src[p.exo_src.size() - 1] = 1.0;
            p.exo_dst = p.exo_src;
            if (shadow_) {
                p.shadow = std::make_unique<EstimateTrack>(dim, predicted(), lp.n_input);
                p.shadow->set_initial(p.truth);
                counters_.emplace(p.id, TransitionCounter(grid_.size()));
            }
            pairs_.push_back(std::move(p));
        }
    }

    NodeRt& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }

    Eigen::VectorXd true_status(const NodeRt& n) const {
        Eigen::VectorXd s = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(status_dim()));
        if (uav_) {
            for (std::size_t c = 0; c < 3; ++c) {
                const AxisState& a = n.uav.axis[c];
                s[static_cast<Eigen::Index>(3 * c)] = a.position;
                s[static_cast<Eigen::Index>(3 * c + 1)] = a.velocity;
                s[static_cast<Eigen::Index>(3 * c + 2)] = a.acceleration;
            }
            return s;
        }
        const NodeRt& front = nodes_[static_cast<std::size_t>(n.id - 1)];
        s[0] = gap(front.veh, n.veh);
        s[1] = n.veh.velocity;
        s[2] = n.veh.acceleration;
        return s;
    }

    double leader_accel(Slot t) const {
        if (cfg_.leader_profile == "parabola")
            return leader_accel_parabola(t, cfg_.leader_t0, cfg_.leader_t1, cfg_.leader_peak, cfg_.leader_raw);
        if (cfg_.leader_profile == "schedule") return cfg_.leader_schedule.accel(t);
        return 0.0;
    }

    void fill_exo(Eigen::VectorXd& v, const Axes& a) const {
        for (int c = 0; c < (uav_ ? 3 : 1); ++c) v[3 * c + 2] = a[static_cast<std::size_t>(c)];
        if (cfg_.model_constant) v[v.size() - 1] = 1.0;
    }

    void emit(TraceRecord&& r) {
        builder_.add(r);
        if (writer_) writer_->write(r);
        if (opts_.keep_records) records_.push_back(std::move(r));
    }

    bool tracing_plant() const { return opts_.plant_rows && (writer_ || opts_.keep_records); }

    // (1) plant step and sensing
    void plant(Slot t) {
        for (NodeRt& n : nodes_) {
            if (uav_) {
                Axes a{};
                if (n.rank == 0) {
                    for (std::size_t c = 0; c < 3; ++c) a[c] = uav_leader_schedule()[c].accel(t);
                } else {
                    a = n.cmd.at(t);
                }
                n.uav = uav_step(n.uav, a, cfg_.cacc.a_min, cfg_.cacc.a_max);
            } else {
                const double a = n.rank == 0 ? leader_accel(t) : n.cmd.at(t)[0];
                n.veh = kinematics_step(n.veh, a);
            }
        }
        const auto sig = sigmas();
        for (PairRt& p : pairs_) {
            const NodeRt& n = node(p.src);
            p.truth = true_status(n);
            p.sensed = add_sensing_noise(StatusVector(p.truth, t), sig, sense_rng_).values;
            fill_exo(p.exo_src, n.cmd.now);
            if (uav_) {
                const NodeRt& lead = nodes_[0];
                double sq = 0.0;
                for (std::size_t c = 0; c < 3; ++c) {
                    const double e = n.uav.axis[c].position - lead.uav.axis[c].position - n.offset[c];
                    sq += e * e;
                }
                p.deviation = std::sqrt(sq);
            } else {
                p.deviation = p.truth[0] - cfg_.cacc.d_des;
            }
            p.window_sq += p.deviation * p.deviation;
            ++p.window_n;
        }
        if (tracing_plant()) {
            for (const NodeRt& n : nodes_) {
                TraceRecord r;
                r.slot = t;
                r.node = n.id;
                r.event = EventKind::Plant;
                if (uav_) {
                    r.status.resize(9);
                    for (std::size_t c = 0; c < 3; ++c) {
                        r.status[static_cast<Eigen::Index>(3 * c)] = n.uav.axis[c].position;
                        r.status[static_cast<Eigen::Index>(3 * c + 1)] = n.uav.axis[c].velocity;
                        r.status[static_cast<Eigen::Index>(3 * c + 2)] = n.uav.axis[c].acceleration;
                    }
                } else {
                    r.status.resize(3);
                    r.status << n.veh.position, n.veh.velocity, n.veh.acceleration;
                }
                emit(std::move(r));
            }
        }
    }

    // (2) source ticks
    void sources(Slot t) {
        for (PairRt& p : pairs_) {
            Source& src = *p.source;
            src.observe(t, StatusVector(p.sensed, t), p.exo_src);
            if (shadow_) shadow_step(p, t);

            std::function<bool(double)> gate;
            if (p.bank) {
                gate = [&](double err) {
                    return smart_tx_gate(p.bank->policy_for(p.m), grid_.project(err));
                };
            }
            const EpochDecision d = src.tick(t, gate);
            if (d.epoch) {
                TraceRecord r;
                r.slot = t;
                r.node = p.src;
                r.pair = p.id;
                r.event = EventKind::Trigger;
                r.outcome = !d.triggered ? "silent" : d.gated ? "gated" : "transmit";
                r.stamp = t;
                r.error = d.error;
                r.m = p.m;
                emit(std::move(r));
            }
            for (Packet& pkt : src.take_outbox()) medium_->enqueue(std::move(pkt), t);
        }
    }

    void shadow_step(PairRt& p, Slot t) {
        const EstimateTrack& real = p.source->track();
        p.shadow->advance(t, p.exo_src);
        if (real.latest_switch_slot() != p.shadow_switch && real.latest_model()) {
            p.shadow_switch = real.latest_switch_slot();
            p.shadow->adopt(p.shadow_switch, real.latest_model());
        }
        if (t % cfg_.link.decision_period != 0) return;
        if (!p.shadow->model_at(t)) {
            p.shadow_prev.reset();
            p.shadow->pin(t, p.sensed);
            return;
        }
        const double err = masked_error(p.sensed, p.shadow->at(t), predicted(), cfg_.link.g);
        const std::size_t level = grid_.project(err);
        if (p.shadow_prev) counters_.at(p.id).add(*p.shadow_prev, level);
        if (p.shadow_epochs++ % cfg_.smart.reseed_epochs == 0) {
            p.shadow->pin(t, p.sensed);
            p.shadow_prev = 0;
        } else {
            p.shadow_prev = level;
        }
    }

    bool drop(const Packet& pkt, Slot t) {
        for (std::size_t i = 0; i < cfg_.drops.size(); ++i) {
            const DropRule& rule = cfg_.drops[i];
            if (drops_left_[i] <= 0 || rule.kind != pkt.kind || t < rule.from) continue;
            if (rule.node >= 0 && rule.node != pkt.src) continue;
            --drops_left_[i];
            return true;
        }
        return false;
    }

    PairRt* pair_of(const Packet& pkt) {
        if (pkt.pair < 0 || pkt.pair >= static_cast<int>(pairs_.size())) return nullptr;
        return &pairs_[static_cast<std::size_t>(pkt.pair)];
    }

    static bool intended(const Packet& pkt, NodeId rx) {
        if (pkt.kind == PacketKind::Control) return std::find(pkt.targets.begin(), pkt.targets.end(), rx) != pkt.targets.end();
        return pkt.dst == rx;
    }

    Axes command_for(const Packet& pkt, NodeId target) const {
        Axes a{};
        const std::size_t axes = uav_ ? 3 : 1;
        for (std::size_t i = 0; i < pkt.targets.size(); ++i)
            if (pkt.targets[i] == target)
                for (std::size_t c = 0; c < axes; ++c) a[c] = pkt.commands[i * axes + c];
        return a;
    }

    // (3) MAC resolution
    void mac(Slot t) {
        medium_->resolve(t);
        const auto& sent = medium_->sent();
        std::vector<std::vector<bool>> dropped(sent.size());
        for (std::size_t i = 0; i < sent.size(); ++i) {
            const Transmission& tx = sent[i];
            for (const Packet& pkt : tx.packets) {
                dropped[i].push_back(drop(pkt, t));
                TraceRecord r;
                r.slot = t;
                r.node = tx.tx;
                r.pair = pkt.pair;
                r.event = EventKind::Tx;
                r.kind = to_string(pkt.kind);
                r.subframe = tx.subframe;
                r.subchannel = tx.subchannel;
                r.stamp = record_stamp(pkt);
                emit(std::move(r));
            }
        }
        for (const Reception& rec : medium_->receptions()) {
            const std::size_t ti = static_cast<std::size_t>(rec.tx - sent.data());
            for (std::size_t k = 0; k < rec.tx->packets.size(); ++k) {
                const Packet& pkt = rec.tx->packets[k];
                if (!intended(pkt, rec.rx)) continue;
                const bool lost = dropped[ti][k];
                const bool ok = !lost && rec.outcome == Outcome::Delivered;
                if (rec.outcome == Outcome::Collision) count_collision(rec.rx);
                TraceRecord r;
                r.slot = t;
                r.node = rec.rx;
                r.pair = pkt.pair;
                r.event = EventKind::Rx;
                r.kind = to_string(pkt.kind);
                r.subframe = rec.tx->subframe;
                r.subchannel = rec.tx->subchannel;
                r.outcome = lost ? "Dropped" : to_string(rec.outcome);
                r.stamp = record_stamp(pkt);
                emit(std::move(r));
                if (ok) inbox_.push_back(Inbound{t + cfg_.tau, rec.rx, pkt});

                // Sender-side view: an invisible drop still looks delivered.
                const bool acked = !cfg_.link.feedback || lost || ok;
                if (pkt.kind == PacketKind::Control) {
                    for (PairRt& p : pairs_)
                        if (p.src == rec.rx && p.dst == pkt.src && acked)
                            p.belief.schedule(command_for(pkt, rec.rx), t + cfg_.tau + 1, pkt.sent_at);
                } else if (PairRt* p = pair_of(pkt); p && pkt.src == p->src) {
                    p->source->on_tx_outcome(pkt, t, acked);
                }
            }
        }
    }

    // Collisions seen by a supervision node feed its platoon's adaptation.
    void count_collision(NodeId rx) {
        const NodeRt& n = node(rx);
        if (n.rank == 0) ++adapt_[static_cast<std::size_t>(uav_ ? 0 : n.platoon)].collisions;
    }

    // (4) receive processing
    void receive(Slot t) {
        for (PairRt& p : pairs_) {
            fill_exo(p.exo_dst, p.belief.at(t));
            p.dest->advance(t, p.exo_dst);
        }
        std::vector<Inbound> later;
        std::vector<Inbound> now;
        for (Inbound& in : inbox_) (in.ready <= t ? now : later).push_back(std::move(in));
        inbox_.swap(later);
        for (Inbound& in : now) {
            const Packet& pkt = in.pkt;
            if (pkt.kind == PacketKind::Control) {
                node(in.rx).cmd.schedule(command_for(pkt, in.rx), t + 1, pkt.sent_at);
                continue;
            }
            PairRt* p = pair_of(pkt);
            if (!p) continue;
            if (in.rx == p->src) {
                p->source->on_receive(pkt, t);
            } else if (in.rx == p->dst) {
                if (auto effect = p->dest->on_receive(pkt, t)) {
                    TraceRecord r;
                    r.slot = t;
                    r.node = in.rx;
                    r.pair = p->id;
                    r.event = EventKind::Deliver;
                    r.kind = to_string(pkt.kind);
                    r.stamp = pkt.status.stamp;
                    r.status = pkt.status.values;
                    emit(std::move(r));
                }
            }
        }
        for (PairRt& p : pairs_) {
            for (Packet& c : p.dest->take_outbox()) medium_->enqueue_repeated(c, cfg_.link.confirm_repeats, t);
            for (Packet& pkt : p.source->take_outbox()) medium_->enqueue(std::move(pkt), t);
            if (!first_adoption_.count(p.id) && p.source->track().latest_switch_slot() >= 0 &&
                cfg_.mode == RunMode::Parallel && cfg_.link.initial_model == InitialModel::Hold)
                first_adoption_[p.id] = p.source->track().latest_switch_slot();
        }
    }

    // (5) control epoch
    void control(Slot t) {
        if (t % cfg_.control_period != 0) return;
        const std::size_t axes = uav_ ? 3 : 1;
        const int groups = uav_ ? 1 : cfg_.platoon_count;
        for (int g = 0; g < groups; ++g) {
            const NodeId leader_id = uav_ ? 0 : g * cfg_.platoon_size;
            const NodeRt& leader = node(leader_id);
            Packet pkt;
            pkt.kind = PacketKind::Control;
            pkt.src = leader_id;
            pkt.dst = kBroadcast;
            pkt.sent_at = t;
            Axes a_prev{}, v_prev{};
            for (std::size_t c = 0; c < axes; ++c) {
                a_prev[c] = uav_ ? leader.uav.axis[c].acceleration : leader.veh.acceleration;
                v_prev[c] = uav_ ? leader.uav.axis[c].velocity : leader.veh.velocity;
            }
            const Axes a_lead = a_prev, v_lead = v_prev;
            for (PairRt& p : pairs_) {
                if (p.dst != leader_id) continue;
                const Eigen::VectorXd& est = p.dest->track().current();
                pkt.calib_stamp = std::max(pkt.calib_stamp, p.dest->last_calib_stamp());
                pkt.targets.push_back(p.src);
                const NodeRt& follower = node(p.src);
                for (std::size_t c = 0; c < axes; ++c) {
                    CaccGains k = cfg_.cacc;
                    double d_hat;
                    const double v_hat = est[static_cast<Eigen::Index>(3 * c + 1)];
                    if (uav_) {
                        k.d_des = -follower.offset[c];
                        d_hat = leader.uav.axis[c].position - est[static_cast<Eigen::Index>(3 * c)];
                    } else {
                        d_hat = est[0];
                    }
                    const double a = cacc_accel(k, d_hat, v_hat, v_prev[c], v_lead[c], a_prev[c], a_lead[c]);
                    pkt.commands.push_back(a);
                    if (!uav_) {
                        // The next follower's predecessor is this one.
                        v_prev[c] = v_hat;
                        a_prev[c] = a;
                    }
                }
            }
            if (!pkt.targets.empty()) medium_->enqueue(std::move(pkt), t);
        }
    }

    // (6) per-pair state rows and adaptation
    void record(Slot t) {
        for (PairRt& p : pairs_) {
            TraceRecord r;
            r.slot = t;
            r.node = p.src;
            r.pair = p.id;
            r.event = EventKind::State;
            r.stamp = t;
            r.status = p.truth;
            r.s_hat = p.source->track().at(t);
            r.s_hat_dst = p.dest->track().at(t);
            r.error = masked_error(p.truth, r.s_hat_dst, predicted(), cfg_.link.g);
            r.m = p.m;
            emit(std::move(r));
        }
        // Fixed-m runs also log their window costs, for comparison.
        if (cfg_.smart.enabled && !shadow_ && t > 0 && (t + 1) % cfg_.smart.eval_int == 0) adapt(t);
    }

    void adapt(Slot t) {
        for (std::size_t g = 0; g < adapt_.size(); ++g) {
            PlatoonAdapt& a = adapt_[g];
            double cost = 0.0;
            for (PairRt& p : pairs_) {
                if (static_cast<std::size_t>(p.platoon) != g) continue;
                if (p.window_n > 0) cost += std::sqrt(p.window_sq / static_cast<double>(p.window_n));
            }
            const bool more = a.collisions > a.state.collisions_prev;
            const double m = cfg_.smart.adaptive ? adapt_cost(a.state, cost, more, cfg_.smart.grid) : a.state.m;
            a.state.collisions_prev = a.collisions;
            for (PairRt& p : pairs_)
                if (static_cast<std::size_t>(p.platoon) == g) p.m = m;
            adaptation_.push_back(AdaptEvent{t, static_cast<int>(g), cost, a.collisions, m});
            TraceRecord r;
            r.slot = t;
            r.node = uav_ ? 0 : static_cast<NodeId>(g) * cfg_.platoon_size;
            r.event = EventKind::Adapt;
            r.error = cost;
            r.m = m;
            r.stamp = a.collisions;
            emit(std::move(r));
            a.collisions = 0;
        }
        for (PairRt& p : pairs_) {
            p.window_sq = 0.0;
            p.window_n = 0;
        }
    }

    void step(Slot t) {
        plant(t);
        sources(t);
        mac(t);
        receive(t);
        control(t);
        record(t);
    }

    ScenarioConfig cfg_;
    RunOptions opts_;
    bool shadow_;
    bool uav_;
    TraceHeader header_;
    SummaryBuilder builder_;
    std::optional<TraceWriter> writer_;
    RngStream sense_rng_;
    RngStream scenario_rng_;
    ErrorGrid grid_;
    std::vector<int> drops_left_;
    std::vector<NodeRt> nodes_;
    std::vector<PairRt> pairs_;
    std::unique_ptr<Medium> medium_;
    std::vector<Inbound> inbox_;
    std::vector<PlatoonAdapt> adapt_;
    std::vector<TraceRecord> records_;
    std::vector<AdaptEvent> adaptation_;
    std::map<int, Slot> first_adoption_;
    std::map<int, TransitionCounter> counters_;
    std::map<int, PolicyBank> banks_;
};

}  // namespace

TraceHeader trace_header(const ScenarioConfig& cfg) {
    TraceHeader h;
    h.duration = cfg.duration;
    h.rri = cfg.mac.pool.rri;
    h.subchannels = cfg.mac.pool.subchannels;
    h.d_des = cfg.cacc.d_des;
    h.distance_component = cfg.scenario == ScenarioKind::Uav ? -1 : 0;
    return h;
}

std::map<int, TransitionCounter> calibrate_transitions(const ScenarioConfig& cfg) {
    ScenarioConfig c = cfg;
    c.duration = cfg.smart.calib_duration;
    c.mode = RunMode::Parallel;
    c.smart.enabled = false;
    c.drops.clear();
    Engine e(c, RunOptions{}, true);
    e.run();
    return e.counters();
}

std::map<int, PolicyBank> build_banks(const ScenarioConfig& cfg) {
    cfg.validate();
    std::vector<double> levels;
    for (double l : cfg.smart.levels) levels.push_back(l * cfg.link.delta);
    const ErrorGrid grid(levels);
    std::map<int, PolicyBank> banks;
    for (const auto& [pair, counter] : calibrate_transitions(cfg))
        banks.emplace(pair, load_or_build_policy_bank(cfg.smart.grid, counter.build(grid), cfg.smart.bank_dir));
    return banks;
}

RunResult run(const ScenarioConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    std::map<int, PolicyBank> banks;
    if (cfg.smart.enabled && cfg.mode == RunMode::Parallel) banks = build_banks(cfg);
    Engine e(cfg, opts, false);
    if (!banks.empty()) e.set_banks(std::move(banks));
    return e.run();
}

RunResult run_baseline(ScenarioConfig cfg, int interval, const RunOptions& opts) {
    cfg.mode = RunMode::Baseline;
    cfg.link.baseline_interval = interval;
    return run(cfg, opts);
}

}  // namespace parcomm
