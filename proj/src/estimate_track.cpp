#include "parcomm/estimate_track.hpp"

#include <algorithm>

namespace parcomm {

EstimateTrack::EstimateTrack(std::size_t status_dim, std::vector<std::size_t> predicted, int n_input,
                             std::size_t horizon)
    : dim_(status_dim),
      predicted_(std::move(predicted)),
      n_input_(n_input),
      horizon_(std::max<std::size_t>(horizon, static_cast<std::size_t>(n_input) + 1)),
      initial_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(status_dim))) {
    if (n_input < 1) throw std::invalid_argument("EstimateTrack: n_input must be positive");
}

void EstimateTrack::set_initial(const Eigen::VectorXd& s) {
    if (s.size() != static_cast<Eigen::Index>(dim_))
        throw std::invalid_argument("EstimateTrack: initial value dimension mismatch");
    initial_ = s;
    if (!log_.empty()) reroll_from(first_);
}

const Eigen::VectorXd& EstimateTrack::value_before(std::size_t idx, std::size_t back) const {
    return idx >= back ? log_[idx - back].estimate : initial_;
}

std::shared_ptr<const LinearModel> EstimateTrack::model_at(Slot t) const {
    std::shared_ptr<const LinearModel> m;
    for (const Segment& s : segments_) {
        if (s.from > t) break;
        m = s.model;
    }
    return m;
}

Slot EstimateTrack::version_at(Slot t) const {
    auto m = model_at(t);
    return m ? m->version : -1;
}

Slot EstimateTrack::switch_slot_at(Slot t) const {
    Slot from = -1;
    for (const Segment& s : segments_) {
        if (s.from > t) break;
        from = s.from;
    }
    return from;
}

Slot EstimateTrack::latest_switch_slot() const { return segments_.empty() ? -1 : segments_.back().from; }

std::shared_ptr<const LinearModel> EstimateTrack::latest_model() const {
    return segments_.empty() ? nullptr : segments_.back().model;
}

Eigen::VectorXd EstimateTrack::roll(std::size_t idx) const {
    const Slot t = first_ + static_cast<Slot>(idx);
    Eigen::VectorXd out = log_[idx].exo;
    const auto model = model_at(t);
    if (!model) {
        const Eigen::VectorXd& prev = value_before(idx, 1);
        for (std::size_t c : predicted_) out[static_cast<Eigen::Index>(c)] = prev[static_cast<Eigen::Index>(c)];
        return out;
    }
    Eigen::VectorXd y;
    if (n_input_ == 1) {
        y = model->A * value_before(idx, 1);
    } else {
        const auto d = static_cast<Eigen::Index>(dim_);
        Eigen::VectorXd x(d * n_input_);
        for (int j = 0; j < n_input_; ++j)
            x.segment(j * d, d) = value_before(idx, static_cast<std::size_t>(n_input_ - j));
        y = model->A * x;
    }
    for (std::size_t r = 0; r < predicted_.size(); ++r)
        out[static_cast<Eigen::Index>(predicted_[r])] = y[static_cast<Eigen::Index>(r)];
    return out;
}

void EstimateTrack::advance(Slot t, const Eigen::VectorXd& exo) {
    if (exo.size() != static_cast<Eigen::Index>(dim_))
        throw std::invalid_argument("EstimateTrack: exogenous dimension mismatch");
    if (log_.empty()) {
        first_ = t;
    } else if (t != last_slot() + 1) {
        throw std::invalid_argument("EstimateTrack: slots must advance one at a time");
    }
    log_.push_back(Entry{Eigen::VectorXd(), exo, std::nullopt});
    log_.back().estimate = roll(log_.size() - 1);

    if (log_.size() > horizon_) {
        log_.pop_front();
        ++first_;
        // Keep only the newest segment that starts at or before the log start.
        auto it = std::upper_bound(segments_.begin(), segments_.end(), first_,
                                   [](Slot v, const Segment& s) { return v < s.from; });
        if (it != segments_.begin() && std::prev(it) != segments_.begin())
            segments_.erase(segments_.begin(), std::prev(it));
    }
}

void EstimateTrack::reroll_from(Slot t) {
    if (log_.empty()) return;
    Slot start = std::max(t, first_);
    for (auto idx = static_cast<std::size_t>(start - first_); idx < log_.size(); ++idx) {
        Entry& e = log_[idx];
        e.estimate = e.pinned ? *e.pinned : roll(idx);
    }
}

void EstimateTrack::pin(Slot t, const Eigen::VectorXd& values) {
    if (values.size() != static_cast<Eigen::Index>(dim_))
        throw std::invalid_argument("EstimateTrack: pinned value dimension mismatch");
    if (log_.empty() || t > last_slot())
        throw std::invalid_argument("EstimateTrack: cannot pin a slot that has not been reached");
    const Slot at_slot = std::max(t, first_);
    log_[static_cast<std::size_t>(at_slot - first_)].pinned = values;
    reroll_from(at_slot);
}

void EstimateTrack::adopt(Slot from, std::shared_ptr<const LinearModel> model) {
    if (!model) throw std::invalid_argument("EstimateTrack: null model");
    if (model->status_dim != dim_ || model->predicted != predicted_ || model->n_input != n_input_)
        throw std::invalid_argument("EstimateTrack: model shape does not match the track");
    if (!log_.empty()) from = std::max(from, first_);
    const Slot version = model->version;
    // A newer model already in force earlier wins; a stale switch is dropped.
    for (const Segment& s : segments_)
        if (s.from < from && s.model->version > version) return;
    std::erase_if(segments_, [&](const Segment& s) { return s.from >= from && s.model->version <= version; });
    auto it = std::lower_bound(segments_.begin(), segments_.end(), from,
                               [](const Segment& s, Slot v) { return s.from < v; });
    segments_.insert(it, Segment{from, std::move(model)});
    if (!log_.empty() && from <= last_slot()) reroll_from(from);
}

const Eigen::VectorXd& EstimateTrack::at(Slot t) const {
    if (log_.empty() || t < first_ || t > last_slot())
        throw std::out_of_range("EstimateTrack: slot not logged");
    return log_[static_cast<std::size_t>(t - first_)].estimate;
}

const Eigen::VectorXd& EstimateTrack::current() const {
    if (log_.empty()) throw std::out_of_range("EstimateTrack: empty");
    return log_.back().estimate;
}

Eigen::VectorXd EstimateTrack::unpinned_at(Slot t) const {
    if (log_.empty() || t < first_ || t > last_slot())
        throw std::out_of_range("EstimateTrack: slot not logged");
    return roll(static_cast<std::size_t>(t - first_));
}

}  // namespace parcomm
