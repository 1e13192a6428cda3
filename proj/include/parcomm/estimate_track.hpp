#pragma once

#include "parcomm/predictor.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <vector>

namespace parcomm {

/// Per-slot estimate log kept at one end of a pair (the hat-s of the source or
/// the hat-s' of the destination).
///
/// Each slot's estimate is either pinned to a delivered status or rolled
/// forward from the previous n_input estimates by the model that is active at
/// that slot. Pins and model switches may arrive late; the affected suffix is
/// re-rolled, so the final log depends only on the set of pins and switches and
/// not on the order in which they were applied. Two ends fed the same pins and
/// switches therefore hold bitwise-identical estimates.
class EstimateTrack {
public:
    /// Without a model the predicted components hold their last value.
    EstimateTrack(std::size_t status_dim, std::vector<std::size_t> predicted, int n_input,
                  std::size_t horizon = 4096);

    /// Set the value used for slots before the first one logged.
    void set_initial(const Eigen::VectorXd& s);

    /// Compute the estimate for slot t (must be last_slot() + 1, or any slot for
    /// the first call). `exo` carries the exogenous components for slot t.
    void advance(Slot t, const Eigen::VectorXd& exo);

    /// Pin slot t to `values` and re-roll the later slots. Pins older than the
    /// horizon are applied at the oldest logged slot.
    void pin(Slot t, const Eigen::VectorXd& values);

    /// Switch to `model` from slot `from` on. Earlier-scheduled switches at or
    /// after `from` are removed. `from` may lie in the future.
    void adopt(Slot from, std::shared_ptr<const LinearModel> model);

    /// Estimate at slot t (must be logged).
    const Eigen::VectorXd& at(Slot t) const;
    const Eigen::VectorXd& current() const;
    /// Model prediction for slot t ignoring any pin at t (the s-bar of the
    /// trigger). Slot t must be logged.
    Eigen::VectorXd unpinned_at(Slot t) const;

    bool empty() const { return log_.empty(); }
    Slot first_slot() const { return first_; }
    Slot last_slot() const { return first_ + static_cast<Slot>(log_.size()) - 1; }

    /// Model active at slot t, or null when holding.
    std::shared_ptr<const LinearModel> model_at(Slot t) const;
    /// Version of the model active at slot t; -1 when none.
    Slot version_at(Slot t) const;
    /// First slot of the switch in force at slot t; -1 when none.
    Slot switch_slot_at(Slot t) const;
    /// Latest scheduled switch (may be in the future); -1 when none.
    Slot latest_switch_slot() const;
    std::shared_ptr<const LinearModel> latest_model() const;

private:
    struct Entry {
        Eigen::VectorXd estimate;
        Eigen::VectorXd exo;
        std::optional<Eigen::VectorXd> pinned;
    };
    struct Segment {
        Slot from;
        std::shared_ptr<const LinearModel> model;
    };

    Eigen::VectorXd roll(std::size_t idx) const;
    void reroll_from(Slot t);
    const Eigen::VectorXd& value_before(std::size_t idx, std::size_t back) const;

    std::size_t dim_;
    std::vector<std::size_t> predicted_;
    int n_input_;
    std::size_t horizon_;
    Eigen::VectorXd initial_;
    Slot first_ = 0;
    std::deque<Entry> log_;
    std::vector<Segment> segments_;  // ascending by `from`
};

}  // namespace parcomm
