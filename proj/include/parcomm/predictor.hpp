#pragma once

#include "parcomm/core.hpp"

#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

namespace parcomm {

/// Raised when a fit is requested on a window that holds too few samples.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear status model: maps n_input stacked statuses (oldest first) to the
/// predicted components of the next status. Components not listed in
/// `predicted` are exogenous and supplied by the caller at prediction time.
struct LinearModel {
    Eigen::MatrixXd A;                   // d_pred x (n_input * status_dim)
    int n_input = 1;
    std::size_t status_dim = 0;
    std::vector<std::size_t> predicted;  // component indices, ascending
    Slot version = 0;                    // slot of estimation

    static LinearModel zero(std::size_t status_dim, std::vector<std::size_t> predicted, int n_input = 1,
                            Slot version = 0);
    static LinearModel identity(std::size_t status_dim, std::vector<std::size_t> predicted, Slot version = 0);
    /// Each predicted component repeats its value in the newest history entry.
    static LinearModel hold(std::size_t status_dim, std::vector<std::size_t> predicted, int n_input = 1,
                            Slot version = 0);

    std::size_t input_dim() const { return static_cast<std::size_t>(n_input) * status_dim; }
    void validate() const;
};

/// Fixed-capacity ring of samples in strictly increasing stamp order.
class SampleWindow {
public:
    explicit SampleWindow(std::size_t capacity);

    void push(const StatusVector& s);
    void clear() { buf_.clear(); }

    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return buf_.empty(); }
    const StatusVector& operator[](std::size_t i) const { return buf_[i]; }
    const StatusVector& back() const { return buf_.back(); }

private:
    std::size_t capacity_;
    std::deque<StatusVector> buf_;
};

/// Least-squares fit A = W * pinv(S) over the window. Column k of S stacks the
/// n_input samples preceding target k; column k of W holds the predicted
/// components of target k. Singular values below `rcond` times the largest are
/// dropped, which yields the minimum-norm solution on rank-deficient windows.
/// With a `prior` P the fit is A = P + (W - P S) pinv(S): directions the
/// window does not excite keep the prior's behaviour instead of mapping to
/// zero. On a full-rank window at the default cutoff the result is the same.
/// Throws InsufficientData if the window holds fewer than n_input + 1 samples.
LinearModel fit_lms(const SampleWindow& window, std::span<const std::size_t> predicted, int n_input,
                    Slot version, double rcond = 1e-10, const Eigen::MatrixXd* prior = nullptr);

/// Stack a history (oldest first) into one input column.
Eigen::VectorXd stack_history(std::span<const StatusVector> history);

/// Predicted components come from A * stacked(history); the remaining
/// components are copied from `exogenous` (a full-dimension vector).
StatusVector predict(const LinearModel& model, std::span<const StatusVector> history,
                     const Eigen::VectorXd& exogenous, Slot stamp);

/// Closed-loop rollout of k steps, feeding predictions back as history.
std::vector<StatusVector> rollout(const LinearModel& model, std::vector<StatusVector> history,
                                  const Eigen::VectorXd& exogenous, int steps);

}  // namespace parcomm
