#include "parcomm/predictor.hpp"

#include <algorithm>

namespace parcomm {

LinearModel LinearModel::zero(std::size_t status_dim, std::vector<std::size_t> predicted, int n_input,
                              Slot version) {
    LinearModel m;
    m.n_input = n_input;
    m.status_dim = status_dim;
    m.predicted = std::move(predicted);
    m.version = version;
    m.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.predicted.size()),
                                static_cast<Eigen::Index>(m.input_dim()));
    m.validate();
    return m;
}

LinearModel LinearModel::identity(std::size_t status_dim, std::vector<std::size_t> predicted, Slot version) {
    LinearModel m = zero(status_dim, std::move(predicted), 1, version);
    for (std::size_t r = 0; r < m.predicted.size(); ++r)
        m.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m.predicted[r])) = 1.0;
    return m;
}

LinearModel LinearModel::hold(std::size_t status_dim, std::vector<std::size_t> predicted, int n_input,
                              Slot version) {
    LinearModel m = zero(status_dim, std::move(predicted), n_input, version);
    const std::size_t newest = static_cast<std::size_t>(n_input - 1) * status_dim;
    for (std::size_t r = 0; r < m.predicted.size(); ++r)
        m.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(newest + m.predicted[r])) = 1.0;
    return m;
}

void LinearModel::validate() const {
    if (n_input < 1) throw std::invalid_argument("LinearModel: n_input must be positive");
    if (status_dim == 0) throw std::invalid_argument("LinearModel: empty status");
    if (!std::is_sorted(predicted.begin(), predicted.end()) ||
        std::adjacent_find(predicted.begin(), predicted.end()) != predicted.end())
        throw std::invalid_argument("LinearModel: predicted components must be ascending and unique");
    for (std::size_t c : predicted)
        if (c >= status_dim) throw std::invalid_argument("LinearModel: predicted component out of range");
    if (A.rows() != static_cast<Eigen::Index>(predicted.size()) ||
        A.cols() != static_cast<Eigen::Index>(input_dim()))
        throw std::invalid_argument("LinearModel: matrix shape does not match n_input/status_dim");
    if (!A.allFinite()) throw std::invalid_argument("LinearModel: non-finite entries");
}

SampleWindow::SampleWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("SampleWindow: capacity must be positive");
}

void SampleWindow::push(const StatusVector& s) {
    if (!buf_.empty()) {
        if (s.stamp <= buf_.back().stamp)
            throw std::invalid_argument("SampleWindow: stamps must be strictly increasing");
        if (s.dim() != buf_.back().dim())
            throw std::invalid_argument("SampleWindow: dimension mismatch");
    }
    if (buf_.size() == capacity_) buf_.pop_front();
    buf_.push_back(s);
}

Eigen::VectorXd stack_history(std::span<const StatusVector> history) {
    if (history.empty()) return {};
    const Eigen::Index d = history.front().dim();
    Eigen::VectorXd x(d * static_cast<Eigen::Index>(history.size()));
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (history[i].dim() != d) throw std::invalid_argument("stack_history: dimension mismatch");
        x.segment(static_cast<Eigen::Index>(i) * d, d) = history[i].values;
    }
    return x;
}

LinearModel fit_lms(const SampleWindow& window, std::span<const std::size_t> predicted, int n_input,
                    Slot version, double rcond, const Eigen::MatrixXd* prior) {
    if (n_input < 1) throw std::invalid_argument("fit_lms: n_input must be positive");
    if (!(rcond >= 0.0 && rcond < 1.0)) throw std::invalid_argument("fit_lms: rcond must be in [0, 1)");
    const auto n = static_cast<std::size_t>(n_input);
    if (window.size() < n + 1)
        throw InsufficientData("fit_lms: window holds " + std::to_string(window.size()) +
                               " samples, need " + std::to_string(n + 1));

    const auto d = static_cast<std::size_t>(window[0].dim());
    const std::size_t cols = window.size() - n;
    const auto din = static_cast<Eigen::Index>(n * d);
    const auto dpred = static_cast<Eigen::Index>(predicted.size());

    // Regression in transposed form: S^T X = W^T, A = X^T.
    Eigen::MatrixXd st(static_cast<Eigen::Index>(cols), din);
    Eigen::MatrixXd wt(static_cast<Eigen::Index>(cols), dpred);
    for (std::size_t k = 0; k < cols; ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        for (std::size_t j = 0; j < n; ++j)
            st.row(row).segment(static_cast<Eigen::Index>(j * d), static_cast<Eigen::Index>(d)) =
                window[k + j].values.transpose();
        const StatusVector& target = window[k + n];
        for (Eigen::Index r = 0; r < dpred; ++r)
            wt(row, r) = target.values[static_cast<Eigen::Index>(predicted[static_cast<std::size_t>(r)])];
    }

    if (prior && (prior->rows() != dpred || prior->cols() != din))
        throw std::invalid_argument("fit_lms: prior shape does not match the fit");
    if (prior) wt -= st * prior->transpose();

    LinearModel m;
    m.n_input = n_input;
    m.status_dim = d;
    m.predicted.assign(predicted.begin(), predicted.end());
    m.version = version;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(st, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rcond);
    if (svd.singularValues().size() == 0 || svd.singularValues()[0] == 0.0) {
        m.A = Eigen::MatrixXd::Zero(dpred, din);
    } else {
        m.A = svd.solve(wt).transpose();
    }
    if (prior) m.A += *prior;
    m.validate();
    return m;
}

StatusVector predict(const LinearModel& model, std::span<const StatusVector> history,
                     const Eigen::VectorXd& exogenous, Slot stamp) {
    if (history.size() != static_cast<std::size_t>(model.n_input))
        throw std::invalid_argument("predict: history length must equal n_input");
    if (exogenous.size() != static_cast<Eigen::Index>(model.status_dim))
        throw std::invalid_argument("predict: exogenous vector must have full status dimension");
    const Eigen::VectorXd x = stack_history(history);
    if (x.size() != model.A.cols()) throw std::invalid_argument("predict: history dimension mismatch");

    StatusVector out(exogenous, stamp);
    const Eigen::VectorXd y = model.A * x;
    for (std::size_t r = 0; r < model.predicted.size(); ++r)
        out.values[static_cast<Eigen::Index>(model.predicted[r])] = y[static_cast<Eigen::Index>(r)];
    return out;
}

std::vector<StatusVector> rollout(const LinearModel& model, std::vector<StatusVector> history,
                                  const Eigen::VectorXd& exogenous, int steps) {
    std::vector<StatusVector> out;
    out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
    Slot t = history.empty() ? 0 : history.back().stamp;
    for (int k = 0; k < steps; ++k) {
        StatusVector next = predict(model, history, exogenous, ++t);
        history.erase(history.begin());
        history.push_back(next);
        out.push_back(std::move(next));
    }
    return out;
}

}  // namespace parcomm
