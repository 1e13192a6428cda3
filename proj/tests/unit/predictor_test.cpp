#include "doctest.h"
#include "parcomm/predictor.hpp"

#include <cmath>

using namespace parcomm;

namespace {

SampleWindow window_from(const std::vector<Eigen::VectorXd>& xs) {
    SampleWindow w(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) w.push(StatusVector(xs[i], static_cast<Slot>(i)));
    return w;
}

}  // namespace

TEST_CASE("a window of zeros fits the zero model") {
    const SampleWindow w = window_from(std::vector<Eigen::VectorXd>(8, Eigen::Vector3d::Zero()));
    const std::vector<std::size_t> pred{0, 1};
    const LinearModel m = fit_lms(w, pred, 1, 5);
    CHECK(m.A.isZero(0.0));
    CHECK(m.version == 5);
}

TEST_CASE("a known full-rank map is recovered") {
    Eigen::Matrix3d A0;
    A0 << 0.9, 0.1, 0.0, -0.2, 0.95, 0.05, 0.1, 0.0, 0.7;
    // A0 has distinct eigenvalues and the start vector excites every mode, so
    // the chain's regressor has full rank.
    SampleWindow chain(20);
    Eigen::VectorXd x = Eigen::Vector3d(1.0, -0.5, 0.25);
    for (int k = 0; k < 20; ++k) {
        chain.push(StatusVector(x, k));
        x = A0 * x;
    }
    const std::vector<std::size_t> all{0, 1, 2};
    const LinearModel m = fit_lms(chain, all, 1, 0);
    CHECK((m.A - A0).cwiseAbs().maxCoeff() < 1e-9);

    const std::vector<std::size_t> masked{0, 2};
    const LinearModel mm = fit_lms(chain, masked, 1, 0);
    CHECK(mm.A.rows() == 2);
    CHECK((mm.A.row(0) - A0.row(0)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((mm.A.row(1) - A0.row(2)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("proportional history columns give the minimum-norm solution") {
    // Every input is a multiple of u, so solutions are A = a u^T/|u|^2 + N with N u = 0.
    const Eigen::Vector2d u(1.0, 2.0);
    std::vector<Eigen::VectorXd> xs;
    for (int k = 0; k < 10; ++k) xs.push_back(u * std::pow(0.9, k));
    const SampleWindow w = window_from(xs);
    const std::vector<std::size_t> pred{0, 1};
    const LinearModel m = fit_lms(w, pred, 1, 0);
    for (int k = 0; k + 1 < 10; ++k) CHECK((m.A * xs[k] - xs[k + 1]).cwiseAbs().maxCoeff() < 1e-9);
    // Brute force over the one-dimensional null-space family A + c * v n^T, n = (2, -1).
    const Eigen::Vector2d nul(2.0, -1.0);
    const double base = m.A.squaredNorm();
    for (double c = -1.0; c <= 1.0; c += 0.01)
        for (int r = 0; r < 2; ++r) {
            Eigen::Matrix2d alt = m.A;
            alt.row(r) += c * nul.transpose();
            CHECK(alt.squaredNorm() >= base - 1e-12);
        }
    CHECK((m.A * nul).norm() < 1e-9);
}

TEST_CASE("fit with a hold prior keeps unexcited directions at hold") {
    // Component 1 never moves, so its coefficient is not identified by the data.
    std::vector<Eigen::VectorXd> xs;
    for (int k = 0; k < 12; ++k) xs.push_back(Eigen::Vector2d(std::pow(0.8, k), 0.0));
    const SampleWindow w = window_from(xs);
    const std::vector<std::size_t> pred{0, 1};
    const Eigen::MatrixXd hold = LinearModel::hold(2, pred).A;
    const LinearModel plain = fit_lms(w, pred, 1, 0);
    const LinearModel prior = fit_lms(w, pred, 1, 0, 1e-2, &hold);
    CHECK(plain.A(1, 1) == doctest::Approx(0.0));
    CHECK(prior.A(1, 1) == doctest::Approx(1.0));
    CHECK(prior.A(0, 0) == doctest::Approx(0.8));
    const Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(3, 2);
    CHECK_THROWS_AS(fit_lms(w, pred, 1, 0, 1e-2, &wrong), std::invalid_argument);
}

TEST_CASE("fit needs n_input + 1 samples") {
    const SampleWindow w = window_from({Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(1.0, 1.0)});
    const std::vector<std::size_t> pred{0};
    CHECK_NOTHROW(fit_lms(w, pred, 1, 0));
    CHECK_THROWS_AS(fit_lms(w, pred, 2, 0), InsufficientData);
}

TEST_CASE("window rejects out-of-order stamps and drops the oldest sample") {
    SampleWindow w(2);
    w.push(StatusVector(Eigen::Vector2d(1, 0), 1));
    CHECK_THROWS(w.push(StatusVector(Eigen::Vector2d(1, 0), 1)));
    CHECK_THROWS(w.push(StatusVector(Eigen::Vector3d(1, 0, 0), 2)));
    w.push(StatusVector(Eigen::Vector2d(2, 0), 2));
    w.push(StatusVector(Eigen::Vector2d(3, 0), 3));
    CHECK(w.size() == 2);
    CHECK(w[0].stamp == 2);
}

TEST_CASE("predict with zero, identity and exogenous components") {
    const std::vector<std::size_t> pred{0, 1};
    const Eigen::Vector3d exo(0.0, 0.0, 7.0);
    const std::vector<StatusVector> h{StatusVector(Eigen::Vector3d(1.5, -2.0, 3.0), 4)};
    const StatusVector z = predict(LinearModel::zero(3, pred), h, exo, 5);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
    CHECK(z[2] == 7.0);
    CHECK(z.stamp == 5);
    const StatusVector id = predict(LinearModel::identity(3, pred), h, exo, 5);
    CHECK(id[0] == 1.5);
    CHECK(id[1] == -2.0);
}

TEST_CASE("closed-loop rollout equals repeated multiplication") {
    const std::vector<std::size_t> pred{0, 1};
    LinearModel m = LinearModel::zero(2, pred);
    m.A << 1.0, 0.001, -0.05, 0.98;
    const Eigen::Vector2d x0(2.0, 1.0);
    const auto out = rollout(m, {StatusVector(x0, 0)}, Eigen::Vector2d::Zero(), 50);
    Eigen::Vector2d x = x0;
    for (int k = 0; k < 50; ++k) {
        x = m.A * x;
        CHECK((out[static_cast<std::size_t>(k)].values - x).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(out[static_cast<std::size_t>(k)].stamp == k + 1);
    }
}

TEST_CASE("model validation") {
    const std::vector<std::size_t> bad{1, 0};
    CHECK_THROWS(LinearModel::zero(3, bad));
    const std::vector<std::size_t> out_of_range{3};
    CHECK_THROWS(LinearModel::zero(3, out_of_range));
    const std::vector<std::size_t> pred{0};
    const LinearModel h = LinearModel::hold(2, pred, 2);
    CHECK(h.A(0, 2) == 1.0);
    CHECK(h.A.sum() == 1.0);
}
