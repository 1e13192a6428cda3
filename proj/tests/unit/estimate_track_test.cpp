#include "doctest.h"
#include "parcomm/estimate_track.hpp"

#include <memory>

using namespace parcomm;

namespace {

const std::vector<std::size_t> kPred{0, 1};

std::shared_ptr<const LinearModel> drift_model(Slot version) {
    auto m = LinearModel::zero(3, kPred, 1, version);
    m.A << 1.0, 0.001, 0.0, 0.0, 1.0, 0.001;
    return std::make_shared<const LinearModel>(m);
}

Eigen::VectorXd exo(Slot t) { return Eigen::Vector3d(0.0, 0.0, 0.5 * static_cast<double>(t % 7)); }

}  // namespace

TEST_CASE("without a model the predicted components hold their value") {
    EstimateTrack tr(3, kPred, 1);
    tr.set_initial(Eigen::Vector3d(10.0, 1.0, 0.0));
    for (Slot t = 0; t < 5; ++t) tr.advance(t, exo(t));
    CHECK(tr.at(4)[0] == 10.0);
    CHECK(tr.at(4)[1] == 1.0);
    CHECK(tr.at(4)[2] == exo(4)[2]);
    CHECK(tr.model_at(4) == nullptr);
    CHECK(tr.version_at(4) == -1);
}

TEST_CASE("pins and switches applied late give the same log as applied on time") {
    const Eigen::Vector3d init(10.0, 1.0, 0.0);
    EstimateTrack on_time(3, kPred, 1), late(3, kPred, 1);
    on_time.set_initial(init);
    late.set_initial(init);
    const auto m1 = drift_model(20), m2 = drift_model(60);
    for (Slot t = 0; t < 100; ++t) {
        if (t == 30) on_time.adopt(30, m1);
        if (t == 70) on_time.adopt(70, m2);
        on_time.advance(t, exo(t));
        if (t == 40) on_time.pin(40, Eigen::Vector3d(12.0, 0.5, 0.0));
        late.advance(t, exo(t));
    }
    // Same events, out of order and after the fact.
    late.pin(40, Eigen::Vector3d(12.0, 0.5, 0.0));
    late.adopt(70, m2);
    late.adopt(30, m1);
    late.adopt(70, m2);
    for (Slot t = 0; t < 100; ++t) CHECK((late.at(t).array() == on_time.at(t).array()).all());
    CHECK(late.version_at(50) == 20);
    CHECK(late.switch_slot_at(80) == 70);
    CHECK(late.latest_switch_slot() == 70);
}

TEST_CASE("a pin re-rolls the slots after it") {
    EstimateTrack tr(3, kPred, 1);
    tr.set_initial(Eigen::Vector3d(0.0, 1.0, 0.0));
    tr.adopt(0, drift_model(0));
    for (Slot t = 0; t < 10; ++t) tr.advance(t, exo(t));
    tr.pin(5, Eigen::Vector3d(3.0, 2.0, 0.0));
    CHECK(tr.at(5)[0] == 3.0);
    CHECK(tr.at(6)[0] == doctest::Approx(3.0 + 0.002));
    // The unpinned value at 5 is the model's prediction from slot 4.
    const Eigen::VectorXd s4 = tr.at(4);
    CHECK(tr.unpinned_at(5)[0] == doctest::Approx(s4[0] + 0.001 * s4[1]));
}

TEST_CASE("adopting from a future slot leaves earlier slots alone") {
    EstimateTrack tr(3, kPred, 1);
    tr.set_initial(Eigen::Vector3d(5.0, 1.0, 0.0));
    for (Slot t = 0; t < 10; ++t) tr.advance(t, exo(t));
    tr.adopt(15, drift_model(3));
    for (Slot t = 10; t < 20; ++t) tr.advance(t, exo(t));
    CHECK(tr.at(14)[0] == 5.0);
    CHECK(tr.at(15)[0] == doctest::Approx(5.001));
    CHECK(tr.model_at(14) == nullptr);
    CHECK(tr.model_at(15) != nullptr);
}
