#include "doctest.h"
#include "parcomm/plant.hpp"

#include <cmath>

using namespace parcomm;

TEST_CASE("cacc at equilibrium commands nothing") {
    const CaccGains k;
    CHECK(cacc_accel(k, k.d_des, 20.0, 20.0, 20.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("cacc gap term and clamp") {
    CaccGains k;
    k.omega = {0.5, -0.3, -0.2, 0.4, 0.1};
    CHECK(cacc_accel(k, 9.0, 20.0, 20.0, 20.0, 0.0, 0.0) == doctest::Approx(0.5));
    CHECK(cacc_accel(k, -2.0, 20.0, 20.0, 20.0, 0.0, 0.0) == k.a_max);
    CHECK(cacc_accel(k, 30.0, 20.0, 20.0, 20.0, 0.0, 0.0) == k.a_min);
    // Every term separately.
    CHECK(cacc_accel(k, 10.0, 21.0, 20.0, 20.0, 0.0, 0.0) == doctest::Approx(-0.3 - 0.2));
    CHECK(cacc_accel(k, 10.0, 20.0, 20.0, 20.0, 1.0, 0.0) == doctest::Approx(0.4));
    CHECK(cacc_accel(k, 10.0, 20.0, 20.0, 20.0, 0.0, 1.0) == doctest::Approx(0.1));
}

TEST_CASE("leader parabola") {
    CHECK(leader_accel_parabola(100, 100, 300, 2.0) == 0.0);
    CHECK(leader_accel_parabola(300, 100, 300, 2.0) == 0.0);
    CHECK(leader_accel_parabola(200, 100, 300, 2.0) == doctest::Approx(2.0));
    CHECK(leader_accel_parabola(50, 100, 300, 2.0) == 0.0);
    CHECK(leader_accel_parabola(400, 100, 300, 2.0) == 0.0);
    CHECK(leader_accel_parabola(150, 100, 300, 2.0, true) == doctest::Approx(2.0 * 150 * 50));
    CHECK(leader_accel_parabola(150, 100, 300, 2.0) == leader_accel_parabola(250, 100, 300, 2.0));
    CHECK_THROWS(leader_accel_parabola(0, 300, 100, 1.0));
}

TEST_CASE("integrating the parabola gives two thirds of peak times duration") {
    VehicleState s;
    s.velocity = 20.0;
    const Slot t0 = 1000, t1 = 3000;
    const double peak = 1.5;
    for (Slot t = 0; t < 4000; ++t) s = kinematics_step(s, leader_accel_parabola(t, t0, t1, peak));
    const double expect = 20.0 + peak * static_cast<double>(t1 - t0) * (2.0 / 3.0) * kSlotSeconds;
    CHECK(std::abs(s.velocity - expect) <= 1e-3 * expect);
}

TEST_CASE("semi-implicit euler") {
    VehicleState s;
    s.position = 1.0;
    s.velocity = 2.0;
    const VehicleState n = kinematics_step(s, 3.0, 0.5);
    CHECK(n.velocity == 3.5);
    CHECK(n.position == 1.0 + 3.5 * 0.5);
    CHECK(n.acceleration == 3.0);
    CHECK_THROWS(kinematics_step(s, 0.0, 0.0));
}

TEST_CASE("gap subtracts the front vehicle length") {
    VehicleState front, back;
    front.position = 30.0;
    back.position = 15.0;
    CHECK(gap(front, back) == 10.0);
}

TEST_CASE("speed schedule ramps") {
    SpeedSchedule sch{{{1.0, 3.0, 20.0, 24.0}}};
    CHECK(sch.accel(0) == 0.0);
    CHECK(sch.accel(static_cast<Slot>(std::llround(2.0 / kSlotSeconds))) == doctest::Approx(2.0));
    CHECK(sch.accel(static_cast<Slot>(std::llround(3.0 / kSlotSeconds))) == 0.0);
}

TEST_CASE("uav axes are clamped and independent") {
    UavState s;
    const UavState a = uav_step(s, {10.0, -10.0, 1.0}, -4.0, 4.0, 0.1);
    CHECK(a.axis[0].acceleration == 4.0);
    CHECK(a.axis[1].acceleration == -4.0);
    CHECK(a.axis[2].acceleration == 1.0);
    CHECK(a.axis[0].velocity == -a.axis[1].velocity);
    CHECK(a.axis[0].position == -a.axis[1].position);
    CHECK(a.axis[2].position == doctest::Approx(0.01));
}

TEST_CASE("min safe distance") {
    const std::vector<double> d{10.0, 9.5, 10.2, 9.8};
    CHECK(min_safe_distance(d, 10.0) == doctest::Approx(0.5));
    CHECK(min_safe_distance(std::vector<double>{12.0}, 10.0) == -2.0);
    CHECK_THROWS(min_safe_distance(std::vector<double>{}, 10.0));
}

TEST_CASE("cacc gains validation") {
    CaccGains k;
    CHECK_NOTHROW(k.validate());
    k.a_min = 5.0;
    CHECK_THROWS(k.validate());
}
