#pragma once

#include "parcomm/core.hpp"

#include <array>
#include <span>
#include <vector>

namespace parcomm {

struct VehicleState {
    double position = 0.0;      // m, front bumper
    double velocity = 0.0;      // m/s
    double acceleration = 0.0;  // m/s^2
    double length = 5.0;        // m
};

/// Inter-vehicle gap: front.position - self.position - front.length.
double gap(const VehicleState& front, const VehicleState& self);

struct CaccGains {
    std::array<double, 5> omega{-1.0, -1.5, -0.5, 0.5, 0.5};
    double d_des = 10.0;
    double a_min = -2.94;
    double a_max = 4.0;

    void validate() const;
};

/// a = w1(d_des - d) + w2(v - v_prev) + w3(v - v_lead) + w4 a_prev + w5 a_lead,
/// clamped to [a_min, a_max].
double cacc_accel(const CaccGains& k, double d_hat, double v_hat, double v_hat_prev, double v_lead,
                  double a_des_prev, double a_des_lead);

/// Parabola that vanishes at t0 and t1 and equals `peak` at the midpoint; 0
/// outside [t0, t1]. With `raw` the unnormalized peak * (t1 - t)(t - t0) is
/// returned instead.
double leader_accel_parabola(Slot t, Slot t0, Slot t1, double peak, bool raw = false);

/// Piecewise-constant acceleration that moves velocity between breakpoints.
struct SpeedSchedule {
    struct Ramp {
        double t_start;  // s
        double t_end;    // s
        double v_from;   // m/s
        double v_to;     // m/s
    };
    std::vector<Ramp> ramps;

    double accel(Slot t) const;
};

/// Semi-implicit Euler: v += a dt; x += v dt.
VehicleState kinematics_step(const VehicleState& s, double a, double dt = kSlotSeconds);

struct AxisState {
    double position = 0.0;
    double velocity = 0.0;
    double acceleration = 0.0;
};

struct UavState {
    std::array<AxisState, 3> axis{};
};

/// Independent per-axis integration; each command is clamped to [a_min, a_max].
UavState uav_step(const UavState& s, const std::array<double, 3>& a, double a_min = -4.0, double a_max = 4.0,
                  double dt = kSlotSeconds);

/// d_des minus the smallest distance seen (the worst encroachment).
double min_safe_distance(std::span<const double> distances, double d_des);

}  // namespace parcomm
