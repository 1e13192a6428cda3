#include "parcomm/plant.hpp"

#include <algorithm>
#include <cmath>

namespace parcomm {

double gap(const VehicleState& front, const VehicleState& self) {
    return front.position - self.position - front.length;
}

void CaccGains::validate() const {
    for (double w : omega)
        if (!std::isfinite(w)) throw std::invalid_argument("cacc gains must be finite");
    if (!std::isfinite(d_des)) throw std::invalid_argument("plant.d_des must be finite");
    if (!(a_min < a_max)) throw std::invalid_argument("acceleration clamp needs min < max");
}

double cacc_accel(const CaccGains& k, double d_hat, double v_hat, double v_hat_prev, double v_lead,
                  double a_des_prev, double a_des_lead) {
    const auto& w = k.omega;
    const double a = w[0] * (k.d_des - d_hat) + w[1] * (v_hat - v_hat_prev) + w[2] * (v_hat - v_lead) +
                     w[3] * a_des_prev + w[4] * a_des_lead;
    return std::clamp(a, k.a_min, k.a_max);
}

double leader_accel_parabola(Slot t, Slot t0, Slot t1, double peak, bool raw) {
    if (t0 >= t1) throw std::invalid_argument("leader_accel_parabola: t0 must precede t1");
    if (t < t0 || t > t1) return 0.0;
    const double prod = static_cast<double>(t1 - t) * static_cast<double>(t - t0);
    if (raw) return peak * prod;
    const double span = static_cast<double>(t1 - t0);
    return peak * 4.0 * prod / (span * span);
}

double SpeedSchedule::accel(Slot t) const {
    const double ts = static_cast<double>(t) * kSlotSeconds;
    for (const Ramp& r : ramps)
        if (ts >= r.t_start && ts < r.t_end) return (r.v_to - r.v_from) / (r.t_end - r.t_start);
    return 0.0;
}

VehicleState kinematics_step(const VehicleState& s, double a, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("kinematics_step: dt must be positive");
    VehicleState out = s;
    out.acceleration = a;
    out.velocity = s.velocity + a * dt;
    out.position = s.position + out.velocity * dt;
    return out;
}

UavState uav_step(const UavState& s, const std::array<double, 3>& a, double a_min, double a_max, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("uav_step: dt must be positive");
    UavState out = s;
    for (std::size_t i = 0; i < 3; ++i) {
        const double ai = std::clamp(a[i], a_min, a_max);
        out.axis[i].acceleration = ai;
        out.axis[i].velocity = s.axis[i].velocity + ai * dt;
        out.axis[i].position = s.axis[i].position + out.axis[i].velocity * dt;
    }
    return out;
}

double min_safe_distance(std::span<const double> distances, double d_des) {
    if (distances.empty()) throw std::invalid_argument("min_safe_distance: empty trace");
    return d_des - *std::min_element(distances.begin(), distances.end());
}

}  // namespace parcomm
