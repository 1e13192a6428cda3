#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace parcomm {

/// Simulated time in slots. One slot is one millisecond; slot 0 is the start of a run.
using Slot = std::int64_t;

inline constexpr double kSlotSeconds = 1e-3;

using NodeId = int;
inline constexpr NodeId kBroadcast = -1;

/// A timestamped real vector of physical statuses (distance, velocity, ...).
struct StatusVector {
    Eigen::VectorXd values;
    Slot stamp = 0;

    StatusVector() = default;
    StatusVector(Eigen::VectorXd v, Slot t) : values(std::move(v)), stamp(t) {}

    Eigen::Index dim() const { return values.size(); }
    double operator[](Eigen::Index i) const { return values[i]; }
    bool all_finite() const { return values.allFinite(); }
};

enum class ErrorMeasure { L1, L2 };

ErrorMeasure parse_error_measure(const std::string& name);
std::string to_string(ErrorMeasure g);

/// l1 or l2 norm of (a - b). Throws std::invalid_argument on dimension mismatch.
double status_error(const StatusVector& a, const StatusVector& b, ErrorMeasure g);
double status_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, ErrorMeasure g);

/// Error restricted to the listed components.
double masked_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                    std::span<const std::size_t> components, ErrorMeasure g);

/// Counter-based random stream. The value of draw k depends only on
/// (seed, stream, k), so draw order in one subsystem never perturbs another.
class RngStream {
public:
    /// Stream ids used by the simulator; one per stochastic subsystem.
    enum : std::uint64_t { kSensing = 1, kResourceSelection = 2, kChannelLoss = 3, kScenario = 4 };

    RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    static std::uint64_t at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

    std::uint64_t next_u64() { return at(seed_, stream_, counter_++); }
    /// Uniform on [0, 1).
    double uniform();
    /// Uniform integer on [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Standard normal draw (Box-Muller, consumes two counter values).
    double gaussian();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

/// Adds independent zero-mean Gaussian noise per component; the stamp is kept.
StatusVector add_sensing_noise(const StatusVector& s, std::span<const double> sigmas, RngStream& rng);

}  // namespace parcomm
