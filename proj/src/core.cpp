#include "parcomm/core.hpp"

#include <cmath>
#include <numbers>

namespace parcomm {

ErrorMeasure parse_error_measure(const std::string& name) {
    if (name == "L1" || name == "l1") return ErrorMeasure::L1;
    if (name == "L2" || name == "l2") return ErrorMeasure::L2;
    throw std::invalid_argument("unknown error measure: " + name);
}

std::string to_string(ErrorMeasure g) { return g == ErrorMeasure::L1 ? "L1" : "L2"; }

double status_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, ErrorMeasure g) {
    if (a.size() != b.size())
        throw std::invalid_argument("status_error: dimension mismatch");
    double acc = 0.0;
    if (g == ErrorMeasure::L1) {
        for (Eigen::Index i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc;
    }
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double status_error(const StatusVector& a, const StatusVector& b, ErrorMeasure g) {
    return status_error(a.values, b.values, g);
}

double masked_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                    std::span<const std::size_t> components, ErrorMeasure g) {
    if (a.size() != b.size())
        throw std::invalid_argument("masked_error: dimension mismatch");
    double acc = 0.0;
    for (std::size_t c : components) {
        const auto i = static_cast<Eigen::Index>(c);
        if (i >= a.size()) throw std::invalid_argument("masked_error: component out of range");
        const double d = a[i] - b[i];
        acc += g == ErrorMeasure::L1 ? std::abs(d) : d * d;
    }
    return g == ErrorMeasure::L1 ? acc : std::sqrt(acc);
}

namespace {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngStream::at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t key = mix64(seed + 0x9e3779b97f4a7c15ULL);
    key = mix64(key ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
    return mix64(key + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
    // Lemire's multiply-shift; bias is at most n / 2^64.
    const auto wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
}

double RngStream::gaussian() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

StatusVector add_sensing_noise(const StatusVector& s, std::span<const double> sigmas, RngStream& rng) {
    if (static_cast<Eigen::Index>(sigmas.size()) != s.dim())
        throw std::invalid_argument("add_sensing_noise: sigma dimension mismatch");
    StatusVector out = s;
    for (Eigen::Index i = 0; i < s.dim(); ++i) {
        const double sigma = sigmas[static_cast<std::size_t>(i)];
        if (!(sigma >= 0.0)) throw std::invalid_argument("add_sensing_noise: negative sigma");
        // Always draw, so the stream position does not depend on which sigmas are zero.
        const double z = rng.gaussian();
        if (sigma > 0.0) out.values[i] += sigma * z;
    }
    return out;
}

}  // namespace parcomm
