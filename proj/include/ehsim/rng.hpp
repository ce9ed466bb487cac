#pragma once

#include <cmath>
#include <cstdint>

namespace ehsim {

/// What a random stream is used for. Streams with different purposes never
/// share state, so adding draws to one cannot shift another.
enum class RngPurpose : std::uint64_t {
    Scenario = 1,
    SensorNoise = 2,
    EnvNoise = 3,
    Link = 4,
    Fuzz = 5,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Counter-based random stream: output i depends only on (key, i), so replay
/// is exact regardless of how work is split across nodes or engine modes.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t key) : key_(key) {}

    static RngStream derive(std::uint64_t master_seed, std::uint64_t node_id, RngPurpose purpose) {
        std::uint64_t k = detail::splitmix64(master_seed);
        k = detail::splitmix64(k ^ (node_id * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL));
        k = detail::splitmix64(k ^ static_cast<std::uint64_t>(purpose));
        return RngStream(k);
    }

    std::uint64_t next_u64() { return detail::splitmix64(key_ ^ counter_++ * 0xd1342543de82ef95ULL); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; second value cached per stream.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        // avoid log(0)
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

    /// True with probability p.
    bool chance(double p) { return uniform01() < p; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace ehsim
