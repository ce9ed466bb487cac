#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ehsim {

// All internal arithmetic is in base SI units: J, W, A, V, s, Hz, m.
// Prefixed values are converted once, at the boundary where they enter.
namespace si {

inline constexpr double nano = 1e-9;
inline constexpr double micro = 1e-6;
inline constexpr double milli = 1e-3;
inline constexpr double kilo = 1e3;

/// (value, scale) -> base units, e.g. to_base(115.0, micro) for 115 uA.
inline constexpr double to_base(double value, double scale) { return value * scale; }

/// Read a base-unit quantity back in a prefixed unit.
inline constexpr double from_base(double base_value, double scale) { return base_value / scale; }

}  // namespace si

inline constexpr double kStandardGravity = 9.80665;   // m/s^2 per g-unit
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kSecondsPerDay = 86400.0;

/// A (voltage, current) pair describing a load or source operating point.
struct ElectricOperatingPoint {
    double volts = 0.0;
    double amps = 0.0;
};

inline double electric_power(const ElectricOperatingPoint& p) {
    return p.volts * p.amps;
}

/// power [W] * duration [s] -> energy [J]; duration must be non-negative.
inline double energy_of(double power_w, double duration_s) {
    if (!(duration_s >= 0.0)) {
        throw std::invalid_argument("energy_of: negative duration " + std::to_string(duration_s));
    }
    return power_w * duration_s;
}

inline void require_nonnegative(double v, const char* what) {
    if (!(v >= 0.0)) {
        throw std::invalid_argument(std::string(what) + " must be non-negative, got " +
                                    std::to_string(v));
    }
}

inline void require_fraction(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0,1], got " +
                                    std::to_string(v));
    }
}

}  // namespace ehsim
