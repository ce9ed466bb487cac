#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ehsim/errors.hpp"

namespace ehsim {

enum class LightRegime { Indoor, Outdoor };

const char* light_regime_name(LightRegime r);
LightRegime light_regime_from_name(const std::string& s);

inline constexpr std::size_t kNumSpecies = 6;

/// One time-stamped set of environmental drivers. Traces hold these with
/// sample-and-hold semantics: a sample's values apply until the next one.
struct EnvSample {
    double timestamp_s = 0.0;
    double lux = 0.0;
    LightRegime light_regime = LightRegime::Indoor;
    double ambient_c = 25.0;
    double rh_pct = 50.0;
    double teg_dt_c = 0.0;       // |hot - cold| across the TEG bank
    double vib_hz = 0.0;
    double vib_g = 0.0;          // peak acceleration in g-units
    double rf_eirp_w = 0.0;
    double rf_dist_m = 5.0;
    std::array<double, kNumSpecies> gas_ppm{};  // CO, NO2, H2S, NH3, NO, Cl2

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct EnvTrace {
    std::vector<EnvSample> samples;
    double duration_s = 0.0;  // period used when the engine tiles the trace

    /// Sample in effect at time t (step interpolation). t must be within
    /// [first timestamp, duration).
    const EnvSample& at(double t) const;

    void validate() const;  // invariants: non-empty, strictly increasing timestamps
};

inline constexpr const char* kTraceCsvHeader =
    "timestamp_s,lux,light_regime,ambient_c,rh_pct,teg_dt_c,vib_hz,vib_g,"
    "rf_eirp_w,rf_dist_m,co_ppm,no2_ppm,h2s_ppm,nh3_ppm,no_ppm,cl2_ppm";

/// Parse a trace CSV. Errors name the row and column they were found in.
EnvTrace parse_trace(std::istream& in, const std::string& source_name = "trace");
EnvTrace parse_trace_file(const std::string& path);

void write_trace(const EnvTrace& trace, std::ostream& out);
void write_trace_file(const EnvTrace& trace, const std::string& path);

/// 24 h desk-reproduction day. Per-day condition totals: 8 h of 200 lux
/// indoor light, 15 min of 50 klux outdoor light, 10 h of 6 degC TEG
/// gradient, continuous 3 W EIRP RF at 5 m, no vibration, benign constant
/// gas background. The condition windows are interleaved at minute
/// granularity across every 15-minute cycle so that the harvest stays close
/// to the node's average load; the daily totals are exact. Noise-free: seed
/// is accepted for signature uniformity and unused.
EnvTrace generate_office_window_day(std::uint64_t seed);

/// 24 h urban traffic day: CO is a log-normal-modulated diurnal profile
/// normalized so max = 30 ppm and mean = 10 ppm for any seed; ambient peaks
/// near 40 degC; RH exceeds 90 % at night; harvest comes from daylight only.
EnvTrace generate_doha_traffic(std::uint64_t seed);

/// 24 h of nothing to harvest: zero lux, zero gradient, zero RF, zero
/// vibration, cold ambient.
EnvTrace generate_dark_cold(std::uint64_t seed);

/// Names accepted: "office-window-day", "doha-traffic", "dark-cold".
EnvTrace make_scenario_trace(const std::string& name, std::uint64_t seed);
std::vector<std::string> scenario_names();

}  // namespace ehsim
