#include "ehsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ehsim/errors.hpp"
#include "ehsim/quantities.hpp"
#include "ehsim/rng.hpp"

namespace ehsim {

const char* light_regime_name(LightRegime r) {
    return r == LightRegime::Indoor ? "indoor" : "outdoor";
}

LightRegime light_regime_from_name(const std::string& s) {
    if (s == "indoor") return LightRegime::Indoor;
    if (s == "outdoor") return LightRegime::Outdoor;
    throw ParseError("unknown light_regime '" + s + "' (expected indoor or outdoor)");
}

void EnvSample::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("EnvSample: invalid ") + what);
    };
    check(std::isfinite(timestamp_s), "timestamp_s");
    check(lux >= 0.0, "lux");
    check(rh_pct >= 0.0 && rh_pct <= 100.0, "rh_pct");
    check(std::isfinite(teg_dt_c), "teg_dt_c");
    check(vib_hz >= 0.0, "vib_hz");
    check(vib_g >= 0.0, "vib_g");
    check(rf_eirp_w >= 0.0, "rf_eirp_w");
    check(rf_eirp_w == 0.0 || rf_dist_m > 0.0, "rf_dist_m (must be > 0 when rf_eirp_w > 0)");
    for (double g : gas_ppm) check(g >= 0.0, "gas_ppm");
}

const EnvSample& EnvTrace::at(double t) const {
    // last sample with timestamp <= t
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const EnvSample& s) { return v < s.timestamp_s; });
    if (it == samples.begin()) return samples.front();
    return *(it - 1);
}

void EnvTrace::validate() const {
    if (samples.empty()) throw std::invalid_argument("EnvTrace: empty trace");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].validate();
        if (i > 0 && !(samples[i].timestamp_s > samples[i - 1].timestamp_s)) {
            throw std::invalid_argument("EnvTrace: non-monotone timestamp at index " +
                                        std::to_string(i));
        }
    }
    if (!(duration_s > samples.back().timestamp_s)) {
        throw std::invalid_argument("EnvTrace: duration does not cover the last sample");
    }
}

namespace {

const std::array<std::string, 16> kColumns = {
    "timestamp_s", "lux",       "light_regime", "ambient_c", "rh_pct",  "teg_dt_c",
    "vib_hz",      "vib_g",     "rf_eirp_w",    "rf_dist_m", "co_ppm",  "no2_ppm",
    "h2s_ppm",     "nh3_ppm",   "no_ppm",       "cl2_ppm"};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& text, const std::string& src, std::size_t row,
                    const std::string& column) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(src + ": bad number '" + text + "' in column " + column + " at row " +
                         std::to_string(row));
    }
}

}  // namespace

EnvTrace parse_trace(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source_name + ": empty file");
    {
        auto header = split_csv_line(line);
        if (header.size() != kColumns.size()) {
            throw ParseError(source_name + ": expected " + std::to_string(kColumns.size()) +
                             " columns, got " + std::to_string(header.size()));
        }
        for (std::size_t i = 0; i < kColumns.size(); ++i) {
            if (header[i] != kColumns[i]) {
                throw ParseError(source_name + ": missing column " + kColumns[i] +
                                 " (found '" + header[i] + "')");
            }
        }
    }

    EnvTrace trace;
    std::size_t row = 1;  // header is row 1
    double prev_ts = 0.0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != kColumns.size()) {
            throw ParseError(source_name + ": expected " + std::to_string(kColumns.size()) +
                             " fields at row " + std::to_string(row) + ", got " +
                             std::to_string(fields.size()));
        }
        EnvSample s;
        std::size_t f = 0;
        auto num = [&](const char* col) { return parse_number(fields[f++], source_name, row, col); };
        s.timestamp_s = num("timestamp_s");
        s.lux = num("lux");
        try {
            s.light_regime = light_regime_from_name(fields[f++]);
        } catch (const ParseError& e) {
            throw ParseError(source_name + ": " + e.what() + " in column light_regime at row " +
                             std::to_string(row));
        }
        s.ambient_c = num("ambient_c");
        s.rh_pct = num("rh_pct");
        s.teg_dt_c = num("teg_dt_c");
        s.vib_hz = num("vib_hz");
        s.vib_g = num("vib_g");
        s.rf_eirp_w = num("rf_eirp_w");
        s.rf_dist_m = num("rf_dist_m");
        for (std::size_t g = 0; g < kNumSpecies; ++g) s.gas_ppm[g] = num(kColumns[10 + g].c_str());

        if (!trace.samples.empty() && !(s.timestamp_s > prev_ts)) {
            throw ParseError(source_name + ": non-monotone timestamp at row " +
                             std::to_string(row));
        }
        try {
            s.validate();
        } catch (const std::invalid_argument& e) {
            throw ParseError(source_name + ": " + e.what() + " at row " + std::to_string(row));
        }
        prev_ts = s.timestamp_s;
        trace.samples.push_back(s);
    }
    if (trace.samples.empty()) throw ParseError(source_name + ": no data rows");

    // Extend sample-and-hold past the last sample by the final step size.
    double last_step = 60.0;
    if (trace.samples.size() >= 2) {
        const auto& v = trace.samples;
        last_step = v[v.size() - 1].timestamp_s - v[v.size() - 2].timestamp_s;
    }
    trace.duration_s = trace.samples.back().timestamp_s + last_step;
    trace.validate();
    return trace;
}

EnvTrace parse_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file: " + path);
    return parse_trace(in, path);
}

namespace {
std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void write_trace(const EnvTrace& trace, std::ostream& out) {
    out << kTraceCsvHeader << '\n';
    for (const auto& s : trace.samples) {
        out << fmt_full(s.timestamp_s) << ',' << fmt_full(s.lux) << ','
            << light_regime_name(s.light_regime) << ',' << fmt_full(s.ambient_c) << ','
            << fmt_full(s.rh_pct) << ',' << fmt_full(s.teg_dt_c) << ',' << fmt_full(s.vib_hz)
            << ',' << fmt_full(s.vib_g) << ',' << fmt_full(s.rf_eirp_w) << ','
            << fmt_full(s.rf_dist_m);
        for (double g : s.gas_ppm) out << ',' << fmt_full(g);
        out << '\n';
    }
}

void write_trace_file(const EnvTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace file: " + path);
    write_trace(trace, out);
    if (!out.good()) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

namespace {

// Cycles (of the 96 daily 15-minute cycles) whose minute 7 carries the
// direct-sun burst; 15 bursts of one minute = the 15-minute outdoor total.
// Spacing keeps the charge sawtooth shallow from the very first cycle.
constexpr std::array<int, 15> kSunBurstCycles = {0,  3,  8,  14, 20, 26, 32, 39,
                                                 45, 52, 58, 65, 71, 78, 85};

bool sun_burst_cycle(int cycle) {
    return std::find(kSunBurstCycles.begin(), kSunBurstCycles.end(), cycle) !=
           kSunBurstCycles.end();
}

}  // namespace

EnvTrace generate_office_window_day(std::uint64_t /*seed*/) {
    EnvTrace trace;
    trace.samples.reserve(1440);
    for (int m = 0; m < 1440; ++m) {
        const int cycle = m / 15;
        const int slot = m % 15;
        EnvSample s;
        s.timestamp_s = 60.0 * m;
        // TEG: 6 minutes per cycle plus one extra every 4th cycle -> 600 min/day
        s.teg_dt_c = (slot < 6 || (slot == 6 && cycle % 4 == 0)) ? 6.0 : 0.0;
        if (slot == 7 && sun_burst_cycle(cycle)) {
            s.light_regime = LightRegime::Outdoor;
            s.lux = 50e3;
        } else if (slot >= 8 && slot <= 12) {
            // indoor backlight: 5 minutes per cycle -> 480 min/day
            s.light_regime = LightRegime::Indoor;
            s.lux = 200.0;
        } else {
            s.light_regime = LightRegime::Indoor;
            s.lux = 0.0;
        }
        s.rf_eirp_w = 3.0;
        s.rf_dist_m = 5.0;
        s.ambient_c = 25.0;
        s.rh_pct = 45.0;
        s.gas_ppm = {0.4, 0.01, 0.02, 0.05, 0.02, 0.005};  // benign background
        trace.samples.push_back(s);
    }
    trace.duration_s = kSecondsPerDay;
    trace.validate();
    return trace;
}

EnvTrace generate_doha_traffic(std::uint64_t seed) {
    RngStream rng = RngStream::derive(seed, 0, RngPurpose::Scenario);

    // Log-normal-modulated diurnal CO shape, then normalized: peak scaled to
    // 30 ppm and a power transform solved so the mean lands on 10 ppm.
    std::array<double, 1440> shape{};
    double g = 0.0;
    for (int m = 0; m < 1440; ++m) {
        const double h = m / 60.0;
        const double base = 0.10 + std::exp(-std::pow((h - 8.5) / 1.9, 2)) +
                            0.55 * std::exp(-std::pow((h - 13.0) / 2.6, 2)) +
                            0.90 * std::exp(-std::pow((h - 17.5) / 2.1, 2));
        g = 0.92 * g + 0.08 * rng.gaussian();
        shape[m] = base * std::exp(1.1 * g);
    }
    const double peak = *std::max_element(shape.begin(), shape.end());
    for (double& v : shape) v /= peak;  // (0, 1], max exactly 1

    double lo = 0.05, hi = 8.0;
    for (int it = 0; it < 80; ++it) {
        const double gamma = 0.5 * (lo + hi);
        double mean = 0.0;
        for (double v : shape) mean += std::pow(v, gamma);
        mean = mean / shape.size() * 30.0;
        (mean > 10.0 ? lo : hi) = gamma;
    }
    const double gamma = 0.5 * (lo + hi);

    EnvTrace trace;
    trace.samples.reserve(1440);
    for (int m = 0; m < 1440; ++m) {
        const double h = m / 60.0;
        EnvSample s;
        s.timestamp_s = 60.0 * m;
        const double co = 30.0 * std::pow(shape[m], gamma);
        s.gas_ppm[0] = co;
        s.gas_ppm[1] = std::min(20.0, 0.6 + 0.02 * co);   // NO2 tracks traffic loosely
        s.gas_ppm[2] = 0.05;                              // H2S
        s.gas_ppm[3] = 0.4;                               // NH3
        s.gas_ppm[4] = std::min(250.0, 0.05 * co);        // NO
        s.gas_ppm[5] = 0.01;                              // Cl2

        const double hot = std::exp(-std::pow((h - 14.0) / 4.5, 2));
        s.ambient_c = 33.0 + 7.0 * hot + 0.15 * rng.gaussian();
        s.rh_pct = std::clamp(93.0 - 30.0 * hot + 1.0 * rng.gaussian(), 0.0, 100.0);

        const double sun = (h > 6.0 && h < 18.0) ? std::pow(std::sin(M_PI * (h - 6.0) / 12.0), 1.35)
                                                 : 0.0;
        s.lux = 60e3 * sun;
        s.light_regime = s.lux > 0.0 ? LightRegime::Outdoor : LightRegime::Indoor;

        s.teg_dt_c = 2.0;  // dashboard gradient, below the TEG threshold
        const bool driving = h >= 7.0 && h <= 20.0;
        s.vib_hz = driving ? 30.0 : 0.0;
        s.vib_g = driving ? 0.15 : 0.0;
        s.rf_eirp_w = 0.0;
        s.rf_dist_m = 5.0;
        trace.samples.push_back(s);
    }
    trace.duration_s = kSecondsPerDay;
    trace.validate();
    return trace;
}

EnvTrace generate_dark_cold(std::uint64_t /*seed*/) {
    EnvTrace trace;
    trace.samples.reserve(1440);
    for (int m = 0; m < 1440; ++m) {
        EnvSample s;
        s.timestamp_s = 60.0 * m;
        s.lux = 0.0;
        s.light_regime = LightRegime::Indoor;
        s.ambient_c = -5.0;
        s.rh_pct = 30.0;
        s.teg_dt_c = 0.0;
        s.rf_eirp_w = 0.0;
        s.rf_dist_m = 5.0;
        trace.samples.push_back(s);
    }
    trace.duration_s = kSecondsPerDay;
    trace.validate();
    return trace;
}

EnvTrace make_scenario_trace(const std::string& name, std::uint64_t seed) {
    if (name == "office-window-day") return generate_office_window_day(seed);
    if (name == "doha-traffic") return generate_doha_traffic(seed);
    if (name == "dark-cold") return generate_dark_cold(seed);
    throw ConfigError("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() {
    return {"office-window-day", "doha-traffic", "dark-cold"};
}

}  // namespace ehsim
