#include "ehsim/sensing.hpp"

#include "ehsim/quantities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace ehsim {

const char* species_name(GasSpecies s) {
    switch (s) {
        case GasSpecies::CO: return "CO";
        case GasSpecies::NO2: return "NO2";
        case GasSpecies::H2S: return "H2S";
        case GasSpecies::NH3: return "NH3";
        case GasSpecies::NO: return "NO";
        case GasSpecies::Cl2: return "Cl2";
    }
    return "?";
}

GasSpecies species_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        if (name == species_name(static_cast<GasSpecies>(i))) return static_cast<GasSpecies>(i);
    }
    throw ParseError("unknown gas species '" + name + "'");
}

// ---------------------------------------------------------------------------
// drift
// ---------------------------------------------------------------------------

namespace {
double hermite(double t0, double t1, double p0, double m0, double p1, double m1, double x) {
    const double h = t1 - t0;
    const double t = (x - t0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * p1 +
           (t3 - t2) * h * m1;
}
}  // namespace

double DriftCurve::operator()(double T) const {
    if (cold_slope_per_c == 0.0 && hot_slope_per_c == 0.0) return 1.0;
    const double d = blend_halfwidth_c;
    const double lo = 25.0 - d, hi = 25.0 + d;
    if (T <= lo) return 1.0 - cold_slope_per_c * (25.0 - T);
    if (T >= hi) return 1.0 - hot_slope_per_c * (T - 25.0);
    if (T == 25.0) return 1.0;  // exact at the reference point
    // C1 blend through (25, 1) with a stationary joint, so the curve never
    // exceeds 1.
    if (T < 25.0) return hermite(lo, 25.0, 1.0 - cold_slope_per_c * d, cold_slope_per_c, 1.0, 0.0, T);
    return hermite(25.0, hi, 1.0, 0.0, 1.0 - hot_slope_per_c * d, -hot_slope_per_c, T);
}

DriftCurve DriftCurve::none() { return DriftCurve{0.0, 0.0, 5.0}; }

// ---------------------------------------------------------------------------
// specs
// ---------------------------------------------------------------------------

SensorSpec SensorSpec::default_for(GasSpecies s) {
    SensorSpec spec;
    spec.species = s;
    switch (s) {
        case GasSpecies::CO:  spec.sensitivity_a_per_ppm = 70e-9;  spec.full_scale_ppm = 1000.0; spec.accuracy_fs = 0.03; break;
        case GasSpecies::NO2: spec.sensitivity_a_per_ppm = 600e-9; spec.full_scale_ppm = 20.0;   spec.accuracy_fs = 0.05; break;
        case GasSpecies::H2S: spec.sensitivity_a_per_ppm = 700e-9; spec.full_scale_ppm = 100.0;  spec.accuracy_fs = 0.05; break;
        case GasSpecies::NH3: spec.sensitivity_a_per_ppm = 40e-9;  spec.full_scale_ppm = 100.0;  spec.accuracy_fs = 0.10; break;
        case GasSpecies::NO:  spec.sensitivity_a_per_ppm = 400e-9; spec.full_scale_ppm = 250.0;  spec.accuracy_fs = 0.05; break;
        case GasSpecies::Cl2: spec.sensitivity_a_per_ppm = 600e-9; spec.full_scale_ppm = 20.0;   spec.accuracy_fs = 0.05; break;
    }
    return spec;
}

std::array<SensorSpec, kNumSpecies> SensorSpec::all_defaults() {
    std::array<SensorSpec, kNumSpecies> out;
    for (std::size_t i = 0; i < kNumSpecies; ++i) out[i] = default_for(static_cast<GasSpecies>(i));
    return out;
}

AnalogFrontEnd AnalogFrontEnd::for_spec(const SensorSpec& spec, double rail_v) {
    AnalogFrontEnd afe;
    afe.rail_v = rail_v;
    afe.transimpedance_ohms = rail_v / (spec.sensitivity_a_per_ppm * spec.full_scale_ppm);
    return afe;
}

// ---------------------------------------------------------------------------
// cross-sensitivity
// ---------------------------------------------------------------------------

CrossSensitivityMatrix::CrossSensitivityMatrix() {
    m.fill(0.0);
    for (std::size_t i = 0; i < kNumSpecies; ++i) at(i, i) = 1.0;
}

Vec6 CrossSensitivityMatrix::forward(const Vec6& true_ppm) const {
    Vec6 out{};
    for (std::size_t r = 0; r < kNumSpecies; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < kNumSpecies; ++c) acc += at(r, c) * true_ppm[c];
        out[r] = acc;
    }
    return out;
}

namespace {

// Gauss-Jordan inverse with partial pivoting; throws ConfigError if singular.
std::array<double, 36> invert6(const std::array<double, 36>& in) {
    constexpr std::size_t n = kNumSpecies;
    std::array<double, 36> a = in;
    std::array<double, 36> inv{};
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
        }
        if (std::fabs(a[pivot * n + col]) < 1e-12) {
            throw ConfigError("cross-sensitivity matrix is singular");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a[pivot * n + c], a[col * n + c]);
                std::swap(inv[pivot * n + c], inv[col * n + c]);
            }
        }
        const double d = a[col * n + col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r * n + c] -= f * a[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    return inv;
}

double norm1_6(const std::array<double, 36>& m) {
    double best = 0.0;
    for (std::size_t c = 0; c < kNumSpecies; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < kNumSpecies; ++r) s += std::fabs(m[r * kNumSpecies + c]);
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

double CrossSensitivityMatrix::condition_number() const {
    return norm1_6(m) * norm1_6(invert6(m));
}

Vec6 apply_cross_correction(const CrossSensitivityMatrix& matrix, const Vec6& readings) {
    const auto inv = invert6(matrix.m);
    Vec6 out{};
    for (std::size_t r = 0; r < kNumSpecies; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < kNumSpecies; ++c) acc += inv[r * kNumSpecies + c] * readings[c];
        out[r] = std::max(0.0, acc);
    }
    return out;
}

// ---------------------------------------------------------------------------
// forward / inverse chain
// ---------------------------------------------------------------------------

double sensor_current(const SensorSpec& spec, double ppm, double temperature_c) {
    require_nonnegative(ppm, "concentration");
    return spec.sensitivity_a_per_ppm * spec.drift(temperature_c) * ppm;
}

double sensor_current_noisy(const SensorSpec& spec, double ppm, double temperature_c,
                            RngStream& rng) {
    const double noise_a = spec.sensitivity_a_per_ppm * rng.gaussian(0.0, spec.noise_sigma_ppm());
    return std::max(0.0, sensor_current(spec, ppm, temperature_c) + noise_a);
}

double afe_voltage(const AnalogFrontEnd& afe, double current_a) {
    require_nonnegative(current_a, "current");
    return std::clamp(afe.transimpedance_ohms * current_a + afe.output_offset_v, 0.0, afe.rail_v);
}

int adc_sample(const AdcSpec& adc, double volts) {
    const double v = std::clamp(volts, 0.0, adc.reference_v);
    const int counts = static_cast<int>(std::floor(v / adc.reference_v * adc.levels()));
    return std::clamp(counts, 0, adc.max_count());
}

double counts_to_ppm(const SensorSpec& spec, const AnalogFrontEnd& afe, const AdcSpec& adc,
                     int counts, double temperature_c, const CompensationPoly& poly) {
    if (counts < 0 || counts > adc.max_count()) {
        throw std::invalid_argument("counts_to_ppm: counts " + std::to_string(counts) +
                                    " outside [0, " + std::to_string(adc.max_count()) + "]");
    }
    // bin midpoint keeps the quantization error inside half an LSB
    const double volts = (counts + 0.5) * adc.reference_v / adc.levels();
    const double current = (volts - afe.output_offset_v) / afe.transimpedance_ohms;
    const double raw_ppm = current / spec.sensitivity_a_per_ppm;
    const double compensated = raw_ppm * poly(temperature_c);
    return std::clamp(compensated, 0.0, spec.full_scale_ppm);
}

// ---------------------------------------------------------------------------
// compensation fit (Householder QR least squares)
// ---------------------------------------------------------------------------

CompensationFit fit_compensation(const SensorSpec& spec,
                                 const std::vector<CalibrationPoint>& grid) {
    std::set<double> temps;
    for (const auto& p : grid) temps.insert(p.temperature_c);
    if (temps.size() < 5) {
        throw InsufficientDataError("fit_compensation: need >= 5 distinct temperatures, got " +
                                    std::to_string(temps.size()));
    }

    const std::size_t rows = grid.size();
    constexpr std::size_t cols = 5;
    std::vector<double> a(rows * cols);
    std::vector<double> b(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!(grid[r].raw_ppm > 0.0)) {
            throw FitError("fit_compensation: raw_ppm must be > 0 at T=" +
                           std::to_string(grid[r].temperature_c));
        }
        const double x = grid[r].temperature_c - 25.0;
        double xk = 1.0;
        for (std::size_t c = 0; c < cols; ++c) {
            a[r * cols + c] = xk;
            xk *= x;
        }
        b[r] = grid[r].true_ppm / grid[r].raw_ppm;
    }

    // Householder QR on the Vandermonde system.
    for (std::size_t k = 0; k < cols; ++k) {
        double norm = 0.0;
        for (std::size_t r = k; r < rows; ++r) norm += a[r * cols + k] * a[r * cols + k];
        norm = std::sqrt(norm);
        if (norm < 1e-14) throw FitError("fit_compensation: singular design matrix");
        if (a[k * cols + k] > 0.0) norm = -norm;
        std::vector<double> v(rows, 0.0);
        for (std::size_t r = k; r < rows; ++r) v[r] = a[r * cols + k];
        v[k] -= norm;
        double vtv = 0.0;
        for (std::size_t r = k; r < rows; ++r) vtv += v[r] * v[r];
        if (vtv == 0.0) continue;
        for (std::size_t c = k; c < cols; ++c) {
            double dot = 0.0;
            for (std::size_t r = k; r < rows; ++r) dot += v[r] * a[r * cols + c];
            const double f = 2.0 * dot / vtv;
            for (std::size_t r = k; r < rows; ++r) a[r * cols + c] -= f * v[r];
        }
        double dotb = 0.0;
        for (std::size_t r = k; r < rows; ++r) dotb += v[r] * b[r];
        const double fb = 2.0 * dotb / vtv;
        for (std::size_t r = k; r < rows; ++r) b[r] -= fb * v[r];
    }

    CompensationFit fit;
    for (std::size_t k = cols; k-- > 0;) {
        double acc = b[k];
        for (std::size_t c = k + 1; c < cols; ++c) acc -= a[k * cols + c] * fit.poly.c[c];
        const double diag = a[k * cols + k];
        if (std::fabs(diag) < 1e-14) throw FitError("fit_compensation: singular triangular factor");
        fit.poly.c[k] = acc / diag;
    }

    for (const auto& p : grid) {
        const double compensated = p.raw_ppm * fit.poly(p.temperature_c);
        fit.max_residual_ppm = std::max(fit.max_residual_ppm, std::fabs(compensated - p.true_ppm));
    }
    (void)spec;
    return fit;
}

std::vector<CalibrationPoint> make_drift_calibration_grid(const SensorSpec& spec,
                                                          const AnalogFrontEnd& afe,
                                                          const AdcSpec& adc, double t_min_c,
                                                          double t_max_c, double t_step_c,
                                                          double ppm_ref) {
    std::vector<CalibrationPoint> grid;
    const CompensationPoly identity = CompensationPoly::identity();
    for (double T = t_min_c; T <= t_max_c + 1e-9; T += t_step_c) {
        const double current = sensor_current(spec, ppm_ref, T);
        const int counts = adc_sample(adc, afe_voltage(afe, current));
        const double raw = counts_to_ppm(spec, afe, adc, counts, T, identity);
        grid.push_back({T, ppm_ref, raw});
    }
    return grid;
}

// ---------------------------------------------------------------------------
// environment readout
// ---------------------------------------------------------------------------

EnvReading read_environment(const EnvSample& sample, const EnvNoise& noise, RngStream& rng) {
    EnvReading r{sample.ambient_c, sample.rh_pct};
    if (noise.enabled) {
        r.temperature_c += rng.gaussian(0.0, noise.sigma_t_c);
        r.rh_pct += rng.gaussian(0.0, noise.sigma_rh_pct);
    }
    r.rh_pct = std::clamp(r.rh_pct, 0.0, 100.0);
    return r;
}

// ---------------------------------------------------------------------------
// calibration grid CSV
// ---------------------------------------------------------------------------

std::map<GasSpecies, std::vector<CalibrationPoint>> read_calibration_grid(
    std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source_name + ": empty file");
    if (line.find("temperature_c") == std::string::npos) {
        throw ParseError(source_name + ": missing header (expected temperature_c,species,true_ppm,raw_ppm)");
    }
    std::map<GasSpecies, std::vector<CalibrationPoint>> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string t, sp, tr, rw;
        if (!std::getline(ss, t, ',') || !std::getline(ss, sp, ',') ||
            !std::getline(ss, tr, ',') || !std::getline(ss, rw)) {
            throw ParseError(source_name + ": expected 4 fields at row " + std::to_string(row));
        }
        if (!rw.empty() && rw.back() == '\r') rw.pop_back();
        try {
            CalibrationPoint p{std::stod(t), std::stod(tr), std::stod(rw)};
            out[species_from_name(sp)].push_back(p);
        } catch (const ParseError&) {
            throw ParseError(source_name + ": unknown species '" + sp + "' at row " +
                             std::to_string(row));
        } catch (const std::exception&) {
            throw ParseError(source_name + ": bad number at row " + std::to_string(row));
        }
    }
    return out;
}

std::map<GasSpecies, std::vector<CalibrationPoint>> read_calibration_grid_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open calibration grid: " + path);
    return read_calibration_grid(in, path);
}

void write_calibration_grid(const std::map<GasSpecies, std::vector<CalibrationPoint>>& grids,
                            std::ostream& out) {
    out << "temperature_c,species,true_ppm,raw_ppm\n";
    char buf[128];
    for (const auto& [species, points] : grids) {
        for (const auto& p : points) {
            std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g,%.17g\n", p.temperature_c,
                          species_name(species), p.true_ppm, p.raw_ppm);
            out << buf;
        }
    }
}

}  // namespace ehsim
