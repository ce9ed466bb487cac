#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ehsim/errors.hpp"
#include "ehsim/rng.hpp"
#include "ehsim/scenario.hpp"

namespace ehsim {

enum class GasSpecies : std::size_t { CO = 0, NO2 = 1, H2S = 2, NH3 = 3, NO = 4, Cl2 = 5 };

const char* species_name(GasSpecies s);
GasSpecies species_from_name(const std::string& name);

using Vec6 = std::array<double, kNumSpecies>;

/// Normalized sensitivity multiplier s(T), s(25) == 1 exactly. Piecewise
/// linear span drift away from 25 degC, joined by C1 cubic blends so the
/// curve is smooth through the reference point.
struct DriftCurve {
    double cold_slope_per_c = 0.003;   // s = 1 - cold_slope*(25-T) for T below the blend
    double hot_slope_per_c = 0.0008;   // s = 1 - hot_slope*(T-25) above it
    double blend_halfwidth_c = 5.0;

    double operator()(double temperature_c) const;

    static DriftCurve none();  // s == 1 everywhere
};

struct SensorSpec {
    GasSpecies species = GasSpecies::CO;
    double sensitivity_a_per_ppm = 70e-9;  // at 25 degC
    double full_scale_ppm = 1000.0;
    double accuracy_fs = 0.03;  // fraction of full scale
    DriftCurve drift{};

    /// Accuracy realized as Gaussian noise: 2 sigma spans the quoted band.
    double noise_sigma_ppm() const { return accuracy_fs * full_scale_ppm / 2.0; }

    static SensorSpec default_for(GasSpecies s);
    static std::array<SensorSpec, kNumSpecies> all_defaults();
};

/// Transimpedance stage. The default gain maps the channel's full-scale
/// current onto the ADC reference.
struct AnalogFrontEnd {
    double transimpedance_ohms = 47142.857142857141;
    double output_offset_v = 0.0;
    double rail_v = 3.3;

    static AnalogFrontEnd for_spec(const SensorSpec& spec, double rail_v = 3.3);
};

struct AdcSpec {
    int bits = 10;
    double reference_v = 3.3;

    int levels() const { return 1 << bits; }
    int max_count() const { return levels() - 1; }
};

/// Degree-4 multiplicative correction in (T - 25 degC).
struct CompensationPoly {
    std::array<double, 5> c{1.0, 0.0, 0.0, 0.0, 0.0};

    double operator()(double temperature_c) const {
        const double x = temperature_c - 25.0;
        return ((((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x) + c[0];
    }

    static CompensationPoly identity() { return CompensationPoly{}; }
};

struct CrossSensitivityMatrix {
    // row-major 6x6; reading = M * true_concentration
    std::array<double, kNumSpecies * kNumSpecies> m{};

    CrossSensitivityMatrix();  // identity
    double& at(std::size_t row, std::size_t col) { return m[row * kNumSpecies + col]; }
    double at(std::size_t row, std::size_t col) const { return m[row * kNumSpecies + col]; }

    Vec6 forward(const Vec6& true_ppm) const;
    /// 1-norm condition estimate via explicit inverse; throws ConfigError if singular.
    double condition_number() const;

    static CrossSensitivityMatrix identity() { return CrossSensitivityMatrix{}; }
};

// ---- forward chain ----

double sensor_current(const SensorSpec& spec, double ppm, double temperature_c);
double sensor_current_noisy(const SensorSpec& spec, double ppm, double temperature_c,
                            RngStream& rng);
double afe_voltage(const AnalogFrontEnd& afe, double current_a);
int adc_sample(const AdcSpec& adc, double volts);

// ---- inverse chain ----

/// counts -> volts (bin midpoint) -> current -> raw ppm, then multiplied by
/// the compensation polynomial at the measured temperature; clamped to
/// [0, full_scale]. Throws on counts outside [0, max_count].
double counts_to_ppm(const SensorSpec& spec, const AnalogFrontEnd& afe, const AdcSpec& adc,
                     int counts, double temperature_c, const CompensationPoly& poly);

// ---- calibration ----

struct CalibrationPoint {
    double temperature_c;
    double true_ppm;
    double raw_ppm;
};

struct CompensationFit {
    CompensationPoly poly;
    double max_residual_ppm = 0.0;  // max |raw*poly(T) - true| over the grid
};

/// Least-squares degree-4 fit of the multiplicative correction true/raw
/// against (T - 25). Requires at least 5 distinct temperatures.
CompensationFit fit_compensation(const SensorSpec& spec,
                                 const std::vector<CalibrationPoint>& grid);

/// Run the noise-free forward chain over a temperature ramp to produce the
/// grid a chamber calibration would yield.
std::vector<CalibrationPoint> make_drift_calibration_grid(const SensorSpec& spec,
                                                          const AnalogFrontEnd& afe,
                                                          const AdcSpec& adc, double t_min_c,
                                                          double t_max_c, double t_step_c,
                                                          double ppm_ref);

/// readings = M * true; returns M^-1 * readings, elementwise clamped at >= 0.
Vec6 apply_cross_correction(const CrossSensitivityMatrix& matrix, const Vec6& readings);

// ---- environment readout ----

struct EnvNoise {
    bool enabled = true;
    double sigma_t_c = 0.3;
    double sigma_rh_pct = 2.0;
};

struct EnvReading {
    double temperature_c;
    double rh_pct;  // clamped to [0, 100]
};

EnvReading read_environment(const EnvSample& sample, const EnvNoise& noise, RngStream& rng);

// ---- calibration grid CSV (columns: temperature_c, species, true_ppm, raw_ppm) ----

std::map<GasSpecies, std::vector<CalibrationPoint>> read_calibration_grid(
    std::istream& in, const std::string& source_name = "grid");
std::map<GasSpecies, std::vector<CalibrationPoint>> read_calibration_grid_file(
    const std::string& path);
void write_calibration_grid(const std::map<GasSpecies, std::vector<CalibrationPoint>>& grids,
                            std::ostream& out);

}  // namespace ehsim
