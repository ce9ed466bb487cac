#pragma once

#include <utility>
#include <vector>

#include "ehsim/quantities.hpp"
#include "ehsim/scenario.hpp"

namespace ehsim {

/// Amorphous-silicon panel, linear in illuminance through one calibrated
/// (lux, V, I) point. Output is cell-side: conversion losses are folded into
/// conversion_efficiency.
struct PvPanelModel {
    enum class Mode { Indoor, Outdoor };

    Mode mode = Mode::Indoor;
    double calibration_lux = 200.0;
    ElectricOperatingPoint calibration_point{3.0, 18.5e-6};
    double conversion_efficiency = 0.80;

    double raw_power(double lux) const;  // panel-side, before conversion loss
    double power(double lux) const;      // cell-side

    static PvPanelModel indoor_default();
    static PvPanelModel outdoor_default();
};

/// TEG bank modelled as a monotone piecewise-linear calibration table of
/// (gradient degC, raw watts) pairs. Zero below the activation threshold,
/// last-segment linear extrapolation above the table. Negative gradients are
/// folded to |dT| (auto-polarity step-up converter).
struct TegBankModel {
    std::vector<std::pair<double, double>> calibration_table{{6.0, 0.5e-3}, {15.0, 0.562e-3}};
    double activation_threshold_c = 6.0;
    double conversion_efficiency = 0.90;

    double raw_power(double delta_t_c) const;
    double power(double delta_t_c) const;

    void validate() const;
    static TegBankModel default_model();
};

/// Resonant piezo harvester. Peak power vs acceleration is a power law
/// fitted through the calibration points (log-log least squares); the
/// frequency response is a Lorentzian resonance of quality factor Q.
struct PiezoModel {
    double resonant_hz = 36.5;
    double seismic_mass_g = 2.27;
    double quality_factor = 50.0;
    std::vector<std::pair<double, double>> amplitude_calibration{{0.3, 0.319e-3},
                                                                 {0.5, 0.678e-3}};
    double conversion_efficiency = 1.0;
    bool enabled = false;  // canonical scenarios leave the piezo out

    double amplitude_exponent() const;     // fitted power-law exponent
    double peak_raw_power(double acceleration_g) const;  // at resonance
    double raw_power(double frequency_hz, double acceleration_g) const;
    double power(double frequency_hz, double acceleration_g) const;

    static PiezoModel default_model();
};

/// Far-field RF harvester: free-space path loss from EIRP at the carrier
/// wavelength, then a conversion efficiency, with a turn-on floor on the
/// received power.
struct RfHarvesterModel {
    double carrier_hz = 915e6;
    double conversion_efficiency = 1.0;
    double sensitivity_floor_w = 1e-6;

    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
    double received_power(double eirp_w, double distance_m) const;
    double power(double eirp_w, double distance_m) const;  // cell-side

    /// Efficiency calibrated so a 3 W source at 5 m delivers 1.8 J per day.
    static RfHarvesterModel default_model();
};

struct HarvesterSet {
    PvPanelModel pv_indoor = PvPanelModel::indoor_default();
    PvPanelModel pv_outdoor = PvPanelModel::outdoor_default();
    TegBankModel teg = TegBankModel::default_model();
    PiezoModel piezo = PiezoModel::default_model();
    RfHarvesterModel rf = RfHarvesterModel::default_model();

    static HarvesterSet defaults() { return HarvesterSet{}; }
};

/// Per-source cell-side power for one environment sample. total_w is the
/// exact sum of the parts.
struct HarvestBreakdown {
    double pv_w = 0.0;     // whichever PV mode the sample's light regime selects
    double teg_w = 0.0;
    double piezo_w = 0.0;
    double rf_w = 0.0;
    double total_w = 0.0;
    LightRegime pv_regime = LightRegime::Indoor;
};

HarvestBreakdown total_harvest_power(const HarvesterSet& set, const EnvSample& sample);

}  // namespace ehsim
