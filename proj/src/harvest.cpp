#include "ehsim/harvest.hpp"

#include <cmath>
#include <stdexcept>

namespace ehsim {

// ---------------------------------------------------------------------------
// PV
// ---------------------------------------------------------------------------

double PvPanelModel::raw_power(double lux) const {
    require_nonnegative(lux, "illuminance");
    const double slope = electric_power(calibration_point) / calibration_lux;  // W per lux
    return slope * lux;
}

double PvPanelModel::power(double lux) const { return conversion_efficiency * raw_power(lux); }

PvPanelModel PvPanelModel::indoor_default() {
    PvPanelModel m;
    m.mode = Mode::Indoor;
    m.calibration_lux = 200.0;
    m.calibration_point = {3.0, 18.5e-6};
    m.conversion_efficiency = 0.80;
    return m;
}

PvPanelModel PvPanelModel::outdoor_default() {
    PvPanelModel m;
    m.mode = Mode::Outdoor;
    m.calibration_lux = 50e3;
    m.calibration_point = {5.0, 4.5e-3};
    m.conversion_efficiency = 1.0;
    return m;
}

// ---------------------------------------------------------------------------
// TEG
// ---------------------------------------------------------------------------

void TegBankModel::validate() const {
    if (calibration_table.empty()) throw std::invalid_argument("TEG: empty calibration table");
    for (std::size_t i = 0; i < calibration_table.size(); ++i) {
        if (calibration_table[i].second < 0.0)
            throw std::invalid_argument("TEG: negative calibration power");
        if (i > 0) {
            if (!(calibration_table[i].first > calibration_table[i - 1].first))
                throw std::invalid_argument("TEG: table not strictly increasing in dT");
            if (calibration_table[i].second < calibration_table[i - 1].second)
                throw std::invalid_argument("TEG: table power not non-decreasing");
        }
    }
}

double TegBankModel::raw_power(double delta_t_c) const {
    const double dt = std::fabs(delta_t_c);  // auto-polarity converter
    if (dt < activation_threshold_c) return 0.0;
    const auto& tab = calibration_table;
    if (dt <= tab.front().first) {
        // ramp from the activation point up to the first table entry
        const double span = tab.front().first - activation_threshold_c;
        if (span <= 0.0) return tab.front().second;
        return tab.front().second * (dt - activation_threshold_c) / span;
    }
    for (std::size_t i = 1; i < tab.size(); ++i) {
        if (dt <= tab[i].first) {
            const double f = (dt - tab[i - 1].first) / (tab[i].first - tab[i - 1].first);
            return tab[i - 1].second + f * (tab[i].second - tab[i - 1].second);
        }
    }
    // extrapolate with the last segment's slope, never below zero
    double slope = 0.0;
    if (tab.size() >= 2) {
        const auto& a = tab[tab.size() - 2];
        const auto& b = tab.back();
        slope = (b.second - a.second) / (b.first - a.first);
    }
    return std::max(0.0, tab.back().second + slope * (dt - tab.back().first));
}

double TegBankModel::power(double delta_t_c) const {
    return conversion_efficiency * raw_power(delta_t_c);
}

TegBankModel TegBankModel::default_model() {
    TegBankModel m;
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// Piezo
// ---------------------------------------------------------------------------

double PiezoModel::amplitude_exponent() const {
    // log-log least squares through the calibration points; exact for two.
    const auto& cal = amplitude_calibration;
    if (cal.size() < 2) return 2.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [a, p] : cal) {
        const double x = std::log(a), y = std::log(p);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(cal.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double PiezoModel::peak_raw_power(double acceleration_g) const {
    require_nonnegative(acceleration_g, "acceleration");
    if (acceleration_g == 0.0 || amplitude_calibration.empty()) return 0.0;
    const auto& [a0, p0] = amplitude_calibration.front();
    return p0 * std::pow(acceleration_g / a0, amplitude_exponent());
}

double PiezoModel::raw_power(double frequency_hz, double acceleration_g) const {
    require_nonnegative(frequency_hz, "frequency");
    if (!enabled) return 0.0;
    if (frequency_hz == 0.0) return 0.0;
    const double detune = frequency_hz / resonant_hz - resonant_hz / frequency_hz;
    const double lorentzian = 1.0 / (1.0 + quality_factor * quality_factor * detune * detune);
    return peak_raw_power(acceleration_g) * lorentzian;
}

double PiezoModel::power(double frequency_hz, double acceleration_g) const {
    return conversion_efficiency * raw_power(frequency_hz, acceleration_g);
}

PiezoModel PiezoModel::default_model() { return PiezoModel{}; }

// ---------------------------------------------------------------------------
// RF
// ---------------------------------------------------------------------------

double RfHarvesterModel::received_power(double eirp_w, double distance_m) const {
    require_nonnegative(eirp_w, "EIRP");
    if (eirp_w == 0.0) return 0.0;
    if (!(distance_m > 0.0)) {
        throw std::invalid_argument("rf_power: distance must be > 0 (free-space model)");
    }
    const double k = wavelength_m() / (4.0 * M_PI * distance_m);
    return eirp_w * k * k;
}

double RfHarvesterModel::power(double eirp_w, double distance_m) const {
    const double rx = received_power(eirp_w, distance_m);
    if (rx < sensitivity_floor_w) return 0.0;
    return conversion_efficiency * rx;
}

RfHarvesterModel RfHarvesterModel::default_model() {
    RfHarvesterModel m;
    // Calibrated against the reference condition: 3 W EIRP at 5 m recovering
    // 1.8 J over a 24 h day.
    const double target_w = 1.8 / kSecondsPerDay;
    const double k = m.wavelength_m() / (4.0 * M_PI * 5.0);
    m.conversion_efficiency = target_w / (3.0 * k * k);
    return m;
}

// ---------------------------------------------------------------------------
// combined
// ---------------------------------------------------------------------------

HarvestBreakdown total_harvest_power(const HarvesterSet& set, const EnvSample& sample) {
    HarvestBreakdown bd;
    bd.pv_regime = sample.light_regime;
    const PvPanelModel& pv =
        sample.light_regime == LightRegime::Outdoor ? set.pv_outdoor : set.pv_indoor;
    bd.pv_w = pv.power(sample.lux);
    bd.teg_w = set.teg.power(sample.teg_dt_c);
    bd.piezo_w = set.piezo.power(sample.vib_hz, sample.vib_g);
    bd.rf_w = sample.rf_eirp_w > 0.0 ? set.rf.power(sample.rf_eirp_w, sample.rf_dist_m) : 0.0;
    bd.total_w = bd.pv_w + bd.teg_w + bd.piezo_w + bd.rf_w;
    return bd;
}

}  // namespace ehsim
