#include "ehsim/budget.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace ehsim {

namespace {

std::string fmt_point(const ElectricOperatingPoint& p) {
    char buf[64];
    if (p.amps >= 1e-3) {
        std::snprintf(buf, sizeof(buf), "%g mA @ %g V", p.amps * 1e3, p.volts);
    } else {
        std::snprintf(buf, sizeof(buf), "%g uA @ %g V", p.amps * 1e6, p.volts);
    }
    return buf;
}

double sum_lines(const std::vector<LedgerLine>& lines) {
    return std::accumulate(lines.begin(), lines.end(), 0.0,
                           [](double acc, const LedgerLine& l) { return acc + l.joules_per_day; });
}

}  // namespace

EnergyLedger consumption_ledger(const DutyCycleConfig& config) {
    config.validate();
    EnergyLedger ledger;
    const double cycles = config.cycles_per_day();

    const double warmup_s = config.warmup_s * cycles;
    const double transmit_s = config.transmit_s * cycles;
    // The reference budget counts sleep as (period - warmup), so the transmit
    // seconds are double-counted against sleep; reproduced on purpose.
    const double sleep_s = (config.period_s - config.warmup_s) * cycles;

    char detail[96];
    std::snprintf(detail, sizeof(detail), "%g s every %g min (%s)", config.warmup_s,
                  config.period_s / 60.0, fmt_point(config.warmup_point).c_str());
    ledger.consumption.push_back(
        {"Sensor warm-up", detail, electric_power(config.warmup_point) * warmup_s});

    std::snprintf(detail, sizeof(detail), "%g s every %g min (%s)", config.transmit_s,
                  config.period_s / 60.0, fmt_point(config.transmit_point).c_str());
    ledger.consumption.push_back({"Data transmission and processing", detail,
                                  electric_power(config.transmit_point) * transmit_s});

    std::snprintf(detail, sizeof(detail), "%g min every %g min (%s)",
                  (config.period_s - config.warmup_s) / 60.0, config.period_s / 60.0,
                  fmt_point(config.sleep_point).c_str());
    ledger.consumption.push_back(
        {"Sleep mode", detail, electric_power(config.sleep_point) * sleep_s});

    ledger.total_consumed_j = sum_lines(ledger.consumption);
    return ledger;
}

std::vector<LedgerLine> recovery_lines(const HarvesterSet& set, const RecoveryConditions& cond) {
    std::vector<LedgerLine> lines;
    char detail[96];

    std::snprintf(detail, sizeof(detail), "%g h @ %g lux", cond.indoor_hours, cond.indoor_lux);
    lines.push_back({"Indoor artificial light", detail,
                     set.pv_indoor.power(cond.indoor_lux) * cond.indoor_hours * 3600.0});

    std::snprintf(detail, sizeof(detail), "%g min @ %g klux", cond.outdoor_hours * 60.0,
                  cond.outdoor_lux / 1e3);
    lines.push_back({"Outdoor light", detail,
                     set.pv_outdoor.power(cond.outdoor_lux) * cond.outdoor_hours * 3600.0});

    std::snprintf(detail, sizeof(detail), "%g h @ %g degC gradient", cond.teg_hours, cond.teg_dt_c);
    lines.push_back(
        {"Thermal gradient", detail, set.teg.power(cond.teg_dt_c) * cond.teg_hours * 3600.0});

    std::snprintf(detail, sizeof(detail), "%g W EIRP at %g m, %g h", cond.rf_eirp_w,
                  cond.rf_distance_m, cond.rf_hours);
    lines.push_back({"RF field", detail,
                     set.rf.power(cond.rf_eirp_w, cond.rf_distance_m) * cond.rf_hours * 3600.0});
    return lines;
}

EnergyLedger full_ledger(const DutyCycleConfig& config, const HarvesterSet& set,
                         const RecoveryConditions& cond) {
    EnergyLedger ledger = consumption_ledger(config);
    ledger.recovery = recovery_lines(set, cond);
    ledger.total_recovered_j = sum_lines(ledger.recovery);
    return ledger;
}

double margin(const EnergyLedger& ledger) { return ledger.margin_j(); }

std::string render_ledger_text(const EnergyLedger& ledger) {
    std::ostringstream out;
    char buf[160];
    auto row = [&](const LedgerLine& l) {
        std::snprintf(buf, sizeof(buf), "  %-34s %-34s %10.3f\n", l.label.c_str(),
                      l.detail.c_str(), l.joules_per_day);
        out << buf;
    };
    out << "Daily energy budget\n";
    out << "Consumption                                                        J/day\n";
    for (const auto& l : ledger.consumption) row(l);
    std::snprintf(buf, sizeof(buf), "  %-69s %10.3f\n", "Total consumed", ledger.total_consumed_j);
    out << buf;
    if (!ledger.recovery.empty()) {
        out << "Recovery\n";
        for (const auto& l : ledger.recovery) row(l);
        std::snprintf(buf, sizeof(buf), "  %-69s %10.3f\n", "Total recovered",
                      ledger.total_recovered_j);
        out << buf;
        std::snprintf(buf, sizeof(buf), "  %-69s %+10.3f\n", "Margin", ledger.margin_j());
        out << buf;
    }
    return out.str();
}

std::string render_ledger_json(const EnergyLedger& ledger) {
    nlohmann::json j;
    auto lines = [](const std::vector<LedgerLine>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& l : v) {
            arr.push_back({{"label", l.label}, {"detail", l.detail}, {"j_per_day", l.joules_per_day}});
        }
        return arr;
    };
    j["consumption"] = lines(ledger.consumption);
    j["recovery"] = lines(ledger.recovery);
    j["total_consumed_j_per_day"] = ledger.total_consumed_j;
    j["total_recovered_j_per_day"] = ledger.total_recovered_j;
    j["margin_j_per_day"] = ledger.margin_j();
    return j.dump(2);
}

}  // namespace ehsim
