#pragma once

#include <string>
#include <vector>

#include "ehsim/harvest.hpp"
#include "ehsim/node.hpp"

namespace ehsim {

struct LedgerLine {
    std::string label;
    std::string detail;  // operating point / condition description
    double joules_per_day = 0.0;
};

struct EnergyLedger {
    std::vector<LedgerLine> consumption;
    std::vector<LedgerLine> recovery;
    double total_consumed_j = 0.0;
    double total_recovered_j = 0.0;

    double margin_j() const { return total_recovered_j - total_consumed_j; }
};

/// Reference window-deployment schedule behind the recovery lines.
struct RecoveryConditions {
    double indoor_lux = 200.0;
    double indoor_hours = 8.0;
    double outdoor_lux = 50e3;
    double outdoor_hours = 0.25;
    double teg_dt_c = 6.0;
    double teg_hours = 10.0;
    double rf_eirp_w = 3.0;
    double rf_distance_m = 5.0;
    double rf_hours = 24.0;
};

/// Closed-form daily consumption. Deliberately uses the reference ledger's
/// own duty readings — sleep is counted as (period - warmup), overlapping the
/// transmit window — so the printed numbers reproduce the published budget
/// verbatim. The time-stepped simulator tiles phases exactly instead; the
/// two differ by about 0.5 % of the sleep line.
EnergyLedger consumption_ledger(const DutyCycleConfig& config);

/// Adds the recovery lines for the given harvester set and conditions.
EnergyLedger full_ledger(const DutyCycleConfig& config, const HarvesterSet& set,
                         const RecoveryConditions& cond = RecoveryConditions{});

std::vector<LedgerLine> recovery_lines(const HarvesterSet& set,
                                       const RecoveryConditions& cond = RecoveryConditions{});

double margin(const EnergyLedger& ledger);

std::string render_ledger_text(const EnergyLedger& ledger);
std::string render_ledger_json(const EnergyLedger& ledger);

}  // namespace ehsim
