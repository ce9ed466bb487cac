#pragma once

#include <optional>

#include "ehsim/quantities.hpp"

namespace ehsim {

/// Thin-film cell as a flat-voltage energy bucket. Default capacity is the
/// 1 mAh cell charged at 4.1 V: 0.001 A * 3600 s * 4.1 V = 14.76 J.
struct BatteryModel {
    double capacity_j = 14.76;
    double brown_out_threshold_j = 0.0;
    double cold_start_threshold_j = 0.0;  // see default_battery_model() in node.hpp
    double charge_efficiency = 1.0;

    void validate() const;  // 0 <= brown_out <= cold_start <= capacity
};

struct BatteryState {
    double soc_j = 0.0;
};

enum class BatteryEventKind { BrownOut, ColdStartReached, FullClamp };

struct BatteryEvent {
    BatteryEventKind kind;
    double timestamp_s;
};

/// Result of integrating constant harvest/load over (part of) an interval.
/// The audit identity holds exactly by construction:
///   state.soc - soc_before == harvested_j - consumed_j - clamped_j
struct StorageStep {
    BatteryState state;
    double elapsed_s = 0.0;     // < dt only when a brown-out ended the step early
    double harvested_j = 0.0;   // charge_efficiency * harvest * elapsed
    double consumed_j = 0.0;    // load energy actually drawn
    double clamped_j = 0.0;     // harvest refused at full charge
    bool hit_brown_out = false;
    bool entered_full_clamp = false;  // soc reached capacity during this step
};

/// Advance the state of charge under constant powers for up to dt seconds.
/// Stops early, at the analytically interpolated crossing instant, if the
/// load would push soc below the brown-out threshold. t0 is only used to
/// stamp the crossing time into StorageStep consumers.
StorageStep apply_net_power(BatteryState state, const BatteryModel& model, double harvest_w,
                            double load_w, double dt_s);

bool can_cold_start(const BatteryState& state, const BatteryModel& model);

/// Time until soc reaches `target_j` under constant powers, or nullopt if it
/// never will (net flow away from the target).
std::optional<double> time_to_reach(const BatteryState& state, const BatteryModel& model,
                                    double harvest_w, double load_w, double target_j);

}  // namespace ehsim
