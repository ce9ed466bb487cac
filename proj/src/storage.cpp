#include "ehsim/storage.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ehsim {

void BatteryModel::validate() const {
    if (!(capacity_j > 0.0)) throw std::invalid_argument("battery: capacity must be > 0");
    if (!(brown_out_threshold_j >= 0.0 && brown_out_threshold_j <= cold_start_threshold_j &&
          cold_start_threshold_j <= capacity_j)) {
        throw std::invalid_argument(
            "battery: need 0 <= brown_out_threshold <= cold_start_threshold <= capacity");
    }
    require_fraction(charge_efficiency, "battery charge_efficiency");
}

StorageStep apply_net_power(BatteryState state, const BatteryModel& model, double harvest_w,
                            double load_w, double dt_s) {
    if (!(dt_s > 0.0)) {
        throw std::invalid_argument("apply_net_power: dt must be > 0, got " +
                                    std::to_string(dt_s));
    }
    require_nonnegative(harvest_w, "harvest power");
    require_nonnegative(load_w, "load power");

    const double charge_w = model.charge_efficiency * harvest_w;
    const double net_w = charge_w - load_w;
    const double soc0 = state.soc_j;

    StorageStep step;

    // Draining toward the brown-out threshold: stop at the analytic crossing.
    if (net_w < 0.0 && load_w > 0.0) {
        const double headroom = soc0 - model.brown_out_threshold_j;
        const double t_cross = headroom / -net_w;
        if (t_cross < dt_s) {
            step.elapsed_s = std::max(t_cross, 0.0);
            step.harvested_j = charge_w * step.elapsed_s;
            step.state.soc_j = model.brown_out_threshold_j;
            // Balance-exact form: consumed absorbs the rounding so the audit
            // identity holds to the last bit.
            step.consumed_j = soc0 + step.harvested_j - step.state.soc_j;
            step.hit_brown_out = true;
            return step;
        }
    }

    step.elapsed_s = dt_s;
    step.harvested_j = charge_w * dt_s;
    step.consumed_j = load_w * dt_s;
    double soc1 = soc0 + step.harvested_j - step.consumed_j;
    if (soc1 > model.capacity_j) {
        step.clamped_j = soc1 - model.capacity_j;
        soc1 = model.capacity_j;
        step.entered_full_clamp = soc0 < model.capacity_j;
    }
    // Floating-point guard only; real depletion is caught by the crossing above.
    step.state.soc_j = std::clamp(soc1, 0.0, model.capacity_j);
    return step;
}

bool can_cold_start(const BatteryState& state, const BatteryModel& model) {
    return state.soc_j >= model.cold_start_threshold_j;
}

std::optional<double> time_to_reach(const BatteryState& state, const BatteryModel& model,
                                    double harvest_w, double load_w, double target_j) {
    const double net_w = model.charge_efficiency * harvest_w - load_w;
    const double gap = target_j - state.soc_j;
    if (gap == 0.0) return 0.0;
    if (gap > 0.0) {
        if (net_w <= 0.0) return std::nullopt;
        if (target_j > model.capacity_j) return std::nullopt;
        return gap / net_w;
    }
    if (net_w >= 0.0) return std::nullopt;
    return gap / net_w;  // both negative
}

}  // namespace ehsim
