#include "ehsim/node.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ehsim/errors.hpp"

namespace ehsim {

void DutyCycleConfig::validate() const {
    if (!(warmup_s > 0.0 && transmit_s > 0.0 && period_s > 0.0)) {
        throw std::invalid_argument("duty cycle: all durations must be > 0");
    }
    if (!(warmup_s + transmit_s <= period_s)) {
        throw std::invalid_argument("duty cycle: warmup + transmit exceed the period");
    }
}

const char* phase_name(NodePhase p) {
    switch (p) {
        case NodePhase::Offline: return "offline";
        case NodePhase::Sleep: return "sleep";
        case NodePhase::Warmup: return "warmup";
        case NodePhase::SampleTransmit: return "transmit";
    }
    return "?";
}

const char* event_kind_name(SimEventKind k) {
    switch (k) {
        case SimEventKind::ColdStart: return "cold_start";
        case SimEventKind::BrownOut: return "brown_out";
        case SimEventKind::FullClamp: return "full_clamp";
        case SimEventKind::PacketDelivered: return "packet_delivered";
        case SimEventKind::PacketLost: return "packet_lost";
    }
    return "?";
}

double load_power(const DutyCycleConfig& config, NodePhase phase) {
    switch (phase) {
        case NodePhase::Offline: return 0.0;
        case NodePhase::Sleep: return electric_power(config.sleep_point);
        case NodePhase::Warmup: return electric_power(config.warmup_point);
        case NodePhase::SampleTransmit: return electric_power(config.transmit_point);
    }
    return 0.0;
}

double one_cycle_energy(const DutyCycleConfig& config) {
    return electric_power(config.warmup_point) * config.warmup_s +
           electric_power(config.transmit_point) * config.transmit_s +
           electric_power(config.sleep_point) * config.sleep_s();
}

BatteryModel default_battery_model(const DutyCycleConfig& config) {
    BatteryModel m;
    m.cold_start_threshold_j = one_cycle_energy(config);
    m.validate();
    return m;
}

SensingChain default_sensing_chain() {
    SensingChain chain;
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        chain.afes[i] = AnalogFrontEnd::for_spec(chain.specs[i], chain.adc.reference_v);
        const auto grid = make_drift_calibration_grid(chain.specs[i], chain.afes[i], chain.adc,
                                                      -10.0, 50.0, 5.0,
                                                      0.2 * chain.specs[i].full_scale_ppm);
        chain.polys[i] = fit_compensation(chain.specs[i], grid).poly;
    }
    return chain;
}

namespace {

double phase_duration(const DutyCycleConfig& duty, NodePhase phase) {
    switch (phase) {
        case NodePhase::Sleep: return duty.sleep_s();
        case NodePhase::Warmup: return duty.warmup_s;
        case NodePhase::SampleTransmit: return duty.transmit_s;
        case NodePhase::Offline: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

Measurement sample_measurement(const NodeState& node, const NodeContext& ctx, double t,
                               NodeRngs& rngs) {
    const SensingChain& sc = ctx.sensing;
    const EnvReading env = read_environment(ctx.env, sc.env_noise, rngs.env_noise);

    // What each channel physically sees, including cross-sensitivity mixing,
    // at the true ambient temperature.
    const Vec6 mixed = sc.cross.forward(ctx.env.gas_ppm);
    Vec6 readings{};
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        const double current =
            sc.gas_noise ? sensor_current_noisy(sc.specs[i], mixed[i], ctx.env.ambient_c,
                                                rngs.sensor_noise)
                         : sensor_current(sc.specs[i], mixed[i], ctx.env.ambient_c);
        const int counts = adc_sample(sc.adc, afe_voltage(sc.afes[i], current));
        // Compensation runs on the measured temperature, as firmware would.
        readings[i] = counts_to_ppm(sc.specs[i], sc.afes[i], sc.adc, counts, env.temperature_c,
                                    sc.polys[i]);
    }
    Vec6 corrected = apply_cross_correction(sc.cross, readings);
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        corrected[i] = std::min(corrected[i], sc.specs[i].full_scale_ppm);
    }

    Measurement m;
    m.timestamp_s = t;
    m.ppm = corrected;
    m.temperature_c = env.temperature_c;
    m.rh_pct = env.rh_pct;
    m.soc_j = node.battery.soc_j;
    m.sequence = node.next_sequence;  // finalized when the packet is emitted
    return m;
}

}  // namespace

double time_to_phase_boundary(const NodeState& node, const NodeContext& ctx) {
    if (node.phase == NodePhase::Offline) {
        if (can_cold_start(node.battery, ctx.battery_model)) {
            // advance_node wakes the node on entry, so the next boundary is
            // the end of the sleep phase it wakes into.
            return ctx.duty.sleep_s();
        }
        const auto t = time_to_reach(node.battery, ctx.battery_model, ctx.harvest_w, 0.0,
                                     ctx.battery_model.cold_start_threshold_j);
        return t ? *t : std::numeric_limits<double>::infinity();
    }
    return std::max(0.0, phase_duration(ctx.duty, node.phase) - node.phase_elapsed_s);
}

AdvanceResult advance_node(NodeState& node, const NodeContext& ctx, double dt_s, NodeRngs& rngs) {
    if (!(dt_s > 0.0)) throw EngineError("advance_node: dt must be > 0");
    AdvanceResult res;
    res.load_phase = node.phase;

    if (node.phase == NodePhase::Offline) {
        if (can_cold_start(node.battery, ctx.battery_model)) {
            node.phase = NodePhase::Sleep;
            node.phase_elapsed_s = 0.0;
            res.events.push_back(
                {ctx.now_s, node.node_id, SimEventKind::ColdStart, node.battery.soc_j});
            res.load_phase = NodePhase::Sleep;
            // fall through into the sleep segment below
        } else {
            // Charge toward the cold-start threshold; the engine cuts the
            // interval at the crossing, so just integrate.
            const auto step =
                apply_net_power(node.battery, ctx.battery_model, ctx.harvest_w, 0.0, dt_s);
            node.battery = step.state;
            res.elapsed_s = step.elapsed_s;
            res.harvested_j = step.harvested_j;
            res.clamped_j = step.clamped_j;
            if (step.entered_full_clamp) {
                res.events.push_back(
                    {ctx.now_s + step.elapsed_s, node.node_id, SimEventKind::FullClamp,
                     node.battery.soc_j});
            }
            return res;
        }
    }

    const double remaining = phase_duration(ctx.duty, node.phase) - node.phase_elapsed_s;
    if (dt_s > remaining + 1e-6) {
        throw EngineError("advance_node: dt spans past the current phase boundary");
    }
    const double seg = std::min(dt_s, remaining);
    const double load = load_power(ctx.duty, node.phase);

    const auto step = apply_net_power(node.battery, ctx.battery_model, ctx.harvest_w, load, seg);
    node.battery = step.state;
    res.elapsed_s = step.elapsed_s;
    res.harvested_j = step.harvested_j;
    res.consumed_j = step.consumed_j;
    res.clamped_j = step.clamped_j;
    if (step.entered_full_clamp) {
        res.events.push_back({ctx.now_s + step.elapsed_s, node.node_id, SimEventKind::FullClamp,
                              node.battery.soc_j});
    }

    if (step.hit_brown_out) {
        // Load unsustainable: energy was spent up to the analytic crossing,
        // the partial cycle is abandoned.
        node.phase = NodePhase::Offline;
        node.phase_elapsed_s = 0.0;
        node.pending_measurement.reset();
        res.events.push_back({ctx.now_s + step.elapsed_s, node.node_id, SimEventKind::BrownOut,
                              node.battery.soc_j});
        return res;
    }

    node.phase_elapsed_s += step.elapsed_s;
    if (step.elapsed_s >= remaining) {  // phase completed exactly at seg end
        const double t_done = ctx.now_s + step.elapsed_s;
        switch (node.phase) {
            case NodePhase::Sleep:
                node.phase = NodePhase::Warmup;
                break;
            case NodePhase::Warmup:
                // Sensors are stable after warm-up; sample everything now.
                node.pending_measurement = sample_measurement(node, ctx, t_done, rngs);
                node.phase = NodePhase::SampleTransmit;
                break;
            case NodePhase::SampleTransmit:
                if (!node.pending_measurement) {
                    throw EngineError("advance_node: transmit completed without a measurement");
                }
                res.emitted = *node.pending_measurement;
                res.emitted->sequence = node.next_sequence++;
                node.pending_measurement.reset();
                node.cycle_count += 1;
                node.phase = NodePhase::Sleep;
                break;
            case NodePhase::Offline:
                break;
        }
        node.phase_elapsed_s = 0.0;
    }
    return res;
}

}  // namespace ehsim
