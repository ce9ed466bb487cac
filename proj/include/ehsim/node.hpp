#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ehsim/quantities.hpp"
#include "ehsim/sensing.hpp"
#include "ehsim/storage.hpp"

namespace ehsim {

/// 15-minute operating period: sleep, 1 min sensor warm-up, 4 s sample +
/// transmit. Sleep fills whatever the other phases leave (836 s by default)
/// so the phases tile the period exactly.
struct DutyCycleConfig {
    double period_s = 900.0;
    double warmup_s = 60.0;
    double transmit_s = 4.0;
    ElectricOperatingPoint sleep_point{3.7, 3e-6};
    ElectricOperatingPoint warmup_point{3.7, 115e-6};
    ElectricOperatingPoint transmit_point{3.7, 25e-3};

    double sleep_s() const { return period_s - warmup_s - transmit_s; }
    double cycles_per_day() const { return kSecondsPerDay / period_s; }
    void validate() const;
};

enum class NodePhase { Offline, Sleep, Warmup, SampleTransmit };

const char* phase_name(NodePhase p);

double load_power(const DutyCycleConfig& config, NodePhase phase);

/// Energy of one complete duty cycle (warm-up + transmit + sleep).
double one_cycle_energy(const DutyCycleConfig& config);

/// Battery defaults with the cold-start threshold sized to one full duty
/// cycle, so a node never wakes into a cycle it cannot finish.
BatteryModel default_battery_model(const DutyCycleConfig& config = DutyCycleConfig{});

struct Measurement {
    double timestamp_s = 0.0;
    Vec6 ppm{};  // CO, NO2, H2S, NH3, NO, Cl2
    double temperature_c = 0.0;
    double rh_pct = 0.0;
    double soc_j = 0.0;
    std::uint64_t sequence = 0;
};

/// Everything the sampling path needs, fitted/fixed once per run.
struct SensingChain {
    std::array<SensorSpec, kNumSpecies> specs = SensorSpec::all_defaults();
    std::array<AnalogFrontEnd, kNumSpecies> afes{};
    AdcSpec adc{};
    std::array<CompensationPoly, kNumSpecies> polys{};
    CrossSensitivityMatrix cross = CrossSensitivityMatrix::identity();
    EnvNoise env_noise{};
    bool gas_noise = true;
};

/// Default chain: per-channel transimpedance gains spanning each full scale,
/// compensation quartics fitted against the default drift curve.
SensingChain default_sensing_chain();

struct NodeState {
    std::uint32_t node_id = 0;
    NodePhase phase = NodePhase::Offline;
    double phase_elapsed_s = 0.0;
    BatteryState battery{};
    std::optional<Measurement> pending_measurement;
    std::uint64_t cycle_count = 0;   // completed warm-up + transmit cycles
    std::uint64_t next_sequence = 0;
};

enum class SimEventKind { ColdStart, BrownOut, FullClamp, PacketDelivered, PacketLost };

const char* event_kind_name(SimEventKind k);

struct SimEvent {
    double timestamp_s;
    std::uint32_t node_id;
    SimEventKind kind;
    double value = 0.0;  // soc at battery events, attempts at packet events
};

struct NodeRngs {
    RngStream sensor_noise;
    RngStream env_noise;
    RngStream link;
};

/// Inputs held constant across one advance step.
struct NodeContext {
    const DutyCycleConfig& duty;
    const BatteryModel& battery_model;
    const SensingChain& sensing;
    const EnvSample& env;        // sample in effect over the step
    double harvest_w;            // total cell-side harvest over the step
    double now_s;                // absolute time at the start of the step
};

struct AdvanceResult {
    double elapsed_s = 0.0;                  // <= requested dt
    double harvested_j = 0.0;                // charge-efficiency credit
    double consumed_j = 0.0;
    double clamped_j = 0.0;
    NodePhase load_phase = NodePhase::Offline;  // phase the consumption belongs to
    std::vector<SimEvent> events;
    std::optional<Measurement> emitted;      // completed measurement, ready to transmit
};

/// Seconds until this node next changes state on its own: the end of the
/// current phase, or the cold-start crossing while offline. Infinity when
/// offline with no path to the threshold.
double time_to_phase_boundary(const NodeState& node, const NodeContext& ctx);

/// Advance by up to dt seconds. Consumes at most one segment: the step ends
/// early at a phase completion, cold start, or brown-out, and the caller
/// loops. dt must not extend past the current phase boundary.
AdvanceResult advance_node(NodeState& node, const NodeContext& ctx, double dt_s, NodeRngs& rngs);

}  // namespace ehsim
