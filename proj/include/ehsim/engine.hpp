#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ehsim/budget.hpp"
#include "ehsim/harvest.hpp"
#include "ehsim/network.hpp"
#include "ehsim/node.hpp"
#include "ehsim/scenario.hpp"
#include "ehsim/storage.hpp"

namespace ehsim {

enum class EngineMode { Event, FixedStep };

const char* engine_mode_name(EngineMode m);
EngineMode engine_mode_from_name(const std::string& s);

struct SimulationConfig {
    std::string scenario = "office-window-day";  // ignored when trace_path set
    std::string trace_path;
    int days = 1;
    std::uint32_t node_count = 1;
    double rf_distance_m = 0.0;                   // 0 = use the trace's value
    std::map<std::uint32_t, double> rf_distance_overrides;  // per node id
    DutyCycleConfig duty{};
    HarvesterSet harvesters = HarvesterSet::defaults();
    BatteryModel battery = default_battery_model();
    double initial_soc_j = 0.0;
    SensingChain sensing = default_sensing_chain();
    LinkModel link{};
    Topology topology{};
    std::optional<std::uint64_t> seed;
    EngineMode mode = EngineMode::Event;
    double fixed_dt_s = 0.25;
    double soc_sample_period_s = 60.0;
    std::string out_dir;

    bool stochastic() const;  // any noise source or lossy link enabled
    void validate() const;    // throws ConfigError with a description
};

/// Scenario presets bundle the trace generator with the link conditions the
/// scenario is meant to reproduce: the window-deployment day is scored
/// against a ledger that counts no retransmissions, so it runs on a clean
/// channel; the traffic day keeps the default lossy link.
SimulationConfig scenario_preset(const std::string& name);

struct EnergyAudit {
    double harvested_j = 0.0;  // charge-efficiency credit into the cell
    double consumed_j = 0.0;
    double clamped_j = 0.0;
    double soc_start_j = 0.0;
    double soc_end_j = 0.0;

    double residual_j() const {
        return harvested_j - consumed_j - clamped_j - (soc_end_j - soc_start_j);
    }
    double relative_residual() const;
};

struct DayStats {
    int day = 0;
    std::uint64_t cycles = 0;
    std::uint64_t packets_delivered = 0;
    double soc_start_j = 0.0;
    double soc_end_j = 0.0;

    double soc_gain_j() const { return soc_end_j - soc_start_j; }
};

struct NodeReport {
    std::uint32_t node_id = 0;
    std::optional<double> cold_start_time_s;
    std::uint64_t cold_starts = 0;
    std::uint64_t brown_outs = 0;
    std::uint64_t cycles_completed = 0;
    std::uint64_t packets_sent = 0;
    std::uint64_t packets_delivered = 0;
    EnergyAudit audit{};
    std::map<std::string, double> harvest_by_source_j;  // cell-side, pre charge-efficiency
    std::map<std::string, double> consumed_by_load_j;   // sleep/warmup/transmit/retry/relay
    std::vector<DayStats> days;
    std::optional<double> first_brown_out_time_s;
};

struct SocSample {
    double timestamp_s;
    std::uint32_t node_id;
    double soc_j;
};

struct RunReport {
    SimulationConfig config;
    double duration_s = 0.0;
    std::vector<NodeReport> nodes;
    std::vector<SimEvent> events;
    std::vector<SocSample> soc_series;
    GatewayState gateway;
    EnergyLedger ledger;          // closed-form reference for the same config
    double sim_margin_per_day_j = 0.0;

    std::string to_json() const;      // deterministic byte-for-byte per config+seed
    std::string summary_text() const;
};

RunReport run(const SimulationConfig& config);
RunReport run(const SimulationConfig& config, const EnvTrace& trace);

/// Writes report.json, summary.txt, soc.csv and packets.csv into out_dir.
void write_report(const RunReport& report, const std::string& out_dir);

}  // namespace ehsim
