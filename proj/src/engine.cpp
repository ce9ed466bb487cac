#include "ehsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace ehsim {

const char* engine_mode_name(EngineMode m) {
    return m == EngineMode::Event ? "event" : "fixed-step";
}

EngineMode engine_mode_from_name(const std::string& s) {
    if (s == "event") return EngineMode::Event;
    if (s == "fixed-step" || s == "fixed_step" || s == "fixed") return EngineMode::FixedStep;
    throw ConfigError("unknown engine mode '" + s + "' (expected event or fixed-step)");
}

double EnergyAudit::relative_residual() const {
    const double scale = std::max({1.0, std::fabs(harvested_j), std::fabs(consumed_j)});
    return std::fabs(residual_j()) / scale;
}

bool SimulationConfig::stochastic() const {
    return sensing.gas_noise || sensing.env_noise.enabled || link.effective_loss() > 0.0;
}

void SimulationConfig::validate() const {
    try {
        duty.validate();
        battery.validate();
        link.validate();
        harvesters.teg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (days < 1) throw ConfigError("days must be >= 1");
    if (node_count < 1) throw ConfigError("node_count must be >= 1");
    if (!(fixed_dt_s > 0.0 && fixed_dt_s <= 1.0)) throw ConfigError("fixed_dt_s must be in (0, 1]");
    if (!(soc_sample_period_s > 0.0)) throw ConfigError("soc_sample_period_s must be > 0");
    if (!(initial_soc_j >= 0.0 && initial_soc_j <= battery.capacity_j)) {
        throw ConfigError("initial_soc_j outside [0, capacity]");
    }
    if (stochastic() && !seed.has_value()) {
        throw ConfigError("seed required: noise or a lossy link is enabled");
    }
    if (trace_path.empty()) {
        const auto names = scenario_names();
        if (std::find(names.begin(), names.end(), scenario) == names.end()) {
            throw ConfigError("unknown scenario '" + scenario + "'");
        }
    }
    sensing.cross.condition_number();  // throws ConfigError when singular
}

SimulationConfig scenario_preset(const std::string& name) {
    SimulationConfig cfg;
    cfg.scenario = name;
    if (name == "office-window-day" || name == "dark-cold") {
        // These are scored against the closed-form ledger, which counts every
        // transmission exactly once; run them on a clean channel.
        cfg.link = LinkModel::lossless();
    } else if (name == "doha-traffic") {
        cfg.link = LinkModel{};  // default lossy 802.15.4-flavored link
    } else {
        throw ConfigError("unknown scenario '" + name + "'");
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// engine internals
// ---------------------------------------------------------------------------

namespace {

struct NodeRuntime {
    NodeState state;
    NodeRngs rngs;
    NodeReport report;
    std::map<NodePhase, double> consumed_by_phase;
    double retry_energy_j = 0.0;
    double relay_energy_j = 0.0;
    // day-boundary snapshots
    std::uint64_t cycles_at_day_start = 0;
    std::uint64_t delivered_at_day_start = 0;
    double soc_at_day_start = 0.0;
};

/// Start time of the trace sample following time t (with the trace tiled
/// periodically), strictly greater than t.
double next_trace_change(const EnvTrace& trace, double t) {
    const double period = trace.duration_s;
    double k = std::floor(t / period);
    double local = t - k * period;
    if (local >= period) {  // floating-point edge at the seam
        k += 1.0;
        local = 0.0;
    }
    const auto& v = trace.samples;
    auto it = std::upper_bound(v.begin(), v.end(), local,
                               [](double x, const EnvSample& s) { return x < s.timestamp_s; });
    const double next_local = (it == v.end()) ? period : it->timestamp_s;
    double next = k * period + next_local;
    if (next <= t) next = (k + 1.0) * period + v.front().timestamp_s;
    return next;
}

/// Instantaneous energy withdrawal (retry / relay transmissions take energy,
/// not schedule time). Returns the amount actually drawn.
double withdraw(NodeRuntime& n, const BatteryModel& model, double amount_j, double now_s,
                std::vector<SimEvent>& events) {
    if (amount_j <= 0.0) return 0.0;
    const double available = n.state.battery.soc_j - model.brown_out_threshold_j;
    const double draw = std::min(amount_j, std::max(0.0, available));
    n.state.battery.soc_j -= draw;
    if (draw < amount_j) {
        // The radio died mid-retry: abandon the cycle.
        n.state.phase = NodePhase::Offline;
        n.state.phase_elapsed_s = 0.0;
        n.state.pending_measurement.reset();
        events.push_back({now_s, n.state.node_id, SimEventKind::BrownOut, n.state.battery.soc_j});
        n.report.brown_outs += 1;
        if (!n.report.first_brown_out_time_s) n.report.first_brown_out_time_s = now_s;
    }
    return draw;
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

RunReport run(const SimulationConfig& config) {
    const std::uint64_t seed = config.seed.value_or(0);
    EnvTrace trace = config.trace_path.empty() ? make_scenario_trace(config.scenario, seed)
                                               : parse_trace_file(config.trace_path);
    return run(config, trace);
}

RunReport run(const SimulationConfig& config, const EnvTrace& trace) {
    config.validate();
    trace.validate();

    const double t_end = config.days * kSecondsPerDay;
    const std::uint64_t seed = config.seed.value_or(0);
    const double tx_power = electric_power(config.duty.transmit_point);

    RunReport report;
    report.config = config;
    report.duration_s = t_end;
    report.ledger = full_ledger(config.duty, config.harvesters);

    std::vector<NodeRuntime> nodes(config.node_count);
    for (std::uint32_t i = 0; i < config.node_count; ++i) {
        auto& n = nodes[i];
        n.state.node_id = i;
        n.state.battery.soc_j = config.initial_soc_j;
        n.rngs.sensor_noise = RngStream::derive(seed, i, RngPurpose::SensorNoise);
        n.rngs.env_noise = RngStream::derive(seed, i, RngPurpose::EnvNoise);
        n.rngs.link = RngStream::derive(seed, i, RngPurpose::Link);
        n.report.node_id = i;
        n.report.audit.soc_start_j = config.initial_soc_j;
        n.soc_at_day_start = config.initial_soc_j;
        if (can_cold_start(n.state.battery, config.battery)) {
            // Node wakes immediately when it starts above the threshold.
            n.state.phase = NodePhase::Sleep;
        }
    }

    GatewayState& gateway = report.gateway;

    auto node_rf_sample = [&](const EnvSample& s, std::uint32_t id) {
        EnvSample out = s;
        if (config.rf_distance_m > 0.0) out.rf_dist_m = config.rf_distance_m;
        auto it = config.rf_distance_overrides.find(id);
        if (it != config.rf_distance_overrides.end()) out.rf_dist_m = it->second;
        return out;
    };

    auto record_soc = [&](double t) {
        for (const auto& n : nodes) {
            report.soc_series.push_back({t, n.state.node_id, n.state.battery.soc_j});
        }
    };

    auto handle_packet = [&](std::uint32_t origin, const Measurement& m, double tc) {
        Packet pkt;
        pkt.node_id = origin;
        pkt.sequence = m.sequence;
        pkt.payload = m;
        gateway.note_sent(origin);
        nodes[origin].report.packets_sent += 1;

        auto& orig = nodes[origin];
        const TransmitOutcome out = transmit(pkt, config.link, tx_power, orig.rngs.link);
        orig.retry_energy_j += withdraw(orig, config.battery, out.extra_energy_j, tc,
                                        report.events);
        double latency = config.duty.transmit_s +
                         (out.attempts_used - 1) * config.link.retry_duration_s;
        if (!out.delivered) {
            report.events.push_back({tc, origin, SimEventKind::PacketLost,
                                     static_cast<double>(out.attempts_used)});
            return;
        }
        if (config.topology.mode == Topology::Mode::RelayChain && origin > 0) {
            // Relay toward the gateway through every lower-id node.
            for (std::uint32_t hop = origin; hop-- > 0;) {
                auto& relay = nodes[hop];
                if (relay.state.phase == NodePhase::Offline) {
                    report.events.push_back({tc, origin, SimEventKind::PacketLost,
                                             static_cast<double>(pkt.attempts)});
                    return;
                }
                const TransmitOutcome h = transmit(pkt, config.link, tx_power, relay.rngs.link);
                const double relay_cost =
                    config.duty.transmit_s * tx_power + h.extra_energy_j;
                relay.relay_energy_j +=
                    withdraw(relay, config.battery, relay_cost, tc, report.events);
                latency += config.duty.transmit_s +
                           (h.attempts_used - 1) * config.link.retry_duration_s;
                if (!h.delivered) {
                    report.events.push_back({tc, origin, SimEventKind::PacketLost,
                                             static_cast<double>(h.attempts_used)});
                    return;
                }
            }
        }
        gateway.ingest(pkt, tc, latency);
        nodes[origin].report.packets_delivered += 1;
        report.events.push_back({tc, origin, SimEventKind::PacketDelivered,
                                 static_cast<double>(pkt.attempts)});
    };

    auto close_day = [&](int day, double t) {
        for (auto& n : nodes) {
            DayStats d;
            d.day = day;
            d.cycles = n.state.cycle_count - n.cycles_at_day_start;
            d.packets_delivered = n.report.packets_delivered - n.delivered_at_day_start;
            d.soc_start_j = n.soc_at_day_start;
            d.soc_end_j = n.state.battery.soc_j;
            n.report.days.push_back(d);
            n.cycles_at_day_start = n.state.cycle_count;
            n.delivered_at_day_start = n.report.packets_delivered;
            n.soc_at_day_start = n.state.battery.soc_j;
        }
        (void)t;
    };

    record_soc(0.0);
    double t = 0.0;
    double next_soc_tick = config.soc_sample_period_s;
    int day_index = 0;
    double next_day = kSecondsPerDay;

    while (t < t_end) {
        double t_next = std::min({t_end, next_trace_change(trace, t), next_soc_tick, next_day});
        if (config.mode == EngineMode::FixedStep) {
            const double tick = (std::floor(t / config.fixed_dt_s) + 1.0) * config.fixed_dt_s;
            t_next = std::min(t_next, tick);
        }
        const EnvSample& sample = trace.at(std::fmod(t, trace.duration_s));
        // Phase boundaries (and offline cold-start crossings) also cut the
        // interval so transitions land on exact instants. The cut width has a
        // floor so a crossing rounded one ulp short still gets integrated
        // over instead of stalling the clock.
        const double min_cut = std::max(1e-9, 8.0 * t * 2.3e-16);
        for (auto& n : nodes) {
            const EnvSample s = node_rf_sample(sample, n.state.node_id);
            const HarvestBreakdown bd = total_harvest_power(config.harvesters, s);
            NodeContext ctx{config.duty, config.battery, config.sensing, s, bd.total_w, t};
            const double boundary = time_to_phase_boundary(n.state, ctx);
            if (std::isfinite(boundary)) t_next = std::min(t_next, t + std::max(boundary, min_cut));
        }
        if (!(t_next > t)) t_next = std::nextafter(t, std::numeric_limits<double>::infinity());

        for (auto& n : nodes) {
            const EnvSample s = node_rf_sample(sample, n.state.node_id);
            const HarvestBreakdown bd = total_harvest_power(config.harvesters, s);
            double rem = t_next - t;
            double now = t;
            int transitions = 0;
            while (rem > 1e-12) {
                NodeContext ctx{config.duty, config.battery, config.sensing, s, bd.total_w, now};
                AdvanceResult res = advance_node(n.state, ctx, rem, n.rngs);
                // audit
                n.report.audit.harvested_j += res.harvested_j;
                n.report.audit.clamped_j += res.clamped_j;
                n.consumed_by_phase[res.load_phase] += res.consumed_j;
                if (res.elapsed_s > 0.0 && bd.total_w > 0.0) {
                    n.report.harvest_by_source_j["pv_indoor"] +=
                        (bd.pv_regime == LightRegime::Indoor ? bd.pv_w : 0.0) * res.elapsed_s;
                    n.report.harvest_by_source_j["pv_outdoor"] +=
                        (bd.pv_regime == LightRegime::Outdoor ? bd.pv_w : 0.0) * res.elapsed_s;
                    n.report.harvest_by_source_j["teg"] += bd.teg_w * res.elapsed_s;
                    n.report.harvest_by_source_j["piezo"] += bd.piezo_w * res.elapsed_s;
                    n.report.harvest_by_source_j["rf"] += bd.rf_w * res.elapsed_s;
                }
                for (const auto& ev : res.events) {
                    report.events.push_back(ev);
                    if (ev.kind == SimEventKind::ColdStart) {
                        n.report.cold_starts += 1;
                        if (!n.report.cold_start_time_s) n.report.cold_start_time_s = ev.timestamp_s;
                    } else if (ev.kind == SimEventKind::BrownOut) {
                        n.report.brown_outs += 1;
                        if (!n.report.first_brown_out_time_s) {
                            n.report.first_brown_out_time_s = ev.timestamp_s;
                        }
                    }
                }
                now += res.elapsed_s;
                rem -= res.elapsed_s;
                if (res.emitted) handle_packet(n.state.node_id, *res.emitted, now);
                if (++transitions > 100000) {
                    throw EngineError("node " + std::to_string(n.state.node_id) +
                                      " is churning between states; check thresholds");
                }
            }
        }

        t = t_next;
        if (t >= next_soc_tick - 1e-12) {
            record_soc(t);
            while (next_soc_tick <= t + 1e-12) next_soc_tick += config.soc_sample_period_s;
        }
        if (t >= next_day - 1e-12 && day_index < config.days) {
            close_day(day_index, t);
            ++day_index;
            next_day = (day_index + 1) * kSecondsPerDay;
        }
    }
    if (day_index < config.days) close_day(day_index, t_end);

    // finalize per-node reports
    for (auto& n : nodes) {
        n.report.cycles_completed = n.state.cycle_count;
        n.report.audit.soc_end_j = n.state.battery.soc_j;
        double consumed = n.retry_energy_j + n.relay_energy_j;
        for (const auto& [phase, j] : n.consumed_by_phase) {
            n.report.consumed_by_load_j[phase_name(phase)] = j;
            consumed += j;
        }
        if (n.retry_energy_j > 0.0) n.report.consumed_by_load_j["retry"] = n.retry_energy_j;
        if (n.relay_energy_j > 0.0) n.report.consumed_by_load_j["relay"] = n.relay_energy_j;
        n.report.audit.consumed_j = consumed;
        report.nodes.push_back(std::move(n.report));
    }
    if (!report.nodes.empty()) {
        const auto& a = report.nodes.front().audit;
        report.sim_margin_per_day_j = (a.soc_end_j - a.soc_start_j) / config.days;
    }
    return report;
}

// ---------------------------------------------------------------------------
// report serialization
// ---------------------------------------------------------------------------

std::string RunReport::to_json() const {
    nlohmann::json j;
    j["schema"] = "run-report/1";
    nlohmann::json jc;
    jc["scenario"] = config.trace_path.empty() ? config.scenario : config.trace_path;
    jc["days"] = config.days;
    jc["node_count"] = config.node_count;
    jc["seed"] = config.seed ? nlohmann::json(*config.seed) : nlohmann::json(nullptr);
    jc["mode"] = engine_mode_name(config.mode);
    if (config.mode == EngineMode::FixedStep) jc["fixed_dt_s"] = config.fixed_dt_s;
    jc["topology"] = topology_mode_name(config.topology.mode);
    jc["link_effective_loss"] = config.link.effective_loss();
    jc["battery_capacity_j"] = config.battery.capacity_j;
    jc["initial_soc_j"] = config.initial_soc_j;
    j["config"] = jc;
    j["duration_s"] = duration_s;

    nlohmann::json jn = nlohmann::json::array();
    for (const auto& n : nodes) {
        nlohmann::json o;
        o["node_id"] = n.node_id;
        o["cold_starts"] = n.cold_starts;
        o["cold_start_time_s"] =
            n.cold_start_time_s ? nlohmann::json(*n.cold_start_time_s) : nlohmann::json(nullptr);
        o["brown_outs"] = n.brown_outs;
        o["first_brown_out_time_s"] = n.first_brown_out_time_s
                                          ? nlohmann::json(*n.first_brown_out_time_s)
                                          : nlohmann::json(nullptr);
        o["cycles_completed"] = n.cycles_completed;
        o["packets_sent"] = n.packets_sent;
        o["packets_delivered"] = n.packets_delivered;
        o["audit"] = {{"harvested_j", n.audit.harvested_j},
                      {"consumed_j", n.audit.consumed_j},
                      {"clamped_j", n.audit.clamped_j},
                      {"soc_start_j", n.audit.soc_start_j},
                      {"soc_end_j", n.audit.soc_end_j},
                      {"residual_j", n.audit.residual_j()}};
        o["harvest_by_source_j"] = n.harvest_by_source_j;
        o["consumed_by_load_j"] = n.consumed_by_load_j;
        nlohmann::json days_j = nlohmann::json::array();
        for (const auto& d : n.days) {
            days_j.push_back({{"day", d.day},
                              {"cycles", d.cycles},
                              {"packets_delivered", d.packets_delivered},
                              {"soc_start_j", d.soc_start_j},
                              {"soc_end_j", d.soc_end_j},
                              {"soc_gain_j", d.soc_gain_j()}});
        }
        o["days"] = days_j;
        jn.push_back(o);
    }
    j["nodes"] = jn;

    nlohmann::json jg;
    jg["received"] = gateway.received.size();
    nlohmann::json per_node = nlohmann::json::object();
    for (const auto& [id, st] : gateway.per_node) {
        per_node[std::to_string(id)] = {{"sent", st.sent},
                                        {"delivered", st.delivered},
                                        {"duplicates", st.duplicates},
                                        {"prr", st.prr()},
                                        {"mean_latency_s",
                                         st.delivered ? st.latency_sum_s / st.delivered : 0.0}};
    }
    jg["per_node"] = per_node;
    j["gateway"] = jg;

    nlohmann::json je = nlohmann::json::array();
    for (const auto& ev : events) {
        je.push_back({{"t_s", ev.timestamp_s},
                      {"node", ev.node_id},
                      {"kind", event_kind_name(ev.kind)},
                      {"value", ev.value}});
    }
    j["events"] = je;

    j["ledger"] = nlohmann::json::parse(render_ledger_json(ledger));
    j["sim_margin_per_day_j"] = sim_margin_per_day_j;
    return j.dump(2) + "\n";
}

std::string RunReport::summary_text() const {
    std::ostringstream out;
    char buf[200];
    out << "Run summary\n";
    std::snprintf(buf, sizeof(buf), "  scenario: %s  days: %d  nodes: %u  mode: %s\n",
                  (config.trace_path.empty() ? config.scenario : config.trace_path).c_str(),
                  config.days, config.node_count, engine_mode_name(config.mode));
    out << buf;
    for (const auto& n : nodes) {
        std::snprintf(buf, sizeof(buf),
                      "  node %u: cycles %llu, packets %llu/%llu delivered, cold starts %llu, "
                      "brown-outs %llu\n",
                      n.node_id, static_cast<unsigned long long>(n.cycles_completed),
                      static_cast<unsigned long long>(n.packets_delivered),
                      static_cast<unsigned long long>(n.packets_sent),
                      static_cast<unsigned long long>(n.cold_starts),
                      static_cast<unsigned long long>(n.brown_outs));
        out << buf;
        std::snprintf(buf, sizeof(buf),
                      "    energy: harvested %.3f J, consumed %.3f J, clamped %.3f J, soc %.3f -> "
                      "%.3f J (audit residual %.2e J)\n",
                      n.audit.harvested_j, n.audit.consumed_j, n.audit.clamped_j,
                      n.audit.soc_start_j, n.audit.soc_end_j, n.audit.residual_j());
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "  ledger: consumed %.3f, recovered %.3f, margin %+.3f J/day\n",
                  ledger.total_consumed_j, ledger.total_recovered_j, ledger.margin_j());
    out << buf;
    std::snprintf(buf, sizeof(buf), "  simulated soc gain: %+.3f J/day (node 0 average)\n",
                  sim_margin_per_day_j);
    out << buf;
    return out.str();
}

void write_report(const RunReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create report directory: " + out_dir);

    auto write_file = [&](const std::string& name, const std::string& content) {
        const std::string path = out_dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path);
        out << content;
        if (!out.good()) throw IoError("write failed: " + path);
    };

    write_file("report.json", report.to_json());
    write_file("summary.txt", report.summary_text());

    std::ostringstream soc;
    soc << "timestamp_s,node_id,soc_j\n";
    for (const auto& s : report.soc_series) {
        soc << fmt9(s.timestamp_s) << ',' << s.node_id << ',' << fmt9(s.soc_j) << '\n';
    }
    write_file("soc.csv", soc.str());

    std::ostringstream packets;
    export_gateway(report.gateway, packets, ExportFormat::Csv);
    write_file("packets.csv", packets.str());
}

}  // namespace ehsim
