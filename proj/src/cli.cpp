#include "ehsim/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ehsim/budget.hpp"
#include "ehsim/engine.hpp"
#include "ehsim/errors.hpp"
#include "ehsim/scenario.hpp"
#include "ehsim/sensing.hpp"

namespace ehsim {

namespace {

// ---------------------------------------------------------------------------
// config file: INI-style sections of key = value pairs. One table drives both
// the loader and the generated reference page.
// ---------------------------------------------------------------------------

struct ConfigKey {
    const char* name;  // "section.key"
    const char* doc;
    std::string default_text;
    std::function<void(SimulationConfig&, const std::string&)> apply;
};

double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number '" + s + "' for " + key);
    }
}

bool to_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config: bad boolean '" + s + "' for " + key);
}

std::vector<ConfigKey> config_keys() {
    auto num = [](double SimulationConfig::*field) {
        return [field](SimulationConfig& c, const std::string& v) {
            c.*field = to_double(v, "value");
        };
    };
    std::vector<ConfigKey> keys;
    auto add = [&](const char* name, const char* doc, std::string def,
                   std::function<void(SimulationConfig&, const std::string&)> fn) {
        keys.push_back({name, doc, std::move(def), std::move(fn)});
    };

    add("run.days", "simulated days", "1",
        [](SimulationConfig& c, const std::string& v) { c.days = static_cast<int>(to_double(v, "run.days")); });
    add("run.nodes", "number of nodes", "1", [](SimulationConfig& c, const std::string& v) {
        c.node_count = static_cast<std::uint32_t>(to_double(v, "run.nodes"));
    });
    add("run.seed", "master seed for all random streams", "(unset)",
        [](SimulationConfig& c, const std::string& v) {
            c.seed = static_cast<std::uint64_t>(std::stoull(v));
        });
    add("run.mode", "engine mode: event or fixed-step", "event",
        [](SimulationConfig& c, const std::string& v) { c.mode = engine_mode_from_name(v); });
    add("run.fixed_dt_s", "fixed-step timestep, <= 1 s", "0.25", num(&SimulationConfig::fixed_dt_s));
    add("run.soc_sample_period_s", "soc.csv sampling period", "60",
        num(&SimulationConfig::soc_sample_period_s));
    add("run.initial_soc_j", "state of charge at t = 0", "0", num(&SimulationConfig::initial_soc_j));
    add("run.rf_distance_m", "override the trace's RF distance for all nodes (0 = keep)", "0",
        num(&SimulationConfig::rf_distance_m));

    add("duty.period_s", "duty-cycle period", "900", [](SimulationConfig& c, const std::string& v) {
        c.duty.period_s = to_double(v, "duty.period_s");
    });
    add("duty.warmup_s", "sensor warm-up duration", "60",
        [](SimulationConfig& c, const std::string& v) { c.duty.warmup_s = to_double(v, "duty.warmup_s"); });
    add("duty.transmit_s", "sample + transmit duration", "4",
        [](SimulationConfig& c, const std::string& v) { c.duty.transmit_s = to_double(v, "duty.transmit_s"); });
    add("duty.sleep_a", "sleep current [A]", "3e-6",
        [](SimulationConfig& c, const std::string& v) { c.duty.sleep_point.amps = to_double(v, "duty.sleep_a"); });
    add("duty.warmup_a", "warm-up current [A]", "115e-6", [](SimulationConfig& c, const std::string& v) {
        c.duty.warmup_point.amps = to_double(v, "duty.warmup_a");
    });
    add("duty.transmit_a", "transmit current [A]", "25e-3", [](SimulationConfig& c, const std::string& v) {
        c.duty.transmit_point.amps = to_double(v, "duty.transmit_a");
    });
    add("duty.rail_v", "supply voltage for all three operating points", "3.7",
        [](SimulationConfig& c, const std::string& v) {
            const double volts = to_double(v, "duty.rail_v");
            c.duty.sleep_point.volts = volts;
            c.duty.warmup_point.volts = volts;
            c.duty.transmit_point.volts = volts;
        });

    add("battery.capacity_j", "cell capacity [J]", "14.76", [](SimulationConfig& c, const std::string& v) {
        c.battery.capacity_j = to_double(v, "battery.capacity_j");
    });
    add("battery.brown_out_threshold_j", "soc at which a loaded node shuts down", "0",
        [](SimulationConfig& c, const std::string& v) {
            c.battery.brown_out_threshold_j = to_double(v, "battery.brown_out_threshold_j");
        });
    add("battery.cold_start_threshold_j", "soc needed to leave Offline (default: one duty cycle)",
        "auto", [](SimulationConfig& c, const std::string& v) {
            c.battery.cold_start_threshold_j = to_double(v, "battery.cold_start_threshold_j");
        });
    add("battery.charge_efficiency", "fraction of harvested energy credited", "1.0",
        [](SimulationConfig& c, const std::string& v) {
            c.battery.charge_efficiency = to_double(v, "battery.charge_efficiency");
        });

    add("harvest.pv_indoor_efficiency", "indoor panel conversion efficiency", "0.80",
        [](SimulationConfig& c, const std::string& v) {
            c.harvesters.pv_indoor.conversion_efficiency = to_double(v, "harvest.pv_indoor_efficiency");
        });
    add("harvest.pv_outdoor_efficiency", "outdoor panel conversion efficiency", "1.0",
        [](SimulationConfig& c, const std::string& v) {
            c.harvesters.pv_outdoor.conversion_efficiency = to_double(v, "harvest.pv_outdoor_efficiency");
        });
    add("harvest.teg_efficiency", "TEG conversion efficiency", "0.90",
        [](SimulationConfig& c, const std::string& v) {
            c.harvesters.teg.conversion_efficiency = to_double(v, "harvest.teg_efficiency");
        });
    add("harvest.teg_activation_c", "gradient below which the TEG is off [degC]", "6",
        [](SimulationConfig& c, const std::string& v) {
            c.harvesters.teg.activation_threshold_c = to_double(v, "harvest.teg_activation_c");
        });
    add("harvest.rf_efficiency", "RF harvester conversion efficiency",
        "0.2553865532941176 (calibrated: 1.8 J/day at 3 W, 5 m)",
        [](SimulationConfig& c, const std::string& v) {
            c.harvesters.rf.conversion_efficiency = to_double(v, "harvest.rf_efficiency");
        });
    add("harvest.rf_floor_w", "received power below which RF output is zero", "1e-6",
        [](SimulationConfig& c, const std::string& v) {
            c.harvesters.rf.sensitivity_floor_w = to_double(v, "harvest.rf_floor_w");
        });
    add("harvest.piezo_enabled", "enable the vibration harvester", "false",
        [](SimulationConfig& c, const std::string& v) {
            c.harvesters.piezo.enabled = to_bool(v, "harvest.piezo_enabled");
        });
    add("harvest.piezo_q", "piezo resonance quality factor", "50",
        [](SimulationConfig& c, const std::string& v) {
            c.harvesters.piezo.quality_factor = to_double(v, "harvest.piezo_q");
        });

    add("link.base_loss", "per-attempt loss probability before noise/coding", "0.05",
        [](SimulationConfig& c, const std::string& v) {
            c.link.base_loss_probability = to_double(v, "link.base_loss");
        });
    add("link.noise_multiplier", "channel noise factor, >= 1", "1",
        [](SimulationConfig& c, const std::string& v) {
            c.link.noise_multiplier = to_double(v, "link.noise_multiplier");
        });
    add("link.coding_gain", "spread-spectrum coding gain, >= 1", "4",
        [](SimulationConfig& c, const std::string& v) {
            c.link.coding_gain = to_double(v, "link.coding_gain");
        });
    add("link.max_retries", "retransmissions after a lost attempt", "2",
        [](SimulationConfig& c, const std::string& v) {
            c.link.max_retries = static_cast<int>(to_double(v, "link.max_retries"));
        });
    add("link.retry_duration_s", "air time per retransmission", "1",
        [](SimulationConfig& c, const std::string& v) {
            c.link.retry_duration_s = to_double(v, "link.retry_duration_s");
        });

    add("topology.mode", "star or relay-chain", "star",
        [](SimulationConfig& c, const std::string& v) {
            if (v == "star") c.topology.mode = Topology::Mode::Star;
            else if (v == "relay-chain") c.topology.mode = Topology::Mode::RelayChain;
            else throw ConfigError("config: unknown topology '" + v + "'");
        });

    add("nodes.rf_distance_overrides", "per-node RF distance, e.g. 1:10,2:7.5", "(none)",
        [](SimulationConfig& c, const std::string& v) {
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos) {
                    throw ConfigError("config: bad override '" + item + "' (want id:meters)");
                }
                const auto id = static_cast<std::uint32_t>(std::stoul(item.substr(0, colon)));
                c.rf_distance_overrides[id] = to_double(item.substr(colon + 1), "override distance");
            }
        });

    add("sensing.gas_noise", "Gaussian accuracy noise on gas channels", "true",
        [](SimulationConfig& c, const std::string& v) {
            c.sensing.gas_noise = to_bool(v, "sensing.gas_noise");
        });
    add("sensing.env_noise", "noise on temperature / RH readout", "true",
        [](SimulationConfig& c, const std::string& v) {
            c.sensing.env_noise.enabled = to_bool(v, "sensing.env_noise");
        });
    add("sensing.env_sigma_t_c", "temperature readout sigma [degC]", "0.3",
        [](SimulationConfig& c, const std::string& v) {
            c.sensing.env_noise.sigma_t_c = to_double(v, "sensing.env_sigma_t_c");
        });
    add("sensing.env_sigma_rh_pct", "RH readout sigma [%]", "2",
        [](SimulationConfig& c, const std::string& v) {
            c.sensing.env_noise.sigma_rh_pct = to_double(v, "sensing.env_sigma_rh_pct");
        });
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Returns true if the file set duty parameters (the battery cold-start
/// default must then be recomputed) and whether it set cold_start explicitly.
void apply_config_file(SimulationConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    const auto keys = config_keys();

    bool duty_touched = false;
    bool cold_start_set = false;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = section + "." + trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto it = std::find_if(keys.begin(), keys.end(),
                                     [&](const ConfigKey& k) { return key == k.name; });
        if (it == keys.end()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        it->apply(cfg, value);
        if (key.rfind("duty.", 0) == 0) duty_touched = true;
        if (key == "battery.cold_start_threshold_j") cold_start_set = true;
    }
    if (duty_touched && !cold_start_set) {
        cfg.battery.cold_start_threshold_j = one_cycle_energy(cfg.duty);
    }
}

int run_simulate(SimulationConfig cfg) {
    const RunReport report = run(cfg);
    write_report(report, cfg.out_dir);
    std::cout << report.summary_text();
    std::cout << "report written to " << cfg.out_dir << "\n";
    return 0;
}

}  // namespace

std::string config_reference_text() {
    std::ostringstream out;
    out << "Configuration reference (INI sections, key = value)\n\n";
    std::string last_section;
    for (const auto& k : config_keys()) {
        const std::string name = k.name;
        const auto dot = name.find('.');
        const std::string section = name.substr(0, dot);
        if (section != last_section) {
            out << "[" << section << "]\n";
            last_section = section;
        }
        out << "  " << name.substr(dot + 1) << " = " << k.default_text << "\n      " << k.doc
            << "\n";
    }
    return out.str();
}

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"battery-less multi-source energy-harvesting sensor node simulator"};
    app.require_subcommand(0, 1);
    bool show_reference = false;
    app.add_flag("--config-reference", show_reference,
                 "print every configuration key with its default and exit");

    // ---- budget ----
    auto* budget_cmd = app.add_subcommand("budget", "print the closed-form daily energy ledger");
    bool budget_json = false;
    std::string budget_out;
    budget_cmd->add_flag("--json", budget_json, "emit JSON instead of the text table");
    budget_cmd->add_option("--out", budget_out, "write to a file instead of stdout");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "run a simulation and write a report directory");
    std::string sim_scenario, sim_trace, sim_out, sim_mode, sim_config, sim_topology;
    int sim_days = 1;
    std::uint32_t sim_nodes = 1;
    std::int64_t sim_seed = -1;
    double sim_fixed_dt = 0.25;
    double sim_initial_soc = 0.0;
    sim_cmd->add_option("--scenario", sim_scenario, "canonical scenario name");
    sim_cmd->add_option("--trace", sim_trace, "trace CSV file");
    sim_cmd->add_option("--days,-d", sim_days, "simulated days")->default_val(1);
    sim_cmd->add_option("--seed,-s", sim_seed, "master seed");
    sim_cmd->add_option("--out,-o", sim_out, "report directory")->required();
    sim_cmd->add_option("--nodes,-n", sim_nodes, "node count")->default_val(1);
    sim_cmd->add_option("--mode", sim_mode, "event (default) or fixed-step");
    sim_cmd->add_option("--fixed-dt", sim_fixed_dt, "fixed-step timestep")->default_val(0.25);
    sim_cmd->add_option("--initial-soc", sim_initial_soc, "state of charge at t = 0 [J]")
        ->default_val(0.0);
    sim_cmd->add_option("--topology", sim_topology, "star (default) or relay-chain");
    sim_cmd->add_option("--config,-c", sim_config, "INI configuration file");

    // ---- gen-trace ----
    auto* gen_cmd = app.add_subcommand("gen-trace", "generate a scenario trace CSV");
    std::string gen_scenario, gen_out;
    std::uint64_t gen_seed = 1;
    gen_cmd->add_option("--scenario", gen_scenario, "scenario name")->required();
    gen_cmd->add_option("--seed,-s", gen_seed, "generator seed")->default_val(1);
    gen_cmd->add_option("--out,-o", gen_out, "output CSV path")->required();

    // ---- calibrate ----
    auto* cal_cmd = app.add_subcommand("calibrate", "fit a compensation quartic from a grid CSV");
    std::string cal_grid, cal_species, cal_out;
    cal_cmd->add_option("--grid", cal_grid, "calibration grid CSV")->required();
    cal_cmd->add_option("--species", cal_species, "gas species (CO, NO2, H2S, NH3, NO, Cl2)")
        ->required();
    cal_cmd->add_option("--out,-o", cal_out, "output polynomial JSON")->required();

    // ---- report ----
    auto* rep_cmd = app.add_subcommand("report", "summarize a previously written run directory");
    std::string rep_dir;
    rep_cmd->add_option("--run", rep_dir, "report directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (show_reference) {
            std::cout << config_reference_text();
            return 0;
        }
        if (budget_cmd->parsed()) {
            const EnergyLedger ledger = full_ledger(DutyCycleConfig{}, HarvesterSet::defaults());
            const std::string text = budget_json ? render_ledger_json(ledger) + "\n"
                                                 : render_ledger_text(ledger);
            if (budget_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(budget_out);
                if (!out) throw IoError("cannot write " + budget_out);
                out << text;
            }
            return 0;
        }
        if (sim_cmd->parsed()) {
            if (sim_scenario.empty() == sim_trace.empty()) {
                std::cerr << "simulate: exactly one of --scenario or --trace is required\n";
                return 1;
            }
            SimulationConfig cfg =
                sim_scenario.empty() ? SimulationConfig{} : scenario_preset(sim_scenario);
            if (!sim_trace.empty()) cfg.trace_path = sim_trace;
            if (!sim_config.empty()) apply_config_file(cfg, sim_config);
            cfg.days = sim_days;
            cfg.node_count = sim_nodes;
            if (sim_seed >= 0) cfg.seed = static_cast<std::uint64_t>(sim_seed);
            if (!sim_mode.empty()) cfg.mode = engine_mode_from_name(sim_mode);
            cfg.fixed_dt_s = sim_fixed_dt;
            cfg.initial_soc_j = sim_initial_soc;
            if (!sim_topology.empty()) {
                if (sim_topology == "star") cfg.topology.mode = Topology::Mode::Star;
                else if (sim_topology == "relay-chain") cfg.topology.mode = Topology::Mode::RelayChain;
                else throw ConfigError("unknown topology '" + sim_topology + "'");
            }
            cfg.out_dir = sim_out;
            return run_simulate(std::move(cfg));
        }
        if (gen_cmd->parsed()) {
            const EnvTrace trace = make_scenario_trace(gen_scenario, gen_seed);
            write_trace_file(trace, gen_out);
            std::cout << "wrote " << trace.samples.size() << " samples to " << gen_out << "\n";
            return 0;
        }
        if (cal_cmd->parsed()) {
            const auto grids = read_calibration_grid_file(cal_grid);
            const GasSpecies species = species_from_name(cal_species);
            const auto it = grids.find(species);
            if (it == grids.end()) {
                throw ConfigError("grid has no rows for species " + cal_species);
            }
            const SensorSpec spec = SensorSpec::default_for(species);
            const CompensationFit fit = fit_compensation(spec, it->second);
            nlohmann::json j;
            j["species"] = species_name(species);
            j["coefficients"] = fit.poly.c;
            j["max_residual_ppm"] = fit.max_residual_ppm;
            j["grid_points"] = it->second.size();
            std::ofstream out(cal_out);
            if (!out) throw IoError("cannot write " + cal_out);
            out << j.dump(2) << "\n";
            std::cout << "fit written to " << cal_out << " (max residual " << fit.max_residual_ppm
                      << " ppm)\n";
            return 0;
        }
        if (rep_cmd->parsed()) {
            std::ifstream in(rep_dir + "/report.json");
            if (!in) throw IoError("cannot open " + rep_dir + "/report.json");
            const nlohmann::json j = nlohmann::json::parse(in);
            std::cout << "run: " << j["config"]["scenario"].get<std::string>() << ", "
                      << j["config"]["days"].get<int>() << " day(s), "
                      << j["config"]["node_count"].get<unsigned>() << " node(s)\n";
            for (const auto& n : j["nodes"]) {
                std::cout << "  node " << n["node_id"].get<unsigned>() << ": cycles "
                          << n["cycles_completed"].get<std::uint64_t>() << ", delivered "
                          << n["packets_delivered"].get<std::uint64_t>() << "/"
                          << n["packets_sent"].get<std::uint64_t>() << ", soc "
                          << n["audit"]["soc_end_j"].get<double>() << " J\n";
            }
            std::cout << "  ledger margin: " << j["ledger"]["margin_j_per_day"].get<double>()
                      << " J/day\n";
            return 0;
        }
        std::cerr << app.help();
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed report: " << e.what() << "\n";
        return 2;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args);
}

}  // namespace ehsim
