#include "ehsim/network.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "json.hpp"

namespace ehsim {

double LinkModel::effective_loss() const {
    return std::clamp(base_loss_probability * noise_multiplier / coding_gain, 0.0, 1.0);
}

void LinkModel::validate() const {
    require_fraction(base_loss_probability, "link base_loss_probability");
    if (!(noise_multiplier >= 1.0)) throw std::invalid_argument("link noise_multiplier must be >= 1");
    if (!(coding_gain >= 1.0)) throw std::invalid_argument("link coding_gain must be >= 1");
    if (max_retries < 0) throw std::invalid_argument("link max_retries must be >= 0");
    require_nonnegative(retry_duration_s, "link retry_duration_s");
}

LinkModel LinkModel::lossless() {
    LinkModel l;
    l.base_loss_probability = 0.0;
    return l;
}

TransmitOutcome transmit(Packet& packet, const LinkModel& link, double transmit_power_w,
                         RngStream& rng) {
    const double p = link.effective_loss();
    TransmitOutcome out;
    const int max_attempts = 1 + link.max_retries;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        out.attempts_used = attempt;
        // p == 0 must never consume a draw differently from p > 0, so the
        // draw happens unconditionally.
        const bool lost = rng.uniform01() < p;
        if (!lost) {
            out.delivered = true;
            break;
        }
    }
    packet.attempts = out.attempts_used;
    out.extra_energy_j = (out.attempts_used - 1) * link.retry_duration_s * transmit_power_w;
    return out;
}

void GatewayState::note_sent(std::uint32_t node_id) { per_node[node_id].sent += 1; }

bool GatewayState::ingest(const Packet& packet, double timestamp_s, double latency_s) {
    auto& stats = per_node[packet.node_id];
    if (!seen_.insert({packet.node_id, packet.sequence}).second) {
        stats.duplicates += 1;
        return false;
    }
    stats.delivered += 1;
    stats.latency_sum_s += latency_s;
    received.push_back({timestamp_s, packet});
    return true;
}

const char* topology_mode_name(Topology::Mode m) {
    return m == Topology::Mode::Star ? "star" : "relay-chain";
}

namespace {
std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}
}  // namespace

void export_gateway(const GatewayState& gateway, std::ostream& out, ExportFormat format) {
    if (format == ExportFormat::Csv) {
        out << kExportCsvHeader << '\n';
        for (const auto& rec : gateway.received) {
            const Measurement& m = rec.packet.payload;
            out << fmt9(m.timestamp_s) << ',' << rec.packet.node_id << ',' << rec.packet.sequence;
            for (double ppm : m.ppm) out << ',' << fmt9(ppm);
            out << ',' << fmt9(m.temperature_c) << ',' << fmt9(m.rh_pct) << ',' << fmt9(m.soc_j)
                << '\n';
        }
        return;
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : gateway.received) {
        const Measurement& m = rec.packet.payload;
        arr.push_back({{"timestamp_s", m.timestamp_s},
                       {"node_id", rec.packet.node_id},
                       {"seq", rec.packet.sequence},
                       {"co_ppm", m.ppm[0]},
                       {"no2_ppm", m.ppm[1]},
                       {"h2s_ppm", m.ppm[2]},
                       {"nh3_ppm", m.ppm[3]},
                       {"no_ppm", m.ppm[4]},
                       {"cl2_ppm", m.ppm[5]},
                       {"temp_c", m.temperature_c},
                       {"rh_pct", m.rh_pct},
                       {"soc_j", m.soc_j}});
    }
    out << arr.dump(2) << '\n';
}

void export_gateway_file(const GatewayState& gateway, const std::string& path,
                         ExportFormat format) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write export file: " + path);
    export_gateway(gateway, out, format);
    if (!out.good()) throw IoError("write failed: " + path);
}

}  // namespace ehsim
