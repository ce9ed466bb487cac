#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ehsim/node.hpp"
#include "ehsim/rng.hpp"

namespace ehsim {

/// Probability-based lossy link. The spread-spectrum benefit appears as a
/// coding gain dividing the raw loss probability.
struct LinkModel {
    double base_loss_probability = 0.05;
    double noise_multiplier = 1.0;  // >= 1, raised in noisy scenarios
    double coding_gain = 4.0;       // >= 1
    int max_retries = 2;
    double retry_duration_s = 1.0;

    double effective_loss() const;
    void validate() const;

    static LinkModel lossless();
};

struct Packet {
    std::uint32_t node_id = 0;
    std::uint64_t sequence = 0;
    Measurement payload{};
    int size_bytes = 48;
    int attempts = 0;
};

struct TransmitOutcome {
    bool delivered = false;
    int attempts_used = 0;
    double extra_energy_j = 0.0;  // retry attempts * retry_duration * transmit power
};

/// Bernoulli success per attempt with probability 1 - effective_loss, up to
/// 1 + max_retries attempts. Retry energy is the caller's to withdraw.
TransmitOutcome transmit(Packet& packet, const LinkModel& link, double transmit_power_w,
                         RngStream& rng);

struct NodeLinkStats {
    std::uint64_t sent = 0;       // packets handed to the radio
    std::uint64_t delivered = 0;
    std::uint64_t duplicates = 0;
    double latency_sum_s = 0.0;   // transmit + retry time of delivered packets

    double prr() const { return sent == 0 ? 0.0 : static_cast<double>(delivered) / sent; }
};

struct ReceivedRecord {
    double ingest_time_s;
    Packet packet;
};

/// Single-owner accumulator; the engine serializes ingest in timestamp order.
struct GatewayState {
    std::vector<ReceivedRecord> received;  // deduplicated, ingest order
    std::map<std::uint32_t, NodeLinkStats> per_node;

    void note_sent(std::uint32_t node_id);
    /// Deduplicated insert; returns false (and counts a duplicate) when the
    /// (node, sequence) pair was already present.
    bool ingest(const Packet& packet, double timestamp_s, double latency_s = 0.0);

private:
    std::set<std::pair<std::uint32_t, std::uint64_t>> seen_;
};

struct Topology {
    enum class Mode { Star, RelayChain };
    Mode mode = Mode::Star;
    // RelayChain: nodes relay toward the gateway in node-id order, so a
    // packet from node k traverses k+1 hops and each relay pays one
    // transmission of energy per forwarded packet.
};

const char* topology_mode_name(Topology::Mode m);

enum class ExportFormat { Csv, Json };

inline constexpr const char* kExportCsvHeader =
    "timestamp_s,node_id,seq,co_ppm,no2_ppm,h2s_ppm,nh3_ppm,no_ppm,cl2_ppm,temp_c,rh_pct,soc_j";

void export_gateway(const GatewayState& gateway, std::ostream& out, ExportFormat format);
void export_gateway_file(const GatewayState& gateway, const std::string& path,
                         ExportFormat format);

}  // namespace ehsim
