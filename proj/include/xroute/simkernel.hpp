#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xroute/multipath.hpp"
#include "xroute/relaynet.hpp"
#include "xroute/rng.hpp"
#include "xroute/topology.hpp"

namespace xroute {

enum class SimMode { Hub, XRoute };

/// Deterministic discrete-event simulation: chains are block-producing FIFO
/// queues, relayer actions execute when their transaction is included in a
/// block, all delay comes from block intervals and queueing.
struct SimConfig {
    std::uint64_t seed = 0;
    double duration_ms = 0.0;
    double workload_rate_per_s = 0.0;  // Poisson packet arrivals
    double zipf_exponent = 1.0;        // path popularity
    std::vector<std::pair<ChainId, ChainId>> path_population;
    std::string policy_constraints;  // "nakamoto:8,validators:4" style, empty = none
    int max_hops = 4;
    double timeout_ms = 1'000'000.0;  // per-packet delivery deadline
    ChainId hub_chain;                // hub mode only
    bool record_events = false;
    bool track_relayer_tasks = false;
    bool congestion_aware_routing = true;  // spread load over compliant routes
    bool approve_routes = true;  // relayer-quorum flag stamped on packets
    std::vector<PreferencePolicy> packet_preference;  // attached to every packet
    std::optional<MultipathConfig> multipath;
    std::map<ChainId, std::int64_t> block_time_override_ms;
    std::map<ChainId, std::int64_t> capacity_override;
    std::size_t max_packets = 0;  // stop generating after this many arrivals (0 = no cap)
};

struct PacketTrace {
    std::string packet_id;
    double committed_at_ms = -1.0;
    double delivered_at_ms = -1.0;
    double acked_at_ms = -1.0;
    std::vector<ChainId> hops;

    bool delivered() const { return delivered_at_ms >= 0.0; }
};

struct SimEvent {
    double time_ms = 0.0;
    std::string kind;
    ChainId chain;
    std::string packet_id;
    std::string detail;
};

struct SimResult {
    std::vector<PacketTrace> traces;  // one per packet, arrival order
    std::vector<SimEvent> events;     // populated when record_events is set
    std::size_t arrivals = 0;
    std::size_t delivered = 0;
    std::size_t timed_out = 0;
    std::size_t in_flight = 0;
    std::map<ChainId, std::size_t> final_mempool;
    std::map<ChainId, std::size_t> max_mempool;
    std::size_t capacity_violations = 0;  // stays zero; blocks never exceed capacity
    std::size_t verify_rejects = 0;
    std::size_t failed_packets = 0;
};

/// Samples index i (0-based) with probability proportional to 1/(i+1)^s.
class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double s);
    std::size_t sample(Rng& rng) const;
    /// Probability of 1-based rank.
    double probability(std::size_t rank) const;

private:
    std::vector<double> cdf_;
};

struct LatencyStats {
    std::size_t total = 0;
    std::size_t delivered = 0;
    double delivered_fraction = 0.0;
    bool defined = false;  // false when nothing was delivered
    double mean_ms = 0.0;
    double median_ms = 0.0;  // nearest-rank
    double p95_ms = 0.0;     // nearest-rank
};

LatencyStats latency_stats(const std::vector<PacketTrace>& traces);

SimResult run(const SimConfig& cfg, const Topology& topo, RelayerNetworkState& relay_net,
              SimMode mode);

/// One relayer per chain at minimum stake; covers every chain so any route
/// decomposes.
RelayerNetworkState default_relayer_network(const Topology& topo,
                                            RelayerNetworkParams params = {});

}  // namespace xroute
