#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "xroute/digest.hpp"
#include "xroute/lightclient.hpp"
#include "xroute/routing.hpp"

namespace xroute {

/// N-path / M-threshold transmission parameters. M > N/2 is required for the
/// corrupted-minority safety property; the simulator defaults to
/// M = floor(N/2) + 1.
struct MultipathConfig {
    int n_paths = 1;
    int threshold = 1;
};

MultipathConfig validated(MultipathConfig cfg);

/// Emitted when a payload digest reaches the receipt threshold.
struct DeliveryEvent {
    std::string packet_id;
    Digest delivered_digest{};
    int receipt_count = 0;
    double sim_time_ms = 0.0;
    std::vector<std::uint8_t> payload;
};

/// One packet copy per route, identical payload and packet_id. Routes must be
/// pairwise intermediate-disjoint (ContractViolation otherwise).
std::vector<Packet> fan_out(const Packet& pkt, const std::vector<Route>& routes);

/// Destination-side receipt counting per payload digest. Receipts must
/// already have passed proof verification on their own route; duplicates per
/// route are ignored and delivery fires at most once.
class ReceiptCounter {
public:
    ReceiptCounter(std::string packet_id, int threshold)
        : packet_id_(std::move(packet_id)), threshold_(threshold) {}

    std::optional<DeliveryEvent> record_receipt(std::size_t route_index,
                                                std::span<const std::uint8_t> verified_payload,
                                                double now_ms);

    bool delivered() const { return delivered_; }
    const std::optional<Digest>& delivered_digest() const { return delivered_digest_; }
    int count_for(const Digest& d) const;
    std::size_t late_receipts() const { return late_receipts_; }
    const std::string& packet_id() const { return packet_id_; }

private:
    std::string packet_id_;
    int threshold_;
    std::map<Digest, int> counts_;
    std::map<Digest, std::vector<std::uint8_t>> payloads_;
    std::set<std::size_t> seen_routes_;
    bool delivered_ = false;
    std::optional<Digest> delivered_digest_;
    std::size_t late_receipts_ = 0;
};

}  // namespace xroute
