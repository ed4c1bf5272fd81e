#include "xroute/multipath.hpp"

#include "xroute/errors.hpp"

namespace xroute {

MultipathConfig validated(MultipathConfig cfg) {
    if (cfg.n_paths < 1 || cfg.threshold < 1 || cfg.threshold > cfg.n_paths)
        throw ConfigError("multipath requires 1 <= M <= N");
    return cfg;
}

std::vector<Packet> fan_out(const Packet& pkt, const std::vector<Route>& routes) {
    if (routes.empty()) throw ContractViolation("fan_out needs at least one route");
    std::set<ChainId> seen;
    for (const auto& r : routes) {
        for (std::size_t i = 1; i + 1 < r.hops.size(); ++i) {
            if (!seen.insert(r.hops[i]).second)
                throw ContractViolation("routes share intermediate chain: " + r.hops[i]);
        }
        if (r.hops.front() != pkt.source || r.hops.back() != pkt.destination)
            throw ContractViolation("route endpoints do not match packet");
    }
    std::vector<Packet> copies;
    copies.reserve(routes.size());
    for (const auto& r : routes) {
        Packet copy = pkt;
        copy.route = r.hops;
        copies.push_back(std::move(copy));
    }
    return copies;
}

std::optional<DeliveryEvent> ReceiptCounter::record_receipt(
    std::size_t route_index, std::span<const std::uint8_t> verified_payload, double now_ms) {
    if (!seen_routes_.insert(route_index).second) return std::nullopt;  // replay on same route

    const Digest d = sha256(verified_payload);
    auto& count = counts_[d];
    count += 1;
    if (!payloads_.count(d))
        payloads_[d].assign(verified_payload.begin(), verified_payload.end());

    if (delivered_) {
        late_receipts_ += 1;
        return std::nullopt;
    }
    if (count >= threshold_) {
        delivered_ = true;
        delivered_digest_ = d;
        return DeliveryEvent{packet_id_, d, count, now_ms, payloads_[d]};
    }
    return std::nullopt;
}

int ReceiptCounter::count_for(const Digest& d) const {
    auto it = counts_.find(d);
    return it == counts_.end() ? 0 : it->second;
}

}  // namespace xroute
