#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xroute/policy.hpp"
#include "xroute/topology.hpp"

namespace xroute {

struct Route {
    std::vector<ChainId> hops;          // source .. destination
    std::vector<std::string> channels;  // one per edge; empty id when no compliant channel exists yet
    double fee_estimate = 0.0;          // gas-token units
    double latency_estimate_ms = 0.0;
};

enum class RoutingObjective { MinHops, MinFee, MinLatency };

struct RoutingCostConfig {
    std::int64_t delivery_gas = 150'000;        // base per-hop message cost
    std::int64_t policy_gas_per_validator = 15'459;  // destination-side evidence verification
};

/// Fee of r in gas-token units: for every non-source hop chain,
/// (delivery_gas + policy_gas) * gas_price, where policy_gas is
/// policy_gas_per_validator * |validator set| on intermediate (evidence
/// carrying) hops and zero on the destination.
double route_fee(const Route& r, const Topology& t, const RoutingCostConfig& cfg = {});

/// Latency of r: sum over edges of the entered chain's block time.
double route_latency_ms(const Route& r, const Topology& t);

/// Optimal policy-compliant route with at most max_hops edges. Ties broken by
/// fewer hops, then lexicographically smallest hop sequence. Throws NoRoute.
Route compute_route(const Topology& t, const ChainId& src, const ChainId& dst, const PolicySet& ps,
                    RoutingObjective obj, int max_hops, const RoutingCostConfig& cfg = {});

/// All simple policy-compliant paths with at most max_hops edges, sorted by
/// (hop count, lexicographic hops). Intended for small instances.
std::vector<Route> enumerate_routes(const Topology& t, const ChainId& src, const ChainId& dst,
                                    const PolicySet& ps, int max_hops,
                                    const RoutingCostConfig& cfg = {});

/// n routes pairwise sharing no intermediate chain, greedily preferring the
/// objective-best remaining route with an exhaustive fallback on small
/// instances. Throws InsufficientDisjointPaths (carrying the achievable
/// count) when fewer than n exist.
std::vector<Route> disjoint_routes(const Topology& t, const ChainId& src, const ChainId& dst,
                                   const PolicySet& ps, int n, int max_hops,
                                   RoutingObjective obj = RoutingObjective::MinHops,
                                   const RoutingCostConfig& cfg = {});

}  // namespace xroute
