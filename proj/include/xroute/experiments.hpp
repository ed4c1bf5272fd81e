#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xroute/policy.hpp"
#include "xroute/topology.hpp"

namespace xroute {

// -- constant-product pools --------------------------------------------------

/// x*y = k pool; k cached from the reserves.
struct Pool {
    ChainId chain_id;
    double reserve_x = 0.0;
    double reserve_y = 0.0;
    double k = 0.0;
};

Pool make_pool(ChainId chain_id, double reserve_x, double reserve_y);

/// Output for swapping dx of X into the pool: reserve_y * dx / (reserve_x + dx).
double swap_out(const Pool& pool, double dx);
Pool apply_swap(const Pool& pool, double dx);

/// Allocation across pools summing to total_dx that maximizes total output,
/// by marginal-price equalization (water-filling); components are >= 0.
std::vector<double> split_trade(const std::vector<Pool>& pools, double total_dx);
double split_output(const std::vector<Pool>& pools, const std::vector<double>& allocation);

// -- connectivity ------------------------------------------------------------

enum class ConnectivityMode { Direct, Hub, Multihop };

struct ConnectivityResult {
    ConnectivityMode mode = ConnectivityMode::Direct;
    int nc_threshold = 0;
    int max_hops = 0;
    double connected_fraction = 0.0;
};

/// Fraction of ordered distinct chain pairs with a route. Direct: an edge
/// exists. Hub: both endpoints adjacent to the hub and the hub meets the
/// threshold (pairs involving the hub itself are excluded). Multihop: a
/// policy-compliant route within max_hops exists under MinNakamoto(threshold).
ConnectivityResult connectivity(const Topology& t, ConnectivityMode mode, int nc_threshold,
                                int max_hops, const ChainId& hub = {});

/// (k, connected multihop fraction) for k = 0..k_max chains of highest degree
/// removed; when upgraded, upgrade_topology(t, seed, upgrade_min_nc) runs
/// first.
std::vector<std::pair<int, double>> decentralization_curve(const Topology& t, int hops, int k_max,
                                                           bool upgraded, std::uint64_t seed,
                                                           int nc_threshold,
                                                           int upgrade_min_nc = 6);

// -- gas cost model -----------------------------------------------------------

struct CostConfig {
    std::int64_t base_delivery_gas = 150'000;
    std::int64_t policy_gas_per_validator = 15'459;
    double gas_price = 0.025;
    double usd_per_gas_token = 1.0;
};

struct CostBreakdown {
    std::int64_t delivery_gas = 0;
    std::int64_t policy_gas = 0;   // policy_gas_per_validator * hops * validators_per_hop
    double setup_gas = 0.0;        // channel handshake, amortized
    double total_gas = 0.0;
    double usd = 0.0;
};

CostBreakdown cost_model(int hops, int validators_per_hop, int amortize_over = 1,
                         bool include_setup = false, const CostConfig& cfg = {});

// -- cross-chain stableswap ----------------------------------------------------

struct SwapCurveRow {
    int hop_limit = 0;  // -1 = unified (all pools)
    double trade_size = 0.0;
    double output = 0.0;
};

/// For each hop limit, restricts pools to chains reachable from `local`
/// within that many hops via policy-compliant routes, then applies the
/// optimal split per trade size. hop_limit -1 uses every pool.
std::vector<SwapCurveRow> stableswap_curve(const Topology& t, const std::vector<Pool>& pools,
                                           const ChainId& local, const std::vector<int>& hop_limits,
                                           const std::vector<double>& trade_sizes,
                                           const PolicySet& ps = {});

// -- bundled synthetic topologies ----------------------------------------------

/// Equal-power validator set sized so the Nakamoto coefficient is exactly
/// target_nc.
ValidatorSet make_validator_set(const std::string& prefix, int target_nc);

Topology make_line_topology(int n, int target_nc = 4);
Topology make_star_topology(int leaves, int hub_nc = 8, int leaf_nc = 2);

/// Preferential-attachment graph: node degree-biased attachment with
/// configurable exponent; validator sets sized by degree rank so larger hubs
/// carry higher Nakamoto coefficients.
Topology make_scale_free_topology(int n, int edges_per_node, std::uint64_t seed,
                                  double attach_exponent = 1.0);

/// Scalability fixture: `endpoints` chains each connected to one hub and to
/// `intermediates` parallel relay chains. Endpoint capacity is scaled up so
/// the relay layer is the measured bottleneck.
struct ScalabilityFixture {
    Topology topology;
    std::vector<std::pair<ChainId, ChainId>> paths;
    ChainId hub;
};

ScalabilityFixture make_scalability_fixture(int endpoints, int intermediates,
                                            std::int64_t relay_capacity_tx_per_block,
                                            std::int64_t block_time_ms);

/// Swap fixture: a line of chains with one USDT/USDC pool each, liquidity
/// concentrated on the local (first) chain and decaying along the line.
struct SwapFixture {
    Topology topology;
    std::vector<Pool> pools;
    ChainId local;
};

SwapFixture make_swap_fixture(int chains, double total_liquidity);

}  // namespace xroute
