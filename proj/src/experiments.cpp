#include "xroute/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xroute/errors.hpp"
#include "xroute/rng.hpp"
#include "xroute/routing.hpp"

namespace xroute {

Pool make_pool(ChainId chain_id, double reserve_x, double reserve_y) {
    if (reserve_x <= 0.0 || reserve_y <= 0.0) throw ConfigError("pool reserves must be positive");
    Pool p;
    p.chain_id = std::move(chain_id);
    p.reserve_x = reserve_x;
    p.reserve_y = reserve_y;
    p.k = reserve_x * reserve_y;
    return p;
}

double swap_out(const Pool& pool, double dx) {
    if (dx < 0.0) throw ConfigError("swap input must be non-negative");
    return pool.reserve_y * dx / (pool.reserve_x + dx);
}

Pool apply_swap(const Pool& pool, double dx) {
    const double out = swap_out(pool, dx);
    return make_pool(pool.chain_id, pool.reserve_x + dx, pool.reserve_y - out);
}

std::vector<double> split_trade(const std::vector<Pool>& pools, double total_dx) {
    if (pools.empty()) throw ConfigError("split_trade needs at least one pool");
    if (total_dx < 0.0) throw ConfigError("trade size must be non-negative");
    std::vector<double> alloc(pools.size(), 0.0);
    if (total_dx == 0.0) return alloc;
    if (pools.size() == 1) {
        alloc[0] = total_dx;
        return alloc;
    }

    // Marginal output of pool i at input d is k_i / (x_i + d)^2, which starts
    // at the spot price y_i/x_i and decreases. At the optimum all funded
    // pools share one marginal value lambda, giving d_i = sqrt(k_i/lambda) - x_i.
    std::vector<std::size_t> order(pools.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = pools[a].reserve_y / pools[a].reserve_x;
        const double sb = pools[b].reserve_y / pools[b].reserve_x;
        if (sa != sb) return sa > sb;
        return a < b;
    });

    double sum_sqrt_k = 0.0;
    double sum_x = 0.0;
    std::size_t active = 0;
    double lambda = 0.0;
    for (std::size_t s = 0; s < order.size(); ++s) {
        sum_sqrt_k += std::sqrt(pools[order[s]].k);
        sum_x += pools[order[s]].reserve_x;
        const double root = sum_sqrt_k / (total_dx + sum_x);
        lambda = root * root;
        active = s + 1;
        if (s + 1 == order.size()) break;
        const Pool& next = pools[order[s + 1]];
        if (next.reserve_y / next.reserve_x <= lambda) break;  // next pool stays unfunded
    }

    double assigned = 0.0;
    for (std::size_t s = 0; s < active; ++s) {
        const Pool& p = pools[order[s]];
        const double d = std::max(0.0, std::sqrt(p.k / lambda) - p.reserve_x);
        alloc[order[s]] = d;
        assigned += d;
    }
    if (assigned > 0.0) {
        const double scale = total_dx / assigned;  // absorb floating-point drift
        for (double& d : alloc) d *= scale;
    } else {
        alloc[order[0]] = total_dx;
    }
    return alloc;
}

double split_output(const std::vector<Pool>& pools, const std::vector<double>& allocation) {
    if (pools.size() != allocation.size()) throw ConfigError("allocation size mismatch");
    double out = 0.0;
    for (std::size_t i = 0; i < pools.size(); ++i) out += swap_out(pools[i], allocation[i]);
    return out;
}

namespace {

bool multihop_connected(const Topology& t, const ChainId& src, const ChainId& dst,
                        const PolicySet& ps, int max_hops) {
    try {
        compute_route(t, src, dst, ps, RoutingObjective::MinHops, max_hops);
        return true;
    } catch (const NoRoute&) {
        return false;
    }
}

}  // namespace

ConnectivityResult connectivity(const Topology& t, ConnectivityMode mode, int nc_threshold,
                                int max_hops, const ChainId& hub) {
    ConnectivityResult res;
    res.mode = mode;
    res.nc_threshold = nc_threshold;
    res.max_hops = max_hops;

    std::vector<ChainId> ids;
    for (const auto& [id, _] : t.chains()) ids.push_back(id);

    std::size_t connected = 0;
    std::size_t pairs = 0;
    switch (mode) {
        case ConnectivityMode::Direct: {
            for (const auto& s : ids)
                for (const auto& d : ids) {
                    if (s == d) continue;
                    pairs += 1;
                    if (t.connected(s, d)) connected += 1;
                }
            break;
        }
        case ConnectivityMode::Hub: {
            if (hub.empty() || !t.has_chain(hub)) throw ConfigError("hub mode requires a hub chain");
            const bool hub_ok =
                nakamoto_coefficient(t.chain(hub).validator_set) >= nc_threshold;
            for (const auto& s : ids)
                for (const auto& d : ids) {
                    if (s == d || s == hub || d == hub) continue;
                    pairs += 1;
                    if (hub_ok && t.connected(s, hub) && t.connected(hub, d)) connected += 1;
                }
            break;
        }
        case ConnectivityMode::Multihop: {
            PolicySet ps;
            ps.security.push_back({SecurityKind::MinNakamoto, nc_threshold});
            for (const auto& s : ids)
                for (const auto& d : ids) {
                    if (s == d) continue;
                    pairs += 1;
                    if (multihop_connected(t, s, d, ps, max_hops)) connected += 1;
                }
            break;
        }
    }
    res.connected_fraction = pairs == 0 ? 0.0 : static_cast<double>(connected) / pairs;
    return res;
}

std::vector<std::pair<int, double>> decentralization_curve(const Topology& t, int hops, int k_max,
                                                           bool upgraded, std::uint64_t seed,
                                                           int nc_threshold, int upgrade_min_nc) {
    if (k_max >= static_cast<int>(t.chains().size()))
        throw ConfigError("k_max must be below the chain count");
    const Topology base = upgraded ? upgrade_topology(t, seed, upgrade_min_nc) : t;
    std::vector<std::pair<int, double>> out;
    for (int k = 0; k <= k_max; ++k) {
        const Topology cut = remove_top_k(base, static_cast<std::size_t>(k));
        out.emplace_back(k,
                         connectivity(cut, ConnectivityMode::Multihop, nc_threshold, hops)
                             .connected_fraction);
    }
    return out;
}

CostBreakdown cost_model(int hops, int validators_per_hop, int amortize_over, bool include_setup,
                         const CostConfig& cfg) {
    if (hops < 1) throw ConfigError("hops must be at least 1");
    if (validators_per_hop < 0) throw ConfigError("validators_per_hop must be non-negative");
    if (amortize_over < 1) throw ConfigError("amortize_over must be at least 1");
    CostBreakdown out;
    out.delivery_gas = cfg.base_delivery_gas * hops;
    out.policy_gas = cfg.policy_gas_per_validator * hops * validators_per_hop;
    if (include_setup) {
        // 4-message handshake per channel end, one channel per hop.
        const double setup_total = 4.0 * static_cast<double>(cfg.base_delivery_gas) * hops;
        out.setup_gas = setup_total / static_cast<double>(amortize_over);
    }
    out.total_gas = static_cast<double>(out.delivery_gas) + static_cast<double>(out.policy_gas) +
                    out.setup_gas;
    out.usd = out.total_gas * cfg.gas_price * cfg.usd_per_gas_token;
    return out;
}

std::vector<SwapCurveRow> stableswap_curve(const Topology& t, const std::vector<Pool>& pools,
                                           const ChainId& local, const std::vector<int>& hop_limits,
                                           const std::vector<double>& trade_sizes,
                                           const PolicySet& ps) {
    if (!t.has_chain(local)) throw ConfigError("unknown local chain: " + local);
    std::vector<SwapCurveRow> rows;
    for (int h : hop_limits) {
        std::vector<Pool> reachable;
        for (const auto& p : pools) {
            if (!t.has_chain(p.chain_id)) throw ConfigError("pool on unknown chain: " + p.chain_id);
            if (h < 0 || p.chain_id == local) {
                reachable.push_back(p);
            } else if (h > 0 && multihop_connected(t, local, p.chain_id, ps, h)) {
                reachable.push_back(p);
            }
        }
        for (double trade : trade_sizes) {
            SwapCurveRow row;
            row.hop_limit = h;
            row.trade_size = trade;
            if (!reachable.empty())
                row.output = split_output(reachable, split_trade(reachable, trade));
            rows.push_back(row);
        }
    }
    return rows;
}

ValidatorSet make_validator_set(const std::string& prefix, int target_nc) {
    if (target_nc < 1) throw ConfigError("target Nakamoto coefficient must be at least 1");
    // With n equal validators the coefficient is floor(n/3) + 1, so
    // n = 3*target - 2 hits the target exactly.
    const int n = 3 * target_nc - 2;
    std::vector<Validator> vals;
    vals.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        vals.push_back({prefix + "-val" + std::to_string(i), 10});
    return ValidatorSet{std::move(vals)};
}

namespace {

std::string padded_id(const char* stem, int i) {
    std::string n = std::to_string(i);
    const std::size_t width = 3;
    return std::string(stem) + std::string(width > n.size() ? width - n.size() : 0, '0') + n;
}

Channel channel_for(const ChainId& a, const ChainId& b) {
    return Channel{"chan-" + a + "-" + b, a, b, "ics20-1"};
}

}  // namespace

Topology make_line_topology(int n, int target_nc) {
    if (n < 2) throw ConfigError("line topology needs at least 2 chains");
    std::vector<Chain> chains;
    std::vector<std::pair<ChainId, ChainId>> connections;
    std::vector<Channel> channels;
    for (int i = 0; i < n; ++i) {
        const std::string id = padded_id("c", i);
        chains.push_back(Chain{id, make_validator_set(id, target_nc), 1000, 0.025, 1.0, 1000});
    }
    for (int i = 0; i + 1 < n; ++i) {
        connections.emplace_back(padded_id("c", i), padded_id("c", i + 1));
        channels.push_back(channel_for(padded_id("c", i), padded_id("c", i + 1)));
    }
    return Topology{std::move(chains), std::move(connections), std::move(channels)};
}

Topology make_star_topology(int leaves, int hub_nc, int leaf_nc) {
    if (leaves < 1) throw ConfigError("star topology needs at least 1 leaf");
    std::vector<Chain> chains;
    std::vector<std::pair<ChainId, ChainId>> connections;
    std::vector<Channel> channels;
    chains.push_back(Chain{"hub", make_validator_set("hub", hub_nc), 1000, 0.025, 1.0, 1000});
    for (int i = 0; i < leaves; ++i) {
        const std::string id = padded_id("leaf", i);
        chains.push_back(Chain{id, make_validator_set(id, leaf_nc), 1000, 0.025, 1.0, 1000});
        connections.emplace_back(ChainId("hub"), id);
        channels.push_back(channel_for("hub", id));
    }
    return Topology{std::move(chains), std::move(connections), std::move(channels)};
}

Topology make_scale_free_topology(int n, int edges_per_node, std::uint64_t seed,
                                  double attach_exponent) {
    if (n < 3) throw ConfigError("scale-free topology needs at least 3 chains");
    if (edges_per_node < 1) throw ConfigError("edges_per_node must be at least 1");
    Rng rng(seed);

    const int m = std::min(edges_per_node, n - 1);
    std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
    auto link = [&](int a, int b) {
        adj[static_cast<std::size_t>(a)].insert(b);
        adj[static_cast<std::size_t>(b)].insert(a);
    };
    // Seed clique, then degree-biased attachment.
    for (int a = 0; a <= m; ++a)
        for (int b = a + 1; b <= m; ++b) link(a, b);
    for (int v = m + 1; v < n; ++v) {
        std::set<int> targets;
        while (static_cast<int>(targets.size()) < m) {
            double total = 0.0;
            for (int u = 0; u < v; ++u) {
                if (targets.count(u)) continue;
                total += std::pow(static_cast<double>(adj[static_cast<std::size_t>(u)].size()),
                                  attach_exponent);
            }
            double pickpoint = rng.uniform01() * total;
            int chosen = -1;
            for (int u = 0; u < v; ++u) {
                if (targets.count(u)) continue;
                pickpoint -= std::pow(static_cast<double>(adj[static_cast<std::size_t>(u)].size()),
                                      attach_exponent);
                if (pickpoint <= 0.0) {
                    chosen = u;
                    break;
                }
            }
            if (chosen < 0) chosen = v - 1;
            targets.insert(chosen);
        }
        for (int u : targets) link(v, u);
    }

    // Higher-degree chains get stronger validator sets: ranks split into
    // eight NC tiers from 8 down to 1.
    std::vector<int> by_degree(static_cast<std::size_t>(n));
    std::iota(by_degree.begin(), by_degree.end(), 0);
    std::stable_sort(by_degree.begin(), by_degree.end(), [&](int a, int b) {
        return adj[static_cast<std::size_t>(a)].size() > adj[static_cast<std::size_t>(b)].size();
    });
    std::vector<int> nc_of(static_cast<std::size_t>(n));
    for (int rank = 0; rank < n; ++rank) {
        const int tier = rank / std::max(1, n / 8);
        nc_of[static_cast<std::size_t>(by_degree[static_cast<std::size_t>(rank)])] =
            std::max(1, 8 - tier);
    }

    std::vector<Chain> chains;
    std::vector<std::pair<ChainId, ChainId>> connections;
    std::vector<Channel> channels;
    for (int i = 0; i < n; ++i) {
        const std::string id = padded_id("c", i);
        chains.push_back(Chain{id, make_validator_set(id, nc_of[static_cast<std::size_t>(i)]), 1000,
                               0.025, 1.0, 1000});
    }
    for (int a = 0; a < n; ++a)
        for (int b : adj[static_cast<std::size_t>(a)])
            if (a < b) {
                connections.emplace_back(padded_id("c", a), padded_id("c", b));
                channels.push_back(channel_for(padded_id("c", a), padded_id("c", b)));
            }
    return Topology{std::move(chains), std::move(connections), std::move(channels)};
}

ScalabilityFixture make_scalability_fixture(int endpoints, int intermediates,
                                            std::int64_t relay_capacity_tx_per_block,
                                            std::int64_t block_time_ms) {
    if (endpoints < 2 || intermediates < 1) throw ConfigError("fixture too small");
    if (relay_capacity_tx_per_block < 1 || block_time_ms < 1)
        throw ConfigError("bad fixture capacity or block time");
    std::vector<Chain> chains;
    std::vector<std::pair<ChainId, ChainId>> connections;
    std::vector<Channel> channels;

    const ChainId hub = "hub";
    chains.push_back(Chain{hub, make_validator_set(hub, 8), block_time_ms, 0.025, 1.0,
                           relay_capacity_tx_per_block});
    std::vector<ChainId> mids;
    for (int i = 0; i < intermediates; ++i) {
        const std::string id = padded_id("relay", i);
        mids.push_back(id);
        chains.push_back(Chain{id, make_validator_set(id, 8), block_time_ms, 0.025, 1.0,
                               relay_capacity_tx_per_block});
    }
    std::vector<ChainId> ends;
    for (int i = 0; i < endpoints; ++i) {
        const std::string id = padded_id("e", i);
        ends.push_back(id);
        // Endpoints are given ample capacity so that the relay layer, not the
        // endpoints, is the measured bottleneck.
        chains.push_back(Chain{id, make_validator_set(id, 3), block_time_ms, 0.025, 1.0,
                               relay_capacity_tx_per_block * 20});
    }
    for (const auto& e : ends) {
        connections.emplace_back(e, hub);
        channels.push_back(channel_for(e, hub));
        for (const auto& m : mids) {
            connections.emplace_back(e, m);
            channels.push_back(channel_for(e, m));
        }
    }
    std::vector<std::pair<ChainId, ChainId>> paths;
    for (int i = 0; i < endpoints; ++i)
        paths.emplace_back(ends[static_cast<std::size_t>(i)],
                           ends[static_cast<std::size_t>((i + endpoints / 2) % endpoints)]);
    return ScalabilityFixture{
        Topology{std::move(chains), std::move(connections), std::move(channels)},
        std::move(paths), hub};
}

SwapFixture make_swap_fixture(int chains, double total_liquidity) {
    if (chains < 1) throw ConfigError("swap fixture needs at least one chain");
    if (total_liquidity <= 0.0) throw ConfigError("total liquidity must be positive");
    // Local chain holds the largest share; the rest decays geometrically.
    std::vector<double> weights;
    double total_w = 0.0;
    for (int i = 0; i < chains; ++i) {
        weights.push_back(std::pow(0.7, i));
        total_w += weights.back();
    }
    std::vector<Pool> pools;
    for (int i = 0; i < chains; ++i) {
        const double share = total_liquidity * weights[static_cast<std::size_t>(i)] / total_w;
        pools.push_back(make_pool(padded_id("c", i), share / 2.0, share / 2.0));
    }
    return SwapFixture{make_line_topology(std::max(2, chains), 8), std::move(pools), "c000"};
}

}  // namespace xroute
