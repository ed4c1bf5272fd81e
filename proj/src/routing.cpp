#include "xroute/routing.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>

#include "xroute/errors.hpp"

namespace xroute {

namespace {

std::int64_t policy_gas_for(const Chain& c, const RoutingCostConfig& cfg) {
    return cfg.policy_gas_per_validator * static_cast<std::int64_t>(c.validator_set.size());
}

/// Per-edge cost of entering `v` (the non-source side of a hop).
double enter_cost(const Topology& t, const ChainId& v, bool is_destination, RoutingObjective obj,
                  const RoutingCostConfig& cfg) {
    const Chain& c = t.chain(v);
    switch (obj) {
        case RoutingObjective::MinHops:
            return 1.0;
        case RoutingObjective::MinFee: {
            const std::int64_t gas =
                cfg.delivery_gas + (is_destination ? 0 : policy_gas_for(c, cfg));
            return static_cast<double>(gas) * c.gas_price;
        }
        case RoutingObjective::MinLatency:
            return static_cast<double>(c.block_time_ms);
    }
    return 0.0;
}

/// Lowest channel id on edge (u, v) whose version constraints are implied by
/// ps (every constraint matched by a same-kind policy with threshold at least
/// as large). Empty id when no such channel exists.
std::string pick_channel(const Topology& t, const ChainId& u, const ChainId& v, const PolicySet& ps) {
    for (const Channel* ch : t.channels_between(u, v)) {
        const PolicySet channel_ps = parse_channel_version(ch->version);
        bool implied = true;
        for (const auto& need : channel_ps.security) {
            bool covered = false;
            for (const auto& have : ps.security)
                if (have.kind == need.kind && have.threshold >= need.threshold) covered = true;
            if (!covered) {
                implied = false;
                break;
            }
        }
        if (implied) return ch->channel_id;
    }
    return {};
}

Route finish_route(const Topology& t, std::vector<ChainId> hops, const PolicySet& ps,
                   const RoutingCostConfig& cfg) {
    Route r;
    r.hops = std::move(hops);
    r.channels.reserve(r.hops.size() - 1);
    for (std::size_t i = 0; i + 1 < r.hops.size(); ++i)
        r.channels.push_back(pick_channel(t, r.hops[i], r.hops[i + 1], ps));
    r.fee_estimate = route_fee(r, t, cfg);
    r.latency_estimate_ms = route_latency_ms(r, t);
    return r;
}

struct Label {
    double cost = 0.0;
    std::vector<ChainId> path;

    bool operator<(const Label& o) const {
        if (cost != o.cost) return cost < o.cost;
        if (path.size() != o.path.size()) return path.size() < o.path.size();
        return path < o.path;
    }
};

struct WorseLabel {
    bool operator()(const Label& a, const Label& b) const { return b < a; }
};

/// Uniform-cost search over (chain, edges-used) states. Weights are
/// non-negative and every edge adds one hop, so the (cost, hops, lex) order
/// is monotone under extension and the first destination pop is optimal.
/// Expansion allows revisits: a walk containing a cycle always has a strictly
/// larger label than its shortcut, so the popped optimum is a simple path,
/// while forbidding revisits under label dominance could prune the only
/// prefix whose continuation stays node-disjoint.
std::optional<std::vector<ChainId>> best_path(const Topology& t, const ChainId& src,
                                              const ChainId& dst, const PolicySet& ps,
                                              RoutingObjective obj, int max_hops,
                                              const RoutingCostConfig& cfg,
                                              const std::set<ChainId>& banned) {
    std::map<ChainId, bool> compliant;
    auto allowed_intermediate = [&](const ChainId& id) {
        auto it = compliant.find(id);
        if (it == compliant.end())
            it = compliant.emplace(id, chain_satisfies(ps, t.chain(id))).first;
        return it->second && banned.count(id) == 0;
    };

    std::priority_queue<Label, std::vector<Label>, WorseLabel> open;
    std::map<std::pair<ChainId, std::size_t>, Label> best;
    Label start{0.0, {src}};
    open.push(start);
    best[{src, 0}] = start;

    while (!open.empty()) {
        Label cur = open.top();
        open.pop();
        const ChainId& node = cur.path.back();
        const std::size_t edges = cur.path.size() - 1;
        auto it = best.find({node, edges});
        if (it != best.end() && it->second < cur) continue;  // superseded
        if (node == dst) return cur.path;
        if (static_cast<int>(edges) >= max_hops) continue;

        for (const ChainId& next : t.neighbors(node)) {
            if (next != dst && !allowed_intermediate(next)) continue;
            Label cand;
            cand.cost = cur.cost + enter_cost(t, next, next == dst, obj, cfg);
            cand.path = cur.path;
            cand.path.push_back(next);
            auto key = std::make_pair(next, edges + 1);
            auto bit = best.find(key);
            if (bit == best.end() || cand < bit->second) {
                best[key] = cand;
                open.push(std::move(cand));
            }
        }
    }
    return std::nullopt;
}

}  // namespace

double route_fee(const Route& r, const Topology& t, const RoutingCostConfig& cfg) {
    double fee = 0.0;
    for (std::size_t i = 1; i < r.hops.size(); ++i) {
        const Chain& c = t.chain(r.hops[i]);
        const bool is_destination = i + 1 == r.hops.size();
        const std::int64_t gas = cfg.delivery_gas + (is_destination ? 0 : policy_gas_for(c, cfg));
        fee += static_cast<double>(gas) * c.gas_price;
    }
    return fee;
}

double route_latency_ms(const Route& r, const Topology& t) {
    double latency = 0.0;
    for (std::size_t i = 1; i < r.hops.size(); ++i)
        latency += static_cast<double>(t.chain(r.hops[i]).block_time_ms);
    return latency;
}

Route compute_route(const Topology& t, const ChainId& src, const ChainId& dst, const PolicySet& ps,
                    RoutingObjective obj, int max_hops, const RoutingCostConfig& cfg) {
    if (src == dst) throw NoRoute("source equals destination");
    if (!t.has_chain(src)) throw NoRoute("unknown source chain: " + src);
    if (!t.has_chain(dst)) throw NoRoute("unknown destination chain: " + dst);
    if (max_hops < 1) throw NoRoute("max_hops must be at least 1");
    auto path = best_path(t, src, dst, ps, obj, max_hops, cfg, {});
    if (!path) throw NoRoute("no policy-compliant path from " + src + " to " + dst + " within " +
                             std::to_string(max_hops) + " hops");
    return finish_route(t, std::move(*path), ps, cfg);
}

std::vector<Route> enumerate_routes(const Topology& t, const ChainId& src, const ChainId& dst,
                                    const PolicySet& ps, int max_hops,
                                    const RoutingCostConfig& cfg) {
    std::vector<Route> out;
    if (!t.has_chain(src) || !t.has_chain(dst) || src == dst) return out;

    std::map<ChainId, bool> compliant;
    auto allowed = [&](const ChainId& id) {
        auto it = compliant.find(id);
        if (it == compliant.end())
            it = compliant.emplace(id, chain_satisfies(ps, t.chain(id))).first;
        return it->second;
    };

    std::vector<ChainId> path{src};
    std::set<ChainId> visited{src};
    std::function<void()> dfs = [&]() {
        const ChainId& node = path.back();
        if (node == dst) {
            out.push_back(finish_route(t, path, ps, cfg));
            return;
        }
        if (static_cast<int>(path.size()) - 1 >= max_hops) return;
        for (const ChainId& next : t.neighbors(node)) {
            if (visited.count(next)) continue;
            if (next != dst && !allowed(next)) continue;
            path.push_back(next);
            visited.insert(next);
            dfs();
            visited.erase(next);
            path.pop_back();
        }
    };
    dfs();
    std::sort(out.begin(), out.end(), [](const Route& a, const Route& b) {
        if (a.hops.size() != b.hops.size()) return a.hops.size() < b.hops.size();
        return a.hops < b.hops;
    });
    return out;
}

namespace {

double objective_value(const Route& r, const Topology& t, RoutingObjective obj,
                       const RoutingCostConfig& cfg) {
    switch (obj) {
        case RoutingObjective::MinHops: return static_cast<double>(r.hops.size() - 1);
        case RoutingObjective::MinFee: return route_fee(r, t, cfg);
        case RoutingObjective::MinLatency: return route_latency_ms(r, t);
    }
    return 0.0;
}

bool objective_less(const Route& a, const Route& b, const Topology& t, RoutingObjective obj,
                    const RoutingCostConfig& cfg) {
    const double va = objective_value(a, t, obj, cfg);
    const double vb = objective_value(b, t, obj, cfg);
    if (va != vb) return va < vb;
    if (a.hops.size() != b.hops.size()) return a.hops.size() < b.hops.size();
    return a.hops < b.hops;
}

std::set<ChainId> intermediates_of(const Route& r) {
    std::set<ChainId> out;
    for (std::size_t i = 1; i + 1 < r.hops.size(); ++i) out.insert(r.hops[i]);
    return out;
}

/// Largest pairwise-intermediate-disjoint subset, preferring objective order;
/// routes must already be sorted objective-best first.
std::vector<std::size_t> best_disjoint_subset(const std::vector<Route>& routes,
                                              std::size_t want) {
    std::vector<std::set<ChainId>> inters;
    inters.reserve(routes.size());
    for (const auto& r : routes) inters.push_back(intermediates_of(r));

    std::vector<std::size_t> best_pick;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t, std::set<ChainId>&)> go = [&](std::size_t i,
                                                                  std::set<ChainId>& used) {
        if (best_pick.size() >= want) return;
        if (pick.size() >= want || i == routes.size()) {
            if (pick.size() > best_pick.size()) best_pick = pick;
            if (pick.size() >= want) return;
            if (i == routes.size()) return;
        }
        if (pick.size() + (routes.size() - i) <= best_pick.size()) return;  // bound
        // take i if disjoint
        bool clash = false;
        for (const ChainId& c : inters[i])
            if (used.count(c)) clash = true;
        if (!clash) {
            for (const ChainId& c : inters[i]) used.insert(c);
            pick.push_back(i);
            go(i + 1, used);
            pick.pop_back();
            for (const ChainId& c : inters[i]) used.erase(c);
            if (best_pick.size() >= want) return;
        }
        go(i + 1, used);
    };
    std::set<ChainId> used;
    go(0, used);
    return best_pick;
}

}  // namespace

std::vector<Route> disjoint_routes(const Topology& t, const ChainId& src, const ChainId& dst,
                                   const PolicySet& ps, int n, int max_hops, RoutingObjective obj,
                                   const RoutingCostConfig& cfg) {
    if (n < 1) throw ConfigError("n must be at least 1");

    std::vector<Route> picked;
    std::set<ChainId> banned;
    std::set<std::vector<ChainId>> picked_hops;
    while (static_cast<int>(picked.size()) < n) {
        auto path = best_path(t, src, dst, ps, obj, max_hops, cfg, banned);
        if (!path) break;
        // A route without intermediates (the direct edge) cannot be excluded
        // by node bans; a repeat means greedy progress has stalled.
        if (!picked_hops.insert(*path).second) break;
        Route r = finish_route(t, std::move(*path), ps, cfg);
        for (const ChainId& c : intermediates_of(r)) banned.insert(c);
        picked.push_back(std::move(r));
    }
    if (static_cast<int>(picked.size()) == n) return picked;

    // Greedy fell short; retry exhaustively when the instance is small.
    std::vector<Route> all = enumerate_routes(t, src, dst, ps, max_hops, cfg);
    std::set<ChainId> pool;
    for (const auto& r : all)
        for (const ChainId& c : intermediates_of(r)) pool.insert(c);
    if (pool.size() <= 12) {
        std::sort(all.begin(), all.end(), [&](const Route& a, const Route& b) {
            return objective_less(a, b, t, obj, cfg);
        });
        const auto subset = best_disjoint_subset(all, static_cast<std::size_t>(n));
        if (static_cast<int>(subset.size()) >= n) {
            std::vector<Route> out;
            for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
                out.push_back(all[subset[i]]);
            return out;
        }
        throw InsufficientDisjointPaths(subset.size(),
                                        "only " + std::to_string(subset.size()) +
                                            " intermediate-disjoint routes exist, wanted " +
                                            std::to_string(n));
    }
    throw InsufficientDisjointPaths(picked.size(),
                                    "greedy found " + std::to_string(picked.size()) +
                                        " disjoint routes, wanted " + std::to_string(n));
}

}  // namespace xroute
