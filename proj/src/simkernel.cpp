#include "xroute/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include "xroute/errors.hpp"
#include "xroute/lightclient.hpp"
#include "xroute/policy.hpp"
#include "xroute/routing.hpp"

namespace xroute {

ZipfSampler::ZipfSampler(std::size_t n, double s) {
    if (n < 1) throw ConfigError("zipf sampler needs at least one path");
    if (s <= 0.0) throw ConfigError("zipf exponent must be positive");
    cdf_.reserve(n);
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        acc += 1.0 / std::pow(static_cast<double>(i), s);
        cdf_.push_back(acc);
    }
    for (double& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
}

std::size_t ZipfSampler::sample(Rng& rng) const {
    const double u = rng.uniform01();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(it - cdf_.begin());
}

double ZipfSampler::probability(std::size_t rank) const {
    if (rank < 1 || rank > cdf_.size()) throw ConfigError("zipf rank out of range");
    return rank == 1 ? cdf_[0] : cdf_[rank - 1] - cdf_[rank - 2];
}

LatencyStats latency_stats(const std::vector<PacketTrace>& traces) {
    LatencyStats st;
    st.total = traces.size();
    std::vector<double> lat;
    for (const auto& t : traces) {
        if (!t.delivered()) continue;
        lat.push_back(t.delivered_at_ms - t.committed_at_ms);
    }
    st.delivered = lat.size();
    st.delivered_fraction = st.total == 0 ? 0.0 : static_cast<double>(st.delivered) / st.total;
    if (lat.empty()) return st;
    std::sort(lat.begin(), lat.end());
    double sum = 0.0;
    for (double v : lat) sum += v;
    st.defined = true;
    st.mean_ms = sum / static_cast<double>(lat.size());
    auto nearest_rank = [&](double p) {
        const auto n = static_cast<double>(lat.size());
        const auto rank = static_cast<std::size_t>(std::ceil(p * n));
        return lat[std::max<std::size_t>(rank, 1) - 1];
    };
    st.median_ms = nearest_rank(0.50);
    st.p95_ms = nearest_rank(0.95);
    return st;
}

RelayerNetworkState default_relayer_network(const Topology& topo, RelayerNetworkParams params) {
    RelayerNetworkState state(params);
    for (const auto& [id, _] : topo.chains())
        state.join("relayer-" + id, params.min_stake, {id});
    return state;
}

namespace {

constexpr std::int64_t kClientUpdateGas = 150'000;
constexpr std::int64_t kDeliverGas = 150'000;
constexpr std::int64_t kAckGas = 75'000;
constexpr std::size_t kClientRecordKeep = 32;  // provable client records kept per observed chain

struct Tx {
    enum class Kind { Commit, ClientUpdate, Deliver, Ack, HubRecv, HubForward, HubDeliver };
    Kind kind = Kind::Commit;
    std::uint32_t packet = 0;                 // primary packet (group head for Commit)
    ChainId observed;                         // ClientUpdate
    std::vector<std::uint32_t> subscribers;   // ClientUpdate
};

struct Event {
    double t = 0.0;
    int prio = 0;  // 0 = block, 1 = arrival/submission
    std::uint64_t seq = 0;
    enum class Kind { Block, Submit, Arrival } kind = Kind::Block;
    ChainId chain;
    std::size_t tx = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) return a.t > b.t;
        if (a.prio != b.prio) return a.prio > b.prio;
        return a.seq > b.seq;
    }
};

struct SimChain {
    const Chain* def = nullptr;
    double block_time = 0.0;
    std::int64_t capacity = 0;
    std::int64_t height = 0;
    std::deque<std::size_t> mempool;
    ProvableStore store;
    ClientStore clients;
    Digest validators_hash{};
    std::vector<std::string> pending_erases;  // applied at this chain's next block
    std::map<ChainId, std::deque<std::int64_t>> client_record_heights;
    std::size_t max_mempool_seen = 0;
};

struct RouteCandidate {
    std::vector<ChainId> hops;
    std::vector<ChainId> intermediates;
};

struct PacketRt {
    Packet pkt;
    std::size_t next_link = 0;
    ProofChain chain;
    std::vector<std::int64_t> relay_task_ids;
    double arrival = -1.0;
    bool failed = false;
    std::uint32_t group = 0;       // multipath group head (== own index when single)
    std::size_t route_index = 0;   // position within the group's route set
};

struct GroupRt {
    std::string packet_id;
    double committed = -1.0;
    double delivered = -1.0;
    double acked = -1.0;
    std::vector<ChainId> trace_hops;
    std::vector<std::uint32_t> members;
    std::optional<ReceiptCounter> counter;
    std::size_t outstanding = 0;  // members not yet acked or failed; commit pruned at zero
};

class Sim {
public:
    Sim(const SimConfig& cfg, const Topology& topo, RelayerNetworkState& relay_net, SimMode mode)
        : cfg_(cfg), topo_(topo), relay_net_(relay_net), mode_(mode), rng_(cfg.seed) {
        validate();
        build_chains();
        build_paths();
        if (cfg_.workload_rate_per_s > 0.0 && !cfg_.path_population.empty())
            zipf_.emplace(cfg_.path_population.size(), cfg_.zipf_exponent);
    }

    SimResult go();

private:
    void validate() const;
    void build_chains();
    void build_paths();

    void enqueue(Event ev) {
        ev.seq = next_seq_++;
        heap_.push(std::move(ev));
    }
    void submit_tx(const ChainId& chain, std::size_t tx, double now) {
        Event ev;
        ev.t = now;
        ev.prio = 1;
        ev.kind = Event::Kind::Submit;
        ev.chain = chain;
        ev.tx = tx;
        enqueue(std::move(ev));
    }
    std::size_t make_tx(Tx tx) {
        txs_.push_back(std::move(tx));
        return txs_.size() - 1;
    }

    void log(double t, const char* kind, const ChainId& chain, const std::string& pid,
             std::string detail = {}) {
        if (cfg_.record_events)
            events_.push_back({t, kind, chain, pid, std::move(detail)});
    }

    SimChain& chain_at(const ChainId& id) { return chains_.at(id); }

    void on_arrival(double now);
    void on_block(const ChainId& id, double now);
    void exec_tx(SimChain& c, const ChainId& cid, std::size_t tx_idx, double now);

    void start_pipeline(PacketRt& p, double now);
    void request_update(std::uint32_t pidx, double now);
    const ConsensusState& observe(SimChain& observer, const ChainId& observed_id);
    void finalize_link(std::uint32_t pidx, const ConsensusState& cs, SimChain& observed,
                       double now);

    void exec_commit(const ChainId& cid, Tx& tx, double now);
    void exec_client_update(SimChain& c, const ChainId& cid, Tx& tx, double now);
    void exec_deliver(SimChain& c, const ChainId& cid, Tx& tx, double now);
    void exec_ack(SimChain& c, Tx& tx, double now);
    void exec_hub_recv(SimChain& hub, Tx& tx, double now);
    void exec_hub_forward(SimChain& hub, Tx& tx, double now);
    void exec_hub_deliver(SimChain& dst, Tx& tx, double now);

    void mark_task_done(PacketRt& p, TaskKind kind, std::int64_t gas);
    void fail_packet(PacketRt& p, double now, const char* why);
    double effective_timeout(const PacketRt& p) const;

    const SimConfig& cfg_;
    const Topology& topo_;
    RelayerNetworkState& relay_net_;
    SimMode mode_;
    Rng rng_;
    PolicySet policy_;

    std::map<ChainId, SimChain> chains_;
    std::vector<std::vector<RouteCandidate>> path_routes_;        // xroute candidates per path
    std::vector<std::vector<std::vector<ChainId>>> path_disjoint_;  // multipath route sets
    std::optional<ZipfSampler> zipf_;

    std::vector<Tx> txs_;
    std::vector<PacketRt> packets_;
    std::vector<GroupRt> groups_;
    std::map<std::pair<ChainId, ChainId>, std::size_t> pending_updates_;  // (updater, observed) -> tx
    std::priority_queue<Event, std::vector<Event>, EventAfter> heap_;
    std::uint64_t next_seq_ = 0;
    std::size_t arrivals_ = 0;
    std::vector<SimEvent> events_;
    SimResult result_;
};

void Sim::validate() const {
    if (cfg_.duration_ms <= 0.0) throw ConfigError("duration must be positive");
    if (cfg_.workload_rate_per_s < 0.0) throw ConfigError("workload rate must be non-negative");
    if (cfg_.zipf_exponent <= 0.0) throw ConfigError("zipf exponent must be positive");
    if (cfg_.workload_rate_per_s > 0.0 && cfg_.path_population.empty())
        throw ConfigError("path population is empty");
    for (const auto& [s, d] : cfg_.path_population) {
        if (!topo_.has_chain(s) || !topo_.has_chain(d))
            throw ConfigError("path references unknown chain: " + s + " -> " + d);
        if (s == d) throw ConfigError("path source equals destination: " + s);
    }
    if (mode_ == SimMode::Hub) {
        if (cfg_.hub_chain.empty() || !topo_.has_chain(cfg_.hub_chain))
            throw ConfigError("hub mode requires an existing hub chain");
        for (const auto& [s, d] : cfg_.path_population) {
            if (s == cfg_.hub_chain || d == cfg_.hub_chain)
                throw ConfigError("hub mode paths must not start or end on the hub");
            if (!topo_.connected(s, cfg_.hub_chain) || !topo_.connected(cfg_.hub_chain, d))
                throw ConfigError("hub mode path lacks hub edges: " + s + " -> " + d);
        }
        if (cfg_.multipath) throw ConfigError("multipath applies to xroute mode only");
    }
    if (cfg_.multipath) validated(*cfg_.multipath);
}

void Sim::build_chains() {
    for (const auto& [id, def] : topo_.chains()) {
        SimChain c;
        c.def = &def;
        c.block_time = static_cast<double>(def.block_time_ms);
        if (auto it = cfg_.block_time_override_ms.find(id); it != cfg_.block_time_override_ms.end())
            c.block_time = static_cast<double>(it->second);
        c.capacity = def.capacity_tx_per_block;
        if (auto it = cfg_.capacity_override.find(id); it != cfg_.capacity_override.end())
            c.capacity = it->second;
        if (c.block_time <= 0.0 || c.capacity <= 0) throw ConfigError("bad chain overrides: " + id);
        c.clients = ClientStore{id};
        c.validators_hash = canonical_validator_hash(def.validator_set);
        chains_.emplace(id, std::move(c));
    }
}

void Sim::build_paths() {
    policy_ = PolicySet{};
    if (!cfg_.policy_constraints.empty())
        policy_.security = parse_security_constraints(cfg_.policy_constraints);

    path_routes_.resize(cfg_.path_population.size());
    path_disjoint_.resize(cfg_.path_population.size());
    if (mode_ == SimMode::Hub) return;

    for (std::size_t i = 0; i < cfg_.path_population.size(); ++i) {
        const auto& [src, dst] = cfg_.path_population[i];
        if (cfg_.multipath) {
            const auto routes = disjoint_routes(topo_, src, dst, policy_, cfg_.multipath->n_paths,
                                                cfg_.max_hops);
            for (const auto& r : routes) path_disjoint_[i].push_back(r.hops);
            continue;
        }
        auto routes = enumerate_routes(topo_, src, dst, policy_, cfg_.max_hops);
        if (routes.empty())
            throw ConfigError("no policy-compliant route for path " + src + " -> " + dst);
        if (routes.size() > 32) routes.resize(32);  // candidate cap; sorted best-first already
        for (const auto& r : routes) {
            RouteCandidate cand;
            cand.hops = r.hops;
            cand.intermediates.assign(r.hops.begin() + 1, r.hops.end() - 1);
            path_routes_[i].push_back(std::move(cand));
        }
    }
}

SimResult Sim::go() {
    for (const auto& [id, c] : chains_) {
        Event ev;
        ev.t = c.block_time;
        ev.prio = 0;
        ev.kind = Event::Kind::Block;
        ev.chain = id;
        if (ev.t <= cfg_.duration_ms) enqueue(std::move(ev));
    }
    if (cfg_.workload_rate_per_s > 0.0 && !cfg_.path_population.empty()) {
        Event ev;
        ev.t = rng_.exponential(cfg_.workload_rate_per_s / 1000.0);  // rate per ms
        ev.prio = 1;
        ev.kind = Event::Kind::Arrival;
        if (ev.t <= cfg_.duration_ms) enqueue(std::move(ev));
    }

    while (!heap_.empty()) {
        const Event ev = heap_.top();
        heap_.pop();
        switch (ev.kind) {
            case Event::Kind::Block: on_block(ev.chain, ev.t); break;
            case Event::Kind::Arrival: on_arrival(ev.t); break;
            case Event::Kind::Submit: {
                SimChain& c = chain_at(ev.chain);
                c.mempool.push_back(ev.tx);
                c.max_mempool_seen = std::max(c.max_mempool_seen, c.mempool.size());
                break;
            }
        }
    }

    // Horizon classification.
    result_.arrivals = arrivals_;
    for (const auto& g : groups_) {
        PacketTrace tr;
        tr.packet_id = g.packet_id;
        tr.committed_at_ms = g.committed;
        tr.delivered_at_ms = g.delivered;
        tr.acked_at_ms = g.acked;
        tr.hops = g.trace_hops;
        result_.traces.push_back(std::move(tr));
        if (g.delivered >= 0.0) {
            result_.delivered += 1;
        } else {
            const PacketRt& head = packets_[g.members.front()];
            const double arrival = head.arrival;
            if (arrival + effective_timeout(head) <= cfg_.duration_ms)
                result_.timed_out += 1;
            else
                result_.in_flight += 1;
        }
    }
    for (const auto& [id, c] : chains_) {
        result_.final_mempool[id] = c.mempool.size();
        result_.max_mempool[id] = c.max_mempool_seen;
    }
    result_.events = std::move(events_);
    return result_;
}

double Sim::effective_timeout(const PacketRt& p) const {
    for (const auto& pref : p.pkt.preference)
        if (pref.kind == PreferenceKind::Timeout) return pref.limit;
    return cfg_.timeout_ms;
}

void Sim::on_arrival(double now) {
    // Draw the next arrival first so the draw order is independent of the
    // packet construction path.
    const double dt = rng_.exponential(cfg_.workload_rate_per_s / 1000.0);
    if (now + dt <= cfg_.duration_ms &&
        (cfg_.max_packets == 0 || arrivals_ + 1 < cfg_.max_packets)) {
        Event ev;
        ev.t = now + dt;
        ev.prio = 1;
        ev.kind = Event::Kind::Arrival;
        enqueue(std::move(ev));
    }

    const std::size_t path = zipf_->sample(rng_);
    const auto& [src, dst] = cfg_.path_population[path];
    arrivals_ += 1;

    const auto group_idx = static_cast<std::uint32_t>(groups_.size());
    GroupRt group;
    group.packet_id = "p" + std::to_string(group_idx);

    Packet base;
    base.packet_id = group.packet_id;
    base.source = src;
    base.destination = dst;
    base.channel_version = encode_channel_version(policy_);
    base.preference = cfg_.packet_preference;
    base.route_approved = cfg_.approve_routes;
    base.payload.resize(32);
    for (std::size_t i = 0; i < 32; ++i)
        base.payload[i] = static_cast<std::uint8_t>((group_idx >> (8 * (i % 4))) ^ i);

    std::vector<std::vector<ChainId>> routes;
    if (mode_ == SimMode::Hub) {
        routes.push_back({src, cfg_.hub_chain, dst});
    } else if (cfg_.multipath) {
        routes = path_disjoint_[path];
        group.counter.emplace(group.packet_id, cfg_.multipath->threshold);
    } else {
        const auto& cands = path_routes_[path];
        std::size_t best = 0;
        if (cfg_.congestion_aware_routing && cands.size() > 1) {
            std::size_t best_load = SIZE_MAX;
            for (std::size_t i = 0; i < cands.size(); ++i) {
                std::size_t load = 0;
                for (const auto& mid : cands[i].intermediates)
                    load += chain_at(mid).mempool.size();
                if (load < best_load) {
                    best_load = load;
                    best = i;
                }
            }
        }
        routes.push_back(cands[best].hops);
    }

    group.trace_hops = routes.front();
    group.outstanding = routes.size();
    for (std::size_t ri = 0; ri < routes.size(); ++ri) {
        PacketRt p;
        p.pkt = base;
        p.pkt.route = routes[ri];
        p.arrival = now;
        p.group = group_idx;
        p.route_index = ri;
        group.members.push_back(static_cast<std::uint32_t>(packets_.size()));
        packets_.push_back(std::move(p));
    }
    groups_.push_back(std::move(group));

    // One commitment per packet id regardless of fan-out.
    const std::size_t tx = make_tx({Tx::Kind::Commit, groups_.back().members.front(), {}, {}});
    chain_at(src).mempool.push_back(tx);
    log(now, "arrival", src, groups_.back().packet_id);
}

void Sim::on_block(const ChainId& id, double now) {
    SimChain& c = chain_at(id);
    c.height += 1;
    for (const auto& key : c.pending_erases) c.store.erase(key);
    c.pending_erases.clear();

    const auto take = std::min<std::size_t>(c.mempool.size(), static_cast<std::size_t>(c.capacity));
    if (take > static_cast<std::size_t>(c.capacity)) result_.capacity_violations += 1;
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t tx_idx = c.mempool.front();
        c.mempool.pop_front();
        exec_tx(c, id, tx_idx, now);
    }
    c.max_mempool_seen = std::max(c.max_mempool_seen, c.mempool.size());

    const double next = now + c.block_time;
    if (next <= cfg_.duration_ms) {
        Event ev;
        ev.t = next;
        ev.prio = 0;
        ev.kind = Event::Kind::Block;
        ev.chain = id;
        enqueue(std::move(ev));
    }
}

void Sim::exec_tx(SimChain& c, const ChainId& cid, std::size_t tx_idx, double now) {
    Tx& tx = txs_[tx_idx];
    switch (tx.kind) {
        case Tx::Kind::Commit: exec_commit(cid, tx, now); break;
        case Tx::Kind::ClientUpdate: exec_client_update(c, cid, tx, now); break;
        case Tx::Kind::Deliver: exec_deliver(c, cid, tx, now); break;
        case Tx::Kind::Ack: exec_ack(c, tx, now); break;
        case Tx::Kind::HubRecv: exec_hub_recv(c, tx, now); break;
        case Tx::Kind::HubForward: exec_hub_forward(c, tx, now); break;
        case Tx::Kind::HubDeliver: exec_hub_deliver(c, tx, now); break;
    }
}

void Sim::mark_task_done(PacketRt& p, TaskKind kind, std::int64_t gas) {
    // Tasks complete in route order, so the first pending task of the kind is
    // the one that just executed.
    for (std::int64_t id : p.relay_task_ids) {
        const Task& t = relay_net_.tasks().at(id);
        if (t.status == TaskStatus::Pending && t.kind == kind) {
            relay_net_.complete_task(id, gas);
            return;
        }
    }
}

void Sim::fail_packet(PacketRt& p, double now, const char* why) {
    if (p.failed) return;
    p.failed = true;
    result_.failed_packets += 1;
    log(now, "failed", p.pkt.route.empty() ? ChainId{} : p.pkt.route.back(), p.pkt.packet_id, why);
    GroupRt& g = groups_[p.group];
    if (g.outstanding > 0 && --g.outstanding == 0 && mode_ != SimMode::Hub)
        chain_at(p.pkt.source).pending_erases.push_back(commitment_key(p.pkt.packet_id));
}

void Sim::start_pipeline(PacketRt& p, double now) {
    if (cfg_.track_relayer_tasks && mode_ == SimMode::XRoute) {
        Route r;
        r.hops = p.pkt.route;
        const auto tasks = relay_net_.decompose_packet(p.pkt, r, now);
        for (const auto& t : tasks) p.relay_task_ids.push_back(t.task_id);
    }
    request_update(groups_[p.group].members[p.route_index], now);
}

void Sim::exec_commit(const ChainId& cid, Tx& tx, double now) {
    GroupRt& g = groups_[packets_[tx.packet].group];
    SimChain& src = chain_at(cid);
    const Digest pd = payload_digest(packets_[tx.packet].pkt);
    src.store.put(commitment_key(g.packet_id), pd);
    g.committed = now;
    log(now, "commit", cid, g.packet_id);
    for (std::uint32_t member : g.members) {
        PacketRt& p = packets_[member];
        p.pkt.source_height = src.height;
        if (mode_ == SimMode::Hub) {
            const std::size_t t = make_tx({Tx::Kind::HubRecv, member, {}, {}});
            submit_tx(cfg_.hub_chain, t, now);
        } else {
            start_pipeline(p, now);
        }
    }
}

void Sim::request_update(std::uint32_t pidx, double now) {
    PacketRt& p = packets_[pidx];
    const std::size_t j = p.next_link;
    const ChainId& updater = p.pkt.route[j + 1];
    const ChainId& observed = p.pkt.route[j];
    const auto key = std::make_pair(updater, observed);
    auto it = pending_updates_.find(key);
    if (it != pending_updates_.end()) {
        txs_[it->second].subscribers.push_back(pidx);
        return;
    }
    Tx tx;
    tx.kind = Tx::Kind::ClientUpdate;
    tx.observed = observed;
    tx.subscribers.push_back(pidx);
    const std::size_t idx = make_tx(std::move(tx));
    pending_updates_.emplace(key, idx);
    submit_tx(updater, idx, now);
}

const ConsensusState& Sim::observe(SimChain& observer, const ChainId& observed_id) {
    SimChain& target = chain_at(observed_id);
    const auto latest = observer.clients.latest_height(observed_id);
    if (latest && *latest == target.height) {
        return *observer.clients.lookup(observed_id, *latest);  // nothing new on the observed chain
    }
    ConsensusState cs{observed_id, target.height, target.validators_hash, target.store.root()};
    observer.clients.update(cs);
    observer.store.put(client_record_key(observed_id, cs.height), consensus_state_digest(cs));

    auto& kept = observer.client_record_heights[observed_id];
    kept.push_back(cs.height);
    while (kept.size() > kClientRecordKeep) {
        observer.store.erase(client_record_key(observed_id, kept.front()));
        kept.pop_front();
    }
    return *observer.clients.lookup(observed_id, cs.height);
}

void Sim::finalize_link(std::uint32_t pidx, const ConsensusState& cs, SimChain& observed,
                        double now) {
    PacketRt& p = packets_[pidx];
    const std::size_t j = p.next_link;
    std::string key;
    if (j == 0) {
        key = commitment_key(p.pkt.packet_id);
    } else {
        key = client_record_key(p.pkt.route[j - 1], p.chain.links[j - 1].consensus_state.height);
    }
    ProofLink link;
    link.observed_chain = p.pkt.route[j];
    link.consensus_state = cs;
    if (j > 0) link.validator_evidence = observed.def->validator_set;
    try {
        link.commitment_proof = observed.store.prove(key);
    } catch (const MissingCommitment&) {
        fail_packet(p, now, "proof window closed");
        return;
    }
    p.chain.links.push_back(std::move(link));
    p.next_link += 1;
    mark_task_done(p, TaskKind::ClientUpdate, kClientUpdateGas);

    if (p.next_link + 1 < p.pkt.route.size()) {
        request_update(pidx, now);
    } else {
        const std::size_t t = make_tx({Tx::Kind::Deliver, pidx, {}, {}});
        submit_tx(p.pkt.destination, t, now);
    }
}

void Sim::exec_client_update(SimChain& c, const ChainId& cid, Tx& tx, double now) {
    // Detach everything needed from the tx first: finalize_link submits new
    // transactions, which may grow txs_ and invalidate `tx`.
    const ChainId observed_id = tx.observed;
    const std::vector<std::uint32_t> subscribers = std::move(tx.subscribers);
    pending_updates_.erase(std::make_pair(cid, observed_id));
    SimChain& observed = chain_at(observed_id);
    const ConsensusState cs = observe(c, observed_id);
    log(now, "client_update", cid, {}, observed_id + "@" + std::to_string(cs.height));
    for (std::uint32_t pidx : subscribers) {
        if (packets_[pidx].failed) continue;
        finalize_link(pidx, cs, observed, now);
    }
}

void Sim::exec_deliver(SimChain& c, const ChainId& cid, Tx& tx, double now) {
    PacketRt& p = packets_[tx.packet];
    if (p.failed) return;
    const VerifyResult vr = p.pkt.route_approved
                                ? verify_proof_chain(c.clients, p.pkt, p.chain, policy_)
                                : VerifyResult::reject(RejectReason::PolicyViolation,
                                                       "route not approved by relayer quorum");
    if (!vr.accepted) {
        result_.verify_rejects += 1;
        fail_packet(p, now, to_string(vr.reason));
        return;
    }
    std::int64_t evidence_gas = 0;
    for (std::size_t i = 1; i + 1 < p.pkt.route.size(); ++i)
        evidence_gas += RoutingCostConfig{}.policy_gas_per_validator *
                        static_cast<std::int64_t>(topo_.chain(p.pkt.route[i]).validator_set.size());
    mark_task_done(p, TaskKind::PacketDeliver, kDeliverGas + evidence_gas);

    GroupRt& g = groups_[p.group];
    if (g.counter.has_value()) {
        const auto ev = g.counter->record_receipt(p.route_index, std::span(p.pkt.payload), now);
        log(now, "receipt", cid, g.packet_id, "route " + std::to_string(p.route_index));
        if (ev) {
            g.delivered = now;
            g.trace_hops = p.pkt.route;
            log(now, "delivery", cid, g.packet_id,
                "receipts=" + std::to_string(ev->receipt_count) + " digest=" +
                    to_hex(ev->delivered_digest).substr(0, 16));
        }
    } else {
        g.delivered = now;
        log(now, "deliver", cid, g.packet_id);
    }
    p.chain.links.clear();
    p.chain.links.shrink_to_fit();
    const std::size_t t = make_tx({Tx::Kind::Ack, tx.packet, {}, {}});
    submit_tx(p.pkt.source, t, now);
}

void Sim::exec_ack(SimChain& c, Tx& tx, double now) {
    PacketRt& p = packets_[tx.packet];
    GroupRt& g = groups_[p.group];
    if (g.acked < 0.0) g.acked = now;
    mark_task_done(p, TaskKind::AckRelay, kAckGas);
    log(now, "ack", p.pkt.source, g.packet_id);
    if (g.outstanding > 0 && --g.outstanding == 0)
        c.store.erase(commitment_key(g.packet_id));  // executes on the source chain
}

void Sim::exec_hub_recv(SimChain& hub, Tx& tx, double now) {
    PacketRt& p = packets_[tx.packet];
    if (p.failed) return;
    GroupRt& g = groups_[p.group];
    SimChain& src = chain_at(p.pkt.source);
    const ConsensusState& cs = observe(hub, p.pkt.source);
    const std::string key = commitment_key(p.pkt.packet_id);
    ProvableStore::InclusionProof proof;
    try {
        proof = src.store.prove(key);
    } catch (const MissingCommitment&) {
        fail_packet(p, now, "commitment missing at hub receive");
        return;
    }
    if (!ProvableStore::verify_inclusion(cs.commitments_root, key, payload_digest(p.pkt), proof)) {
        result_.verify_rejects += 1;
        fail_packet(p, now, "hub leg proof rejected");
        return;
    }
    src.pending_erases.push_back(key);  // consumed; erase at the source's next block
    log(now, "hub_recv", cfg_.hub_chain, g.packet_id);
    const std::size_t t = make_tx({Tx::Kind::HubForward, tx.packet, {}, {}});
    submit_tx(cfg_.hub_chain, t, now);
}

void Sim::exec_hub_forward(SimChain& hub, Tx& tx, double now) {
    PacketRt& p = packets_[tx.packet];
    if (p.failed) return;
    hub.store.put(commitment_key(p.pkt.packet_id), payload_digest(p.pkt));
    log(now, "hub_forward", cfg_.hub_chain, groups_[p.group].packet_id);
    const std::size_t t = make_tx({Tx::Kind::HubDeliver, tx.packet, {}, {}});
    submit_tx(p.pkt.destination, t, now);
}

void Sim::exec_hub_deliver(SimChain& dst, Tx& tx, double now) {
    PacketRt& p = packets_[tx.packet];
    if (p.failed) return;
    GroupRt& g = groups_[p.group];
    SimChain& hub = chain_at(cfg_.hub_chain);
    const ConsensusState& cs = observe(dst, cfg_.hub_chain);
    const std::string key = commitment_key(p.pkt.packet_id);
    ProvableStore::InclusionProof proof;
    try {
        proof = hub.store.prove(key);
    } catch (const MissingCommitment&) {
        fail_packet(p, now, "forwarded commitment missing");
        return;
    }
    if (!ProvableStore::verify_inclusion(cs.commitments_root, key, payload_digest(p.pkt), proof)) {
        result_.verify_rejects += 1;
        fail_packet(p, now, "destination leg proof rejected");
        return;
    }
    g.delivered = now;
    hub.pending_erases.push_back(key);
    log(now, "deliver", p.pkt.destination, g.packet_id);
}

}  // namespace

SimResult run(const SimConfig& cfg, const Topology& topo, RelayerNetworkState& relay_net,
              SimMode mode) {
    Sim sim(cfg, topo, relay_net, mode);
    return sim.go();
}

}  // namespace xroute
