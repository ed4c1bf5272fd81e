#include "xroute/relaynet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xroute/errors.hpp"

namespace xroute {

void RelayerNetworkState::join(const std::string& relayer_id, std::int64_t stake,
                               std::set<ChainId> chains) {
    if (stake < params_.min_stake)
        throw InsufficientStake(relayer_id + " staked " + std::to_string(stake) + ", minimum is " +
                                std::to_string(params_.min_stake));
    if (relayers_.count(relayer_id)) throw DuplicateId("relayer id already used: " + relayer_id);
    Relayer r;
    r.relayer_id = relayer_id;
    r.stake = stake;
    for (const auto& c : chains) r.gas_balances[c] = 0.0;
    r.chains_of_interest = std::move(chains);
    relayers_.emplace(relayer_id, std::move(r));
    pending_count_[relayer_id] = 0;
}

void RelayerNetworkState::leave(const std::string& relayer_id) {
    auto& r = mutable_relayer(relayer_id);
    r.alive = false;
    r.stake = 0;  // bond withdrawn
}

const Relayer& RelayerNetworkState::relayer(const std::string& relayer_id) const {
    auto it = relayers_.find(relayer_id);
    if (it == relayers_.end()) throw UnknownRelayer("no such relayer: " + relayer_id);
    return it->second;
}

Relayer& RelayerNetworkState::mutable_relayer(const std::string& relayer_id) {
    auto it = relayers_.find(relayer_id);
    if (it == relayers_.end()) throw UnknownRelayer("no such relayer: " + relayer_id);
    return it->second;
}

std::int64_t RelayerNetworkState::total_active_stake() const {
    std::int64_t total = 0;
    for (const auto& [_, r] : relayers_)
        if (r.alive) total += r.stake;
    return total;
}

std::string RelayerNetworkState::pick_relayer(const ChainId& execution_chain,
                                              const std::string& avoid) const {
    const std::string* best = nullptr;
    std::size_t best_pending = 0;
    for (const auto& [id, r] : relayers_) {
        if (!r.alive || !r.chains_of_interest.count(execution_chain)) continue;
        if (id == avoid) continue;
        const std::size_t pending = pending_count_.count(id) ? pending_count_.at(id) : 0;
        if (best == nullptr || pending < best_pending) {
            best = &id;
            best_pending = pending;
        }
        // map order keeps ties on the lexicographically smaller id
    }
    if (best == nullptr) {
        if (!avoid.empty()) return pick_relayer(execution_chain);  // sole cover, keep it
        throw NoCoveringRelayer("no active relayer covers chain " + execution_chain);
    }
    return *best;
}

std::vector<Task> RelayerNetworkState::decompose_packet(const Packet& pkt, const Route& route,
                                                        double now_ms) {
    if (route.hops.size() < 2) throw ContractViolation("route too short");
    std::vector<Task> out;
    auto add = [&](TaskKind kind, const ChainId& chain, const ChainId& observed,
                   std::int64_t target_height) {
        Task task;
        task.task_id = next_task_id_++;
        task.kind = kind;
        task.chain = chain;
        task.observed_chain = observed;
        task.target_height = target_height;
        task.packet_id = pkt.packet_id;
        task.assigned_to = pick_relayer(chain);
        task.created_at_ms = now_ms;
        pending_count_[task.assigned_to] += 1;
        out.push_back(task);
        tasks_.emplace(task.task_id, task);
    };
    for (std::size_t i = 0; i + 1 < route.hops.size(); ++i) {
        const std::int64_t target = i == 0 ? pkt.source_height : 0;
        add(TaskKind::ClientUpdate, route.hops[i + 1], route.hops[i], target);
    }
    add(TaskKind::PacketDeliver, route.hops.back(), {}, 0);
    add(TaskKind::AckRelay, route.hops.front(), {}, 0);
    return out;
}

std::vector<Task> RelayerNetworkState::schedule_updates(const std::vector<Task>& pending) {
    using PairKey = std::pair<ChainId, ChainId>;  // (chain, observed)
    std::map<PairKey, std::int64_t> max_height;
    for (const auto& t : pending) {
        if (t.kind != TaskKind::ClientUpdate)
            throw ContractViolation("schedule_updates accepts only ClientUpdate tasks");
        auto key = PairKey{t.chain, t.observed_chain};
        auto it = max_height.find(key);
        if (it == max_height.end() || t.target_height > it->second)
            max_height[key] = t.target_height;
    }

    // A packet whose route runs ...W -> X -> Y... requires (X ⇐ W) before
    // (Y ⇐ X); consecutive pending tasks of one packet carry that order.
    std::map<PairKey, std::set<PairKey>> after;  // edge: key -> later keys
    std::map<std::string, std::vector<PairKey>> per_packet;
    for (const auto& t : pending)
        if (t.packet_id) per_packet[*t.packet_id].emplace_back(t.chain, t.observed_chain);
    for (const auto& [_, seq] : per_packet)
        for (std::size_t i = 0; i + 1 < seq.size(); ++i)
            if (seq[i] != seq[i + 1]) after[seq[i]].insert(seq[i + 1]);

    std::map<PairKey, int> indegree;
    for (const auto& [key, _] : max_height) indegree[key] = 0;
    for (const auto& [_, succs] : after)
        for (const auto& s : succs)
            if (indegree.count(s)) indegree[s] += 1;

    std::vector<PairKey> order;
    std::set<PairKey> ready;
    for (const auto& [key, deg] : indegree)
        if (deg == 0) ready.insert(key);
    while (!ready.empty()) {
        const PairKey key = *ready.begin();  // deterministic: smallest key first
        ready.erase(ready.begin());
        order.push_back(key);
        auto it = after.find(key);
        if (it == after.end()) continue;
        for (const auto& succ : it->second) {
            auto dit = indegree.find(succ);
            if (dit == indegree.end()) continue;
            if (--dit->second == 0) ready.insert(succ);
        }
    }
    if (order.size() != max_height.size())
        throw CyclicDependency("client-update requirements contain a cycle");

    std::vector<Task> batched;
    for (const auto& key : order) {
        Task task;
        task.task_id = next_task_id_++;
        task.kind = TaskKind::ClientUpdate;
        task.chain = key.first;
        task.observed_chain = key.second;
        task.target_height = max_height[key];
        task.assigned_to = pick_relayer(key.first);
        pending_count_[task.assigned_to] += 1;
        tasks_.emplace(task.task_id, task);
        batched.push_back(task);
    }
    return batched;
}

void RelayerNetworkState::complete_task(std::int64_t task_id, std::int64_t gas_used) {
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw ContractViolation("unknown task id");
    if (it->second.status == TaskStatus::Pending && pending_count_.count(it->second.assigned_to))
        pending_count_[it->second.assigned_to] -= 1;
    it->second.status = TaskStatus::Done;
    it->second.gas_used = gas_used;
}

void RelayerNetworkState::fail_task(std::int64_t task_id) {
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw ContractViolation("unknown task id");
    if (it->second.status == TaskStatus::Pending && pending_count_.count(it->second.assigned_to))
        pending_count_[it->second.assigned_to] -= 1;
    it->second.status = TaskStatus::Failed;
}

std::vector<std::int64_t> RelayerNetworkState::reassign_overdue(double now_ms,
                                                                double source_block_time_ms) {
    const double deadline = params_.task_deadline_blocks * source_block_time_ms;
    std::vector<std::int64_t> reassigned;
    std::map<std::int64_t, std::string> previous;
    std::set<std::string> to_slash;
    for (auto& [id, task] : tasks_) {
        if (task.status != TaskStatus::Pending) continue;
        if (now_ms - task.created_at_ms < deadline) continue;
        to_slash.insert(task.assigned_to);
        pending_count_[task.assigned_to] -= 1;
        previous[id] = task.assigned_to;
        task.assigned_to.clear();
        reassigned.push_back(id);
    }
    for (const auto& r : to_slash) slash(r, "Unavailable", now_ms);
    for (std::int64_t id : reassigned) {
        Task& task = tasks_.at(id);
        task.assigned_to = pick_relayer(task.chain, previous.at(id));
        task.created_at_ms = now_ms;
        pending_count_[task.assigned_to] += 1;
    }
    return reassigned;
}

void RelayerNetworkState::open_escrow(const Packet& pkt, const Route& used_route,
                                      std::int64_t amount, double now_ms,
                                      double source_block_time_ms, const std::string& submitted_by,
                                      PolicySet policy, int max_hops) {
    if (escrows_.count(pkt.packet_id)) throw DuplicateId("escrow exists for " + pkt.packet_id);
    if (amount <= 0) throw ContractViolation("escrow amount must be positive");
    Escrow e;
    e.packet_id = pkt.packet_id;
    e.amount = amount;
    e.source_chain = pkt.source;
    e.opened_at_ms = now_ms;
    e.challenge_deadline_ms =
        now_ms + static_cast<double>(params_.challenge_window_blocks) * source_block_time_ms;
    e.submitted_by = submitted_by;
    e.used_route = used_route;
    e.policy = std::move(policy);
    e.max_hops = max_hops;
    escrows_.emplace(pkt.packet_id, std::move(e));
    ledger_.push_back({pkt.packet_id, "opened", amount, now_ms, submitted_by});
}

void RelayerNetworkState::settle_escrow(double now_ms) {
    for (auto& [packet_id, e] : escrows_) {
        if (e.state != EscrowState::Open || now_ms < e.challenge_deadline_ms) continue;

        // Weight each relayer by the gas its completed tasks consumed for
        // this packet; fall back to the submitting relayer when none exist.
        std::map<std::string, std::int64_t> weight;
        std::int64_t total_weight = 0;
        for (const auto& [_, task] : tasks_) {
            if (task.status != TaskStatus::Done || !task.packet_id || *task.packet_id != packet_id)
                continue;
            weight[task.assigned_to] += task.gas_used;
            total_weight += task.gas_used;
        }
        if (total_weight == 0) {
            weight.clear();
            weight[e.submitted_by] = 1;
            total_weight = 1;
        }

        // Largest-remainder split so the shares sum exactly to the amount.
        std::vector<std::pair<std::string, std::int64_t>> shares;
        std::vector<std::pair<std::int64_t, std::string>> remainders;  // (-remainder, id)
        std::int64_t distributed = 0;
        for (const auto& [id, w] : weight) {
            const std::int64_t share = e.amount * w / total_weight;
            const std::int64_t remainder = e.amount * w % total_weight;
            shares.emplace_back(id, share);
            remainders.emplace_back(-remainder, id);
            distributed += share;
        }
        std::sort(remainders.begin(), remainders.end());
        std::int64_t leftover = e.amount - distributed;
        for (std::size_t i = 0; leftover > 0 && i < remainders.size(); ++i, --leftover) {
            for (auto& [id, share] : shares)
                if (id == remainders[i].second) share += 1;
        }

        for (const auto& [id, share] : shares) {
            if (share == 0) continue;
            payouts_[id] += share;
            ledger_.push_back({packet_id, "paid", share, now_ms, id});
        }
        e.state = EscrowState::Paid;
    }
}

void RelayerNetworkState::challenge(const Topology& t, const std::string& packet_id,
                                    const Route& evidence, const std::string& challenger_id,
                                    double now_ms) {
    auto it = escrows_.find(packet_id);
    if (it == escrows_.end()) throw EscrowClosed("no escrow for packet " + packet_id);
    Escrow& e = it->second;
    if (e.state != EscrowState::Open || now_ms >= e.challenge_deadline_ms)
        throw EscrowClosed("challenge window closed for " + packet_id);

    if (evidence.hops.size() < 2 || evidence.hops.front() != e.used_route.hops.front() ||
        evidence.hops.back() != e.used_route.hops.back())
        throw InvalidEvidence("evidence route endpoints do not match");
    if (static_cast<int>(evidence.hops.size()) - 1 > e.max_hops)
        throw InvalidEvidence("evidence route exceeds max hops");
    for (std::size_t i = 0; i + 1 < evidence.hops.size(); ++i)
        if (!t.connected(evidence.hops[i], evidence.hops[i + 1]))
            throw InvalidEvidence("evidence route is not connected in the topology");
    if (!route_satisfies(e.policy, evidence, t))
        throw InvalidEvidence("evidence route violates the packet's security policy");
    if (!(route_fee(evidence, t) < route_fee(e.used_route, t)))
        throw InvalidEvidence("evidence route is not strictly cheaper");

    e.state = EscrowState::ClaimedByChallenger;
    claims_[challenger_id] += e.amount;
    ledger_.push_back({packet_id, "claimed", e.amount, now_ms, challenger_id});
    slash(e.submitted_by, "suboptimal route", now_ms);
}

const Escrow& RelayerNetworkState::escrow(const std::string& packet_id) const {
    auto it = escrows_.find(packet_id);
    if (it == escrows_.end()) throw EscrowClosed("no escrow for packet " + packet_id);
    return it->second;
}

void RelayerNetworkState::slash(const std::string& relayer_id, const std::string& reason,
                                double now_ms) {
    auto& r = mutable_relayer(relayer_id);
    const auto amount =
        static_cast<std::int64_t>(std::floor(static_cast<double>(r.stake) * params_.slash_fraction));
    r.stake -= amount;
    burned_stake_ += amount;
    if (r.stake < params_.min_stake) r.alive = false;
    slash_log_.push_back({now_ms, relayer_id, reason, amount});
}

std::int64_t RelayerNetworkState::propose_mapping(const std::string& chain_identifier,
                                                  const std::string& client_id,
                                                  const std::string& connection_id,
                                                  std::vector<std::string> channel_ids) {
    MappingProposal p;
    p.proposal_id = next_proposal_id_++;
    p.chain_identifier = chain_identifier;
    p.client_id = client_id;
    p.connection_id = connection_id;
    p.channel_ids = std::move(channel_ids);
    proposals_.emplace(p.proposal_id, std::move(p));
    return next_proposal_id_ - 1;
}

void RelayerNetworkState::vote_mapping(std::int64_t proposal_id, const std::string& relayer_id) {
    auto it = proposals_.find(proposal_id);
    if (it == proposals_.end()) throw ContractViolation("unknown proposal");
    MappingProposal& p = it->second;
    if (p.committed) throw AlreadyCommitted("proposal already committed");
    const Relayer& voter = relayer(relayer_id);
    if (!voter.alive) throw UnknownRelayer("voter is not active: " + relayer_id);
    if (!p.votes.insert(relayer_id).second) throw DuplicateVote(relayer_id + " already voted");

    std::int64_t support = 0;
    for (const auto& v : p.votes) {
        const Relayer& r = relayer(v);
        if (r.alive) support += r.stake;
    }
    // support / total >= quorum, in integers
    if (support * params_.quorum.den >= total_active_stake() * params_.quorum.num)
        p.committed = true;
}

const MappingProposal& RelayerNetworkState::proposal(std::int64_t proposal_id) const {
    auto it = proposals_.find(proposal_id);
    if (it == proposals_.end()) throw ContractViolation("unknown proposal");
    return it->second;
}

namespace {

std::string format_time(double ms) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << ms;
    return os.str();
}

}  // namespace

std::string RelayerNetworkState::escrow_ledger_csv() const {
    std::string out = "packet_id,event,amount,sim_time_ms,relayer_id\n";
    for (const auto& e : ledger_) {
        out += e.packet_id + "," + e.event + "," + std::to_string(e.amount) + "," +
               format_time(e.time_ms) + "," + e.relayer_id + "\n";
    }
    return out;
}

std::string RelayerNetworkState::slash_log_csv() const {
    std::string out = "sim_time_ms,relayer_id,reason,amount\n";
    for (const auto& s : slash_log_) {
        out += format_time(s.time_ms) + "," + s.relayer_id + "," + s.reason + "," +
               std::to_string(s.amount) + "\n";
    }
    return out;
}

}  // namespace xroute
