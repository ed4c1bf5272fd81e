#include "xroute/lightclient.hpp"

#include <algorithm>
#include <set>

#include "xroute/errors.hpp"

namespace xroute {

Digest canonical_validator_hash(const ValidatorSet& vs) {
    std::vector<const Validator*> sorted;
    sorted.reserve(vs.size());
    for (const auto& v : vs.validators()) sorted.push_back(&v);
    std::sort(sorted.begin(), sorted.end(),
              [](const Validator* a, const Validator* b) { return a->address < b->address; });
    std::vector<std::uint8_t> bytes;
    for (const Validator* v : sorted) {
        put_u16_be(bytes, static_cast<std::uint16_t>(v->address.size()));
        put_bytes(bytes, v->address);
        put_u64_be(bytes, static_cast<std::uint64_t>(v->power));
    }
    return sha256(bytes);
}

Digest consensus_state_digest(const ConsensusState& cs) {
    std::vector<std::uint8_t> bytes;
    put_u16_be(bytes, static_cast<std::uint16_t>(cs.chain_id.size()));
    put_bytes(bytes, cs.chain_id);
    put_u64_be(bytes, static_cast<std::uint64_t>(cs.height));
    bytes.insert(bytes.end(), cs.next_validators_hash.begin(), cs.next_validators_hash.end());
    bytes.insert(bytes.end(), cs.commitments_root.begin(), cs.commitments_root.end());
    return sha256(bytes);
}

Digest ProvableStore::leaf_digest(const std::string& key, const Digest& value) {
    std::vector<std::uint8_t> bytes;
    put_u16_be(bytes, static_cast<std::uint16_t>(key.size()));
    put_bytes(bytes, key);
    bytes.insert(bytes.end(), value.begin(), value.end());
    return sha256(bytes);
}

void ProvableStore::put(const std::string& key, const Digest& value) {
    entries_[key] = value;
    leaves_[key] = leaf_digest(key, value);
    root_.reset();
}

void ProvableStore::erase(const std::string& key) {
    entries_.erase(key);
    leaves_.erase(key);
    root_.reset();
}

const Digest& ProvableStore::root() const {
    if (!root_) {
        Sha256 h;
        for (const auto& [_, leaf] : leaves_) h.update(leaf.data(), leaf.size());
        root_ = h.finish();
    }
    return *root_;
}

ProvableStore::InclusionProof ProvableStore::prove(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw MissingCommitment("no entry for key: " + key);
    InclusionProof proof;
    proof.siblings.reserve(leaves_.size() - 1);
    std::size_t i = 0;
    for (const auto& [k, leaf] : leaves_) {
        if (k == key) {
            proof.index = i;
        } else {
            proof.siblings.push_back(leaf);
        }
        ++i;
    }
    return proof;
}

bool ProvableStore::verify_inclusion(const Digest& root, const std::string& key, const Digest& value,
                                     const InclusionProof& proof) {
    if (proof.index > proof.siblings.size()) return false;
    const Digest leaf = leaf_digest(key, value);
    Sha256 h;
    for (std::size_t i = 0; i < proof.index; ++i) h.update(proof.siblings[i].data(), 32);
    h.update(leaf.data(), 32);
    for (std::size_t i = proof.index; i < proof.siblings.size(); ++i)
        h.update(proof.siblings[i].data(), 32);
    return h.finish() == root;
}

void ClientStore::update(const ConsensusState& cs) {
    auto& per_height = clients_[cs.chain_id];
    if (!per_height.empty() && cs.height <= per_height.rbegin()->first)
        throw NonMonotonicHeight("client of " + cs.chain_id + " already at height " +
                                 std::to_string(per_height.rbegin()->first));
    per_height.emplace(cs.height, cs);
}

const ConsensusState* ClientStore::lookup(const ChainId& observed, std::int64_t height) const {
    auto it = clients_.find(observed);
    if (it == clients_.end()) return nullptr;
    auto hit = it->second.find(height);
    return hit == it->second.end() ? nullptr : &hit->second;
}

std::optional<std::int64_t> ClientStore::latest_height(const ChainId& observed) const {
    auto it = clients_.find(observed);
    if (it == clients_.end() || it->second.empty()) return std::nullopt;
    return it->second.rbegin()->first;
}

void update_client(ClientStore& store, const ChainId& observed, std::int64_t height,
                   const ValidatorSet& next_validators, const Digest& commitments_root) {
    store.update(ConsensusState{observed, height, canonical_validator_hash(next_validators),
                                commitments_root});
}

std::string commitment_key(const std::string& packet_id) { return "commit/" + packet_id; }

std::string client_record_key(const ChainId& observed, std::int64_t height) {
    return "client/" + observed + "/" + std::to_string(height);
}

Digest payload_digest(const Packet& pkt) { return sha256(std::span(pkt.payload)); }

World::World(const Topology& t) {
    for (const auto& [id, chain] : t.chains()) {
        ChainState cs{chain, 0, ProvableStore{}, ClientStore{id}};
        chains_.emplace(id, std::move(cs));
    }
}

World::ChainState& World::at(const ChainId& id) {
    auto it = chains_.find(id);
    if (it == chains_.end()) throw IntegrityError("unknown chain in world: " + id);
    return it->second;
}

const World::ChainState& World::at(const ChainId& id) const {
    auto it = chains_.find(id);
    if (it == chains_.end()) throw IntegrityError("unknown chain in world: " + id);
    return it->second;
}

void World::commit_packet(Packet& pkt) {
    auto& src = at(pkt.source);
    src.height += 1;
    src.store.put(commitment_key(pkt.packet_id), payload_digest(pkt));
    pkt.source_height = src.height;
}

void World::observe(const ChainId& observer, const ChainId& observed) {
    auto& obs = at(observer);
    auto& tgt = at(observed);
    obs.height += 1;
    const ConsensusState cs{observed, tgt.height, canonical_validator_hash(tgt.chain.validator_set),
                            tgt.store.root()};
    obs.clients.update(cs);
    obs.store.put(client_record_key(observed, tgt.height), consensus_state_digest(cs));
}

void World::advance_height(const ChainId& id, std::int64_t blocks) { at(id).height += blocks; }

ProofChain build_proof_chain(const World& world, const Packet& pkt) {
    if (pkt.route.size() < 2) throw MissingClientState("route too short");
    ProofChain pc;
    std::string prev_key = commitment_key(pkt.packet_id);
    if (!world.at(pkt.source).store.contains(prev_key))
        throw MissingCommitment("packet not committed on source: " + pkt.packet_id);

    for (std::size_t i = 0; i + 1 < pkt.route.size(); ++i) {
        const ChainId& observed = pkt.route[i];
        const ChainId& observer = pkt.route[i + 1];
        const auto& observed_state = world.at(observed);
        const auto& observer_state = world.at(observer);

        const auto latest = observer_state.clients.latest_height(observed);
        if (!latest) throw MissingClientState(observer + " has no client of " + observed);
        const ConsensusState* cs = observer_state.clients.lookup(observed, *latest);
        if (cs->commitments_root != observed_state.store.root())
            throw MissingClientState(observer + "'s client of " + observed + " is stale");

        ProofLink link;
        link.observed_chain = observed;
        link.consensus_state = *cs;
        if (i > 0) link.validator_evidence = observed_state.chain.validator_set;
        link.commitment_proof = observed_state.store.prove(prev_key);
        prev_key = client_record_key(observed, cs->height);
        pc.links.push_back(std::move(link));
    }
    return pc;
}

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::None: return "None";
        case RejectReason::MalformedChain: return "MalformedChain";
        case RejectReason::MissingDestinationState: return "MissingDestinationState";
        case RejectReason::CommitmentMismatch: return "CommitmentMismatch";
        case RejectReason::LinkMismatch: return "LinkMismatch";
        case RejectReason::EvidenceHashMismatch: return "EvidenceHashMismatch";
        case RejectReason::PolicyViolation: return "PolicyViolation";
    }
    return "Unknown";
}

VerifyResult verify_proof_chain(const ClientStore& dest_store, const Packet& pkt,
                                const ProofChain& pc, const PolicySet& ps) {
    const std::size_t n = pkt.route.size();
    if (n < 2 || pc.links.size() != n - 1)
        return VerifyResult::reject(RejectReason::MalformedChain, "link count does not match route");
    if (pkt.route.front() != pkt.source || pkt.route.back() != pkt.destination)
        return VerifyResult::reject(RejectReason::MalformedChain, "route endpoints disagree");
    if (std::set<ChainId>(pkt.route.begin(), pkt.route.end()).size() != n)
        return VerifyResult::reject(RejectReason::MalformedChain, "route repeats a chain");
    for (std::size_t i = 0; i < pc.links.size(); ++i) {
        if (pc.links[i].observed_chain != pkt.route[i])
            return VerifyResult::reject(RejectReason::LinkMismatch,
                                        "link " + std::to_string(i) + " observes wrong chain");
    }

    // Anchor: the final link's consensus state must be the destination's own
    // record of the last hop before it.
    const ProofLink& last = pc.links.back();
    const ConsensusState* anchored =
        dest_store.lookup(last.observed_chain, last.consensus_state.height);
    if (anchored == nullptr)
        return VerifyResult::reject(RejectReason::MissingDestinationState,
                                    "destination holds no state for " + last.observed_chain +
                                        " at height " + std::to_string(last.consensus_state.height));
    if (!(*anchored == last.consensus_state))
        return VerifyResult::reject(RejectReason::LinkMismatch,
                                    "final link state differs from destination record");

    // Walk back towards the source: link i's proof authenticates link i-1's
    // consensus-state record; link 0's proof authenticates the commitment.
    for (std::size_t i = pc.links.size(); i-- > 0;) {
        const ProofLink& link = pc.links[i];
        std::string key;
        Digest value;
        if (i == 0) {
            key = commitment_key(pkt.packet_id);
            value = payload_digest(pkt);
        } else {
            key = client_record_key(pc.links[i - 1].observed_chain,
                                    pc.links[i - 1].consensus_state.height);
            value = consensus_state_digest(pc.links[i - 1].consensus_state);
        }
        if (!ProvableStore::verify_inclusion(link.consensus_state.commitments_root, key, value,
                                             link.commitment_proof)) {
            return VerifyResult::reject(
                i == 0 ? RejectReason::CommitmentMismatch : RejectReason::LinkMismatch,
                "inclusion proof failed at link " + std::to_string(i));
        }
    }

    // Intermediate links: evidence must hash to the committed value and meet
    // the security policies.
    for (std::size_t i = 1; i < pc.links.size(); ++i) {
        const ProofLink& link = pc.links[i];
        if (!link.validator_evidence.has_value()) {
            if (ps.security.empty()) continue;  // placeholder allowed only without policies
            return VerifyResult::reject(RejectReason::MalformedChain,
                                        "missing validator evidence at link " + std::to_string(i));
        }
        if (canonical_validator_hash(*link.validator_evidence) !=
            link.consensus_state.next_validators_hash)
            return VerifyResult::reject(RejectReason::EvidenceHashMismatch,
                                        "evidence hash mismatch at link " + std::to_string(i));
        if (!security_satisfied(ps.security, *link.validator_evidence))
            return VerifyResult::reject(RejectReason::PolicyViolation,
                                        "intermediate " + link.observed_chain + " violates policy");
    }
    return VerifyResult::accept();
}

}  // namespace xroute
