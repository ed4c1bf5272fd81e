#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xroute/digest.hpp"
#include "xroute/policy.hpp"
#include "xroute/topology.hpp"

namespace xroute {

/// Canonical digest of a validator set: validators sorted ascending by
/// address bytes, each encoded as [u16 BE address length][address bytes]
/// [u64 BE power]. Byte-exact so independent implementations agree.
Digest canonical_validator_hash(const ValidatorSet& vs);

/// Light-client record of an observed chain at one height.
struct ConsensusState {
    ChainId chain_id;  // observed chain
    std::int64_t height = 0;
    Digest next_validators_hash{};  // hash of the observed chain's validator set at height+1
    Digest commitments_root{};      // root over the observed chain's provable store at height

    bool operator==(const ConsensusState&) const = default;
};

Digest consensus_state_digest(const ConsensusState& cs);

/// Flat Merkle-style key/value store. The root is the digest of the sorted
/// (key, value-digest) leaf list; an inclusion proof is the position plus the
/// sibling leaf digests.
class ProvableStore {
public:
    struct InclusionProof {
        std::size_t index = 0;
        std::vector<Digest> siblings;

        bool operator==(const InclusionProof&) const = default;
    };

    void put(const std::string& key, const Digest& value);
    void erase(const std::string& key);
    bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    std::size_t size() const { return entries_.size(); }

    const Digest& root() const;
    /// Throws MissingCommitment if the key is absent.
    InclusionProof prove(const std::string& key) const;
    static bool verify_inclusion(const Digest& root, const std::string& key, const Digest& value,
                                 const InclusionProof& proof);

    static Digest leaf_digest(const std::string& key, const Digest& value);

private:
    std::map<std::string, Digest> entries_;  // key -> value digest
    std::map<std::string, Digest> leaves_;   // key -> leaf digest (cache)
    mutable std::optional<Digest> root_;     // invalidated on mutation
};

/// Per-chain map of light clients: observed chain -> height -> state.
/// Lookups at unrecorded heights fail rather than interpolate.
class ClientStore {
public:
    explicit ClientStore(ChainId owner = {}) : owner_(std::move(owner)) {}

    const ChainId& owner() const { return owner_; }
    /// Throws NonMonotonicHeight unless cs.height exceeds the latest record.
    void update(const ConsensusState& cs);
    const ConsensusState* lookup(const ChainId& observed, std::int64_t height) const;
    std::optional<std::int64_t> latest_height(const ChainId& observed) const;
    const std::map<ChainId, std::map<std::int64_t, ConsensusState>>& clients() const { return clients_; }

private:
    ChainId owner_;
    std::map<ChainId, std::map<std::int64_t, ConsensusState>> clients_;
};

/// Records ConsensusState{observed, height, hash(next_validators), root}.
void update_client(ClientStore& store, const ChainId& observed, std::int64_t height,
                   const ValidatorSet& next_validators, const Digest& commitments_root);

struct Packet {
    std::string packet_id;
    ChainId source;
    ChainId destination;
    std::vector<ChainId> route;  // begins with source, ends with destination, no repeats
    std::string channel_version;
    std::vector<std::uint8_t> payload;
    std::int64_t source_height = 0;  // height at which the packet was committed
    std::vector<PreferencePolicy> preference;
    bool route_approved = true;  // quorum approval flag from the relayer network
};

/// Store key under which a packet commitment lives on its source chain.
std::string commitment_key(const std::string& packet_id);
/// Store key under which a chain records its client's view of `observed` at
/// `height`.
std::string client_record_key(const ChainId& observed, std::int64_t height);

Digest payload_digest(const Packet& pkt);

/// One hop of a chained proof. Link i observes route position i; its
/// commitment_proof authenticates, against consensus_state.commitments_root,
/// either the source packet commitment (i = 0) or the previous link's
/// consensus-state record (i > 0).
struct ProofLink {
    ChainId observed_chain;
    ConsensusState consensus_state;
    std::optional<ValidatorSet> validator_evidence;  // required for intermediate links
    ProvableStore::InclusionProof commitment_proof;
};

struct ProofChain {
    std::vector<ProofLink> links;
};

/// Static multi-chain world used for building proof chains outside the
/// simulator: per-chain height, provable store, and client store.
class World {
public:
    struct ChainState {
        Chain chain;
        std::int64_t height = 0;
        ProvableStore store;
        ClientStore clients;
    };

    explicit World(const Topology& t);

    ChainState& at(const ChainId& id);
    const ChainState& at(const ChainId& id) const;

    /// Commits a packet on its source chain and stamps pkt.source_height.
    void commit_packet(Packet& pkt);
    /// Advances `observer`'s client of `observed` to the observed chain's
    /// current height/root, recording the client entry in the observer's
    /// provable store as well.
    void observe(const ChainId& observer, const ChainId& observed);
    void advance_height(const ChainId& id, std::int64_t blocks = 1);

private:
    std::map<ChainId, ChainState> chains_;
};

/// Assembles the chained proof for pkt along its route. Requires every hop's
/// client of the previous hop to be fresh (recorded root equals the observed
/// chain's current root); throws MissingClientState or MissingCommitment.
ProofChain build_proof_chain(const World& world, const Packet& pkt);

enum class RejectReason {
    None,
    MalformedChain,
    MissingDestinationState,
    CommitmentMismatch,
    LinkMismatch,
    EvidenceHashMismatch,
    PolicyViolation,
};

const char* to_string(RejectReason r);

struct VerifyResult {
    bool accepted = false;
    RejectReason reason = RejectReason::None;
    std::string detail;

    static VerifyResult accept() { return {true, RejectReason::None, {}}; }
    static VerifyResult reject(RejectReason r, std::string d) { return {false, r, std::move(d)}; }
};

/// Destination-side verification: (1) every link's proof authenticates back
/// to the source commitment, anchored at the destination's own client record;
/// (2) every intermediate link's validator evidence hashes to the committed
/// next_validators_hash; (3) every intermediate's evidence satisfies ps.
VerifyResult verify_proof_chain(const ClientStore& dest_store, const Packet& pkt,
                                const ProofChain& pc, const PolicySet& ps);

}  // namespace xroute
