#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xroute/lightclient.hpp"
#include "xroute/routing.hpp"
#include "xroute/topology.hpp"

namespace xroute {

struct Relayer {
    std::string relayer_id;
    std::int64_t stake = 0;
    std::set<ChainId> chains_of_interest;
    std::map<ChainId, double> gas_balances;
    bool alive = true;
};

enum class TaskKind { ChannelCreate, ClientUpdate, PacketDeliver, AckRelay };
enum class TaskStatus { Pending, Done, Failed };

struct Task {
    std::int64_t task_id = 0;
    TaskKind kind = TaskKind::ClientUpdate;
    ChainId chain;           // execution chain
    ChainId observed_chain;  // ClientUpdate only
    std::int64_t target_height = 0;  // ClientUpdate only; 0 means latest
    std::optional<std::string> packet_id;
    std::string assigned_to;
    TaskStatus status = TaskStatus::Pending;
    std::int64_t gas_used = 0;  // filled on completion, drives fee shares
    double created_at_ms = 0.0;
};

enum class EscrowState { Open, Paid, ClaimedByChallenger };

struct Escrow {
    std::string packet_id;
    std::int64_t amount = 0;
    ChainId source_chain;
    double opened_at_ms = 0.0;
    double challenge_deadline_ms = 0.0;
    EscrowState state = EscrowState::Open;
    std::string submitted_by;  // relayer that provided the used route
    Route used_route;
    PolicySet policy;
    int max_hops = 4;
};

struct MappingProposal {
    std::int64_t proposal_id = 0;
    std::string chain_identifier;
    std::string client_id;
    std::string connection_id;
    std::vector<std::string> channel_ids;
    std::set<std::string> votes;
    bool committed = false;
};

struct Fraction {
    std::int64_t num = 2;
    std::int64_t den = 3;
};

struct SlashEvent {
    double time_ms = 0.0;
    std::string relayer_id;
    std::string reason;
    std::int64_t amount = 0;
};

/// One row of the escrow ledger (opened / paid / claimed / share events).
struct LedgerEvent {
    std::string packet_id;
    std::string event;
    std::int64_t amount = 0;
    double time_ms = 0.0;
    std::string relayer_id;
};

struct RelayerNetworkParams {
    std::int64_t min_stake = 100;
    Fraction quorum{2, 3};
    std::int64_t challenge_window_blocks = 100;  // of the source chain
    double slash_fraction = 0.5;
    double task_deadline_blocks = 20.0;  // unavailability detector, source-chain blocks
};

/// Relayer-network bookkeeping: membership, task decomposition and
/// assignment, escrow with challenge windows, slashing, fee sharing, and
/// identifier-mapping governance. Mutated by a single logical writer.
class RelayerNetworkState {
public:
    explicit RelayerNetworkState(RelayerNetworkParams params = {}) : params_(params) {}

    const RelayerNetworkParams& params() const { return params_; }

    // -- membership ---------------------------------------------------------
    void join(const std::string& relayer_id, std::int64_t stake, std::set<ChainId> chains);
    void leave(const std::string& relayer_id);
    const Relayer& relayer(const std::string& relayer_id) const;
    const std::map<std::string, Relayer>& relayers() const { return relayers_; }
    std::int64_t total_active_stake() const;

    // -- tasks ---------------------------------------------------------------
    /// One ClientUpdate per hop boundary in path order, one PacketDeliver on
    /// the destination, one AckRelay back to the source. Each assigned to the
    /// active covering relayer with the fewest pending tasks (ties by id).
    std::vector<Task> decompose_packet(const Packet& pkt, const Route& route, double now_ms = 0.0);
    /// Minimal batch of ClientUpdate tasks: one per (chain, observed) pair at
    /// the maximum target height, topologically ordered by per-packet hop
    /// order. Throws CyclicDependency if the requirements cannot be ordered.
    std::vector<Task> schedule_updates(const std::vector<Task>& pending);
    void complete_task(std::int64_t task_id, std::int64_t gas_used);
    void fail_task(std::int64_t task_id);
    const std::map<std::int64_t, Task>& tasks() const { return tasks_; }
    /// Tasks pending past their deadline are reassigned and the previous
    /// assignee is slashed for unavailability. Returns reassigned task ids.
    std::vector<std::int64_t> reassign_overdue(double now_ms, double source_block_time_ms);

    // -- escrow --------------------------------------------------------------
    void open_escrow(const Packet& pkt, const Route& used_route, std::int64_t amount, double now_ms,
                     double source_block_time_ms, const std::string& submitted_by, PolicySet policy,
                     int max_hops);
    /// Pays out every open escrow whose challenge window has elapsed,
    /// proportionally to completed-task gas contribution per relayer.
    void settle_escrow(double now_ms);
    /// A valid challenge presents a policy-compliant route strictly cheaper
    /// than the one used, before the deadline; the escrow transfers to the
    /// challenger and the submitting relayer is slashed.
    void challenge(const Topology& t, const std::string& packet_id, const Route& evidence,
                   const std::string& challenger_id, double now_ms);
    const Escrow& escrow(const std::string& packet_id) const;
    const std::map<std::string, Escrow>& escrows() const { return escrows_; }

    // -- slashing ------------------------------------------------------------
    void slash(const std::string& relayer_id, const std::string& reason, double now_ms = 0.0);
    const std::vector<SlashEvent>& slash_log() const { return slash_log_; }
    std::int64_t burned_stake() const { return burned_stake_; }

    // -- governance ----------------------------------------------------------
    std::int64_t propose_mapping(const std::string& chain_identifier, const std::string& client_id,
                                 const std::string& connection_id,
                                 std::vector<std::string> channel_ids);
    void vote_mapping(std::int64_t proposal_id, const std::string& relayer_id);
    const MappingProposal& proposal(std::int64_t proposal_id) const;

    // -- accounting ----------------------------------------------------------
    const std::map<std::string, std::int64_t>& payouts() const { return payouts_; }
    const std::map<std::string, std::int64_t>& challenger_claims() const { return claims_; }
    const std::vector<LedgerEvent>& ledger() const { return ledger_; }

    std::string escrow_ledger_csv() const;
    std::string slash_log_csv() const;

private:
    std::string pick_relayer(const ChainId& execution_chain, const std::string& avoid = {}) const;
    Relayer& mutable_relayer(const std::string& relayer_id);

    RelayerNetworkParams params_;
    std::map<std::string, Relayer> relayers_;
    std::map<std::int64_t, Task> tasks_;
    std::map<std::string, Escrow> escrows_;  // by packet_id
    std::map<std::int64_t, MappingProposal> proposals_;
    std::vector<SlashEvent> slash_log_;
    std::vector<LedgerEvent> ledger_;
    std::map<std::string, std::int64_t> payouts_;
    std::map<std::string, std::int64_t> claims_;
    std::map<std::string, std::size_t> pending_count_;
    std::int64_t next_task_id_ = 1;
    std::int64_t next_proposal_id_ = 1;
    std::int64_t burned_stake_ = 0;
};

}  // namespace xroute
