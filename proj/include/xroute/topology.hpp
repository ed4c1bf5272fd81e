#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace xroute {

using ChainId = std::string;

struct Validator {
    std::string address;
    std::int64_t power = 0;
};

/// Ordered list of validators with cached total power. Addresses are unique
/// and at least one validator has positive power.
class ValidatorSet {
public:
    explicit ValidatorSet(std::vector<Validator> validators);

    const std::vector<Validator>& validators() const { return validators_; }
    std::int64_t total_power() const { return total_power_; }
    std::size_t size() const { return validators_.size(); }

    bool operator==(const ValidatorSet&) const = default;

private:
    std::vector<Validator> validators_;
    std::int64_t total_power_ = 0;
};

/// Smallest number of validators whose combined power strictly exceeds one
/// third of the total (the mass that can halt a BFT chain). The comparison is
/// 3 * subset > total to stay in integer arithmetic.
int nakamoto_coefficient(const ValidatorSet& vs);

struct Chain {
    ChainId chain_id;
    ValidatorSet validator_set;
    std::int64_t block_time_ms = 6000;
    double gas_price = 0.025;
    double usd_per_gas_token = 1.0;
    std::int64_t capacity_tx_per_block = 4000;
};

struct Channel {
    std::string channel_id;
    ChainId a;  // endpoints, ordered as given
    ChainId b;
    std::string version;
};

/// Immutable chain/connection graph. Surgery operations return new values.
class Topology {
public:
    Topology(std::vector<Chain> chains,
             std::vector<std::pair<ChainId, ChainId>> connections,
             std::vector<Channel> channels);

    const std::map<ChainId, Chain>& chains() const { return chains_; }
    const std::set<std::pair<ChainId, ChainId>>& connections() const { return connections_; }
    const std::map<std::string, Channel>& channels() const { return channels_; }

    bool has_chain(const ChainId& id) const { return chains_.count(id) != 0; }
    const Chain& chain(const ChainId& id) const;
    bool connected(const ChainId& a, const ChainId& b) const;
    /// Neighbors in ascending chain_id order.
    const std::vector<ChainId>& neighbors(const ChainId& id) const;
    std::size_t degree(const ChainId& id) const { return neighbors(id).size(); }
    /// Channels whose endpoint pair is {a, b}, ascending channel_id.
    std::vector<const Channel*> channels_between(const ChainId& a, const ChainId& b) const;

private:
    std::map<ChainId, Chain> chains_;
    std::set<std::pair<ChainId, ChainId>> connections_;  // normalized first < second
    std::map<std::string, Channel> channels_;
    std::map<ChainId, std::vector<ChainId>> adjacency_;
};

Topology load_topology(const nlohmann::json& doc);
Topology load_topology_file(const std::string& path);
nlohmann::json to_document(const Topology& t);

/// Removes the k chains of highest connection degree (ties broken by
/// ascending chain_id) together with incident connections and channels.
Topology remove_top_k(const Topology& t, std::size_t k);

/// Gives each chain (in ascending id order) one new connection to a uniformly
/// random non-neighbor whose Nakamoto coefficient is at least min_nc. Chains
/// with no eligible partner are skipped.
Topology upgrade_topology(const Topology& t, std::uint64_t seed, int min_nc);

}  // namespace xroute
