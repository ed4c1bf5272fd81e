#include "xroute/topology.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "xroute/errors.hpp"
#include "xroute/policy.hpp"
#include "xroute/rng.hpp"

namespace xroute {

ValidatorSet::ValidatorSet(std::vector<Validator> validators) : validators_(std::move(validators)) {
    std::set<std::string> seen;
    for (const auto& v : validators_) {
        if (v.power < 0) throw IntegrityError("validator power must be non-negative: " + v.address);
        if (v.address.size() > 0xffff)  // canonical serialization length-prefixes with u16
            throw IntegrityError("validator address exceeds 65535 bytes");
        if (!seen.insert(v.address).second)
            throw IntegrityError("duplicate validator address: " + v.address);
        total_power_ += v.power;
    }
    if (total_power_ <= 0) throw IntegrityError("validator set has no voting power");
}

int nakamoto_coefficient(const ValidatorSet& vs) {
    std::vector<std::int64_t> powers;
    powers.reserve(vs.size());
    for (const auto& v : vs.validators()) powers.push_back(v.power);
    std::sort(powers.begin(), powers.end(), std::greater<>());
    std::int64_t acc = 0;
    int count = 0;
    for (std::int64_t p : powers) {
        acc += p;
        ++count;
        if (3 * acc > vs.total_power()) return count;
    }
    return count;  // unreachable while total_power > 0
}

namespace {

std::pair<ChainId, ChainId> norm_pair(const ChainId& a, const ChainId& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

Topology::Topology(std::vector<Chain> chains,
                   std::vector<std::pair<ChainId, ChainId>> connections,
                   std::vector<Channel> channels) {
    for (auto& c : chains) {
        if (c.block_time_ms <= 0) throw IntegrityError("block_time must be positive: " + c.chain_id);
        if (c.capacity_tx_per_block <= 0) throw IntegrityError("capacity must be positive: " + c.chain_id);
        ChainId id = c.chain_id;
        if (!chains_.emplace(id, std::move(c)).second)
            throw IntegrityError("duplicate chain_id: " + id);
    }
    for (const auto& [a, b] : connections) {
        if (a == b) throw IntegrityError("self-loop connection: " + a);
        if (!has_chain(a)) throw IntegrityError("connection references unknown chain: " + a);
        if (!has_chain(b)) throw IntegrityError("connection references unknown chain: " + b);
        if (!connections_.insert(norm_pair(a, b)).second)
            throw IntegrityError("duplicate connection: " + a + "/" + b);
    }
    for (auto& ch : channels) {
        if (!has_chain(ch.a)) throw IntegrityError("channel endpoint unknown: " + ch.a);
        if (!has_chain(ch.b)) throw IntegrityError("channel endpoint unknown: " + ch.b);
        if (ch.a == ch.b) throw IntegrityError("channel endpoints must differ: " + ch.channel_id);
        if (!connections_.count(norm_pair(ch.a, ch.b)))
            throw IntegrityError("channel without connection: " + ch.channel_id);
        try {
            parse_channel_version(ch.version);
        } catch (const GrammarError& e) {
            throw IntegrityError("channel " + ch.channel_id + " version rejected: " + e.what());
        }
        std::string id = ch.channel_id;
        if (!channels_.emplace(id, std::move(ch)).second)
            throw IntegrityError("duplicate channel_id: " + id);
    }
    for (const auto& [id, _] : chains_) adjacency_[id];  // ensure every chain has an entry
    for (const auto& [a, b] : connections_) {
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto& [_, nbrs] : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

const Chain& Topology::chain(const ChainId& id) const {
    auto it = chains_.find(id);
    if (it == chains_.end()) throw IntegrityError("unknown chain: " + id);
    return it->second;
}

bool Topology::connected(const ChainId& a, const ChainId& b) const {
    return connections_.count(norm_pair(a, b)) != 0;
}

const std::vector<ChainId>& Topology::neighbors(const ChainId& id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) throw IntegrityError("unknown chain: " + id);
    return it->second;
}

std::vector<const Channel*> Topology::channels_between(const ChainId& a, const ChainId& b) const {
    std::vector<const Channel*> out;
    for (const auto& [_, ch] : channels_) {
        if (norm_pair(ch.a, ch.b) == norm_pair(a, b)) out.push_back(&ch);
    }
    return out;  // map iteration is already ascending by channel_id
}

namespace {

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw SchemaError("unknown key '" + it.key() + "' in " + where);
    }
}

std::int64_t require_int(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_integer()) throw SchemaError(where + " must be an integer");
    return v.get<std::int64_t>();
}

double require_number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where + " must be a number");
    return v.get<double>();
}

std::string require_string(const nlohmann::json& v, const std::string& where) {
    if (!v.is_string()) throw SchemaError(where + " must be a string");
    return v.get<std::string>();
}

}  // namespace

Topology load_topology(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("topology document must be an object");
    reject_unknown_keys(doc, {"chains", "connections", "channels"}, "document");
    if (!doc.contains("chains") || !doc["chains"].is_array())
        throw SchemaError("'chains' array is required");

    std::vector<Chain> chains;
    for (const auto& jc : doc["chains"]) {
        if (!jc.is_object()) throw SchemaError("chain entry must be an object");
        reject_unknown_keys(jc,
                            {"id", "validators", "block_time_ms", "gas_price", "usd_per_gas_token",
                             "capacity_tx_per_block"},
                            "chain entry");
        if (!jc.contains("id")) throw SchemaError("chain entry missing 'id'");
        const std::string id = require_string(jc["id"], "chain id");
        if (!jc.contains("validators") || !jc["validators"].is_array())
            throw SchemaError("chain '" + id + "' missing 'validators' array");
        std::vector<Validator> vals;
        for (const auto& jv : jc["validators"]) {
            if (!jv.is_object()) throw SchemaError("validator entry must be an object");
            reject_unknown_keys(jv, {"address", "power"}, "validator entry");
            if (!jv.contains("address") || !jv.contains("power"))
                throw SchemaError("validator entry needs 'address' and 'power'");
            vals.push_back({require_string(jv["address"], "validator address"),
                            require_int(jv["power"], "validator power")});
        }
        ValidatorSet vs{std::move(vals)};  // throws IntegrityError on bad sets
        Chain c{id, std::move(vs)};
        if (jc.contains("block_time_ms")) c.block_time_ms = require_int(jc["block_time_ms"], "block_time_ms");
        if (jc.contains("gas_price")) c.gas_price = require_number(jc["gas_price"], "gas_price");
        if (jc.contains("usd_per_gas_token"))
            c.usd_per_gas_token = require_number(jc["usd_per_gas_token"], "usd_per_gas_token");
        if (jc.contains("capacity_tx_per_block"))
            c.capacity_tx_per_block = require_int(jc["capacity_tx_per_block"], "capacity_tx_per_block");
        chains.push_back(std::move(c));
    }

    std::vector<std::pair<ChainId, ChainId>> connections;
    if (doc.contains("connections")) {
        if (!doc["connections"].is_array()) throw SchemaError("'connections' must be an array");
        for (const auto& jc : doc["connections"]) {
            if (!jc.is_object()) throw SchemaError("connection entry must be an object");
            reject_unknown_keys(jc, {"a", "b"}, "connection entry");
            if (!jc.contains("a") || !jc.contains("b"))
                throw SchemaError("connection entry needs 'a' and 'b'");
            connections.emplace_back(require_string(jc["a"], "connection a"),
                                     require_string(jc["b"], "connection b"));
        }
    }

    std::vector<Channel> channels;
    if (doc.contains("channels")) {
        if (!doc["channels"].is_array()) throw SchemaError("'channels' must be an array");
        for (const auto& jc : doc["channels"]) {
            if (!jc.is_object()) throw SchemaError("channel entry must be an object");
            reject_unknown_keys(jc, {"id", "a", "b", "version"}, "channel entry");
            if (!jc.contains("id") || !jc.contains("a") || !jc.contains("b") || !jc.contains("version"))
                throw SchemaError("channel entry needs 'id', 'a', 'b', 'version'");
            channels.push_back({require_string(jc["id"], "channel id"),
                                require_string(jc["a"], "channel a"),
                                require_string(jc["b"], "channel b"),
                                require_string(jc["version"], "channel version")});
        }
    }

    return Topology{std::move(chains), std::move(connections), std::move(channels)};
}

Topology load_topology_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open topology file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("topology file is not valid JSON: ") + e.what());
    }
    return load_topology(doc);
}

nlohmann::json to_document(const Topology& t) {
    nlohmann::json doc;
    doc["chains"] = nlohmann::json::array();
    for (const auto& [id, c] : t.chains()) {
        nlohmann::json jc;
        jc["id"] = id;
        jc["validators"] = nlohmann::json::array();
        for (const auto& v : c.validator_set.validators())
            jc["validators"].push_back({{"address", v.address}, {"power", v.power}});
        jc["block_time_ms"] = c.block_time_ms;
        jc["gas_price"] = c.gas_price;
        jc["usd_per_gas_token"] = c.usd_per_gas_token;
        jc["capacity_tx_per_block"] = c.capacity_tx_per_block;
        doc["chains"].push_back(std::move(jc));
    }
    doc["connections"] = nlohmann::json::array();
    for (const auto& [a, b] : t.connections())
        doc["connections"].push_back({{"a", a}, {"b", b}});
    doc["channels"] = nlohmann::json::array();
    for (const auto& [id, ch] : t.channels())
        doc["channels"].push_back({{"id", id}, {"a", ch.a}, {"b", ch.b}, {"version", ch.version}});
    return doc;
}

Topology remove_top_k(const Topology& t, std::size_t k) {
    if (k > t.chains().size()) throw IntegrityError("k exceeds chain count");
    std::vector<ChainId> order;
    for (const auto& [id, _] : t.chains()) order.push_back(id);
    std::stable_sort(order.begin(), order.end(), [&](const ChainId& a, const ChainId& b) {
        const auto da = t.degree(a), db = t.degree(b);
        if (da != db) return da > db;
        return a < b;
    });
    std::set<ChainId> removed(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));

    std::vector<Chain> chains;
    for (const auto& [id, c] : t.chains())
        if (!removed.count(id)) chains.push_back(c);
    std::vector<std::pair<ChainId, ChainId>> connections;
    for (const auto& [a, b] : t.connections())
        if (!removed.count(a) && !removed.count(b)) connections.emplace_back(a, b);
    std::vector<Channel> channels;
    for (const auto& [_, ch] : t.channels())
        if (!removed.count(ch.a) && !removed.count(ch.b)) channels.push_back(ch);
    return Topology{std::move(chains), std::move(connections), std::move(channels)};
}

Topology upgrade_topology(const Topology& t, std::uint64_t seed, int min_nc) {
    if (min_nc < 1) throw ConfigError("min_nc must be at least 1");
    Rng rng(seed);

    std::map<ChainId, int> nc;
    for (const auto& [id, c] : t.chains()) nc[id] = nakamoto_coefficient(c.validator_set);

    std::set<std::pair<ChainId, ChainId>> edges = t.connections();
    auto is_edge = [&](const ChainId& a, const ChainId& b) {
        return edges.count(a < b ? std::make_pair(a, b) : std::make_pair(b, a)) != 0;
    };

    std::vector<std::pair<ChainId, ChainId>> added;
    for (const auto& [id, _] : t.chains()) {
        std::vector<ChainId> candidates;
        for (const auto& [other, __] : t.chains()) {
            if (other == id || is_edge(id, other)) continue;
            if (nc[other] >= min_nc) candidates.push_back(other);
        }
        if (candidates.empty()) continue;
        const ChainId& pick = candidates[rng.bounded(candidates.size())];
        added.emplace_back(id, pick);
        edges.insert(id < pick ? std::make_pair(id, pick) : std::make_pair(pick, id));
    }

    std::vector<Chain> chains;
    for (const auto& [_, c] : t.chains()) chains.push_back(c);
    std::vector<std::pair<ChainId, ChainId>> connections(edges.begin(), edges.end());
    std::vector<Channel> channels;
    for (const auto& [_, ch] : t.channels()) channels.push_back(ch);
    return Topology{std::move(chains), std::move(connections), std::move(channels)};
}

}  // namespace xroute
