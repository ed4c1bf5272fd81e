#pragma once

#include <string>
#include <vector>

#include "xroute/topology.hpp"

namespace xroute::testing {

inline ValidatorSet equal_powers(const std::string& prefix, int count, std::int64_t power = 10) {
    std::vector<Validator> vals;
    for (int i = 0; i < count; ++i) vals.push_back({prefix + std::to_string(i), power});
    return ValidatorSet{std::move(vals)};
}

inline ValidatorSet powers(const std::string& prefix, std::vector<std::int64_t> ps) {
    std::vector<Validator> vals;
    for (std::size_t i = 0; i < ps.size(); ++i)
        vals.push_back({prefix + std::to_string(i), ps[i]});
    return ValidatorSet{std::move(vals)};
}

inline Chain simple_chain(const std::string& id, int validators = 4, std::int64_t power = 10) {
    return Chain{id, equal_powers(id + "-v", validators, power)};
}

/// Chains connected in the listed pairs; every pair also gets one channel
/// with a plain version.
inline Topology make_topology(std::vector<Chain> chains,
                              std::vector<std::pair<ChainId, ChainId>> connections) {
    std::vector<Channel> channels;
    for (const auto& [a, b] : connections)
        channels.push_back({"chan-" + a + "-" + b, a, b, "ics20-1"});
    return Topology{std::move(chains), std::move(connections), std::move(channels)};
}

}  // namespace xroute::testing
