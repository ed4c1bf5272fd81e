#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "xroute/topology.hpp"

namespace xroute {

struct Route;  // routing.hpp

enum class SecurityKind { MinNakamoto, MinValidators };

/// On-chain-enforced constraint on intermediate chains.
struct SecurityPolicy {
    SecurityKind kind;
    std::int64_t threshold;  // >= 1

    bool operator==(const SecurityPolicy&) const = default;
};

enum class PreferenceKind { MaxFee, MinimizeFee, Timeout, MinimizeTime };

/// Best-effort objective enforced economically by the relayer network. MaxFee
/// carries a fee limit, Timeout a delivery deadline in milliseconds.
struct PreferencePolicy {
    PreferenceKind kind;
    double limit = 0.0;

    bool operator==(const PreferencePolicy&) const = default;
};

PreferencePolicy make_max_fee(double limit);           // limit > 0
PreferencePolicy make_timeout(double deadline_ms);     // deadline > 0
PreferencePolicy make_minimize_fee();
PreferencePolicy make_minimize_time();

struct PolicySet {
    std::string base_version;
    std::vector<SecurityPolicy> security;      // canonical order, one per kind
    std::vector<PreferencePolicy> preference;  // not encoded in channel versions

    bool operator==(const PolicySet&) const = default;
};

/// Channel-version grammar (no whitespace):
///   version    := base | base "/" constraints
///   constraints := constraint ("," constraint)*
///   constraint := ("nakamoto" | "validators") ":" decimal-integer
PolicySet parse_channel_version(std::string_view version);

/// Parses just the constraint segment ("nakamoto:8,validators:4").
std::vector<SecurityPolicy> parse_security_constraints(std::string_view constraints);

/// Canonical inverse of parse_channel_version: keys sorted, nakamoto before
/// validators.
std::string encode_channel_version(const PolicySet& ps);

bool security_satisfied(const std::vector<SecurityPolicy>& security, const ValidatorSet& vs);
bool chain_satisfies(const PolicySet& ps, const Chain& c);

/// True iff every intermediate chain of r (source and destination excluded)
/// satisfies ps.
bool route_satisfies(const PolicySet& ps, const Route& r, const Topology& t);

}  // namespace xroute
