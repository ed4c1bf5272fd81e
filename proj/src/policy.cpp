#include "xroute/policy.hpp"

#include <algorithm>
#include <charconv>

#include "xroute/errors.hpp"
#include "xroute/routing.hpp"

namespace xroute {

namespace {

const char* key_name(SecurityKind k) {
    return k == SecurityKind::MinNakamoto ? "nakamoto" : "validators";
}

std::int64_t parse_threshold(std::string_view text, std::string_view constraint) {
    if (text.empty()) throw GrammarError("missing threshold in '" + std::string(constraint) + "'");
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw GrammarError("threshold is not a decimal integer in '" + std::string(constraint) + "'");
    if (value < 1) throw GrammarError("threshold must be at least 1 in '" + std::string(constraint) + "'");
    return value;
}

}  // namespace

std::vector<SecurityPolicy> parse_security_constraints(std::string_view constraints) {
    std::vector<SecurityPolicy> out;
    if (constraints.empty()) throw GrammarError("empty constraint list");
    bool have_nakamoto = false, have_validators = false;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = constraints.find(',', pos);
        const std::string_view item = constraints.substr(
            pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        const std::size_t colon = item.find(':');
        if (colon == std::string_view::npos)
            throw GrammarError("constraint missing ':' in '" + std::string(item) + "'");
        const std::string_view key = item.substr(0, colon);
        const std::string_view value = item.substr(colon + 1);
        if (key == "nakamoto") {
            if (have_nakamoto) throw GrammarError("duplicate constraint key 'nakamoto'");
            have_nakamoto = true;
            out.push_back({SecurityKind::MinNakamoto, parse_threshold(value, item)});
        } else if (key == "validators") {
            if (have_validators) throw GrammarError("duplicate constraint key 'validators'");
            have_validators = true;
            out.push_back({SecurityKind::MinValidators, parse_threshold(value, item)});
        } else {
            throw GrammarError("unknown constraint key '" + std::string(key) + "'");
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    std::sort(out.begin(), out.end(), [](const SecurityPolicy& a, const SecurityPolicy& b) {
        return std::string_view(key_name(a.kind)) < std::string_view(key_name(b.kind));
    });
    return out;
}

PolicySet parse_channel_version(std::string_view version) {
    PolicySet ps;
    const std::size_t slash = version.find('/');
    if (slash == std::string_view::npos) {
        ps.base_version = std::string(version);
        return ps;
    }
    ps.base_version = std::string(version.substr(0, slash));
    ps.security = parse_security_constraints(version.substr(slash + 1));
    return ps;
}

std::string encode_channel_version(const PolicySet& ps) {
    std::string out = ps.base_version;
    std::vector<SecurityPolicy> sorted = ps.security;
    std::sort(sorted.begin(), sorted.end(), [](const SecurityPolicy& a, const SecurityPolicy& b) {
        return std::string_view(key_name(a.kind)) < std::string_view(key_name(b.kind));
    });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        out += i == 0 ? '/' : ',';
        out += key_name(sorted[i].kind);
        out += ':';
        out += std::to_string(sorted[i].threshold);
    }
    return out;
}

PreferencePolicy make_max_fee(double limit) {
    if (limit <= 0.0) throw GrammarError("MaxFee limit must be positive");
    return {PreferenceKind::MaxFee, limit};
}

PreferencePolicy make_timeout(double deadline_ms) {
    if (deadline_ms <= 0.0) throw GrammarError("Timeout deadline must be positive");
    return {PreferenceKind::Timeout, deadline_ms};
}

PreferencePolicy make_minimize_fee() { return {PreferenceKind::MinimizeFee, 0.0}; }

PreferencePolicy make_minimize_time() { return {PreferenceKind::MinimizeTime, 0.0}; }

bool security_satisfied(const std::vector<SecurityPolicy>& security, const ValidatorSet& vs) {
    for (const auto& p : security) {
        switch (p.kind) {
            case SecurityKind::MinValidators:
                if (static_cast<std::int64_t>(vs.size()) < p.threshold) return false;
                break;
            case SecurityKind::MinNakamoto:
                if (nakamoto_coefficient(vs) < p.threshold) return false;
                break;
        }
    }
    return true;
}

bool chain_satisfies(const PolicySet& ps, const Chain& c) {
    return security_satisfied(ps.security, c.validator_set);
}

bool route_satisfies(const PolicySet& ps, const Route& r, const Topology& t) {
    for (std::size_t i = 1; i + 1 < r.hops.size(); ++i) {
        if (!chain_satisfies(ps, t.chain(r.hops[i]))) return false;
    }
    return true;
}

}  // namespace xroute
