#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xroute {

/// Base for all typed failures. `code()` is the stable machine-readable name
/// that the CLI prints as `code: message`.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg) : std::runtime_error(msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define XROUTE_ERROR_TYPE(Name)                                              \
    struct Name : Error {                                                    \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}         \
    }

XROUTE_ERROR_TYPE(SchemaError);
XROUTE_ERROR_TYPE(IntegrityError);
XROUTE_ERROR_TYPE(GrammarError);
XROUTE_ERROR_TYPE(NonMonotonicHeight);
XROUTE_ERROR_TYPE(MissingClientState);
XROUTE_ERROR_TYPE(MissingCommitment);
XROUTE_ERROR_TYPE(NoRoute);
XROUTE_ERROR_TYPE(InsufficientStake);
XROUTE_ERROR_TYPE(DuplicateId);
XROUTE_ERROR_TYPE(NoCoveringRelayer);
XROUTE_ERROR_TYPE(CyclicDependency);
XROUTE_ERROR_TYPE(EscrowClosed);
XROUTE_ERROR_TYPE(InvalidEvidence);
XROUTE_ERROR_TYPE(UnknownRelayer);
XROUTE_ERROR_TYPE(DuplicateVote);
XROUTE_ERROR_TYPE(AlreadyCommitted);
XROUTE_ERROR_TYPE(ConfigError);
XROUTE_ERROR_TYPE(ContractViolation);

#undef XROUTE_ERROR_TYPE

struct InsufficientDisjointPaths : Error {
    InsufficientDisjointPaths(std::size_t found_count, const std::string& msg)
        : Error("InsufficientDisjointPaths", msg), found(found_count) {}
    std::size_t found;
};

}  // namespace xroute
