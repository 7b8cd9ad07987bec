// Shared error types, seed mixing, and small utilities used across the library.
#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace griffin {

// Error categories map 1:1 onto CLI exit codes (see tools/ and README).
enum class ErrorCategory {
    parse,        // malformed input file
    schema,       // structurally invalid manifest / config
    io,           // filesystem failure
    data,         // cell-level type/value failure
    not_found,    // missing root node, checkpoint, ...
    consistency,  // pipeline misuse (frames/manifest disagree, stale trace)
    value,        // bad argument value (empty text, zero vector, ...)
    service,      // external embedding service failure
    leakage,      // SFT/downstream dataset overlap
    convergence,  // training failed to reach its contract
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& what) : std::runtime_error(what), cat_(cat) {}
    ErrorCategory category() const noexcept { return cat_; }

private:
    ErrorCategory cat_;
};

#define GRIFFIN_DEFINE_ERROR(Name, Cat)                                                  \
    class Name : public Error {                                                          \
    public:                                                                              \
        explicit Name(const std::string& what) : Error(ErrorCategory::Cat, what) {}      \
    }

GRIFFIN_DEFINE_ERROR(ParseError, parse);
GRIFFIN_DEFINE_ERROR(SchemaError, schema);
GRIFFIN_DEFINE_ERROR(IoError, io);
GRIFFIN_DEFINE_ERROR(CellTypeError, data);
GRIFFIN_DEFINE_ERROR(ConsistencyError, consistency);
GRIFFIN_DEFINE_ERROR(RootNotFound, not_found);
GRIFFIN_DEFINE_ERROR(RootNotEligible, value);
GRIFFIN_DEFINE_ERROR(EmptyText, value);
GRIFFIN_DEFINE_ERROR(ServiceError, service);
GRIFFIN_DEFINE_ERROR(InsufficientData, value);
GRIFFIN_DEFINE_ERROR(NotFitted, consistency);
GRIFFIN_DEFINE_ERROR(NonConvergence, convergence);
GRIFFIN_DEFINE_ERROR(ZeroVector, value);
GRIFFIN_DEFINE_ERROR(DuplicateLabels, value);
GRIFFIN_DEFINE_ERROR(DegenerateLabels, value);
GRIFFIN_DEFINE_ERROR(EmptyCorpus, value);
GRIFFIN_DEFINE_ERROR(LeakageError, leakage);
GRIFFIN_DEFINE_ERROR(MissingCheckpoint, not_found);
GRIFFIN_DEFINE_ERROR(DimensionMismatch, consistency);
GRIFFIN_DEFINE_ERROR(StaleTrace, consistency);

#undef GRIFFIN_DEFINE_ERROR

// Timestamp sentinel for rows of untimed tables: always temporally eligible.
inline constexpr std::int64_t kNoTimestamp = std::numeric_limits<std::int64_t>::min();

// splitmix64 finalizer; the standard way to turn correlated seeds into independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

// FNV-1a, used wherever a platform-stable string hash is required.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace griffin
