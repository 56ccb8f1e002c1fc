#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bsim {

enum class Errc {
    // serialization / parsing
    BadMagic,
    BadVersion,
    Truncated,
    UnsortedKeys,
    Malformed,
    SyntaxError,
    // arithmetic
    Overflow,
    Underflow,
    NotBinary,
    EmptyInput,
    // construction / ingest
    DuplicatePosition,
    DuplicateKey,
    UnsortedInput,
    NegativeValue,
    DateBeforeEpoch,
    SegmentMismatch,
    OrphanPositions,
    InvalidArgument,
    // lookup
    UnknownStrategy,
    UnknownMetric,
    UnknownDimension,
    MissingPartition,
    MissingSegment,
    // storage
    ChecksumMismatch,
    VersionSkew,
    IoError,
    // statistics
    UndefinedMetric,
    DegenerateTest,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
    Error(Errc code, const std::string& msg, uint64_t detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code), detail_(detail) {}

    Errc code() const { return code_; }
    // op-specific payload, e.g. count of underflowing positions
    uint64_t detail() const { return detail_; }

private:
    Errc code_;
    uint64_t detail_ = 0;
};

} // namespace bsim
