#include "bsim/error.hpp"

namespace bsim {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::BadMagic: return "bad magic";
        case Errc::BadVersion: return "bad version";
        case Errc::Truncated: return "truncated payload";
        case Errc::UnsortedKeys: return "unsorted keys";
        case Errc::Malformed: return "malformed payload";
        case Errc::SyntaxError: return "syntax error";
        case Errc::Overflow: return "overflow";
        case Errc::Underflow: return "underflow";
        case Errc::NotBinary: return "not a binary BSI";
        case Errc::EmptyInput: return "empty input";
        case Errc::DuplicatePosition: return "duplicate position";
        case Errc::DuplicateKey: return "duplicate key";
        case Errc::UnsortedInput: return "unsorted input";
        case Errc::NegativeValue: return "negative value";
        case Errc::DateBeforeEpoch: return "date before epoch";
        case Errc::SegmentMismatch: return "segment mismatch";
        case Errc::OrphanPositions: return "orphan positions";
        case Errc::InvalidArgument: return "invalid argument";
        case Errc::UnknownStrategy: return "unknown strategy";
        case Errc::UnknownMetric: return "unknown metric";
        case Errc::UnknownDimension: return "unknown dimension";
        case Errc::MissingPartition: return "missing partition";
        case Errc::MissingSegment: return "missing segment";
        case Errc::ChecksumMismatch: return "checksum mismatch";
        case Errc::VersionSkew: return "version skew";
        case Errc::IoError: return "io error";
        case Errc::UndefinedMetric: return "undefined metric";
        case Errc::DegenerateTest: return "degenerate test";
    }
    return "unknown error";
}

} // namespace bsim
