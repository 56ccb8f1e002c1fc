#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bsim/bsi.hpp"

namespace bsim::model {

// FNV-1a 64 with a murmur-style avalanche finalizer. An optional salt byte is
// hashed before the id so the segment and bucket assignments of one id stay
// independent.
uint64_t hash_unit_id(std::string_view id, uint8_t salt);

constexpr uint8_t kSegmentSalt = 0x00; // no salt byte hashed
constexpr uint8_t kBucketSalt = 0x01;

uint32_t segment_hash(std::string_view id, uint32_t segment_count);
uint32_t bucket_hash(std::string_view id, uint32_t bucket_count);

struct MetricInfo {
    uint64_t scale = 1; // power-of-ten fixed-point factor
};

struct DimensionInfo {
    bool categorical = false;
    std::vector<std::string> values; // categorical dictionary; code = index + 1
};

// Experiment catalog: unit-partitioning configuration plus the metric and
// dimension registries. Segment/bucket counts are fixed at creation.
class Catalog {
public:
    Catalog() = default;
    Catalog(uint32_t segment_count, uint32_t bucket_count, bool shared_units)
        : segment_count_(segment_count), bucket_count_(bucket_count), shared_units_(shared_units) {
        if (segment_count == 0 || bucket_count == 0)
            throw Error(Errc::InvalidArgument, "segment/bucket counts must be positive");
    }

    uint32_t segment_count() const { return segment_count_; }
    uint32_t bucket_count() const { return bucket_count_; }
    bool shared_units() const { return shared_units_; }

    uint32_t segment_of(std::string_view analysis_unit_id) const;
    // With shared units, bucketing is the segmentation procedure.
    uint32_t bucket_of(std::string_view randomization_unit_id) const;

    void register_metric(const std::string& id, uint64_t scale);
    const MetricInfo* metric(const std::string& id) const;
    MetricInfo& metric_or_register(const std::string& id);
    const std::map<std::string, MetricInfo>& metrics() const { return metrics_; }

    void register_dimension(const std::string& name, bool categorical);
    const DimensionInfo* dimension(const std::string& name) const;
    DimensionInfo& dimension_or_register(const std::string& name, bool categorical);
    const std::map<std::string, DimensionInfo>& dimensions() const { return dimensions_; }
    // assigns the next code for unseen categorical values
    uint64_t dimension_code_assign(const std::string& name, const std::string& value);
    // lookup-only, for predicate binding
    std::optional<uint64_t> dimension_code(const std::string& name, const std::string& value) const;

private:
    uint32_t segment_count_ = 1024;
    uint32_t bucket_count_ = 1024;
    bool shared_units_ = false;
    std::map<std::string, MetricInfo> metrics_;
    std::map<std::string, DimensionInfo> dimensions_;
};

// Dense analysis-unit-id -> position dictionary for one segment. Positions
// start at 0 and never change once assigned.
class PositionEncoder {
public:
    uint32_t get_or_assign(std::string_view id);
    std::optional<uint32_t> find(std::string_view id) const;
    uint32_t size() const { return uint32_t(ids_.size()); }
    const std::vector<std::string>& ids() const { return ids_; } // index = position

private:
    std::unordered_map<std::string, uint32_t> map_;
    std::vector<std::string> ids_;
};

// Per-segment encoders for a catalog.
class UnitIndex {
public:
    UnitIndex() = default;
    explicit UnitIndex(uint32_t segment_count) : segments_(segment_count) {}

    // SegmentMismatch error when the id does not hash to `segment`.
    uint32_t encode(const Catalog& catalog, uint32_t segment, std::string_view id);
    // Registers ids in the given order (highest engagement first) so they get
    // the smallest positions in their segments.
    void preregister(const Catalog& catalog, std::span<const std::string> ids_by_priority);

    PositionEncoder& segment(uint32_t s) { return segments_[s]; }
    const PositionEncoder& segment(uint32_t s) const { return segments_[s]; }
    uint32_t segment_count() const { return uint32_t(segments_.size()); }

private:
    std::vector<PositionEncoder> segments_;
};

// Expose log for one (strategy, segment): constant min date plus offset and
// bucket BSIs. Offsets start at 1; bucket codes are bucket-id + 1, both so
// that zero keeps meaning absent.
struct ExposeColumn {
    int64_t min_date = 0;
    Bsi offset;
    Bsi bucket;
};

class ExposeTable {
public:
    void put(const std::string& strategy, std::vector<ExposeColumn> columns);
    const std::vector<ExposeColumn>* find(const std::string& strategy) const;
    const std::vector<ExposeColumn>& require(const std::string& strategy) const;
    const std::map<std::string, std::vector<ExposeColumn>>& strategies() const { return strategies_; }

private:
    std::map<std::string, std::vector<ExposeColumn>> strategies_;
};

// Value columns keyed by (metric-id or dimension-name, date), one BSI per
// segment.
class ValueTable {
public:
    using Key = std::pair<std::string, int64_t>;

    void put(const std::string& id, int64_t date, std::vector<Bsi> segments);
    const std::vector<Bsi>* find(const std::string& id, int64_t date) const;
    const std::map<Key, std::vector<Bsi>>& parts() const { return parts_; }

private:
    std::map<Key, std::vector<Bsi>> parts_;
};

using MetricTable = ValueTable;
using DimensionTable = ValueTable;

struct ExposeRecord {
    std::string strategy;
    std::string unit;      // analysis-unit-id
    std::string rand_unit; // randomization-unit-id
    int64_t date = 0;      // first-expose-date, day index
};

struct ValueRecord {
    std::string id; // metric-id or dimension-name
    int64_t date = 0;
    std::string unit;
    std::string raw_value; // decimal text; scaled at build time
};

struct BuildCounters {
    uint64_t rows = 0;
    uint64_t zero_dropped = 0;
};

ExposeTable build_expose(std::span<const ExposeRecord> records, const Catalog& catalog,
                         UnitIndex& units);
MetricTable build_metric(std::span<const ValueRecord> records, Catalog& catalog, UnitIndex& units,
                         BuildCounters* counters = nullptr);
DimensionTable build_dimension(std::span<const ValueRecord> records, Catalog& catalog,
                               UnitIndex& units, BuildCounters* counters = nullptr);

} // namespace bsim::model
