#include "bsim/model.hpp"

#include <algorithm>
#include <set>

#include "bsim/fixedpoint.hpp"

namespace bsim::model {

namespace {

uint64_t fmix64(uint64_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

} // namespace

uint64_t hash_unit_id(std::string_view id, uint8_t salt) {
    uint64_t h = 14695981039346656037ULL;
    constexpr uint64_t kPrime = 1099511628211ULL;
    if (salt != kSegmentSalt) {
        h ^= salt;
        h *= kPrime;
    }
    for (unsigned char c : id) {
        h ^= c;
        h *= kPrime;
    }
    return fmix64(h);
}

uint32_t segment_hash(std::string_view id, uint32_t segment_count) {
    if (id.empty()) throw Error(Errc::InvalidArgument, "empty analysis-unit-id");
    return uint32_t(hash_unit_id(id, kSegmentSalt) % segment_count);
}

uint32_t bucket_hash(std::string_view id, uint32_t bucket_count) {
    if (id.empty()) throw Error(Errc::InvalidArgument, "empty randomization-unit-id");
    return uint32_t(hash_unit_id(id, kBucketSalt) % bucket_count);
}

// --- Catalog -----------------------------------------------------------------

uint32_t Catalog::segment_of(std::string_view id) const { return segment_hash(id, segment_count_); }

uint32_t Catalog::bucket_of(std::string_view id) const {
    if (shared_units_) return segment_hash(id, bucket_count_);
    return bucket_hash(id, bucket_count_);
}

void Catalog::register_metric(const std::string& id, uint64_t scale) {
    if (metrics_.count(id)) throw Error(Errc::DuplicateKey, "metric already registered: " + id);
    metrics_[id] = MetricInfo{scale};
}

const MetricInfo* Catalog::metric(const std::string& id) const {
    auto it = metrics_.find(id);
    return it == metrics_.end() ? nullptr : &it->second;
}

MetricInfo& Catalog::metric_or_register(const std::string& id) { return metrics_[id]; }

void Catalog::register_dimension(const std::string& name, bool categorical) {
    if (dimensions_.count(name))
        throw Error(Errc::DuplicateKey, "dimension already registered: " + name);
    dimensions_[name] = DimensionInfo{categorical, {}};
}

const DimensionInfo* Catalog::dimension(const std::string& name) const {
    auto it = dimensions_.find(name);
    return it == dimensions_.end() ? nullptr : &it->second;
}

DimensionInfo& Catalog::dimension_or_register(const std::string& name, bool categorical) {
    auto it = dimensions_.find(name);
    if (it == dimensions_.end()) it = dimensions_.emplace(name, DimensionInfo{categorical, {}}).first;
    return it->second;
}

uint64_t Catalog::dimension_code_assign(const std::string& name, const std::string& value) {
    DimensionInfo& info = dimensions_.at(name);
    auto it = std::find(info.values.begin(), info.values.end(), value);
    if (it != info.values.end()) return uint64_t(it - info.values.begin()) + 1;
    info.values.push_back(value);
    return info.values.size();
}

std::optional<uint64_t> Catalog::dimension_code(const std::string& name,
                                                const std::string& value) const {
    const DimensionInfo* info = dimension(name);
    if (!info) return std::nullopt;
    auto it = std::find(info->values.begin(), info->values.end(), value);
    if (it == info->values.end()) return std::nullopt;
    return uint64_t(it - info->values.begin()) + 1;
}

// --- PositionEncoder / UnitIndex ------------------------------------------------

uint32_t PositionEncoder::get_or_assign(std::string_view id) {
    auto it = map_.find(std::string(id));
    if (it != map_.end()) return it->second;
    uint32_t pos = uint32_t(ids_.size());
    ids_.emplace_back(id);
    map_.emplace(ids_.back(), pos);
    return pos;
}

std::optional<uint32_t> PositionEncoder::find(std::string_view id) const {
    auto it = map_.find(std::string(id));
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

uint32_t UnitIndex::encode(const Catalog& catalog, uint32_t segment, std::string_view id) {
    if (segment >= segments_.size())
        throw Error(Errc::InvalidArgument, "segment out of range");
    if (catalog.segment_of(id) != segment)
        throw Error(Errc::SegmentMismatch,
                    "id '" + std::string(id) + "' does not belong to segment " + std::to_string(segment));
    return segments_[segment].get_or_assign(id);
}

void UnitIndex::preregister(const Catalog& catalog, std::span<const std::string> ids_by_priority) {
    for (const std::string& id : ids_by_priority)
        segments_[catalog.segment_of(id)].get_or_assign(id);
}

// --- tables ---------------------------------------------------------------------

void ExposeTable::put(const std::string& strategy, std::vector<ExposeColumn> columns) {
    strategies_[strategy] = std::move(columns);
}

const std::vector<ExposeColumn>* ExposeTable::find(const std::string& strategy) const {
    auto it = strategies_.find(strategy);
    return it == strategies_.end() ? nullptr : &it->second;
}

const std::vector<ExposeColumn>& ExposeTable::require(const std::string& strategy) const {
    const auto* cols = find(strategy);
    if (!cols) throw Error(Errc::UnknownStrategy, strategy);
    return *cols;
}

void ValueTable::put(const std::string& id, int64_t date, std::vector<Bsi> segments) {
    parts_[{id, date}] = std::move(segments);
}

const std::vector<Bsi>* ValueTable::find(const std::string& id, int64_t date) const {
    auto it = parts_.find({id, date});
    return it == parts_.end() ? nullptr : &it->second;
}

// --- builders ---------------------------------------------------------------------

ExposeTable build_expose(std::span<const ExposeRecord> records, const Catalog& catalog,
                         UnitIndex& units) {
    struct SegmentAccum {
        int64_t min_date = INT64_MAX;
        std::vector<std::pair<uint32_t, int64_t>> dated; // (position, date)
        std::vector<std::pair<uint32_t, uint64_t>> bucket;
    };
    std::map<std::string, std::vector<SegmentAccum>> per_strategy;
    std::map<std::string, std::set<std::string>> seen_units;

    for (const ExposeRecord& r : records) {
        if (r.date < 0) throw Error(Errc::DateBeforeEpoch, "expose date for unit " + r.unit);
        if (!seen_units[r.strategy].insert(r.unit).second)
            throw Error(Errc::DuplicateKey,
                        "duplicate analysis unit '" + r.unit + "' for strategy " + r.strategy);
        auto& segs = per_strategy[r.strategy];
        if (segs.empty()) segs.resize(catalog.segment_count());
        uint32_t seg = catalog.segment_of(r.unit);
        uint32_t pos = units.encode(catalog, seg, r.unit);
        SegmentAccum& acc = segs[seg];
        acc.min_date = std::min(acc.min_date, r.date);
        acc.dated.emplace_back(pos, r.date);
        acc.bucket.emplace_back(pos, uint64_t(catalog.bucket_of(r.rand_unit)) + 1);
    }

    ExposeTable out;
    for (auto& [strategy, segs] : per_strategy) {
        std::vector<ExposeColumn> columns(catalog.segment_count());
        for (uint32_t s = 0; s < catalog.segment_count(); ++s) {
            SegmentAccum& acc = segs[s];
            if (acc.dated.empty()) continue;
            ExposeColumn& col = columns[s];
            col.min_date = acc.min_date;
            std::vector<std::pair<uint32_t, uint64_t>> offsets;
            offsets.reserve(acc.dated.size());
            for (auto& [pos, date] : acc.dated)
                offsets.emplace_back(pos, uint64_t(date - acc.min_date) + 1);
            col.offset = Bsi::from_pairs(offsets);
            col.bucket = Bsi::from_pairs(acc.bucket);
        }
        out.put(strategy, std::move(columns));
    }
    return out;
}

namespace {

ValueTable build_values(std::span<const ValueRecord> records, Catalog& catalog, UnitIndex& units,
                        BuildCounters* counters, bool dimensions) {
    std::map<ValueTable::Key, std::vector<std::vector<std::pair<uint32_t, uint64_t>>>> accum;
    std::set<std::tuple<std::string, int64_t, std::string>> seen;
    BuildCounters local;

    for (const ValueRecord& r : records) {
        if (r.date < 0) throw Error(Errc::DateBeforeEpoch, "value date for unit " + r.unit);
        if (!seen.emplace(r.id, r.date, r.unit).second)
            throw Error(Errc::DuplicateKey, "duplicate record for (" + r.id + ", " +
                                                std::to_string(r.date) + ", " + r.unit + ")");
        uint64_t value;
        if (dimensions) {
            const DimensionInfo* info = catalog.dimension(r.id);
            if (!info)
                throw Error(Errc::UnknownDimension, "register dimension before ingest: " + r.id);
            value = info->categorical ? catalog.dimension_code_assign(r.id, r.raw_value)
                                      : fixedpoint::parse_scaled(r.raw_value, 1);
        } else {
            MetricInfo& info = catalog.metric_or_register(r.id);
            value = fixedpoint::parse_scaled(r.raw_value, info.scale);
        }
        ++local.rows;
        if (value == 0) {
            ++local.zero_dropped;
            continue;
        }
        uint32_t seg = catalog.segment_of(r.unit);
        uint32_t pos = units.encode(catalog, seg, r.unit);
        auto& segs = accum[{r.id, r.date}];
        if (segs.empty()) segs.resize(catalog.segment_count());
        segs[seg].emplace_back(pos, value);
    }

    ValueTable out;
    for (auto& [key, segs] : accum) {
        std::vector<Bsi> columns(catalog.segment_count());
        for (uint32_t s = 0; s < catalog.segment_count(); ++s)
            if (!segs[s].empty()) columns[s] = Bsi::from_pairs(segs[s]);
        out.put(key.first, key.second, std::move(columns));
    }
    if (counters) *counters = local;
    return out;
}

} // namespace

MetricTable build_metric(std::span<const ValueRecord> records, Catalog& catalog, UnitIndex& units,
                         BuildCounters* counters) {
    return build_values(records, catalog, units, counters, /*dimensions=*/false);
}

DimensionTable build_dimension(std::span<const ValueRecord> records, Catalog& catalog,
                               UnitIndex& units, BuildCounters* counters) {
    return build_values(records, catalog, units, counters, /*dimensions=*/true);
}

} // namespace bsim::model
