#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "bsim/model.hpp"
#include "bsim/predicate.hpp"

namespace bsim::engine {

// Per-bucket integer aggregates: sums of filtered values and counts of
// nonzero units. The unit of statistical inference.
struct BucketVector {
    std::vector<uint64_t> sums;
    std::vector<uint64_t> counts;

    BucketVector() = default;
    explicit BucketVector(uint32_t buckets) : sums(buckets, 0), counts(buckets, 0) {}

    uint32_t size() const { return uint32_t(sums.size()); }
    void merge(const BucketVector& other);
    uint64_t total_sum() const;
    uint64_t total_count() const;
    bool operator==(const BucketVector&) const = default;
};

// In-memory view over the loaded experiment tables.
struct Dataset {
    const model::Catalog* catalog = nullptr;
    const model::ExposeTable* expose = nullptr;
    const model::MetricTable* metrics = nullptr;
    const model::DimensionTable* dimensions = nullptr;
};

// Units exposed on or before `date`: offset <= date - min + 1. Empty when the
// date precedes the segment's minimum expose date.
BinaryBsi expose_filter(const model::ExposeColumn& col, int64_t date);

// Units first exposed within the offset window [lo, hi]; 1 <= lo <= hi.
BinaryBsi expose_window_filter(const model::ExposeColumn& col, uint64_t lo, uint64_t hi);

// Groups value sums and unit counts by bucket code (bucket-id + 1) via radix
// recursion over the bucket BSI's slices. Every valued position must carry a
// bucket (OrphanPositions error otherwise).
BucketVector group_by_bucket(const Bsi& value, const Bsi& bucket, uint32_t bucket_count);
// Same contract computed with one equality scan per bucket; kept as the
// equivalence check for the radix path.
BucketVector group_by_bucket_scan(const Bsi& value, const Bsi& bucket, uint32_t bucket_count);

// Conjunction of per-clause scalar comparisons on the dimension snapshot of
// one date. Units lacking a dimension value never match.
BinaryBsi dimension_filter(const Dataset& data, const std::vector<BoundClause>& clauses,
                           int64_t date, uint32_t segment);

enum class ScoreAgg { Sum, Count, UniqueUnits };

struct Query {
    std::string strategy;
    std::string metric;
    std::vector<int64_t> dates; // ascending
    ScoreAgg agg = ScoreAgg::Sum;
    const PredicateExpr* where = nullptr; // deep-dive dimension filter
    int64_t dim_date = -1;                // snapshot date for `where`; default dates.back()
    int threads = 1;
};

// Scorecard over one or more days, merged across segments. Sum and Count fold
// per-day results; UniqueUnits merges per-day binary states before counting.
BucketVector scorecard(const Dataset& data, const Query& query);
// Exposed-unit counts per bucket at `date` (scorecard denominators).
BucketVector exposed_units(const Dataset& data, const Query& query, int64_t date);

// --- pre-aggregate tree -------------------------------------------------------

// Balanced binary aggregation tree over a span of dates. Level k nodes cover
// aligned 2^k-day blocks and exist only when both children do.
class PreAggTree {
public:
    PreAggTree(int64_t lo_date, int64_t hi_date, BsiAgg kind,
               std::vector<std::vector<Bsi>> leaves);

    int64_t lo_date() const { return lo_date_; }
    int64_t hi_date() const { return hi_date_; }
    int days() const { return int(levels_[0].size()); }
    BsiAgg kind() const { return kind_; }
    size_t byte_size_estimate() const { return bytes_; }

    const std::vector<Bsi>& node(int level, int index) const { return levels_[level][index]; }

    // Aggregate of [lo, hi] per segment; equals the direct fold over days.
    std::vector<Bsi> query(int64_t lo, int64_t hi) const;

private:
    int64_t lo_date_;
    int64_t hi_date_;
    BsiAgg kind_;
    std::vector<std::vector<std::vector<Bsi>>> levels_; // level -> node -> segment
    size_t bytes_ = 0;
};

// Canonical decomposition of day range [lo, hi] (1-based, within an n-day
// span) into existing tree nodes, largest-aligned-first; at most
// 2*ceil(log2(n)) nodes.
std::vector<std::pair<int, int>> preagg_decompose(int n_days, int lo, int hi);

PreAggTree preagg_build(const model::MetricTable& table, const std::string& metric,
                        int64_t lo_date, int64_t hi_date, BsiAgg kind);

// LRU cache of pre-aggregate trees keyed by (metric, span, kind), bounded by
// estimated byte size.
class PreAggCache {
public:
    explicit PreAggCache(size_t max_bytes) : max_bytes_(max_bytes) {}

    std::shared_ptr<const PreAggTree> get_or_build(const model::MetricTable& table,
                                                   const std::string& metric, int64_t lo_date,
                                                   int64_t hi_date, BsiAgg kind);
    size_t bytes() const;
    size_t entries() const;

private:
    struct Key {
        std::string metric;
        int64_t lo;
        int64_t hi;
        BsiAgg kind;
        auto operator<=>(const Key&) const = default;
    };
    void evict_locked();

    size_t max_bytes_;
    mutable std::mutex mutex_;
    size_t bytes_ = 0;
    std::list<Key> lru_; // front = most recent
    std::map<Key, std::pair<std::shared_ptr<const PreAggTree>, std::list<Key>::iterator>> map_;
};

// Pre-period covariate: per segment, the sumBSI aggregate of the C days
// before expt_start, filtered to units exposed by analysis_date, grouped by
// bucket. Feeds the variance-reduction adjustment.
BucketVector pre_experiment(const Dataset& data, const Query& query, int64_t expt_start,
                            int pre_days, int64_t analysis_date, PreAggCache* cache = nullptr);

} // namespace bsim::engine
