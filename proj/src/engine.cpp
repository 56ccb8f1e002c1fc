#include "bsim/engine.hpp"

#include <algorithm>
#include <bit>

#include "bsim/detail/parallel.hpp"

namespace bsim::engine {

// --- BucketVector ---------------------------------------------------------------

void BucketVector::merge(const BucketVector& other) {
    if (other.size() != size()) throw Error(Errc::InvalidArgument, "bucket count mismatch");
    for (uint32_t b = 0; b < size(); ++b) {
        sums[b] += other.sums[b];
        counts[b] += other.counts[b];
    }
}

uint64_t BucketVector::total_sum() const {
    uint64_t t = 0;
    for (uint64_t v : sums) t += v;
    return t;
}

uint64_t BucketVector::total_count() const {
    uint64_t t = 0;
    for (uint64_t v : counts) t += v;
    return t;
}

// --- expose filters --------------------------------------------------------------

BinaryBsi expose_filter(const model::ExposeColumn& col, int64_t date) {
    if (col.offset.empty() || date < col.min_date) return BinaryBsi{};
    return bsi_compare_scalar(col.offset, CmpOp::Le, uint64_t(date - col.min_date) + 1);
}

BinaryBsi expose_window_filter(const model::ExposeColumn& col, uint64_t lo, uint64_t hi) {
    if (lo < 1 || lo > hi) throw Error(Errc::InvalidArgument, "bad offset window");
    BinaryBsi ge = bsi_compare_scalar(col.offset, CmpOp::Ge, lo);
    BinaryBsi le = bsi_compare_scalar(col.offset, CmpOp::Le, hi);
    return BinaryBsi(ge.bits() & le.bits());
}

// --- bucket grouping --------------------------------------------------------------

namespace {

void add_leaf(BucketVector& out, const Bsi& value, const Bitmap& mask, uint64_t code,
              uint32_t bucket_count) {
    if (code == 0 || code > bucket_count)
        throw Error(Errc::Malformed, "bucket code " + std::to_string(code) + " out of range");
    uint32_t b = uint32_t(code - 1);
    BinaryBsi m{mask};
    out.sums[b] += bsi_multiply_binary(value, m).sum();
    out.counts[b] += mask.cardinality();
}

// Split the mask by membership in each bucket slice, high to low; each leaf
// is the position set of one bucket code.
void radix_split(BucketVector& out, const Bsi& value, const Bsi& bucket, const Bitmap& mask,
                 int slice, uint64_t code, uint32_t bucket_count) {
    if (mask.empty()) return;
    if (slice < 0) {
        add_leaf(out, value, mask, code, bucket_count);
        return;
    }
    Bitmap ones = mask & bucket.slice(slice);
    Bitmap zeros = andnot(mask, ones);
    radix_split(out, value, bucket, zeros, slice - 1, code, bucket_count);
    radix_split(out, value, bucket, ones, slice - 1, code | (uint64_t(1) << slice), bucket_count);
}

void check_orphans(const Bsi& value, const Bsi& bucket) {
    Bitmap orphans = andnot(value.nonzero(), bucket.nonzero());
    if (!orphans.empty())
        throw Error(Errc::OrphanPositions,
                    std::to_string(orphans.cardinality()) + " valued positions without a bucket",
                    orphans.cardinality());
}

} // namespace

BucketVector group_by_bucket(const Bsi& value, const Bsi& bucket, uint32_t bucket_count) {
    check_orphans(value, bucket);
    BucketVector out(bucket_count);
    radix_split(out, value, bucket, value.nonzero(), bucket.slice_count() - 1, 0, bucket_count);
    return out;
}

BucketVector group_by_bucket_scan(const Bsi& value, const Bsi& bucket, uint32_t bucket_count) {
    check_orphans(value, bucket);
    BucketVector out(bucket_count);
    Bitmap valued = value.nonzero();
    for (uint32_t b = 0; b < bucket_count; ++b) {
        Bitmap mask = bsi_compare_scalar(bucket, CmpOp::Eq, b + 1).bits() & valued;
        if (mask.empty()) continue;
        out.sums[b] += bsi_multiply_binary(value, BinaryBsi{mask}).sum();
        out.counts[b] += mask.cardinality();
    }
    return out;
}

// --- dimension filter ---------------------------------------------------------------

BinaryBsi dimension_filter(const Dataset& data, const std::vector<BoundClause>& clauses,
                           int64_t date, uint32_t segment) {
    if (clauses.empty()) throw Error(Errc::InvalidArgument, "empty dimension filter");
    Bitmap acc;
    bool first = true;
    for (const BoundClause& c : clauses) {
        const std::vector<Bsi>* segs = data.dimensions ? data.dimensions->find(c.name, date)
                                                       : nullptr;
        if (!segs)
            throw Error(Errc::MissingPartition,
                        "dimension " + c.name + " @ " + std::to_string(date));
        Bitmap match = bsi_compare_scalar((*segs)[segment], c.op, c.value).bits();
        acc = first ? std::move(match) : (acc & match);
        first = false;
        if (acc.empty()) break;
    }
    return BinaryBsi(std::move(acc));
}

// --- scorecard -------------------------------------------------------------------------

namespace {

struct QueryPlan {
    const model::Catalog* catalog;
    const std::vector<model::ExposeColumn>* expose;
    std::vector<const std::vector<Bsi>*> metric_by_date; // parallel to query.dates
    std::vector<BoundClause> where;
    int64_t dim_date = -1;
};

QueryPlan plan_query(const Dataset& data, const Query& query, bool need_metric) {
    if (!data.catalog || !data.expose) throw Error(Errc::InvalidArgument, "dataset incomplete");
    if (query.dates.empty()) throw Error(Errc::InvalidArgument, "no dates in query");
    if (!std::is_sorted(query.dates.begin(), query.dates.end()))
        throw Error(Errc::InvalidArgument, "dates must ascend");

    QueryPlan plan;
    plan.catalog = data.catalog;
    plan.expose = &data.expose->require(query.strategy);

    if (need_metric) {
        if (!data.metrics) throw Error(Errc::InvalidArgument, "dataset has no metric table");
        std::string missing;
        for (int64_t d : query.dates) {
            const auto* segs = data.metrics->find(query.metric, d);
            if (!segs) {
                missing += missing.empty() ? "" : ", ";
                missing += query.metric + " @ " + std::to_string(d);
            }
            plan.metric_by_date.push_back(segs);
        }
        if (!missing.empty()) throw Error(Errc::MissingPartition, missing);
    }

    if (query.where) {
        plan.where = bind_predicate(*query.where, *data.catalog);
        plan.dim_date = query.dim_date >= 0 ? query.dim_date : query.dates.back();
    }
    return plan;
}

// dimension mask for one segment, or the universe when there is no predicate
std::optional<Bitmap> segment_dim_mask(const Dataset& data, const QueryPlan& plan, uint32_t seg) {
    if (plan.where.empty()) return std::nullopt;
    return dimension_filter(data, plan.where, plan.dim_date, seg).bits();
}

Bitmap apply_dim_mask(Bitmap filter, const std::optional<Bitmap>& dim_mask) {
    if (dim_mask && !filter.empty()) return filter & *dim_mask;
    return filter;
}

} // namespace

BucketVector scorecard(const Dataset& data, const Query& query) {
    QueryPlan plan = plan_query(data, query, /*need_metric=*/true);
    uint32_t segments = plan.catalog->segment_count();
    uint32_t buckets = plan.catalog->bucket_count();

    std::vector<BucketVector> per_segment(segments);
    detail::parallel_for(segments, query.threads, [&](uint32_t seg) {
        const model::ExposeColumn& col = (*plan.expose)[seg];
        BucketVector acc(buckets);
        if (col.offset.empty()) {
            per_segment[seg] = std::move(acc);
            return;
        }
        std::optional<Bitmap> dim_mask = segment_dim_mask(data, plan, seg);
        if (query.agg == ScoreAgg::UniqueUnits) {
            // per-day binary states merged before counting
            Bitmap state;
            for (size_t di = 0; di < query.dates.size(); ++di) {
                const Bsi& value = (*plan.metric_by_date[di])[seg];
                Bitmap f = apply_dim_mask(expose_filter(col, query.dates[di]).bits(), dim_mask);
                state = state | (value.nonzero() & f);
            }
            acc = group_by_bucket(BinaryBsi{state}.to_bsi(), col.bucket, buckets);
        } else {
            for (size_t di = 0; di < query.dates.size(); ++di) {
                const Bsi& value = (*plan.metric_by_date[di])[seg];
                BinaryBsi f{apply_dim_mask(expose_filter(col, query.dates[di]).bits(), dim_mask)};
                Bsi filtered = bsi_multiply_binary(value, f);
                acc.merge(group_by_bucket(filtered, col.bucket, buckets));
            }
            if (query.agg == ScoreAgg::Count) acc.sums = acc.counts;
        }
        per_segment[seg] = std::move(acc);
    });

    BucketVector out(buckets);
    for (const BucketVector& v : per_segment) out.merge(v);
    return out;
}

BucketVector exposed_units(const Dataset& data, const Query& query, int64_t date) {
    QueryPlan plan = plan_query(data, query, /*need_metric=*/false);
    uint32_t segments = plan.catalog->segment_count();
    uint32_t buckets = plan.catalog->bucket_count();

    std::vector<BucketVector> per_segment(segments);
    detail::parallel_for(segments, query.threads, [&](uint32_t seg) {
        const model::ExposeColumn& col = (*plan.expose)[seg];
        if (col.offset.empty()) {
            per_segment[seg] = BucketVector(buckets);
            return;
        }
        std::optional<Bitmap> dim_mask = segment_dim_mask(data, plan, seg);
        BinaryBsi f{apply_dim_mask(expose_filter(col, date).bits(), dim_mask)};
        per_segment[seg] = group_by_bucket(f.to_bsi(), col.bucket, buckets);
    });

    BucketVector out(buckets);
    for (const BucketVector& v : per_segment) out.merge(v);
    return out;
}

// --- pre-aggregate tree ---------------------------------------------------------------

PreAggTree::PreAggTree(int64_t lo_date, int64_t hi_date, BsiAgg kind,
                       std::vector<std::vector<Bsi>> leaves)
    : lo_date_(lo_date), hi_date_(hi_date), kind_(kind) {
    if (leaves.empty() || hi_date - lo_date + 1 != int64_t(leaves.size()))
        throw Error(Errc::InvalidArgument, "leaf count does not match date span");
    levels_.push_back(std::move(leaves));
    while (levels_.back().size() >= 2) {
        const auto& prev = levels_.back();
        std::vector<std::vector<Bsi>> next;
        next.reserve(prev.size() / 2);
        for (size_t j = 0; j + 1 < prev.size(); j += 2) {
            size_t segments = prev[j].size();
            std::vector<Bsi> merged(segments);
            for (size_t s = 0; s < segments; ++s) {
                const Bsi pair[2] = {prev[j][s], prev[j + 1][s]};
                merged[s] = bsi_agg(kind_, pair);
            }
            next.push_back(std::move(merged));
        }
        if (next.empty()) break;
        levels_.push_back(std::move(next));
    }
    for (const auto& level : levels_)
        for (const auto& node : level)
            for (const Bsi& b : node) bytes_ += b.byte_size_estimate();
}

std::vector<std::pair<int, int>> preagg_decompose(int n_days, int lo, int hi) {
    if (lo < 1 || hi > n_days || lo > hi)
        throw Error(Errc::InvalidArgument, "query range outside tree span");
    std::vector<std::pair<int, int>> nodes;
    int pos = lo;
    while (pos <= hi) {
        int k = 0;
        // largest aligned block that starts at pos and stays inside [lo, hi]
        while ((pos - 1) % (1 << (k + 1)) == 0 && pos + (1 << (k + 1)) - 1 <= hi) ++k;
        nodes.emplace_back(k, (pos - 1) >> k);
        pos += 1 << k;
    }
    return nodes;
}

std::vector<Bsi> PreAggTree::query(int64_t lo, int64_t hi) const {
    if (lo < lo_date_ || hi > hi_date_ || lo > hi)
        throw Error(Errc::InvalidArgument, "query range outside tree span");
    auto nodes = preagg_decompose(days(), int(lo - lo_date_) + 1, int(hi - lo_date_) + 1);
    size_t segments = levels_[0][0].size();
    std::vector<Bsi> acc(segments);
    bool first = true;
    for (auto [level, index] : nodes) {
        const std::vector<Bsi>& n = node(level, index);
        if (first) {
            acc = n;
            first = false;
        } else {
            for (size_t s = 0; s < segments; ++s) {
                const Bsi pair[2] = {acc[s], n[s]};
                acc[s] = bsi_agg(kind_, pair);
            }
        }
    }
    return acc;
}

PreAggTree preagg_build(const model::MetricTable& table, const std::string& metric,
                        int64_t lo_date, int64_t hi_date, BsiAgg kind) {
    if (lo_date > hi_date) throw Error(Errc::InvalidArgument, "empty date span");
    std::vector<std::vector<Bsi>> leaves;
    std::string missing;
    for (int64_t d = lo_date; d <= hi_date; ++d) {
        const auto* segs = table.find(metric, d);
        if (!segs) {
            missing += missing.empty() ? "" : ", ";
            missing += metric + " @ " + std::to_string(d);
            continue;
        }
        leaves.push_back(*segs);
    }
    if (!missing.empty()) throw Error(Errc::MissingPartition, missing);
    return PreAggTree(lo_date, hi_date, kind, std::move(leaves));
}

// --- PreAggCache ----------------------------------------------------------------------

std::shared_ptr<const PreAggTree> PreAggCache::get_or_build(const model::MetricTable& table,
                                                            const std::string& metric,
                                                            int64_t lo_date, int64_t hi_date,
                                                            BsiAgg kind) {
    Key key{metric, lo_date, hi_date, kind};
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            lru_.erase(it->second.second);
            lru_.push_front(key);
            it->second.second = lru_.begin();
            return it->second.first;
        }
    }
    auto tree = std::make_shared<const PreAggTree>(preagg_build(table, metric, lo_date, hi_date, kind));
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = map_.find(key);
    if (it != map_.end()) return it->second.first; // raced; keep the existing one
    lru_.push_front(key);
    map_[key] = {tree, lru_.begin()};
    bytes_ += tree->byte_size_estimate();
    evict_locked();
    return tree;
}

void PreAggCache::evict_locked() {
    while (bytes_ > max_bytes_ && map_.size() > 1) {
        Key victim = lru_.back();
        lru_.pop_back();
        auto it = map_.find(victim);
        bytes_ -= it->second.first->byte_size_estimate();
        map_.erase(it);
    }
}

size_t PreAggCache::bytes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return bytes_;
}

size_t PreAggCache::entries() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.size();
}

// --- pre-experiment ---------------------------------------------------------------------

BucketVector pre_experiment(const Dataset& data, const Query& query, int64_t expt_start,
                            int pre_days, int64_t analysis_date, PreAggCache* cache) {
    if (pre_days < 1) throw Error(Errc::InvalidArgument, "pre-period must be at least one day");
    if (!data.metrics) throw Error(Errc::InvalidArgument, "dataset has no metric table");
    QueryPlan plan = plan_query(data, query, /*need_metric=*/false);
    uint32_t segments = plan.catalog->segment_count();
    uint32_t buckets = plan.catalog->bucket_count();
    int64_t lo = expt_start - pre_days, hi = expt_start - 1;

    std::shared_ptr<const PreAggTree> tree =
        cache ? cache->get_or_build(*data.metrics, query.metric, lo, hi, BsiAgg::Sum)
              : std::make_shared<const PreAggTree>(
                    preagg_build(*data.metrics, query.metric, lo, hi, BsiAgg::Sum));
    std::vector<Bsi> covariate = tree->query(lo, hi);

    std::vector<BucketVector> per_segment(segments);
    detail::parallel_for(segments, query.threads, [&](uint32_t seg) {
        const model::ExposeColumn& col = (*plan.expose)[seg];
        if (col.offset.empty()) {
            per_segment[seg] = BucketVector(buckets);
            return;
        }
        std::optional<Bitmap> dim_mask = segment_dim_mask(data, plan, seg);
        BinaryBsi f{apply_dim_mask(expose_filter(col, analysis_date).bits(), dim_mask)};
        Bsi filtered = bsi_multiply_binary(covariate[seg], f);
        per_segment[seg] = group_by_bucket(filtered, col.bucket, buckets);
    });

    BucketVector out(buckets);
    for (const BucketVector& v : per_segment) out.merge(v);
    return out;
}

} // namespace bsim::engine
