#include "bsim/reference.hpp"

#include <set>

#include "bsim/fixedpoint.hpp"

namespace bsim::ref {

bool clause_matches(uint64_t value, const engine::BoundClause& clause) {
    if (value == 0) return false; // zero means the unit has no dimension value
    switch (clause.op) {
        case CmpOp::Lt: return value < clause.value;
        case CmpOp::Gt: return value > clause.value;
        case CmpOp::Le: return value <= clause.value;
        case CmpOp::Ge: return value >= clause.value;
        case CmpOp::Eq: return value == clause.value;
        case CmpOp::Ne: return value != clause.value;
    }
    return false;
}

Engine::Engine(const Logs& logs, const model::Catalog& catalog) : catalog_(&catalog) {
    for (const auto& r : logs.expose)
        expose_[r.strategy][r.unit] = Exposure{r.date, catalog.bucket_of(r.rand_unit)};

    for (const auto& r : logs.metrics) {
        const model::MetricInfo* info = catalog.metric(r.id);
        uint64_t scale = info ? info->scale : 1;
        uint64_t v = fixedpoint::parse_scaled(r.raw_value, scale);
        if (v == 0) continue;
        metric_rows_[{r.id, r.date}].emplace_back(r.unit, v);
    }

    for (const auto& r : logs.dimensions) {
        const model::DimensionInfo* info = catalog.dimension(r.id);
        uint64_t v;
        if (info && info->categorical) {
            auto code = catalog.dimension_code(r.id, r.raw_value);
            if (!code) throw Error(Errc::InvalidArgument, "dimension value missing from catalog");
            v = *code;
        } else {
            v = fixedpoint::parse_scaled(r.raw_value, 1);
        }
        if (v == 0) continue;
        dim_rows_[{r.id, r.date}][r.unit] = v;
    }
}

const std::unordered_map<std::string, Engine::Exposure>& Engine::exposure(
    const std::string& strategy) const {
    auto it = expose_.find(strategy);
    if (it == expose_.end()) throw Error(Errc::UnknownStrategy, strategy);
    return it->second;
}

bool Engine::passes(const std::string& unit, const std::vector<engine::BoundClause>& where,
                    int64_t dim_date) const {
    for (const auto& clause : where) {
        auto table = dim_rows_.find({clause.name, dim_date});
        uint64_t v = 0;
        if (table != dim_rows_.end()) {
            auto it = table->second.find(unit);
            if (it != table->second.end()) v = it->second;
        }
        if (!clause_matches(v, clause)) return false;
    }
    return true;
}

engine::BucketVector Engine::scorecard(const std::string& strategy, const std::string& metric,
                                       const std::vector<int64_t>& dates, engine::ScoreAgg agg,
                                       const std::vector<engine::BoundClause>& where,
                                       int64_t dim_date) const {
    const auto& exposed = exposure(strategy);
    if (dim_date < 0 && !dates.empty()) dim_date = dates.back();
    engine::BucketVector out(catalog_->bucket_count());
    std::vector<std::set<std::string>> unique(agg == engine::ScoreAgg::UniqueUnits
                                                  ? catalog_->bucket_count()
                                                  : 0);
    for (int64_t date : dates) {
        auto rows = metric_rows_.find({metric, date});
        if (rows == metric_rows_.end())
            throw Error(Errc::MissingPartition, metric + " @ " + std::to_string(date));
        for (const auto& [unit, value] : rows->second) {
            auto it = exposed.find(unit);
            if (it == exposed.end() || it->second.date > date) continue;
            if (!where.empty() && !passes(unit, where, dim_date)) continue;
            uint32_t b = it->second.bucket;
            if (agg == engine::ScoreAgg::UniqueUnits) {
                unique[b].insert(unit);
            } else {
                out.sums[b] += agg == engine::ScoreAgg::Sum ? value : 1;
                out.counts[b] += 1;
            }
        }
    }
    if (agg == engine::ScoreAgg::UniqueUnits) {
        for (uint32_t b = 0; b < out.size(); ++b) {
            out.sums[b] = unique[b].size();
            out.counts[b] = unique[b].size();
        }
    }
    return out;
}

engine::BucketVector Engine::exposed_units(const std::string& strategy, int64_t date,
                                           const std::vector<engine::BoundClause>& where,
                                           int64_t dim_date) const {
    engine::BucketVector out(catalog_->bucket_count());
    for (const auto& [unit, exp] : exposure(strategy)) {
        if (exp.date > date) continue;
        if (!where.empty() && !passes(unit, where, dim_date)) continue;
        out.sums[exp.bucket] += 1;
        out.counts[exp.bucket] += 1;
    }
    return out;
}

engine::BucketVector Engine::pre_experiment(const std::string& strategy, const std::string& metric,
                                            int64_t expt_start, int pre_days,
                                            int64_t analysis_date,
                                            const std::vector<engine::BoundClause>& where,
                                            int64_t dim_date) const {
    std::unordered_map<std::string, uint64_t> totals;
    for (int64_t d = expt_start - pre_days; d <= expt_start - 1; ++d) {
        auto rows = metric_rows_.find({metric, d});
        if (rows == metric_rows_.end())
            throw Error(Errc::MissingPartition, metric + " @ " + std::to_string(d));
        for (const auto& [unit, value] : rows->second) totals[unit] += value;
    }
    engine::BucketVector out(catalog_->bucket_count());
    for (const auto& [unit, exp] : exposure(strategy)) {
        if (exp.date > analysis_date) continue;
        if (!where.empty() && !passes(unit, where, dim_date)) continue;
        auto it = totals.find(unit);
        if (it == totals.end()) continue; // no pre-period activity, nothing stored
        out.sums[exp.bucket] += it->second;
        out.counts[exp.bucket] += 1;
    }
    return out;
}

} // namespace bsim::ref
