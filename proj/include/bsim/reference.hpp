#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "bsim/engine.hpp"
#include "bsim/model.hpp"

// Row-format reference implementation of the metric computations: hash joins
// on unit ids, per-row filtering and grouping. Serves as the equivalence
// oracle for the BSI engine and as the normal-format side of the benchmarks.

namespace bsim::ref {

struct Logs {
    std::vector<model::ExposeRecord> expose;
    std::vector<model::ValueRecord> metrics;
    std::vector<model::ValueRecord> dimensions;
};

class Engine {
public:
    // The catalog supplies scales and dictionaries; build it (via
    // model::build_*) before indexing so categorical codes line up.
    Engine(const Logs& logs, const model::Catalog& catalog);

    engine::BucketVector scorecard(const std::string& strategy, const std::string& metric,
                                   const std::vector<int64_t>& dates, engine::ScoreAgg agg,
                                   const std::vector<engine::BoundClause>& where = {},
                                   int64_t dim_date = -1) const;

    engine::BucketVector exposed_units(const std::string& strategy, int64_t date,
                                       const std::vector<engine::BoundClause>& where = {},
                                       int64_t dim_date = -1) const;

    engine::BucketVector pre_experiment(const std::string& strategy, const std::string& metric,
                                        int64_t expt_start, int pre_days, int64_t analysis_date,
                                        const std::vector<engine::BoundClause>& where = {},
                                        int64_t dim_date = -1) const;

private:
    struct Exposure {
        int64_t date;
        uint32_t bucket;
    };

    bool passes(const std::string& unit, const std::vector<engine::BoundClause>& where,
                int64_t dim_date) const;
    const std::unordered_map<std::string, Exposure>& exposure(const std::string& strategy) const;

    const model::Catalog* catalog_;
    std::unordered_map<std::string, std::unordered_map<std::string, Exposure>> expose_;
    std::map<std::pair<std::string, int64_t>, std::vector<std::pair<std::string, uint64_t>>>
        metric_rows_;
    std::map<std::pair<std::string, int64_t>, std::unordered_map<std::string, uint64_t>> dim_rows_;
};

bool clause_matches(uint64_t value, const engine::BoundClause& clause);

} // namespace bsim::ref
