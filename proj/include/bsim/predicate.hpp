#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bsim/bsi.hpp"
#include "bsim/model.hpp"

namespace bsim::engine {

// Conjunction of dimension comparisons, e.g.
//   client-type = 1 AND client-version > 134
// Names are validated against the catalog at bind time, not parse time.
struct PredicateClause {
    std::string name;
    CmpOp op;
    std::string literal; // raw token text; converted at bind time
};

struct PredicateExpr {
    std::vector<PredicateClause> clauses;
    std::string print() const;
};

PredicateExpr parse_predicate(std::string_view text);

struct BoundClause {
    std::string name;
    CmpOp op;
    uint64_t value;
};

// Resolves names and literals against the catalog: categorical literals go
// through the dimension dictionary, numeric dimensions take integer literals.
std::vector<BoundClause> bind_predicate(const PredicateExpr& expr, const model::Catalog& catalog);

} // namespace bsim::engine
