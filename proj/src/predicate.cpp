#include "bsim/predicate.hpp"

#include <cctype>

#include "bsim/fixedpoint.hpp"

namespace bsim::engine {

namespace {

const char* op_text(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

struct Parser {
    std::string_view text;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw Error(Errc::SyntaxError, what + " at offset " + std::to_string(pos));
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(uint8_t(text[pos]))) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos == text.size();
    }

    static bool name_start(char c) { return std::isalpha(uint8_t(c)) || c == '_'; }
    static bool name_char(char c) {
        return std::isalnum(uint8_t(c)) || c == '_' || c == '-' || c == '.';
    }

    std::string name() {
        skip_ws();
        if (pos == text.size() || !name_start(text[pos])) fail("expected dimension name");
        size_t start = pos;
        while (pos < text.size() && name_char(text[pos])) ++pos;
        return std::string(text.substr(start, pos - start));
    }

    CmpOp op() {
        skip_ws();
        if (pos == text.size()) fail("expected operator");
        char c = text[pos];
        if (c == '=') {
            ++pos;
            return CmpOp::Eq;
        }
        if (c == '!') {
            if (pos + 1 >= text.size() || text[pos + 1] != '=') fail("unknown operator");
            pos += 2;
            return CmpOp::Ne;
        }
        if (c == '<' || c == '>') {
            bool eq = pos + 1 < text.size() && text[pos + 1] == '=';
            pos += eq ? 2 : 1;
            if (c == '<') return eq ? CmpOp::Le : CmpOp::Lt;
            return eq ? CmpOp::Ge : CmpOp::Gt;
        }
        fail("unknown operator");
    }

    std::string literal() {
        skip_ws();
        if (pos == text.size()) fail("expected literal");
        char c = text[pos];
        if (c == '\'') {
            size_t end = text.find('\'', pos + 1);
            if (end == std::string_view::npos) fail("unterminated string literal");
            std::string out(text.substr(pos, end - pos + 1));
            pos = end + 1;
            return out;
        }
        if (!std::isdigit(uint8_t(c)) && c != '.') fail("expected literal");
        size_t start = pos;
        while (pos < text.size() && (std::isdigit(uint8_t(text[pos])) || text[pos] == '.')) ++pos;
        return std::string(text.substr(start, pos - start));
    }

    bool keyword_and() {
        skip_ws();
        if (text.substr(pos, 3) == "AND" &&
            (pos + 3 == text.size() || !name_char(text[pos + 3]))) {
            pos += 3;
            return true;
        }
        return false;
    }
};

} // namespace

std::string PredicateExpr::print() const {
    std::string out;
    for (size_t i = 0; i < clauses.size(); ++i) {
        if (i) out += " AND ";
        out += clauses[i].name;
        out += ' ';
        out += op_text(clauses[i].op);
        out += ' ';
        out += clauses[i].literal;
    }
    return out;
}

PredicateExpr parse_predicate(std::string_view text) {
    Parser p{text};
    PredicateExpr expr;
    while (true) {
        PredicateClause clause;
        clause.name = p.name();
        clause.op = p.op();
        clause.literal = p.literal();
        expr.clauses.push_back(std::move(clause));
        if (p.at_end()) break;
        if (!p.keyword_and()) p.fail("expected AND");
    }
    return expr;
}

std::vector<BoundClause> bind_predicate(const PredicateExpr& expr, const model::Catalog& catalog) {
    std::vector<BoundClause> out;
    for (const PredicateClause& c : expr.clauses) {
        const model::DimensionInfo* info = catalog.dimension(c.name);
        if (!info) throw Error(Errc::UnknownDimension, c.name);
        uint64_t value;
        if (!c.literal.empty() && c.literal.front() == '\'') {
            if (!info->categorical)
                throw Error(Errc::InvalidArgument,
                            "string literal for numeric dimension " + c.name);
            std::string raw = c.literal.substr(1, c.literal.size() - 2);
            auto code = catalog.dimension_code(c.name, raw);
            if (!code)
                throw Error(Errc::InvalidArgument,
                            "value '" + raw + "' not in dictionary of " + c.name);
            value = *code;
        } else {
            if (c.literal.find('.') != std::string::npos)
                throw Error(Errc::Malformed, "dimension literals must be integers: " + c.literal);
            value = fixedpoint::parse_scaled(c.literal, 1);
        }
        out.push_back({c.name, c.op, value});
    }
    return out;
}

} // namespace bsim::engine
