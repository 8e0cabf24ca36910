#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xolap/model.hpp"

namespace xolap {

// ---------------------------------------------------------------------------
// Tree-pattern queries
// ---------------------------------------------------------------------------
//
//   group <dimension>.<level>        one or more
//   agg <fn>(<measure>)             one or more; count(*) counts facts
//   where <expr>                    at most one; and/or/not + parentheses
//   retain on                       optional; keep non-grouped fact content
//
// Predicate atoms are `<path> <cmp> <literal>` where a path is either a
// measure name or dimension.level, and cmp is = != < <= > >=.  A measure
// atom compares numerically; a level atom holds if any instance of that
// level under the fact satisfies the comparison (string equality, ordering
// numeric when both sides parse as numbers, byte order otherwise).

struct GroupingElement {
    std::string dimension;
    std::string level;
    bool operator==(const GroupingElement&) const = default;
};

struct AggSpec {
    AggFn fn;
    std::string measure;  // "*" allowed with count
    bool operator==(const AggSpec&) const = default;
};

struct PredicatePath {
    bool is_measure = false;
    std::string dimension;  // level paths
    std::string level;
    std::string measure;    // measure paths
    bool operator==(const PredicatePath&) const = default;
};

enum class CmpOp : uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* cmp_op_text(CmpOp op) {
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

struct Formula;
using FormulaPtr = std::unique_ptr<Formula>;

struct Formula {
    enum class Op : uint8_t { Atom, And, Or, Not } op = Op::Atom;
    // atom
    PredicatePath path;
    CmpOp cmp = CmpOp::Eq;
    std::string literal;
    // connectives
    FormulaPtr lhs, rhs;

    static FormulaPtr atom(PredicatePath p, CmpOp c, std::string lit) {
        auto f = std::make_unique<Formula>();
        f->op = Op::Atom;
        f->path = std::move(p);
        f->cmp = c;
        f->literal = std::move(lit);
        return f;
    }
    static FormulaPtr make(Op o, FormulaPtr l, FormulaPtr r) {
        auto f = std::make_unique<Formula>();
        f->op = o;
        f->lhs = std::move(l);
        f->rhs = std::move(r);
        return f;
    }

    bool equal(const Formula& o) const {
        if (op != o.op) return false;
        if (op == Op::Atom)
            return path == o.path && cmp == o.cmp && literal == o.literal;
        if (op == Op::Not) return lhs->equal(*o.lhs);
        return lhs->equal(*o.lhs) && rhs->equal(*o.rhs);
    }

    FormulaPtr clone() const {
        auto f = std::make_unique<Formula>();
        f->op = op;
        f->path = path;
        f->cmp = cmp;
        f->literal = literal;
        if (lhs) f->lhs = lhs->clone();
        if (rhs) f->rhs = rhs->clone();
        return f;
    }
};

struct TreePatternQuery {
    std::vector<GroupingElement> group_by;
    std::vector<AggSpec> aggregations;
    FormulaPtr predicate;       // may be null
    bool pass_through = false;  // retain non-grouped fact content in results

    TreePatternQuery() = default;
    TreePatternQuery(const TreePatternQuery& o)
        : group_by(o.group_by),
          aggregations(o.aggregations),
          predicate(o.predicate ? o.predicate->clone() : nullptr),
          pass_through(o.pass_through) {}
    TreePatternQuery& operator=(const TreePatternQuery& o) {
        if (this != &o) {
            group_by = o.group_by;
            aggregations = o.aggregations;
            predicate = o.predicate ? o.predicate->clone() : nullptr;
            pass_through = o.pass_through;
        }
        return *this;
    }
    TreePatternQuery(TreePatternQuery&&) = default;
    TreePatternQuery& operator=(TreePatternQuery&&) = default;

    bool equal(const TreePatternQuery& o) const {
        if (group_by != o.group_by || aggregations != o.aggregations ||
            pass_through != o.pass_through)
            return false;
        if (!predicate != !o.predicate) return false;
        return !predicate || predicate->equal(*o.predicate);
    }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace querydetail {

struct Lexer {
    std::string_view s;
    size_t i = 0;

    void skip_ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }

    bool eof() {
        skip_ws();
        return i >= s.size();
    }

    // Token: quoted string, comparison operator, paren, or bare word.
    std::string next() {
        skip_ws();
        if (i >= s.size()) raise(Errc::QuerySyntax, "unexpected end of line");
        char c = s[i];
        if (c == '(' || c == ')') {
            ++i;
            return std::string(1, c);
        }
        if (c == '"') {
            std::string out;
            ++i;
            while (i < s.size() && s[i] != '"') out.push_back(s[i++]);
            if (i >= s.size()) raise(Errc::QuerySyntax, "unterminated string literal");
            ++i;
            return "\"" + out;  // leading quote marks "was quoted"
        }
        if (c == '=' ) { ++i; return "="; }
        if (c == '!' || c == '<' || c == '>') {
            ++i;
            if (i < s.size() && s[i] == '=') {
                ++i;
                return std::string(1, c) + "=";
            }
            if (c == '!') raise(Errc::QuerySyntax, "expected '!='");
            return std::string(1, c);
        }
        std::string out;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '(' && s[i] != ')' &&
               s[i] != '=' && s[i] != '!' && s[i] != '<' && s[i] != '>' && s[i] != '"')
            out.push_back(s[i++]);
        if (out.empty()) raise(Errc::QuerySyntax, "unexpected character '" + std::string(1, c) + "'");
        return out;
    }

    std::string peek() {
        size_t save = i;
        if (eof()) return "";
        std::string t = next();
        i = save;
        return t;
    }
};

inline PredicatePath parse_path(const std::string& word, const SchemaSet& schemas) {
    PredicatePath p;
    size_t dot = word.find('.');
    if (dot == std::string::npos) {
        p.is_measure = true;
        p.measure = word;
        if (!schemas.has_measure(word))
            raise(Errc::UnknownPath, "no measure or dimension.level named '" + word + "'");
        return p;
    }
    p.dimension = word.substr(0, dot);
    p.level = word.substr(dot + 1);
    const HierarchySchema* d = schemas.find_dim(p.dimension);
    if (!d) raise(Errc::UnknownPath, "unknown dimension '" + p.dimension + "'");
    if (d->level_index(p.level) < 0)
        raise(Errc::UnknownPath, "dimension '" + p.dimension + "' has no level '" + p.level + "'");
    return p;
}

inline CmpOp parse_cmp(const std::string& tok) {
    if (tok == "=") return CmpOp::Eq;
    if (tok == "!=") return CmpOp::Ne;
    if (tok == "<") return CmpOp::Lt;
    if (tok == "<=") return CmpOp::Le;
    if (tok == ">") return CmpOp::Gt;
    if (tok == ">=") return CmpOp::Ge;
    raise(Errc::QuerySyntax, "expected a comparison operator, got '" + tok + "'");
}

inline FormulaPtr parse_or(Lexer& lx, const SchemaSet& schemas);

inline FormulaPtr parse_unary(Lexer& lx, const SchemaSet& schemas) {
    std::string tok = lx.peek();
    if (tok == "not") {
        lx.next();
        return Formula::make(Formula::Op::Not, parse_unary(lx, schemas), nullptr);
    }
    if (tok == "(") {
        lx.next();
        FormulaPtr f = parse_or(lx, schemas);
        if (lx.eof() || lx.next() != ")") raise(Errc::QuerySyntax, "expected ')'");
        return f;
    }
    if (tok.empty()) raise(Errc::QuerySyntax, "expected a predicate");
    std::string word = lx.next();
    if (!word.empty() && word[0] == '"')
        raise(Errc::QuerySyntax, "predicate path cannot be a string literal");
    PredicatePath path = parse_path(word, schemas);
    CmpOp op = parse_cmp(lx.next());
    if (lx.eof()) raise(Errc::QuerySyntax, "comparison is missing its right-hand side");
    std::string lit = lx.next();
    if (!lit.empty() && lit[0] == '"') lit.erase(0, 1);
    else if (lit == "(" || lit == ")") raise(Errc::QuerySyntax, "bad literal");
    return Formula::atom(std::move(path), op, std::move(lit));
}

inline FormulaPtr parse_and(Lexer& lx, const SchemaSet& schemas) {
    FormulaPtr f = parse_unary(lx, schemas);
    while (lx.peek() == "and") {
        lx.next();
        f = Formula::make(Formula::Op::And, std::move(f), parse_unary(lx, schemas));
    }
    return f;
}

inline FormulaPtr parse_or(Lexer& lx, const SchemaSet& schemas) {
    FormulaPtr f = parse_and(lx, schemas);
    while (lx.peek() == "or") {
        lx.next();
        f = Formula::make(Formula::Op::Or, std::move(f), parse_and(lx, schemas));
    }
    return f;
}

}  // namespace querydetail

inline TreePatternQuery parse_query(std::istream& in, const SchemaSet& schemas) {
    TreePatternQuery q;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        querydetail::Lexer lx{t, 0};
        std::string head = lx.next();
        if (head == "group") {
            if (lx.eof()) raise(Errc::QuerySyntax, "group line needs <dimension>.<level>");
            std::string word = lx.next();
            size_t dot = word.find('.');
            if (dot == std::string::npos)
                raise(Errc::QuerySyntax, "group line needs <dimension>.<level>");
            GroupingElement ge{word.substr(0, dot), word.substr(dot + 1)};
            const HierarchySchema* d = schemas.find_dim(ge.dimension);
            if (!d) raise(Errc::UnknownName, "unknown dimension '" + ge.dimension + "'");
            if (d->level_index(ge.level) < 0)
                raise(Errc::UnknownLevel,
                      "dimension '" + ge.dimension + "' has no level '" + ge.level + "'");
            for (const auto& g : q.group_by)
                if (g.dimension == ge.dimension)
                    raise(Errc::QuerySyntax, "dimension '" + ge.dimension + "' grouped twice");
            q.group_by.push_back(std::move(ge));
            if (!lx.eof()) raise(Errc::QuerySyntax, "trailing tokens on group line");
        } else if (head == "agg") {
            // fn(measure): the lexer splits at '(' since it is a paren token.
            std::string fn_name = lx.next();
            AggFn fn;
            if (fn_name == "sum") fn = AggFn::Sum;
            else if (fn_name == "count") fn = AggFn::Count;
            else if (fn_name == "min") fn = AggFn::Min;
            else if (fn_name == "max") fn = AggFn::Max;
            else if (fn_name == "avg") fn = AggFn::Avg;
            else raise(Errc::QuerySyntax, "unknown aggregate function '" + fn_name + "'");
            if (lx.next() != "(") raise(Errc::QuerySyntax, "expected '(' after aggregate function");
            std::string measure = lx.next();
            if (lx.next() != ")") raise(Errc::QuerySyntax, "expected ')' after measure name");
            if (measure == "*") {
                if (fn != AggFn::Count) raise(Errc::QuerySyntax, "'*' only aggregates with count");
            } else if (!schemas.has_measure(measure)) {
                raise(Errc::UnknownName, "unknown measure '" + measure + "'");
            }
            for (const auto& a : q.aggregations)
                if (a.fn == fn && a.measure == measure)
                    raise(Errc::QuerySyntax, "duplicate aggregation");
            q.aggregations.push_back(AggSpec{fn, std::move(measure)});
            if (!lx.eof()) raise(Errc::QuerySyntax, "trailing tokens on agg line");
        } else if (head == "where") {
            if (q.predicate) raise(Errc::QuerySyntax, "more than one where line");
            q.predicate = querydetail::parse_or(lx, schemas);
            if (!lx.eof()) raise(Errc::QuerySyntax, "trailing tokens on where line");
        } else if (head == "retain") {
            std::string v = lx.next();
            if (v == "on") q.pass_through = true;
            else if (v == "off") q.pass_through = false;
            else raise(Errc::QuerySyntax, "retain expects on or off");
            if (!lx.eof()) raise(Errc::QuerySyntax, "trailing tokens on retain line");
        } else {
            raise(Errc::QuerySyntax, "unknown directive '" + head + "'");
        }
    }
    if (q.group_by.empty()) raise(Errc::QuerySyntax, "query has no group line");
    if (q.aggregations.empty()) raise(Errc::QuerySyntax, "query has no agg line");
    return q;
}

inline TreePatternQuery parse_query(const std::string& text, const SchemaSet& schemas) {
    std::istringstream in(text);
    return parse_query(in, schemas);
}

namespace querydetail {

inline bool literal_needs_quotes(const std::string& lit) {
    if (lit.empty()) return true;
    for (char c : lit)
        if (c == ' ' || c == '\t' || c == '(' || c == ')' || c == '"' || c == '=' || c == '!' ||
            c == '<' || c == '>')
            return true;
    return false;
}

inline void print_formula(const Formula& f, std::string& out) {
    switch (f.op) {
        case Formula::Op::Atom: {
            if (f.path.is_measure) out += f.path.measure;
            else out += f.path.dimension + "." + f.path.level;
            out += " ";
            out += cmp_op_text(f.cmp);
            out += " ";
            if (literal_needs_quotes(f.literal)) out += "\"" + f.literal + "\"";
            else out += f.literal;
            break;
        }
        case Formula::Op::Not:
            out += "not ";
            print_formula(*f.lhs, out);
            break;
        case Formula::Op::And:
        case Formula::Op::Or:
            out += "(";
            print_formula(*f.lhs, out);
            out += f.op == Formula::Op::And ? " and " : " or ";
            print_formula(*f.rhs, out);
            out += ")";
            break;
    }
}

}  // namespace querydetail

inline std::string print_query(const TreePatternQuery& q) {
    std::string out;
    for (const auto& g : q.group_by) out += "group " + g.dimension + "." + g.level + "\n";
    for (const auto& a : q.aggregations)
        out += std::string("agg ") + agg_fn_name(a.fn) + "(" + a.measure + ")\n";
    if (q.predicate) {
        out += "where ";
        querydetail::print_formula(*q.predicate, out);
        out += "\n";
    }
    if (q.pass_through) out += "retain on\n";
    return out;
}

// ---------------------------------------------------------------------------
// Predicate evaluation and selection
// ---------------------------------------------------------------------------

namespace querydetail {

inline bool compare_values(std::string_view lhs, CmpOp op, std::string_view rhs, bool numeric_only) {
    auto a = Decimal::parse(lhs);
    auto b = Decimal::parse(rhs);
    int c;
    if (a && b) {
        c = a->cmp(*b);
    } else if (numeric_only) {
        return false;  // measure comparison against a non-number never holds
    } else {
        c = lhs.compare(rhs);
        c = c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    switch (op) {
        case CmpOp::Eq: return c == 0;
        case CmpOp::Ne: return c != 0;
        case CmpOp::Lt: return c < 0;
        case CmpOp::Le: return c <= 0;
        case CmpOp::Gt: return c > 0;
        case CmpOp::Ge: return c >= 0;
    }
    return false;
}

// Equality on level values is exact string match; ordering falls back to
// numeric when both sides are numbers.
inline bool compare_level_value(std::string_view v, CmpOp op, std::string_view lit) {
    if (op == CmpOp::Eq) return v == lit;
    if (op == CmpOp::Ne) return v != lit;
    return compare_values(v, op, lit, false);
}

inline bool any_level_value(const MDDataTree& t, NodeId n, std::string_view level, CmpOp op,
                            std::string_view lit) {
    for (NodeId c : t.children(n)) {
        const Node& cn = t.at(c);
        if (cn.kind != NodeKind::HierarchyLevel) continue;
        if (cn.label == level && compare_level_value(cn.value, op, lit)) return true;
        if (any_level_value(t, c, level, op, lit)) return true;
    }
    return false;
}

}  // namespace querydetail

/** Evaluates a predicate over one fact subtree. */
inline bool eval_formula(const MDDataTree& t, NodeId fact, const Formula& f) {
    switch (f.op) {
        case Formula::Op::And:
            return eval_formula(t, fact, *f.lhs) && eval_formula(t, fact, *f.rhs);
        case Formula::Op::Or:
            return eval_formula(t, fact, *f.lhs) || eval_formula(t, fact, *f.rhs);
        case Formula::Op::Not:
            return !eval_formula(t, fact, *f.lhs);
        case Formula::Op::Atom:
            break;
    }
    if (f.path.is_measure) {
        // Raw measures first; aggregate nodes stand in for their measure on
        // result trees (finalized value).
        for (NodeId c : t.children(fact)) {
            const Node& cn = t.at(c);
            if (cn.kind == NodeKind::Measure && cn.label == f.path.measure)
                return querydetail::compare_values(cn.value, f.cmp, f.literal, true);
        }
        for (NodeId c : t.children(fact)) {
            const Node& cn = t.at(c);
            if (cn.kind == NodeKind::Aggregate && cn.label == f.path.measure)
                return querydetail::compare_values(cn.value, f.cmp, f.literal, true);
        }
        return false;  // measure absent on this fact
    }
    for (NodeId c : t.children(fact)) {
        const Node& cn = t.at(c);
        if (cn.kind == NodeKind::Dimension && cn.label == f.path.dimension)
            return querydetail::any_level_value(t, c, f.path.level, f.cmp, f.literal);
    }
    return false;
}

inline bool fact_matches(const MDDataTree& t, NodeId fact, const TreePatternQuery& q) {
    return !q.predicate || eval_formula(t, fact, *q.predicate);
}

/**
 * Pure selection: a warehouse containing exactly the facts that satisfy the
 * query's predicate, full subtrees, document order preserved.  Grouping and
 * aggregation directives are ignored here.
 */
inline MDDataTree match_pattern(const MDDataTree& t, const TreePatternQuery& q,
                                const SchemaSet& schemas) {
    (void)schemas;
    MDDataTree out;
    for (NodeId f : t.children(t.root())) {
        if (t.at(f).kind != NodeKind::Fact) continue;
        if (fact_matches(t, f, q)) out.graft(out.root(), t, f);
    }
    return out;
}

}  // namespace xolap
