#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "xolap/diagnostics.hpp"
#include "xolap/qbs.hpp"

namespace xolap {

// ---------------------------------------------------------------------------
// Warehouse normalization
// ---------------------------------------------------------------------------
//
// The repair-first alternative to query-time grouping: rewrite the warehouse
// (and, when needed, its schema) so that every fact contributes exactly one
// value at every level of every dimension, then group with a plain engine.
//
//   make_onto      pads chains that enter a hierarchy above its finest level
//                  with placeholder values for the missing finer levels.
//   make_covering  additionally interposes placeholders where a chain skips
//                  levels, appends them where a chain stops early, and fills
//                  dimensions a fact does not describe at all.
//   make_strict    rewrites every dimension that is multivalued anywhere in
//                  the warehouse: each fact's subtree for that dimension
//                  becomes a single spine whose value at each level encodes
//                  the set of values reachable there, and the schema renames
//                  those levels (open domains) to mark the change of meaning.
//   normalize      make_strict after make_covering; its output validates
//                  with no findings under the returned schema.
//
// Every inserted or fused node is recorded in an action list, so the repair
// is auditable and the original member sets remain recoverable.

struct NormalizationPlan {
    std::string other_token = std::string(kOtherToken);
    std::string fused_suffix = "_fused";
};

struct Normalized {
    MDDataTree tree;
    SchemaSet schemas;                 // input schema, extended by make_strict
    std::vector<std::string> actions;  // one line per repair
};

inline void validate_plan(const SchemaSet& schemas, const NormalizationPlan& plan) {
    if (plan.other_token.empty())
        raise(Errc::InvalidConfig, "placeholder token must be nonempty");
    if (plan.fused_suffix.empty())
        raise(Errc::InvalidConfig, "fused-level suffix must be nonempty");
    if (plan.other_token.find('-') != std::string::npos ||
        plan.other_token.find('"') != std::string::npos)
        raise(Errc::InvalidConfig, "placeholder token must not contain '-' or '\"'");
    for (const auto& d : schemas.dims) {
        for (const auto& l : d.levels) {
            if (l.domain.kind != Domain::Kind::Open && l.domain.contains(plan.other_token))
                raise(Errc::InvalidConfig, "placeholder token '" + plan.other_token +
                                               "' collides with the domain of level '" + l.name +
                                               "'");
            if (d.level_index(l.name + plan.fused_suffix) >= 0)
                raise(Errc::InvalidConfig, "level name '" + l.name + plan.fused_suffix +
                                               "' already exists in dimension '" + d.dimension +
                                               "'");
        }
    }
}

namespace normdetail {

struct RepairCtx {
    const MDDataTree& src;
    const SchemaSet& schemas;
    const NormalizationPlan& plan;
    std::vector<std::string>& actions;
    bool fill_skips = false;     // interpose placeholders where a chain jumps levels
    bool fill_deadends = false;  // append placeholders where a chain stops early
    bool fill_missing = false;   // create chains for absent or empty dimensions
};

/** Finds or creates the placeholder child of `parent` at `level`. */
inline NodeId other_filler(MDDataTree& out, NodeId parent, const std::string& level,
                           RepairCtx& ctx, const std::string& site_path,
                           const std::string& dimension) {
    for (NodeId c : out.children(parent)) {
        const Node& cn = out.at(c);
        if (cn.kind == NodeKind::HierarchyLevel && cn.label == level &&
            cn.value == ctx.plan.other_token)
            return c;
    }
    ctx.actions.push_back("INSERT " + dimension + " " + level + " " + site_path);
    return out.add_level(parent, level, ctx.plan.other_token);
}

inline void copy_filling(RepairCtx& ctx, NodeId snode, int sidx, MDDataTree& out, NodeId oparent,
                         const HierarchySchema& dim, std::vector<NodeId>& chain) {
    const Node& sn = ctx.src.at(snode);
    NodeId nid = out.add_level(oparent, sn.label, sn.value);
    chain.push_back(snode);
    const int depth = (int)dim.levels.size();
    int seen = 0;
    for (NodeId c : ctx.src.children(snode)) {
        const Node& cn = ctx.src.at(c);
        if (cn.kind != NodeKind::HierarchyLevel) continue;
        ++seen;
        int cidx = dim.level_index(cn.label);
        if (cidx < 0)
            raise(Errc::UnknownLevel,
                  "dimension '" + dim.dimension + "' has no level '" + cn.label + "'");
        NodeId attach = nid;
        if (ctx.fill_skips && cidx > sidx + 1) {
            std::string site = node_path(ctx.src, chain);
            for (int k = sidx + 1; k < cidx; ++k)
                attach = other_filler(out, attach, dim.levels[k].name, ctx, site, dim.dimension);
        }
        copy_filling(ctx, c, cidx, out, attach, dim, chain);
    }
    if (seen == 0 && ctx.fill_deadends && sidx < depth - 1) {
        std::string site = node_path(ctx.src, chain);
        NodeId attach = nid;
        for (int k = sidx + 1; k < depth; ++k)
            attach = other_filler(out, attach, dim.levels[k].name, ctx, site, dim.dimension);
    }
    chain.pop_back();
}

inline void rebuild_dim(RepairCtx& ctx, NodeId dnode, MDDataTree& out, NodeId ofact,
                        const HierarchySchema& dim, std::vector<NodeId>& chain) {
    NodeId od = out.add(ofact, Node{NodeKind::Dimension, dim.dimension, "", AggFn::Sum, "", ""});
    chain.push_back(dnode);
    int entries = 0;
    for (NodeId c : ctx.src.children(dnode)) {
        const Node& cn = ctx.src.at(c);
        if (cn.kind != NodeKind::HierarchyLevel) continue;
        ++entries;
        int eidx = dim.level_index(cn.label);
        if (eidx < 0)
            raise(Errc::UnknownLevel,
                  "dimension '" + dim.dimension + "' has no level '" + cn.label + "'");
        NodeId attach = od;
        if (eidx > 0) {  // chain enters above the finest level: pad downward
            std::string site = node_path(ctx.src, chain);
            for (int k = 0; k < eidx; ++k)
                attach = other_filler(out, attach, dim.levels[k].name, ctx, site, dim.dimension);
        }
        copy_filling(ctx, c, eidx, out, attach, dim, chain);
    }
    if (entries == 0 && ctx.fill_missing) {
        std::string site = node_path(ctx.src, chain);
        NodeId attach = od;
        for (size_t k = 0; k < dim.levels.size(); ++k)
            attach = other_filler(out, attach, dim.levels[k].name, ctx, site, dim.dimension);
    }
    chain.pop_back();
}

inline MDDataTree repair(RepairCtx& ctx) {
    MDDataTree out;
    std::vector<NodeId> chain;
    size_t ordinal = 0;
    for (NodeId f : ctx.src.children(ctx.src.root())) {
        if (ctx.src.at(f).kind != NodeKind::Fact) continue;
        ++ordinal;
        NodeId of = out.add(out.root(), Node{NodeKind::Fact, "fact", "", AggFn::Sum, "", ""});
        chain.push_back(f);
        std::set<std::string> present;
        for (NodeId c : ctx.src.children(f)) {
            const Node& cn = ctx.src.at(c);
            if (cn.kind == NodeKind::Dimension) {
                const HierarchySchema* d = ctx.schemas.find_dim(cn.label);
                if (!d) raise(Errc::UnknownName, "unknown dimension '" + cn.label + "'");
                present.insert(cn.label);
                rebuild_dim(ctx, c, out, of, *d, chain);
            } else {
                out.graft(of, ctx.src, c);  // measures and aggregates pass through
            }
        }
        if (ctx.fill_missing) {
            for (const auto& d : ctx.schemas.dims) {
                if (present.count(d.dimension)) continue;
                std::string site = "/fact[" + std::to_string(ordinal) + "]";
                NodeId od =
                    out.add(of, Node{NodeKind::Dimension, d.dimension, "", AggFn::Sum, "", ""});
                NodeId attach = od;
                for (size_t k = 0; k < d.levels.size(); ++k)
                    attach =
                        other_filler(out, attach, d.levels[k].name, ctx, site, d.dimension);
            }
        }
        chain.pop_back();
    }
    return out;
}

inline void collect_level_values(const MDDataTree& t, NodeId node, const HierarchySchema& dim,
                                 std::vector<std::set<std::string>>& values) {
    for (NodeId c : t.children(node)) {
        const Node& cn = t.at(c);
        if (cn.kind != NodeKind::HierarchyLevel) continue;
        int idx = dim.level_index(cn.label);
        if (idx < 0)
            raise(Errc::UnknownLevel,
                  "dimension '" + dim.dimension + "' has no level '" + cn.label + "'");
        values[(size_t)idx].insert(cn.value);
        collect_level_values(t, c, dim, values);
    }
}

}  // namespace normdetail

/** Pads chains entering a hierarchy above its finest level. */
inline Normalized make_onto(const MDDataTree& t, const SchemaSet& schemas,
                            const NormalizationPlan& plan = {}) {
    validate_plan(schemas, plan);
    Normalized n{MDDataTree{}, schemas, {}};
    normdetail::RepairCtx ctx{t, schemas, plan, n.actions, false, false, false};
    n.tree = normdetail::repair(ctx);
    return n;
}

/** Repairs every completeness gap: entry padding, skipped levels, early
 *  chain ends, and dimensions a fact does not describe. */
inline Normalized make_covering(const MDDataTree& t, const SchemaSet& schemas,
                                const NormalizationPlan& plan = {}) {
    validate_plan(schemas, plan);
    Normalized n{MDDataTree{}, schemas, {}};
    normdetail::RepairCtx ctx{t, schemas, plan, n.actions, true, true, true};
    n.tree = normdetail::repair(ctx);
    return n;
}

/**
 * Rewrites every dimension that is multivalued anywhere in the warehouse.
 * Each fact's subtree for such a dimension becomes a single chain whose
 * value at each level encodes the set of values reachable there (one value
 * stays itself; several fuse into their dash-joined, sorted form).  The
 * schema renames the rewritten levels with the plan's suffix and opens
 * their domains.  Levels with no values in a fact's subtree are skipped,
 * so strictness never invents completeness.
 */
inline Normalized make_strict(const MDDataTree& t, const SchemaSet& schemas,
                              const NormalizationPlan& plan = {}) {
    validate_plan(schemas, plan);
    DiagnosticsReport rep = validate_summarizability(t, schemas);
    std::set<std::string> fused_dims;
    for (const auto& f : rep.findings)
        if (f.kind == FindingKind::NonStrict) fused_dims.insert(f.dimension);

    Normalized n{MDDataTree{}, schemas, {}};
    for (auto& d : n.schemas.dims) {
        if (!fused_dims.count(d.dimension)) continue;
        for (auto& l : d.levels) {
            n.actions.push_back("RENAME " + d.dimension + " " + l.name + " -> " + l.name +
                                plan.fused_suffix);
            l.name += plan.fused_suffix;
            l.domain = Domain{};  // open: fused values are combinations
            l.member_attributes.clear();
        }
    }

    size_t ordinal = 0;
    for (NodeId f : t.children(t.root())) {
        if (t.at(f).kind != NodeKind::Fact) continue;
        ++ordinal;
        NodeId of = n.tree.add(n.tree.root(), Node{NodeKind::Fact, "fact", "", AggFn::Sum, "", ""});
        for (NodeId c : t.children(f)) {
            const Node& cn = t.at(c);
            if (cn.kind != NodeKind::Dimension || !fused_dims.count(cn.label)) {
                n.tree.graft(of, t, c);
                continue;
            }
            const HierarchySchema* d = schemas.find_dim(cn.label);
            NodeId od =
                n.tree.add(of, Node{NodeKind::Dimension, cn.label, "", AggFn::Sum, "", ""});
            std::vector<std::set<std::string>> values(d->levels.size());
            normdetail::collect_level_values(t, c, *d, values);
            NodeId attach = od;
            for (size_t k = 0; k < d->levels.size(); ++k) {
                if (values[k].empty()) continue;  // uncovered input: keep the gap
                GroupKey gk;
                for (const auto& v : values[k]) {
                    if (v == plan.other_token) gk.other = true;
                    else gk.members.push_back(v);
                }
                std::sort(gk.members.begin(), gk.members.end());
                std::string fused = gk.display();
                if (values[k].size() > 1)
                    n.actions.push_back("FUSE " + cn.label + " " + d->levels[k].name + " /fact[" +
                                        std::to_string(ordinal) + "] -> " + fused);
                attach = n.tree.add_level(attach, d->levels[k].name + plan.fused_suffix, fused);
            }
        }
    }
    return n;
}

/** Full repair: completeness first, then strictness.  The result validates
 *  with no findings under the returned schema. */
inline Normalized normalize(const MDDataTree& t, const SchemaSet& schemas,
                            const NormalizationPlan& plan = {}) {
    Normalized covered = make_covering(t, schemas, plan);
    Normalized strict = make_strict(covered.tree, covered.schemas, plan);
    strict.actions.insert(strict.actions.begin(), covered.actions.begin(), covered.actions.end());
    return strict;
}

// ---------------------------------------------------------------------------
// Plain grouping (requires a normalized warehouse)
// ---------------------------------------------------------------------------

namespace normdetail {

struct PlainAgg {
    bool has = false;
    Decimal sum{};
    long long count = 0;
    Decimal mn{}, mx{};
};

inline void collect_at_level(const MDDataTree& t, NodeId node, const std::string& level,
                             std::set<std::string>& out) {
    for (NodeId c : t.children(node)) {
        const Node& cn = t.at(c);
        if (cn.kind != NodeKind::HierarchyLevel) continue;
        if (cn.label == level) out.insert(cn.value);
        collect_at_level(t, c, level, out);
    }
}

}  // namespace normdetail

/**
 * Groups the classical way: each fact must carry exactly one value at each
 * queried level.  Refuses warehouses where the summarizability scan finds a
 * multivalued link at or below a queried level, or a completeness gap at a
 * queried level.  Written independently of the query-time engine so the two
 * can check each other.
 */
inline MDDataTree plain_group_by(const MDDataTree& t, const TreePatternQuery& q,
                                 const SchemaSet& schemas) {
    if (q.group_by.empty()) raise(Errc::QuerySyntax, "query has no grouping element");
    if (q.aggregations.empty()) raise(Errc::QuerySyntax, "query has no aggregation");
    std::vector<int> target(q.group_by.size());
    for (size_t i = 0; i < q.group_by.size(); ++i) {
        const auto& ge = q.group_by[i];
        const HierarchySchema* d = schemas.find_dim(ge.dimension);
        if (!d) raise(Errc::UnknownName, "unknown dimension '" + ge.dimension + "'");
        target[i] = d->level_index(ge.level);
        if (target[i] < 0)
            raise(Errc::UnknownLevel,
                  "dimension '" + ge.dimension + "' has no level '" + ge.level + "'");
    }

    DiagnosticsReport rep = validate_summarizability(t, schemas);
    for (size_t i = 0; i < q.group_by.size(); ++i) {
        for (const auto& f : rep.findings) {
            if (f.dimension != q.group_by[i].dimension) continue;
            if (f.kind == FindingKind::NonStrict && f.level_idx <= target[i])
                raise(Errc::NotNormalized, "level '" + q.group_by[i].level + "' of '" +
                                               f.dimension + "' is multivalued at " + f.path);
            if (f.kind == FindingKind::Incomplete && f.level_idx == target[i])
                raise(Errc::NotNormalized, "level '" + q.group_by[i].level + "' of '" +
                                               f.dimension + "' is missing at " + f.path);
        }
    }

    MDDataTree out;
    std::map<std::string, size_t> groups;
    std::vector<NodeId> wt;
    std::vector<std::vector<normdetail::PlainAgg>> states;
    std::vector<std::vector<std::string>> group_values;

    size_t ordinal = 0;
    for (NodeId f : t.children(t.root())) {
        if (t.at(f).kind != NodeKind::Fact) continue;
        ++ordinal;
        if (q.predicate && !eval_formula(t, f, *q.predicate)) continue;
        std::vector<std::string> vals;
        vals.reserve(q.group_by.size());
        for (size_t i = 0; i < q.group_by.size(); ++i) {
            const auto& ge = q.group_by[i];
            std::set<std::string> found;
            for (NodeId c : t.children(f)) {
                const Node& cn = t.at(c);
                if (cn.kind == NodeKind::Dimension && cn.label == ge.dimension)
                    normdetail::collect_at_level(t, c, ge.level, found);
            }
            if (found.size() != 1)
                raise(Errc::NotNormalized,
                      "fact " + std::to_string(ordinal) + " carries " +
                          std::to_string(found.size()) + " values at level '" + ge.level +
                          "' of '" + ge.dimension + "'; plain grouping needs exactly one");
            vals.push_back(*found.begin());
        }
        std::string key;
        for (const auto& v : vals) {
            key += v;
            key += '\x1D';
        }
        auto it = groups.find(key);
        size_t g;
        if (it == groups.end()) {
            g = wt.size();
            groups.emplace(key, g);
            NodeId w =
                out.add(out.root(), Node{NodeKind::Fact, "fact", "", AggFn::Sum, "", ""});
            for (size_t i = 0; i < q.group_by.size(); ++i) {
                NodeId d = out.add(w, Node{NodeKind::Dimension, q.group_by[i].dimension, "",
                                           AggFn::Sum, "", ""});
                out.add_level(d, q.group_by[i].level, vals[i]);
            }
            wt.push_back(w);
            states.emplace_back(q.aggregations.size());
            group_values.push_back(vals);
        } else {
            g = it->second;
        }
        for (size_t i = 0; i < q.aggregations.size(); ++i) {
            const AggSpec& a = q.aggregations[i];
            normdetail::PlainAgg& s = states[g][i];
            if (a.fn == AggFn::Count && a.measure == "*") {
                ++s.count;
                s.has = true;
                continue;
            }
            const Node* m = nullptr;
            for (NodeId c : t.children(f)) {
                const Node& cn = t.at(c);
                if (cn.kind == NodeKind::Measure && cn.label == a.measure) {
                    m = &cn;
                    break;
                }
            }
            if (!m) continue;
            Decimal v = *Decimal::parse(m->value);
            switch (a.fn) {
                case AggFn::Sum: s.sum = s.sum.plus(v); break;
                case AggFn::Count: ++s.count; break;
                case AggFn::Min:
                    if (!s.has || v.cmp(s.mn) < 0) s.mn = v;
                    break;
                case AggFn::Max:
                    if (!s.has || v.cmp(s.mx) > 0) s.mx = v;
                    break;
                case AggFn::Avg:
                    s.sum = s.sum.plus(v);
                    ++s.count;
                    break;
            }
            s.has = true;
        }
    }

    for (size_t g = 0; g < wt.size(); ++g) {
        for (size_t i = 0; i < q.aggregations.size(); ++i) {
            const AggSpec& a = q.aggregations[i];
            const normdetail::PlainAgg& s = states[g][i];
            Node n{NodeKind::Aggregate, a.measure, "", a.fn, "", ""};
            switch (a.fn) {
                case AggFn::Sum: n.value = s.sum.to_string(); break;
                case AggFn::Count: n.value = std::to_string(s.count); break;
                case AggFn::Min: n.value = s.has ? s.mn.to_string() : ""; break;
                case AggFn::Max: n.value = s.has ? s.mx.to_string() : ""; break;
                case AggFn::Avg:
                    if (s.count > 0) {
                        n.value = Decimal::divide(s.sum, Decimal::from_int(s.count)).to_string();
                        n.state_sum = s.sum.to_string();
                        n.state_count = std::to_string(s.count);
                    }
                    break;
            }
            out.add(wt[g], std::move(n));
        }
    }
    return out;
}

/** Rewrites a query's level names onto a schema whose levels were renamed
 *  by make_strict (Team -> Team_fused), leaving everything else intact. */
inline TreePatternQuery map_query_to_schema(const TreePatternQuery& q, const SchemaSet& to,
                                            const std::string& fused_suffix = "_fused") {
    TreePatternQuery out = q;
    auto remap = [&](const std::string& dimension, std::string& level) {
        const HierarchySchema* d = to.find_dim(dimension);
        if (!d) raise(Errc::UnknownName, "unknown dimension '" + dimension + "'");
        if (d->level_index(level) >= 0) return;
        if (d->level_index(level + fused_suffix) >= 0) {
            level += fused_suffix;
            return;
        }
        raise(Errc::UnknownLevel,
              "dimension '" + dimension + "' has no level '" + level + "'");
    };
    for (auto& ge : out.group_by) remap(ge.dimension, ge.level);
    if (out.predicate) {
        std::vector<Formula*> stack{out.predicate.get()};
        while (!stack.empty()) {
            Formula* f = stack.back();
            stack.pop_back();
            if (f->op == Formula::Op::Atom) {
                if (!f->path.is_measure) remap(f->path.dimension, f->path.level);
            } else {
                if (f->lhs) stack.push_back(f->lhs.get());
                if (f->rhs) stack.push_back(f->rhs.get());
            }
        }
    }
    return out;
}

}  // namespace xolap
