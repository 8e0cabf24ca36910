#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "xolap/query.hpp"
#include "xolap/xml.hpp"

namespace xolap {

// ---------------------------------------------------------------------------
// Query-time grouping over irregular hierarchies
// ---------------------------------------------------------------------------
//
// Facts are grouped without repairing the data first.  For each fact and each
// grouping element, a chain walk over that fact's dimension subtree collects
// every value reachable at the grouping level into one fused group key; a
// chain that misses the level (enters below it, skips over it, or dead-ends
// above it) adds the reserved Other marker instead.  Facts with equal fused
// keys across all grouping elements land in the same witness tree, which
// keeps the grouping-level value, the merged hierarchy context coarser than
// it, and running aggregation state.  A witness tree is itself fact-shaped,
// so a result can be grouped again at a coarser level: aggregate nodes carry
// enough state (avg keeps its sum and count) to re-aggregate exactly.

/** Fused group key: every value reachable at the grouping level, plus an
 *  Other marker when some chain of the fact misses the level. */
struct GroupKey {
    std::vector<std::string> members;  // sorted ascending by byte order, unique
    bool other = false;

    bool operator==(const GroupKey&) const = default;

    /** Presentation form: members dash-joined, Other last ("1-2", "2-Other"). */
    std::string display() const {
        std::string out;
        for (const auto& m : members) {
            if (!out.empty()) out += '-';
            out += m;
        }
        if (other) {
            if (!out.empty()) out += '-';
            out += kOtherToken;
        }
        return out;
    }

    /** Unambiguous lookup form; C0 separators cannot occur in values. */
    void encode(std::string& out) const {
        for (const auto& m : members) {
            out += m;
            out += '\x1E';
        }
        if (other) out += '\x1F';
    }
};

struct QbsStats {
    uint64_t summarizability_ns = 0;  // handling of sites that are not summarizable
    uint64_t matching_ns = 0;         // everything else: clean walks, lookup, folding
    uint64_t total_ns = 0;
    size_t complex_calls = 0;  // grouping-element builds that hit branching/Other
    size_t simple_calls = 0;
    size_t group_count = 0;
    size_t facts_seen = 0;
};

struct QbsOptions {
    bool linear_scan = false;   // replace the hash index with a list scan
    bool collect_stats = false; // per-call timing has a cost; off by default
};

namespace qbsdetail {

/** Everything one grouping element contributes for one fact. */
struct KeyBuild {
    GroupKey key;
    std::vector<NodeId> context;  // source nodes coarser than the grouping level
    bool complex = false;         // site needed summarizability handling
};

inline void add_member(KeyBuild& kb, const std::string& v) {
    if (v == kOtherToken) {
        // A literal Other at the grouping level stays the marker, never a member.
        kb.key.other = true;
        kb.complex = true;
        return;
    }
    kb.key.members.push_back(v);
}

inline void classify(const MDDataTree& t, NodeId lvl, int idx, int target,
                     const HierarchySchema& dim, KeyBuild& kb);

/** Walks below-target node `lvl`: examines its hierarchy children. */
inline void descend(const MDDataTree& t, NodeId lvl, int target, const HierarchySchema& dim,
                    KeyBuild& kb) {
    int seen = 0;
    for (NodeId c : t.children(lvl)) {
        const Node& cn = t.at(c);
        if (cn.kind != NodeKind::HierarchyLevel) continue;
        ++seen;
        classify(t, c, dim.level_index(cn.label), target, dim, kb);
    }
    if (seen == 0) {
        kb.key.other = true;  // chain dead-ends before reaching the level
        kb.complex = true;
    } else if (seen > 1) {
        kb.complex = true;  // multivalued link
    }
}

inline void classify(const MDDataTree& t, NodeId lvl, int idx, int target,
                     const HierarchySchema& dim, KeyBuild& kb) {
    if (idx < 0)
        raise(Errc::UnknownLevel, "dimension '" + dim.dimension + "' has no level '" +
                                      t.at(lvl).label + "'");
    if (idx == target) {
        add_member(kb, t.at(lvl).value);
        for (NodeId c : t.children(lvl))  // coarser context to retain
            if (t.at(c).kind == NodeKind::HierarchyLevel) kb.context.push_back(c);
    } else if (idx > target) {
        kb.key.other = true;  // chain skips over, or enters coarser than, the level
        kb.complex = true;
        kb.context.push_back(lvl);
    } else {
        descend(t, lvl, target, dim, kb);
    }
}

inline KeyBuild build_group_key(const MDDataTree& t, NodeId fact, const GroupingElement& ge,
                                int target, const HierarchySchema& dim) {
    KeyBuild kb;
    NodeId dnode = 0;
    bool found = false;
    for (NodeId c : t.children(fact)) {
        if (t.at(c).kind == NodeKind::Dimension && t.at(c).label == ge.dimension) {
            dnode = c;
            found = true;
            break;
        }
    }
    if (!found) {  // fact carries nothing for this dimension
        kb.key.other = true;
        kb.complex = true;
        return kb;
    }
    int entries = 0;
    for (NodeId c : t.children(dnode)) {
        const Node& cn = t.at(c);
        if (cn.kind != NodeKind::HierarchyLevel) continue;
        ++entries;
        classify(t, c, dim.level_index(cn.label), target, dim, kb);
    }
    if (entries == 0) {
        kb.key.other = true;
        kb.complex = true;
    } else if (entries > 1) {
        kb.complex = true;
    }
    auto& m = kb.key.members;
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    if (m.size() >= 2 || kb.context.size() >= 2) kb.complex = true;
    return kb;
}

struct AggState {
    bool has = false;
    Decimal sum{};
    long long count = 0;
    Decimal mn{}, mx{};
};

inline bool fact_is_aggregated(const MDDataTree& t, NodeId f) {
    for (NodeId c : t.children(f))
        if (t.at(c).kind == NodeKind::Aggregate) return true;
    return false;
}

inline const Node* find_measure(const MDDataTree& t, NodeId f, const std::string& m) {
    for (NodeId c : t.children(f)) {
        const Node& cn = t.at(c);
        if (cn.kind == NodeKind::Measure && cn.label == m) return &cn;
    }
    return nullptr;
}

inline const Node* find_agg(const MDDataTree& t, NodeId f, AggFn fn, const std::string& m) {
    for (NodeId c : t.children(f)) {
        const Node& cn = t.at(c);
        if (cn.kind == NodeKind::Aggregate && cn.fn == fn && cn.label == m) return &cn;
    }
    return nullptr;
}

inline void fold_fact(const MDDataTree& t, NodeId f, size_t fact_ordinal,
                      const std::vector<AggSpec>& specs, std::vector<AggState>& st) {
    const bool aggregated = fact_is_aggregated(t, f);
    for (size_t i = 0; i < specs.size(); ++i) {
        const AggSpec& a = specs[i];
        AggState& s = st[i];
        if (!aggregated) {
            if (a.fn == AggFn::Count && a.measure == "*") {
                ++s.count;
                s.has = true;
                continue;
            }
            const Node* m = find_measure(t, f, a.measure);
            if (!m) continue;  // fact lacks the measure: it contributes nothing
            Decimal v = *Decimal::parse(m->value);
            switch (a.fn) {
                case AggFn::Sum:
                    s.sum = s.sum.plus(v);
                    break;
                case AggFn::Count:
                    ++s.count;
                    break;
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
            continue;
        }
        // Aggregated input: fold from the matching aggregate node's state.
        const Node* g = find_agg(t, f, a.fn, a.measure);
        if (!g)
            raise(Errc::NonReaggregable,
                  "fact " + std::to_string(fact_ordinal) + " carries no " +
                      std::string(agg_fn_name(a.fn)) + "(" + a.measure +
                      ") aggregate to fold from");
        switch (a.fn) {
            case AggFn::Sum: {
                auto v = Decimal::parse(g->value);
                if (v) {
                    s.sum = s.sum.plus(*v);
                    s.has = true;
                }
                break;
            }
            case AggFn::Count: {
                long long n = 0;
                if (detail::parse_ll(g->value, n)) {
                    s.count += n;
                    s.has = true;
                }
                break;
            }
            case AggFn::Min: {
                auto v = Decimal::parse(g->value);
                if (v) {
                    if (!s.has || v->cmp(s.mn) < 0) s.mn = *v;
                    s.has = true;
                }
                break;
            }
            case AggFn::Max: {
                auto v = Decimal::parse(g->value);
                if (v) {
                    if (!s.has || v->cmp(s.mx) > 0) s.mx = *v;
                    s.has = true;
                }
                break;
            }
            case AggFn::Avg: {
                auto vs = Decimal::parse(g->state_sum);
                long long n = 0;
                if (!vs || !detail::parse_ll(g->state_count, n))
                    raise(Errc::NonReaggregable,
                          "fact " + std::to_string(fact_ordinal) + ": avg(" + a.measure +
                              ") aggregate carries no running state to fold from");
                s.sum = s.sum.plus(*vs);
                s.count += n;
                s.has = true;
                break;
            }
        }
    }
}

/** Copies a context subtree under `dst`, merging nodes with equal (label, value). */
inline void merge_context(MDDataTree& out, NodeId dst, const MDDataTree& src, NodeId s) {
    const Node& sn = src.at(s);
    for (NodeId c : out.children(dst)) {
        const Node& cn = out.at(c);
        if (cn.kind == NodeKind::HierarchyLevel && cn.label == sn.label && cn.value == sn.value) {
            for (NodeId sc : src.children(s))
                if (src.at(sc).kind == NodeKind::HierarchyLevel) merge_context(out, c, src, sc);
            return;
        }
    }
    out.graft(dst, src, s);
}

struct WitnessList {
    MDDataTree out;
    bool linear = false;
    std::vector<std::string> keys;              // creation order
    std::vector<NodeId> wt_facts;               // fact-shaped witness nodes
    std::vector<std::vector<NodeId>> ge_nodes;  // per witness, per grouping element
    std::vector<std::vector<AggState>> states;
    std::unordered_map<std::string, size_t> index;

    static constexpr size_t npos = (size_t)-1;

    size_t find(const std::string& key) const {
        if (linear) {
            for (size_t i = 0; i < keys.size(); ++i)
                if (keys[i] == key) return i;
            return npos;
        }
        auto it = index.find(key);
        return it == index.end() ? npos : it->second;
    }

    size_t create(const std::string& key, const TreePatternQuery& q,
                  const std::vector<KeyBuild>& kbs, const MDDataTree& t, NodeId src_fact) {
        NodeId w = out.add(out.root(), Node{NodeKind::Fact, "fact", "", AggFn::Sum, "", ""});
        std::vector<NodeId> ges;
        ges.reserve(q.group_by.size());
        for (size_t i = 0; i < q.group_by.size(); ++i) {
            NodeId d = out.add(w, Node{NodeKind::Dimension, q.group_by[i].dimension, "",
                                       AggFn::Sum, "", ""});
            ges.push_back(out.add_level(d, q.group_by[i].level, kbs[i].key.display()));
        }
        if (q.pass_through) {
            // Retain the remaining dimensions of the first contributing fact.
            for (NodeId c : t.children(src_fact)) {
                const Node& cn = t.at(c);
                if (cn.kind != NodeKind::Dimension) continue;
                bool grouped = false;
                for (const auto& g : q.group_by)
                    if (g.dimension == cn.label) {
                        grouped = true;
                        break;
                    }
                if (!grouped) out.graft(w, t, c);
            }
        }
        keys.push_back(key);
        wt_facts.push_back(w);
        ge_nodes.push_back(std::move(ges));
        states.emplace_back(q.aggregations.size());
        if (!linear) index.emplace(key, keys.size() - 1);
        return keys.size() - 1;
    }
};

}  // namespace qbsdetail

/**
 * Groups and aggregates a warehouse in one pass over its facts, tolerating
 * hierarchy chains that branch, skip levels, or stop early.  Returns the
 * result tree; `stats` (with `opt.collect_stats`) separates time spent
 * handling non-summarizable sites from plain matching time.
 */
inline MDDataTree qbs(const MDDataTree& t, const TreePatternQuery& q, const SchemaSet& schemas,
                      const QbsOptions& opt = {}, QbsStats* stats = nullptr) {
    using clock = std::chrono::steady_clock;
    struct Bound {
        const HierarchySchema* dim;
        int target;
    };
    std::vector<Bound> bound;
    bound.reserve(q.group_by.size());
    for (const auto& ge : q.group_by) {
        const HierarchySchema* d = schemas.find_dim(ge.dimension);
        if (!d) raise(Errc::UnknownName, "unknown dimension '" + ge.dimension + "'");
        int idx = d->level_index(ge.level);
        if (idx < 0)
            raise(Errc::UnknownLevel,
                  "dimension '" + ge.dimension + "' has no level '" + ge.level + "'");
        bound.push_back(Bound{d, idx});
    }
    for (const auto& a : q.aggregations)
        if (a.measure != "*" && !schemas.has_measure(a.measure))
            raise(Errc::UnknownName, "unknown measure '" + a.measure + "'");
    if (q.group_by.empty()) raise(Errc::QuerySyntax, "query has no grouping element");
    if (q.aggregations.empty()) raise(Errc::QuerySyntax, "query has no aggregation");

    const bool timed = opt.collect_stats && stats;
    uint64_t summ_ns = 0;
    size_t complex_calls = 0, simple_calls = 0, facts_seen = 0;
    clock::time_point t0;
    if (timed) t0 = clock::now();

    qbsdetail::WitnessList wl;
    wl.linear = opt.linear_scan;
    std::vector<qbsdetail::KeyBuild> kbs(q.group_by.size());
    std::string key;
    size_t fact_ordinal = 0;
    for (NodeId f : t.children(t.root())) {
        if (t.at(f).kind != NodeKind::Fact) continue;
        ++fact_ordinal;
        if (q.predicate && !eval_formula(t, f, *q.predicate)) continue;
        ++facts_seen;
        key.clear();
        for (size_t i = 0; i < bound.size(); ++i) {
            if (timed) {
                clock::time_point c0 = clock::now();
                kbs[i] = qbsdetail::build_group_key(t, f, q.group_by[i], bound[i].target,
                                                    *bound[i].dim);
                clock::time_point c1 = clock::now();
                if (kbs[i].complex) {
                    summ_ns += (uint64_t)std::chrono::duration_cast<std::chrono::nanoseconds>(
                                   c1 - c0)
                                   .count();
                    ++complex_calls;
                } else {
                    ++simple_calls;
                }
            } else {
                kbs[i] = qbsdetail::build_group_key(t, f, q.group_by[i], bound[i].target,
                                                    *bound[i].dim);
            }
            kbs[i].key.encode(key);
            key += '\x1D';
        }
        size_t w = wl.find(key);
        if (w == qbsdetail::WitnessList::npos) w = wl.create(key, q, kbs, t, f);
        for (size_t i = 0; i < bound.size(); ++i) {
            if (kbs[i].context.empty()) continue;
            if (timed && kbs[i].complex) {
                clock::time_point c0 = clock::now();
                for (NodeId cr : kbs[i].context)
                    qbsdetail::merge_context(wl.out, wl.ge_nodes[w][i], t, cr);
                clock::time_point c1 = clock::now();
                summ_ns +=
                    (uint64_t)std::chrono::duration_cast<std::chrono::nanoseconds>(c1 - c0)
                        .count();
            } else {
                for (NodeId cr : kbs[i].context)
                    qbsdetail::merge_context(wl.out, wl.ge_nodes[w][i], t, cr);
            }
        }
        qbsdetail::fold_fact(t, f, fact_ordinal, q.aggregations, wl.states[w]);
    }

    // Finalize: aggregate nodes last, in query order, per witness tree.
    for (size_t w = 0; w < wl.wt_facts.size(); ++w) {
        for (size_t i = 0; i < q.aggregations.size(); ++i) {
            const AggSpec& a = q.aggregations[i];
            const qbsdetail::AggState& s = wl.states[w][i];
            Node n{NodeKind::Aggregate, a.measure, "", a.fn, "", ""};
            switch (a.fn) {
                case AggFn::Sum:
                    n.value = s.sum.to_string();
                    break;
                case AggFn::Count:
                    n.value = std::to_string(s.count);
                    break;
                case AggFn::Min:
                    n.value = s.has ? s.mn.to_string() : "";
                    break;
                case AggFn::Max:
                    n.value = s.has ? s.mx.to_string() : "";
                    break;
                case AggFn::Avg:
                    if (s.count > 0) {
                        n.value = Decimal::divide(s.sum, Decimal::from_int(s.count)).to_string();
                        n.state_sum = s.sum.to_string();
                        n.state_count = std::to_string(s.count);
                    }
                    break;
            }
            wl.out.add(wl.wt_facts[w], std::move(n));
        }
    }

    if (timed) {
        uint64_t total =
            (uint64_t)std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0)
                .count();
        stats->summarizability_ns = summ_ns;
        stats->matching_ns = total > summ_ns ? total - summ_ns : 0;
        stats->total_ns = total;
        stats->complex_calls = complex_calls;
        stats->simple_calls = simple_calls;
        stats->group_count = wl.wt_facts.size();
        stats->facts_seen = facts_seen;
    } else if (stats) {
        *stats = QbsStats{};
        stats->group_count = wl.wt_facts.size();
        stats->facts_seen = facts_seen;
    }
    return std::move(wl.out);
}

// ---------------------------------------------------------------------------
// Chained roll-up
// ---------------------------------------------------------------------------

/** Checks that `cur` can consume the result produced by `prev`. */
inline void validate_stage_transition(const TreePatternQuery& prev, const TreePatternQuery& cur,
                                      const SchemaSet& schemas) {
    for (const auto& ge : cur.group_by) {
        const GroupingElement* p = nullptr;
        for (const auto& pg : prev.group_by)
            if (pg.dimension == ge.dimension) {
                p = &pg;
                break;
            }
        if (!p)
            raise(Errc::QuerySyntax, "roll-up stage groups dimension '" + ge.dimension +
                                         "' that the previous stage did not group");
        const HierarchySchema* d = schemas.find_dim(ge.dimension);
        if (!d) raise(Errc::UnknownName, "unknown dimension '" + ge.dimension + "'");
        int cur_idx = d->level_index(ge.level);
        int prev_idx = d->level_index(p->level);
        if (cur_idx < 0)
            raise(Errc::UnknownLevel,
                  "dimension '" + ge.dimension + "' has no level '" + ge.level + "'");
        if (prev_idx < 0)
            raise(Errc::UnknownLevel,
                  "dimension '" + ge.dimension + "' has no level '" + p->level + "'");
        if (cur_idx < prev_idx)
            raise(Errc::QuerySyntax, "roll-up stage regroups '" + ge.dimension + "' at '" +
                                         ge.level + "', finer than the previous stage's '" +
                                         p->level + "'");
    }
    for (const auto& a : cur.aggregations) {
        if (a.fn == AggFn::Count && a.measure == "*") continue;
        bool found = false;
        for (const auto& pa : prev.aggregations)
            if (pa.fn == a.fn && pa.measure == a.measure) {
                found = true;
                break;
            }
        if (!found)
            raise(Errc::QuerySyntax, std::string("roll-up stage asks for ") + agg_fn_name(a.fn) +
                                         "(" + a.measure +
                                         ") which the previous stage did not produce");
    }
}

/**
 * Applies a chain of grouping queries, each stage consuming the previous
 * stage's result tree.  Later stages must stay within the earlier stage's
 * grouped dimensions, at the same level or coarser, and may only re-aggregate
 * what the earlier stage produced (count(*) is checked at fold time).
 */
inline MDDataTree rollup(const MDDataTree& t, const std::vector<TreePatternQuery>& stages,
                         const SchemaSet& schemas, const QbsOptions& opt = {},
                         std::vector<QbsStats>* stats = nullptr) {
    if (stages.empty()) raise(Errc::QuerySyntax, "roll-up needs at least one stage");
    MDDataTree held;
    const MDDataTree* in = &t;
    for (size_t k = 0; k < stages.size(); ++k) {
        if (k > 0) validate_stage_transition(stages[k - 1], stages[k], schemas);
        QbsStats st{};
        MDDataTree next = qbs(*in, stages[k], schemas, opt, &st);
        if (stats) stats->push_back(st);
        held = std::move(next);
        in = &held;
    }
    return held;
}

// ---------------------------------------------------------------------------
// Result rows (for comparing engines and printing summaries)
// ---------------------------------------------------------------------------

/** One group, flattened: per-element fused value plus finalized aggregates. */
struct GroupRow {
    std::vector<std::string> key;
    std::vector<std::string> aggs;

    bool operator==(const GroupRow&) const = default;
    bool operator<(const GroupRow& o) const {
        if (key != o.key) return key < o.key;
        return aggs < o.aggs;
    }
};

/**
 * Flattens a grouped result tree into rows: for each grouping element the
 * value of the first hierarchy node under the matching dimension wrapper,
 * then each aggregate value in query order.  Level labels are not part of
 * the row, so results computed under a rewritten schema compare directly.
 */
inline std::vector<GroupRow> result_rows(const MDDataTree& r, const TreePatternQuery& q) {
    std::vector<GroupRow> rows;
    for (NodeId f : r.children(r.root())) {
        if (r.at(f).kind != NodeKind::Fact) continue;
        GroupRow row;
        for (const auto& ge : q.group_by) {
            std::string v;
            for (NodeId c : r.children(f)) {
                const Node& cn = r.at(c);
                if (cn.kind != NodeKind::Dimension || cn.label != ge.dimension) continue;
                for (NodeId g : r.children(c)) {
                    if (r.at(g).kind == NodeKind::HierarchyLevel) {
                        v = r.at(g).value;
                        break;
                    }
                }
                break;
            }
            row.key.push_back(std::move(v));
        }
        for (const auto& a : q.aggregations) {
            const Node* g = qbsdetail::find_agg(r, f, a.fn, a.measure);
            row.aggs.push_back(g ? g->value : "");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<GroupRow> sorted_rows(std::vector<GroupRow> rows) {
    std::sort(rows.begin(), rows.end());
    return rows;
}

inline bool same_rows(const MDDataTree& a, const TreePatternQuery& qa, const MDDataTree& b,
                      const TreePatternQuery& qb) {
    return sorted_rows(result_rows(a, qa)) == sorted_rows(result_rows(b, qb));
}

}  // namespace xolap
