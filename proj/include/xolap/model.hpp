#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xolap/decimal.hpp"
#include "xolap/error.hpp"

namespace xolap {

// ---------------------------------------------------------------------------
// Multidimensional data tree
// ---------------------------------------------------------------------------

using NodeId = uint32_t;

enum class NodeKind : uint8_t { Warehouse, Fact, Dimension, HierarchyLevel, Measure, Aggregate };

enum class AggFn : uint8_t { Sum, Count, Min, Max, Avg };

inline const char* agg_fn_name(AggFn f) {
    switch (f) {
        case AggFn::Sum: return "sum";
        case AggFn::Count: return "count";
        case AggFn::Min: return "min";
        case AggFn::Max: return "max";
        case AggFn::Avg: return "avg";
    }
    return "?";
}

/**
 * One tree node.  `label` holds the dimension/level/measure name; `value`
 * holds the level instance value or the (canonical) measure value.
 * Aggregate nodes additionally carry their function and, for `avg`, the
 * running (sum, count) state that keeps them re-aggregable across roll-up
 * stages; `value` is the finalized presentation value.
 */
struct Node {
    NodeKind kind = NodeKind::Warehouse;
    std::string label;
    std::string value;
    AggFn fn = AggFn::Sum;          // aggregate nodes only
    std::string state_sum;          // avg aggregate nodes only
    std::string state_count;        // avg aggregate nodes only
};

/**
 * A warehouse document as a tree: node 0 is the root, children are kept in
 * document order.  Trees are built once and treated as immutable afterwards,
 * so all query-time operations are pure functions over const trees and can
 * run concurrently on the same input.
 */
struct MDDataTree {
    std::vector<Node> nodes;
    std::vector<std::vector<NodeId>> kids;

    MDDataTree() {
        nodes.push_back(Node{NodeKind::Warehouse, "w", "", AggFn::Sum, "", ""});
        kids.emplace_back();
    }

    NodeId root() const { return 0; }

    NodeId add(NodeId parent, Node n) {
        NodeId id = (NodeId)nodes.size();
        nodes.push_back(std::move(n));
        kids.emplace_back();
        kids[parent].push_back(id);
        return id;
    }

    NodeId add_level(NodeId parent, std::string level, std::string value) {
        return add(parent, Node{NodeKind::HierarchyLevel, std::move(level), std::move(value),
                                AggFn::Sum, "", ""});
    }

    const Node& at(NodeId id) const { return nodes[id]; }
    const std::vector<NodeId>& children(NodeId id) const { return kids[id]; }

    std::vector<NodeId> facts() const {
        std::vector<NodeId> out;
        for (NodeId c : kids[0])
            if (nodes[c].kind == NodeKind::Fact) out.push_back(c);
        return out;
    }

    // Total node count of the subtree rooted at `id` (including `id`).
    size_t subtree_size(NodeId id) const {
        size_t n = 1;
        for (NodeId c : kids[id]) n += subtree_size(c);
        return n;
    }

    // Deep copy of another tree's subtree under `parent` of this tree.
    NodeId graft(NodeId parent, const MDDataTree& src, NodeId srcId) {
        NodeId id = add(parent, src.nodes[srcId]);
        for (NodeId c : src.kids[srcId]) graft(id, src, c);
        return id;
    }

    bool equal_subtree(NodeId a, const MDDataTree& other, NodeId b) const {
        const Node& x = nodes[a];
        const Node& y = other.nodes[b];
        if (x.kind != y.kind || x.label != y.label || x.value != y.value) return false;
        if (x.kind == NodeKind::Aggregate &&
            (x.fn != y.fn || x.state_sum != y.state_sum || x.state_count != y.state_count))
            return false;
        if (kids[a].size() != other.kids[b].size()) return false;
        for (size_t i = 0; i < kids[a].size(); ++i)
            if (!equal_subtree(kids[a][i], other, other.kids[b][i])) return false;
        return true;
    }

    bool equal(const MDDataTree& other) const { return equal_subtree(0, other, 0); }
};

// ---------------------------------------------------------------------------
// Schemas
// ---------------------------------------------------------------------------

/** Value domain of a hierarchy level: open, an enumerated set, or an integer range. */
struct Domain {
    enum class Kind { Open, Enumerated, IntRange } kind = Domain::Kind::Open;
    std::vector<std::string> values;  // enumerated, in declaration order
    long long lo = 0, hi = 0;         // int range, inclusive

    bool contains(std::string_view v) const {
        switch (kind) {
            case Kind::Open:
                return true;
            case Kind::Enumerated:
                return std::find(values.begin(), values.end(), v) != values.end();
            case Kind::IntRange: {
                if (v.empty()) return false;
                size_t i = v[0] == '-' ? 1 : 0;
                if (i == v.size()) return false;
                long long x = 0;
                for (; i < v.size(); ++i) {
                    if (v[i] < '0' || v[i] > '9') return false;
                    x = x * 10 + (v[i] - '0');
                }
                if (v[0] == '-') x = -x;
                return x >= lo && x <= hi;
            }
        }
        return false;
    }

    size_t size() const {
        switch (kind) {
            case Kind::Open: return 0;
            case Kind::Enumerated: return values.size();
            case Kind::IntRange: return (size_t)(hi - lo + 1);
        }
        return 0;
    }
};

struct LevelSchema {
    std::string name;
    Domain domain;
    std::vector<std::string> member_attributes;  // declared, carried, not consumed
};

/**
 * One dimension's hierarchy: levels ordered finest-first.  Each level's
 * schema parent is the next entry, so the parent map is implied by order;
 * explicit `parent` lines in schema files are validated against it.
 */
struct HierarchySchema {
    std::string dimension;
    std::vector<LevelSchema> levels;

    int level_index(std::string_view name) const {
        for (size_t i = 0; i < levels.size(); ++i)
            if (levels[i].name == name) return (int)i;
        return -1;
    }
};

struct SchemaSet {
    std::vector<HierarchySchema> dims;
    std::vector<std::string> measures;

    const HierarchySchema* find_dim(std::string_view name) const {
        for (const auto& d : dims)
            if (d.dimension == name) return &d;
        return nullptr;
    }

    bool has_measure(std::string_view m) const {
        return std::find(measures.begin(), measures.end(), m) != measures.end();
    }
};

// ---------------------------------------------------------------------------
// Schema text format
// ---------------------------------------------------------------------------
//
//   [dimension project-dim]
//   levels = Project, Team, Branch
//   domain Project = A, B, C, D
//   domain Team = 1..4
//   domain Branch = *
//   parent Project = Team          (optional; must match the levels order)
//   attributes Team = mgr, size    (optional)
//
//   [measures]
//   cost

namespace detail {

inline std::string trim(std::string_view s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ',') {
            std::string item = trim(s.substr(start, i - start));
            if (!item.empty()) out.push_back(std::move(item));
            start = i + 1;
        }
    }
    return out;
}

inline bool parse_ll(std::string_view s, long long& out) {
    if (s.empty()) return false;
    size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    long long x = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        x = x * 10 + (s[i] - '0');
    }
    out = s[0] == '-' ? -x : x;
    return true;
}

}  // namespace detail

inline Domain parse_domain_text(const std::string& text) {
    Domain d;
    std::string t = detail::trim(text);
    if (t == "*") {
        d.kind = Domain::Kind::Open;
        return d;
    }
    size_t dots = t.find("..");
    if (dots != std::string::npos) {
        long long lo, hi;
        if (detail::parse_ll(detail::trim(t.substr(0, dots)), lo) &&
            detail::parse_ll(detail::trim(t.substr(dots + 2)), hi) && lo <= hi) {
            d.kind = Domain::Kind::IntRange;
            d.lo = lo;
            d.hi = hi;
            return d;
        }
        raise(Errc::InvalidConfig, "bad range domain '" + t + "'");
    }
    d.kind = Domain::Kind::Enumerated;
    d.values = detail::split_list(t);
    if (d.values.empty()) raise(Errc::InvalidConfig, "empty domain");
    return d;
}

inline std::string domain_to_text(const Domain& d) {
    switch (d.kind) {
        case Domain::Kind::Open:
            return "*";
        case Domain::Kind::IntRange:
            return std::to_string(d.lo) + ".." + std::to_string(d.hi);
        case Domain::Kind::Enumerated: {
            std::string out;
            for (size_t i = 0; i < d.values.size(); ++i) {
                if (i) out += ", ";
                out += d.values[i];
            }
            return out;
        }
    }
    return "*";
}

inline SchemaSet parse_schema(std::istream& in) {
    SchemaSet set;
    HierarchySchema* cur = nullptr;
    bool in_measures = false;
    std::map<std::string, std::string> pending_parents;  // child level -> declared parent
    std::string line;
    int lineno = 0;

    auto flush_parents = [&]() {
        if (!cur) return;
        for (auto& [child, parent] : pending_parents) {
            int ci = cur->level_index(child);
            if (ci < 0)
                raise(Errc::InvalidConfig, "parent line names unknown level '" + child + "'");
            if (ci + 1 >= (int)cur->levels.size() || cur->levels[ci + 1].name != parent)
                raise(Errc::InvalidConfig,
                      "parent of '" + child + "' must be the next coarser level");
        }
        pending_parents.clear();
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            flush_parents();
            std::string head = detail::trim(t.substr(1, t.size() - 2));
            if (head == "measures") {
                in_measures = true;
                cur = nullptr;
            } else if (head.rfind("dimension ", 0) == 0) {
                in_measures = false;
                set.dims.emplace_back();
                cur = &set.dims.back();
                cur->dimension = detail::trim(head.substr(10));
                if (cur->dimension.empty())
                    raise(Errc::InvalidConfig, "dimension section without a name");
            } else {
                raise(Errc::InvalidConfig, "unknown section '" + head + "'");
            }
            continue;
        }
        if (in_measures) {
            set.measures.push_back(t);
            continue;
        }
        if (!cur) raise(Errc::InvalidConfig, "directive outside any section (line " +
                                                 std::to_string(lineno) + ")");
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            raise(Errc::InvalidConfig, "expected key = value (line " + std::to_string(lineno) + ")");
        std::string key = detail::trim(t.substr(0, eq));
        std::string val = detail::trim(t.substr(eq + 1));
        if (key == "levels") {
            for (auto& name : detail::split_list(val)) {
                LevelSchema ls;
                ls.name = name;
                cur->levels.push_back(std::move(ls));
            }
        } else if (key.rfind("domain ", 0) == 0) {
            int idx = cur->level_index(detail::trim(key.substr(7)));
            if (idx < 0) raise(Errc::InvalidConfig, "domain for unknown level in '" + key + "'");
            cur->levels[idx].domain = parse_domain_text(val);
        } else if (key.rfind("parent ", 0) == 0) {
            pending_parents[detail::trim(key.substr(7))] = val;
        } else if (key.rfind("attributes ", 0) == 0) {
            int idx = cur->level_index(detail::trim(key.substr(11)));
            if (idx < 0) raise(Errc::InvalidConfig, "attributes for unknown level in '" + key + "'");
            cur->levels[idx].member_attributes = detail::split_list(val);
        } else {
            raise(Errc::InvalidConfig, "unknown schema directive '" + key + "'");
        }
    }
    flush_parents();

    // Structural validation: nonempty, unique names.
    if (set.dims.empty()) raise(Errc::InvalidConfig, "schema declares no dimensions");
    std::set<std::string> dim_names;
    for (const auto& d : set.dims) {
        if (!dim_names.insert(d.dimension).second)
            raise(Errc::InvalidConfig, "duplicate dimension '" + d.dimension + "'");
        if (d.levels.empty())
            raise(Errc::InvalidConfig, "dimension '" + d.dimension + "' has no levels");
        std::set<std::string> level_names;
        for (const auto& l : d.levels)
            if (!level_names.insert(l.name).second)
                raise(Errc::InvalidConfig, "duplicate level '" + l.name + "' in '" + d.dimension + "'");
    }
    std::set<std::string> measure_names;
    for (const auto& m : set.measures)
        if (!measure_names.insert(m).second)
            raise(Errc::InvalidConfig, "duplicate measure '" + m + "'");
    return set;
}

inline SchemaSet parse_schema(const std::string& text) {
    std::istringstream in(text);
    return parse_schema(in);
}

inline std::string print_schema(const SchemaSet& set) {
    std::string out;
    for (const auto& d : set.dims) {
        out += "[dimension " + d.dimension + "]\n";
        out += "levels = ";
        for (size_t i = 0; i < d.levels.size(); ++i) {
            if (i) out += ", ";
            out += d.levels[i].name;
        }
        out += "\n";
        for (const auto& l : d.levels)
            out += "domain " + l.name + " = " + domain_to_text(l.domain) + "\n";
        for (const auto& l : d.levels)
            if (!l.member_attributes.empty()) {
                out += "attributes " + l.name + " = ";
                for (size_t i = 0; i < l.member_attributes.size(); ++i) {
                    if (i) out += ", ";
                    out += l.member_attributes[i];
                }
                out += "\n";
            }
        out += "\n";
    }
    out += "[measures]\n";
    for (const auto& m : set.measures) out += m + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Node paths (used by diagnostics and error messages)
// ---------------------------------------------------------------------------

/** Renders /fact[3]/dim[date]/lvl[day=17] style paths; fact ordinals are 1-based. */
inline std::string node_path(const MDDataTree& t, const std::vector<NodeId>& chain) {
    std::string out;
    int fact_ordinal = 0;
    for (NodeId id : chain) {
        const Node& n = t.at(id);
        switch (n.kind) {
            case NodeKind::Warehouse:
                break;
            case NodeKind::Fact: {
                for (NodeId c : t.children(t.root())) {
                    ++fact_ordinal;
                    if (c == id) break;
                }
                out += "/fact[" + std::to_string(fact_ordinal) + "]";
                break;
            }
            case NodeKind::Dimension:
                out += "/dim[" + n.label + "]";
                break;
            case NodeKind::HierarchyLevel:
                out += "/lvl[" + n.label + "=" + n.value + "]";
                break;
            case NodeKind::Measure:
                out += "/msr[" + n.label + "]";
                break;
            case NodeKind::Aggregate:
                out += "/agg[" + n.label + "]";
                break;
        }
    }
    return out.empty() ? "/" : out;
}

}  // namespace xolap
