#pragma once

#include <string>
#include <vector>

#include "xolap/model.hpp"

namespace xolap {

// ---------------------------------------------------------------------------
// Summarizability diagnostics
// ---------------------------------------------------------------------------
//
// Two kinds of finding, reported per site:
//
//   NONSTRICT  <dimension> <level> <path>   a node (or a fact's dimension
//       link) rolls up to two or more distinct values at <level>
//   INCOMPLETE <dimension> <level> <path>   some roll-up path out of the
//       node at <path> never visits <level>: the link skips over it, the
//       fact enters the hierarchy above it, or the chain stops below it
//
// The INCOMPLETE findings are exactly the (fact, dimension, level) triples
// for which grouping emits an Other member, which is what makes the report
// usable as ground truth for both engines.

enum class FindingKind : uint8_t { NonStrict, Incomplete };

struct Finding {
    FindingKind kind;
    std::string dimension;
    std::string level;
    int level_idx;    // index of `level` within the dimension, finest = 0
    int fact_index;   // 1-based document position of the owning fact
    std::string path;

    std::string line() const {
        return std::string(kind == FindingKind::NonStrict ? "NONSTRICT" : "INCOMPLETE") + " " +
               dimension + " " + level + " " + path;
    }
};

struct DiagnosticsReport {
    std::vector<Finding> findings;

    bool empty() const { return findings.empty(); }

    size_t count(FindingKind k) const {
        size_t n = 0;
        for (const auto& f : findings) n += f.kind == k;
        return n;
    }

    bool has(FindingKind k, std::string_view dim, int fact_index, int level_idx) const {
        for (const auto& f : findings)
            if (f.kind == k && f.fact_index == fact_index && f.level_idx == level_idx &&
                f.dimension == dim)
                return true;
        return false;
    }

    std::string to_text() const {
        std::string out;
        for (const auto& f : findings) {
            out += f.line();
            out += '\n';
        }
        return out;
    }
};

namespace diagdetail {

struct Walker {
    const MDDataTree& t;
    const HierarchySchema& dim;
    int fact_index;
    std::vector<NodeId> chain;  // path from root to the current site
    std::vector<Finding>& out;

    void finding(FindingKind kind, int level_idx) {
        out.push_back(Finding{kind, dim.dimension, dim.levels[level_idx].name, level_idx,
                              fact_index, node_path(t, chain)});
    }

    // `site` is a dim node (site_idx -1) or a lvl node at site_idx.  Emits
    // the site's findings, then recurses into its level children.
    void visit(NodeId site, int site_idx) {
        int depth = (int)dim.levels.size();
        std::vector<NodeId> lvl_kids;
        for (NodeId c : t.children(site))
            if (t.at(c).kind == NodeKind::HierarchyLevel) lvl_kids.push_back(c);

        if (lvl_kids.empty()) {
            // Chain stops here; every coarser level is missed.  An empty
            // dimension node (site_idx -1) misses all of them.
            for (int l = site_idx + 1; l < depth; ++l) finding(FindingKind::Incomplete, l);
            return;
        }

        // Missed levels: those between this site and its nearest child per
        // branch.  Collect the union over branches, each level once.
        std::vector<bool> missed((size_t)depth, false);
        for (NodeId c : lvl_kids) {
            int ci = dim.level_index(t.at(c).label);
            for (int l = site_idx + 1; l < ci; ++l) missed[(size_t)l] = true;
        }
        for (int l = 0; l < depth; ++l)
            if (missed[(size_t)l]) finding(FindingKind::Incomplete, l);

        // Non-strict: two or more distinct values at one child level.
        for (int l = site_idx + 1; l < depth; ++l) {
            std::vector<std::string_view> vals;
            for (NodeId c : lvl_kids)
                if (dim.level_index(t.at(c).label) == l) {
                    std::string_view v = t.at(c).value;
                    bool seen = false;
                    for (auto w : vals) seen = seen || w == v;
                    if (!seen) vals.push_back(v);
                }
            if (vals.size() >= 2) finding(FindingKind::NonStrict, l);
        }

        for (NodeId c : lvl_kids) {
            chain.push_back(c);
            visit(c, dim.level_index(t.at(c).label));
            chain.pop_back();
        }
    }
};

}  // namespace diagdetail

inline DiagnosticsReport validate_summarizability(const MDDataTree& t, const SchemaSet& schemas) {
    DiagnosticsReport report;
    int fact_index = 0;
    for (NodeId f : t.children(t.root())) {
        if (t.at(f).kind != NodeKind::Fact) continue;
        ++fact_index;
        for (NodeId d : t.children(f)) {
            if (t.at(d).kind != NodeKind::Dimension) continue;
            const HierarchySchema* ds = schemas.find_dim(t.at(d).label);
            if (!ds) raise(Errc::UnknownName, "dimension '" + t.at(d).label + "' not in schema");
            diagdetail::Walker w{t, *ds, fact_index, {f, d}, report.findings};
            w.visit(d, -1);
        }
    }
    return report;
}

}  // namespace xolap
