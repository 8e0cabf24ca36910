#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "xolap/model.hpp"
#include "xolap/xml.hpp"

namespace xolap {

// ---------------------------------------------------------------------------
// Synthetic warehouse generation
// ---------------------------------------------------------------------------
//
// Facts are drawn from a declarative spec: per dimension a hierarchy schema
// plus a roll function that derives each coarser value from the chain so far,
// per measure an integer range.  Hierarchy defects are injected afterwards
// from a second, independently seeded stream, so the base warehouse for a
// given (seed, fact count) is byte-identical whatever defects are asked for:
// a warehouse with removed nodes is strictly smaller, and one with added
// branches strictly larger, than its clean counterpart.
//
// Injection is stratified: the (fact, dimension) cells are scanned in
// document order, every consecutive run of floor(100/pct) cells forms a
// stratum, and one uniformly chosen cell per complete stratum receives one
// defect (one ledger record per selected cell).
//
//   nonstrict   adds a second value beside the chain node at a random level,
//               with its own uniformly drawn continuation chain above it
//   incomplete  removes the chain node at a random non-top level, splicing
//               its children into its place
//   complex     applies both, in that order, to the same cell

/** One dimension of a generation spec. */
struct DimensionGen {
    HierarchySchema schema;
    // roll(k, chain) -> value at level k, given chain[0..k-1]; k >= 1.
    std::function<std::string(size_t, const std::vector<std::string>&)> roll;
};

struct MeasureGen {
    std::string name;
    long long lo = 0, hi = 0;  // inclusive integer range
};

struct WarehouseSpec {
    std::vector<DimensionGen> dims;
    std::vector<MeasureGen> measures;

    SchemaSet schema_set() const {
        SchemaSet s;
        for (const auto& d : dims) s.dims.push_back(d.schema);
        for (const auto& m : measures) s.measures.push_back(m.name);
        return s;
    }
};

enum class InjectionKind : uint8_t { None, NonStrict, Incomplete, Complex };

inline const char* injection_kind_name(InjectionKind k) {
    switch (k) {
        case InjectionKind::None: return "none";
        case InjectionKind::NonStrict: return "nonstrict";
        case InjectionKind::Incomplete: return "incomplete";
        case InjectionKind::Complex: return "complex";
    }
    return "?";
}

inline InjectionKind parse_injection_kind(std::string_view s) {
    if (s == "none") return InjectionKind::None;
    if (s == "nonstrict") return InjectionKind::NonStrict;
    if (s == "incomplete") return InjectionKind::Incomplete;
    if (s == "complex") return InjectionKind::Complex;
    raise(Errc::InvalidConfig, "unknown defect kind '" + std::string(s) +
                                   "' (expected none|nonstrict|incomplete|complex)");
}

struct InjectionRecord {
    size_t fact_index = 0;  // 1-based document order
    std::string dimension;
    std::string level;  // level the defect targets (the added value's level for complex)
    InjectionKind kind = InjectionKind::None;
    std::string detail;

    std::string line() const {
        return std::to_string(fact_index) + "\t" + dimension + "\t" + level + "\t" +
               injection_kind_name(kind) + "\t" + detail;
    }
};

inline std::string ledger_to_text(const std::vector<InjectionRecord>& ledger) {
    std::string out;
    for (const auto& r : ledger) {
        out += r.line();
        out += '\n';
    }
    return out;
}

struct GeneratorConfig {
    size_t fact_count = 0;
    InjectionKind kind = InjectionKind::None;
    int pct = 0;  // share of (fact, dimension) cells receiving a defect
    uint64_t seed = 0;
};

struct Generated {
    MDDataTree tree;
    std::vector<InjectionRecord> ledger;
};

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

/** Seeded engine with a platform-independent bounded draw (multiply-shift),
 *  so the same seed yields the same warehouse everywhere. */
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(uint64_t seed) : eng(seed) {}
    uint64_t next() { return eng(); }
    uint64_t below(uint64_t n) {  // uniform in [0, n)
        return (uint64_t)(((unsigned __int128)next() * n) >> 64);
    }
    long long range(long long lo, long long hi) {  // uniform in [lo, hi]
        return lo + (long long)below((uint64_t)(hi - lo) + 1);
    }
};

inline uint64_t stable_hash(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace gendetail {

inline size_t domain_size(const Domain& d) {
    size_t n = d.size();
    if (n == 0) raise(Errc::InvalidConfig, "generation needs an enumerable level domain");
    return n;
}

inline std::string domain_value(const Domain& d, size_t i) {
    switch (d.kind) {
        case Domain::Kind::Enumerated: return d.values[i];
        case Domain::Kind::IntRange: return std::to_string(d.lo + (long long)i);
        case Domain::Kind::Open: break;
    }
    raise(Errc::InvalidConfig, "generation needs an enumerable level domain");
}

/** The original chain of a dimension subtree: first hierarchy child at each step. */
inline std::vector<NodeId> base_chain(const MDDataTree& t, NodeId dim_node) {
    std::vector<NodeId> chain;
    NodeId cur = dim_node;
    for (;;) {
        NodeId next = 0;
        bool found = false;
        for (NodeId c : t.children(cur)) {
            if (t.at(c).kind == NodeKind::HierarchyLevel) {
                next = c;
                found = true;
                break;
            }
        }
        if (!found) return chain;
        chain.push_back(next);
        cur = next;
    }
}

inline std::string draw_excluding(Rng& rng, const Domain& d, const std::string& taken) {
    size_t n = domain_size(d);
    if (n < 2)
        raise(Errc::InvalidConfig, "cannot add a second value: the level domain has one value");
    std::string v;
    do {
        v = domain_value(d, rng.below(n));
    } while (v == taken);
    return v;
}

inline void inject_nonstrict(MDDataTree& t, Rng& rng, NodeId dim_node, const DimensionGen& dim,
                             InjectionRecord& rec) {
    const auto& levels = dim.schema.levels;
    std::vector<NodeId> chain = base_chain(t, dim_node);
    size_t ti = (size_t)rng.below(levels.size());
    NodeId parent = ti == 0 ? dim_node : chain[ti - 1];
    const std::string& existing = t.at(chain[ti]).value;
    std::string v2 = draw_excluding(rng, levels[ti].domain, existing);
    NodeId cur = t.add_level(parent, levels[ti].name, v2);
    for (size_t k = ti + 1; k < levels.size(); ++k)
        cur = t.add_level(cur, levels[k].name,
                          domain_value(levels[k].domain, rng.below(domain_size(levels[k].domain))));
    rec.level = levels[ti].name;
    rec.detail = "added " + levels[ti].name + "=" + v2 + " beside " + existing;
}

inline void inject_incomplete(MDDataTree& t, Rng& rng, NodeId dim_node, const DimensionGen& dim,
                              InjectionRecord& rec, bool keep_level) {
    const auto& levels = dim.schema.levels;
    std::vector<NodeId> chain = base_chain(t, dim_node);
    size_t ti = (size_t)rng.below(levels.size() - 1);
    NodeId victim = chain[ti];
    NodeId parent = ti == 0 ? dim_node : chain[ti - 1];
    auto& ks = t.kids[parent];
    size_t pos = 0;
    while (ks[pos] != victim) ++pos;
    std::vector<NodeId> moved = t.kids[victim];
    t.kids[victim].clear();
    ks.erase(ks.begin() + (long)pos);
    ks.insert(ks.begin() + (long)pos, moved.begin(), moved.end());
    if (!keep_level) rec.level = levels[ti].name;
    if (!rec.detail.empty()) rec.detail += "; ";
    rec.detail += "removed " + levels[ti].name + "=" + t.at(victim).value;
}

}  // namespace gendetail

/** Generates a warehouse and the ledger of defects injected into it. */
inline Generated generate(const WarehouseSpec& spec, const GeneratorConfig& cfg) {
    if (spec.dims.empty()) raise(Errc::InvalidConfig, "spec has no dimensions");
    if (cfg.pct < 0 || cfg.pct > 100)
        raise(Errc::InvalidConfig, "defect percentage must be in [0, 100]");
    if (cfg.kind == InjectionKind::None && cfg.pct > 0)
        raise(Errc::InvalidConfig, "defect percentage given without a defect kind");
    for (const auto& d : spec.dims)
        if (d.schema.levels.empty())
            raise(Errc::InvalidConfig, "dimension '" + d.schema.dimension + "' has no levels");

    Generated g;
    Rng base(cfg.seed);

    std::vector<NodeId> fact_nodes;
    fact_nodes.reserve(cfg.fact_count);
    std::vector<std::string> chain_vals;
    for (size_t i = 0; i < cfg.fact_count; ++i) {
        NodeId f = g.tree.add(g.tree.root(), Node{NodeKind::Fact, "fact", "", AggFn::Sum, "", ""});
        fact_nodes.push_back(f);
        for (const auto& d : spec.dims) {
            NodeId dn = g.tree.add(
                f, Node{NodeKind::Dimension, d.schema.dimension, "", AggFn::Sum, "", ""});
            const auto& levels = d.schema.levels;
            chain_vals.clear();
            chain_vals.push_back(gendetail::domain_value(
                levels[0].domain, base.below(gendetail::domain_size(levels[0].domain))));
            for (size_t k = 1; k < levels.size(); ++k) {
                if (!d.roll)
                    raise(Errc::InvalidConfig,
                          "dimension '" + d.schema.dimension + "' has no roll function");
                chain_vals.push_back(d.roll(k, chain_vals));
            }
            NodeId cur = dn;
            for (size_t k = 0; k < levels.size(); ++k)
                cur = g.tree.add_level(cur, levels[k].name, chain_vals[k]);
        }
        for (const auto& m : spec.measures)
            g.tree.add(f, Node{NodeKind::Measure, m.name, std::to_string(base.range(m.lo, m.hi)),
                               AggFn::Sum, "", ""});
    }

    if (cfg.kind == InjectionKind::None || cfg.pct == 0 || cfg.fact_count == 0) return g;

    // Second stream: defects never perturb the base draws.
    Rng inj(cfg.seed ^ 0x6A09E667F3BCC909ULL);
    const size_t dims = spec.dims.size();
    const size_t cells = cfg.fact_count * dims;
    const size_t stratum = (size_t)(100 / cfg.pct);
    for (size_t s = 0; s + stratum <= cells; s += stratum) {
        size_t cell = s + (size_t)inj.below(stratum);
        size_t fi = cell / dims;
        size_t di = cell % dims;
        const DimensionGen& dg = spec.dims[di];
        // The dimension node is the di-th child of the fact (dims come first).
        NodeId dim_node = g.tree.children(fact_nodes[fi])[di];
        InjectionRecord rec;
        rec.fact_index = fi + 1;
        rec.dimension = dg.schema.dimension;
        rec.kind = cfg.kind;
        if (cfg.kind == InjectionKind::NonStrict) {
            gendetail::inject_nonstrict(g.tree, inj, dim_node, dg, rec);
        } else if (cfg.kind == InjectionKind::Incomplete) {
            if (dg.schema.levels.size() < 2) continue;  // nothing removable
            gendetail::inject_incomplete(g.tree, inj, dim_node, dg, rec, false);
        } else {
            gendetail::inject_nonstrict(g.tree, inj, dim_node, dg, rec);
            if (dg.schema.levels.size() >= 2)
                gendetail::inject_incomplete(g.tree, inj, dim_node, dg, rec, true);
        }
        g.ledger.push_back(std::move(rec));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Ready-made specs
// ---------------------------------------------------------------------------

namespace gendetail {

inline void day_to_civil(long long day_index, int& year, int& month) {
    static const int md[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int y = 1992, m = 0;
    long long d = day_index - 1;  // day 1 = 1992-01-01
    for (;;) {
        bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        int len = md[m] + (m == 1 && leap ? 1 : 0);
        if (d < len) break;
        d -= len;
        if (++m == 12) {
            m = 0;
            ++y;
        }
    }
    year = y;
    month = m + 1;
}

inline const std::vector<std::string>& part_type_words(int pos) {
    static const std::vector<std::string> s1 = {"STANDARD", "SMALL", "MEDIUM",
                                                "LARGE",    "ECONOMY", "PROMO"};
    static const std::vector<std::string> s2 = {"ANODIZED", "BURNISHED", "PLATED", "POLISHED",
                                                "BRUSHED"};
    static const std::vector<std::string> s3 = {"TIN", "NICKEL", "BRASS", "STEEL", "COPPER"};
    return pos == 0 ? s1 : pos == 1 ? s2 : s3;
}

struct NationRegion {
    const char* nation;
    const char* region;
};

inline const std::vector<NationRegion>& nations() {
    static const std::vector<NationRegion> n = {
        {"ALGERIA", "AFRICA"},        {"ARGENTINA", "AMERICA"},
        {"BRAZIL", "AMERICA"},        {"CANADA", "AMERICA"},
        {"EGYPT", "MIDDLE EAST"},     {"ETHIOPIA", "AFRICA"},
        {"FRANCE", "EUROPE"},         {"GERMANY", "EUROPE"},
        {"INDIA", "ASIA"},            {"INDONESIA", "ASIA"},
        {"IRAN", "MIDDLE EAST"},      {"IRAQ", "MIDDLE EAST"},
        {"JAPAN", "ASIA"},            {"JORDAN", "MIDDLE EAST"},
        {"KENYA", "AFRICA"},          {"MOROCCO", "AFRICA"},
        {"MOZAMBIQUE", "AFRICA"},     {"PERU", "AMERICA"},
        {"ROMANIA", "EUROPE"},        {"RUSSIA", "EUROPE"},
        {"SAUDI ARABIA", "MIDDLE EAST"}, {"UNITED KINGDOM", "EUROPE"},
        {"UNITED STATES", "AMERICA"}, {"VIETNAM", "ASIA"},
        {"CHINA", "ASIA"},
    };
    return n;
}

inline DimensionGen geography_dim(std::string name) {
    DimensionGen d;
    d.schema.dimension = std::move(name);
    Domain nation_dom, region_dom;
    nation_dom.kind = Domain::Kind::Enumerated;
    region_dom.kind = Domain::Kind::Enumerated;
    for (const auto& nr : nations()) nation_dom.values.push_back(nr.nation);
    region_dom.values = {"AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"};
    d.schema.levels.push_back(LevelSchema{"nation", nation_dom, {}});
    d.schema.levels.push_back(LevelSchema{"region", region_dom, {}});
    d.roll = [](size_t, const std::vector<std::string>& chain) -> std::string {
        for (const auto& nr : nations())
            if (chain[0] == nr.nation) return nr.region;
        raise(Errc::DomainViolation, "unknown nation '" + chain[0] + "'");
    };
    return d;
}

}  // namespace gendetail

/**
 * The retail spec used by the benchmarks: an order-line fact with a three
 * level calendar (days over 1992..1998), a three-level product-type
 * hierarchy (150 -> 30 -> 6 names), customer and supplier geography
 * (25 nations -> 5 regions), and two integer measures.
 */
inline WarehouseSpec xweb_spec() {
    WarehouseSpec spec;

    DimensionGen date;
    date.schema.dimension = "date";
    Domain day_dom, month_dom, year_dom;
    day_dom.kind = Domain::Kind::IntRange;
    day_dom.lo = 1;
    day_dom.hi = 2466;
    month_dom.kind = Domain::Kind::IntRange;
    month_dom.lo = 1;
    month_dom.hi = 12;
    year_dom.kind = Domain::Kind::IntRange;
    year_dom.lo = 1992;
    year_dom.hi = 1998;
    date.schema.levels.push_back(LevelSchema{"day", day_dom, {}});
    date.schema.levels.push_back(LevelSchema{"month", month_dom, {}});
    date.schema.levels.push_back(LevelSchema{"year", year_dom, {}});
    date.roll = [](size_t k, const std::vector<std::string>& chain) {
        long long day = 0;
        detail::parse_ll(chain[0], day);
        int y = 0, m = 0;
        gendetail::day_to_civil(day, y, m);
        return std::to_string(k == 1 ? m : y);
    };
    spec.dims.push_back(std::move(date));

    DimensionGen part;
    part.schema.dimension = "part";
    Domain t3, t2, t1;
    t3.kind = t2.kind = t1.kind = Domain::Kind::Enumerated;
    for (const auto& a : gendetail::part_type_words(0)) {
        t1.values.push_back(a);
        for (const auto& b : gendetail::part_type_words(1)) {
            t2.values.push_back(a + " " + b);
            for (const auto& c : gendetail::part_type_words(2)) t3.values.push_back(a + " " + b + " " + c);
        }
    }
    part.schema.levels.push_back(LevelSchema{"type3", t3, {}});
    part.schema.levels.push_back(LevelSchema{"type2", t2, {}});
    part.schema.levels.push_back(LevelSchema{"type1", t1, {}});
    part.roll = [](size_t k, const std::vector<std::string>& chain) {
        // type2 = first two words of type3; type1 = first word.
        const std::string& finer = chain[k - 1];
        size_t cut = finer.rfind(' ');
        return finer.substr(0, cut);
    };
    spec.dims.push_back(std::move(part));

    spec.dims.push_back(gendetail::geography_dim("customer"));
    spec.dims.push_back(gendetail::geography_dim("supplier"));

    spec.measures.push_back(MeasureGen{"f_quantity", 1, 50});
    spec.measures.push_back(MeasureGen{"f_totalamount", 900, 105000});
    return spec;
}

/**
 * A small random star spec for cross-checking engines: 2-4 dimensions of
 * 2-3 levels, enumerated domains of 3-8 single-token values, coarser values
 * derived by stable hash so chains are functions of their finest value.
 */
inline WarehouseSpec random_small_spec(uint64_t seed) {
    Rng rng(seed ^ 0xBB67AE8584CAA73BULL);
    WarehouseSpec spec;
    size_t ndims = 2 + (size_t)rng.below(3);
    for (size_t i = 0; i < ndims; ++i) {
        DimensionGen d;
        d.schema.dimension = "dim" + std::to_string(i);
        size_t nlevels = 2 + (size_t)rng.below(2);
        for (size_t k = 0; k < nlevels; ++k) {
            Domain dom;
            dom.kind = Domain::Kind::Enumerated;
            size_t width = 3 + (size_t)rng.below(6);
            for (size_t j = 0; j < width; ++j)
                dom.values.push_back("d" + std::to_string(i) + "l" + std::to_string(k) + "v" +
                                     std::to_string(j));
            d.schema.levels.push_back(LevelSchema{"L" + std::to_string(k), dom, {}});
        }
        d.roll = [levels = d.schema.levels](size_t k, const std::vector<std::string>& chain) {
            const Domain& dom = levels[k].domain;
            return dom.values[stable_hash(chain[k - 1]) % dom.values.size()];
        };
        spec.dims.push_back(std::move(d));
    }
    spec.measures.push_back(MeasureGen{"m1", 1, 1000});
    return spec;
}

}  // namespace xolap
