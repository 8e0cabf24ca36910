#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "xolap/generate.hpp"
#include "xolap/normalize.hpp"
#include "xolap/qbs.hpp"

namespace xolap {

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------
//
// Compares query-time grouping against the repair-first route on generated
// warehouses.  Modes:
//
//   qbs                        query-time grouping, hash-indexed groups
//   qbs_linear                 query-time grouping, list-scanned groups
//   pedersen_with_overhead     normalize, then plain grouping; repair re-run
//                              and timed every repetition
//   pedersen_without_overhead  plain grouping over a pre-normalized tree;
//                              repair cost excluded
//
// Before anything is timed, each (config, query) pair is gated: the
// query-time result must equal plain grouping over the normalized warehouse,
// group for group and value for value.  A benchmark over disagreeing engines
// is meaningless, so a mismatch aborts the run.
//
// Output is one CSV row per repetition and phase:
//   config_id,facts,kind,pct,query,mode,rep,phase,millis
// with phases summarizability|matching|total for the query-time modes and
// normalize|matching|total for the repair-first modes.

enum class BenchMode : uint8_t { Qbs, QbsLinear, PedersenWithOverhead, PedersenWithoutOverhead };

inline const char* bench_mode_name(BenchMode m) {
    switch (m) {
        case BenchMode::Qbs: return "qbs";
        case BenchMode::QbsLinear: return "qbs_linear";
        case BenchMode::PedersenWithOverhead: return "pedersen_with_overhead";
        case BenchMode::PedersenWithoutOverhead: return "pedersen_without_overhead";
    }
    return "?";
}

inline BenchMode parse_bench_mode(std::string_view s) {
    if (s == "qbs") return BenchMode::Qbs;
    if (s == "qbs_linear") return BenchMode::QbsLinear;
    if (s == "pedersen_with_overhead") return BenchMode::PedersenWithOverhead;
    if (s == "pedersen_without_overhead") return BenchMode::PedersenWithoutOverhead;
    raise(Errc::InvalidConfig, "unknown benchmark mode '" + std::string(s) + "'");
}

struct BenchConfig {
    std::string config_id = "default";
    size_t facts = 1000;
    InjectionKind kind = InjectionKind::None;
    int pct = 0;
    uint64_t seed = 0;
    int reps = 3;
    std::vector<int> queries = {1, 2, 3, 4};  // grouped dimension count
    std::vector<BenchMode> modes = {BenchMode::Qbs, BenchMode::PedersenWithOverhead,
                                    BenchMode::PedersenWithoutOverhead};
};

struct BenchRow {
    std::string config_id;
    size_t facts = 0;
    InjectionKind kind = InjectionKind::None;
    int pct = 0;
    int query = 0;
    BenchMode mode = BenchMode::Qbs;
    int rep = 0;
    std::string phase;
    double millis = 0;
};

inline constexpr const char* kBenchCsvHeader = "config_id,facts,kind,pct,query,mode,rep,phase,millis";

inline std::string bench_row_csv(const BenchRow& r) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.4f", r.millis);
    return r.config_id + "," + std::to_string(r.facts) + "," + injection_kind_name(r.kind) + "," +
           std::to_string(r.pct) + "," + std::to_string(r.query) + "," + bench_mode_name(r.mode) +
           "," + std::to_string(r.rep) + "," + r.phase + "," + ms;
}

/**
 * The stock query ladder over the retail spec: grouping at the finest level
 * of one to four dimensions, summing the order amount.
 */
inline std::vector<TreePatternQuery> table_workload(const SchemaSet& schemas) {
    static const char* text[4] = {
        "group date.day\nagg sum(f_totalamount)\n",
        "group date.day\ngroup part.type3\nagg sum(f_totalamount)\n",
        "group date.day\ngroup part.type3\ngroup customer.nation\nagg sum(f_totalamount)\n",
        "group date.day\ngroup part.type3\ngroup customer.nation\ngroup supplier.nation\n"
        "agg sum(f_totalamount)\n",
    };
    std::vector<TreePatternQuery> qs;
    for (const char* t : text) qs.push_back(parse_query(std::string(t), schemas));
    return qs;
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------
//
//   [config c1]
//   facts = 1000
//   kind = complex
//   pct = 20
//   seed = 42
//   reps = 3
//   queries = 1, 2
//   modes = qbs, pedersen_with_overhead

inline std::vector<BenchConfig> parse_bench_configs(std::istream& in) {
    std::vector<BenchConfig> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                raise(Errc::InvalidConfig, "line " + std::to_string(lineno) + ": unclosed '['");
            std::string head = detail::trim(t.substr(1, t.size() - 2));
            if (head.rfind("config", 0) != 0)
                raise(Errc::InvalidConfig,
                      "line " + std::to_string(lineno) + ": expected [config <id>]");
            BenchConfig cfg;
            std::string id = detail::trim(head.substr(6));
            if (!id.empty()) cfg.config_id = id;
            out.push_back(std::move(cfg));
            continue;
        }
        if (out.empty())
            raise(Errc::InvalidConfig,
                  "line " + std::to_string(lineno) + ": settings before any [config] section");
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            raise(Errc::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string val = detail::trim(t.substr(eq + 1));
        BenchConfig& cfg = out.back();
        long long n = 0;
        if (key == "facts") {
            if (!detail::parse_ll(val, n) || n < 0)
                raise(Errc::InvalidConfig, "facts must be a nonnegative integer");
            cfg.facts = (size_t)n;
        } else if (key == "kind") {
            cfg.kind = parse_injection_kind(val);
        } else if (key == "pct") {
            if (!detail::parse_ll(val, n) || n < 0 || n > 100)
                raise(Errc::InvalidConfig, "pct must be in [0, 100]");
            cfg.pct = (int)n;
        } else if (key == "seed") {
            if (!detail::parse_ll(val, n) || n < 0)
                raise(Errc::InvalidConfig, "seed must be a nonnegative integer");
            cfg.seed = (uint64_t)n;
        } else if (key == "reps") {
            if (!detail::parse_ll(val, n) || n < 1)
                raise(Errc::InvalidConfig, "reps must be a positive integer");
            cfg.reps = (int)n;
        } else if (key == "queries") {
            cfg.queries.clear();
            for (const auto& item : detail::split_list(val)) {
                if (!detail::parse_ll(item, n) || n < 1 || n > 4)
                    raise(Errc::InvalidConfig, "queries must list dimension counts in [1, 4]");
                cfg.queries.push_back((int)n);
            }
            if (cfg.queries.empty()) raise(Errc::InvalidConfig, "queries list is empty");
        } else if (key == "modes") {
            cfg.modes.clear();
            for (const auto& item : detail::split_list(val))
                cfg.modes.push_back(parse_bench_mode(item));
            if (cfg.modes.empty()) raise(Errc::InvalidConfig, "modes list is empty");
        } else {
            raise(Errc::InvalidConfig,
                  "line " + std::to_string(lineno) + ": unknown setting '" + key + "'");
        }
    }
    if (out.empty()) raise(Errc::InvalidConfig, "no [config] sections found");
    return out;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

namespace benchdetail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace benchdetail

/**
 * Runs one config and appends per-repetition rows.  The returned rows are in
 * deterministic order (query, mode, rep, phase).  Throws ResultMismatch if
 * the two engine routes disagree on any gated query.
 */
inline void run_benchmark(const BenchConfig& cfg, const WarehouseSpec& spec,
                          std::vector<BenchRow>& rows) {
    using clock = std::chrono::steady_clock;
    SchemaSet schemas = spec.schema_set();
    Generated gen = generate(
        spec, GeneratorConfig{cfg.facts, cfg.kind, cfg.pct, cfg.seed});
    std::vector<TreePatternQuery> ladder = table_workload(schemas);
    Normalized norm = normalize(gen.tree, schemas);

    auto emit = [&](int query, BenchMode mode, int rep, const char* phase, double ms) {
        rows.push_back(BenchRow{cfg.config_id, cfg.facts, cfg.kind, cfg.pct, query, mode, rep,
                                phase, ms});
    };

    for (int qd : cfg.queries) {
        if (qd < 1 || qd > (int)ladder.size())
            raise(Errc::InvalidConfig, "query dimension count out of range");
        const TreePatternQuery& q = ladder[(size_t)qd - 1];
        TreePatternQuery nq = map_query_to_schema(q, norm.schemas);

        // Equality gate: the engines must agree before anything is timed.
        MDDataTree gate_qbs = qbs(gen.tree, q, schemas);
        MDDataTree gate_plain = plain_group_by(norm.tree, nq, norm.schemas);
        if (!same_rows(gate_qbs, q, gate_plain, nq))
            raise(Errc::ResultMismatch,
                  "config '" + cfg.config_id + "', query " + std::to_string(qd) +
                      ": query-time grouping and normalize-then-group disagree");
        for (BenchMode m : cfg.modes) {
            if (m == BenchMode::QbsLinear) {
                MDDataTree lin = qbs(gen.tree, q, schemas, QbsOptions{true, false});
                if (!same_rows(lin, q, gate_qbs, q))
                    raise(Errc::ResultMismatch,
                          "config '" + cfg.config_id + "', query " + std::to_string(qd) +
                              ": list-scanned grouping disagrees with hash-indexed grouping");
            }
        }

        for (BenchMode m : cfg.modes) {
            for (int rep = 0; rep < cfg.reps; ++rep) {
                switch (m) {
                    case BenchMode::Qbs:
                    case BenchMode::QbsLinear: {
                        QbsStats st{};
                        QbsOptions opt{m == BenchMode::QbsLinear, true};
                        clock::time_point t0 = clock::now();
                        MDDataTree r = qbs(gen.tree, q, schemas, opt, &st);
                        double total = benchdetail::ms_since(t0);
                        (void)r;
                        emit(qd, m, rep, "summarizability", (double)st.summarizability_ns / 1e6);
                        emit(qd, m, rep, "matching", (double)st.matching_ns / 1e6);
                        emit(qd, m, rep, "total", total);
                        break;
                    }
                    case BenchMode::PedersenWithOverhead: {
                        clock::time_point t0 = clock::now();
                        Normalized n2 = normalize(gen.tree, schemas);
                        double norm_ms = benchdetail::ms_since(t0);
                        clock::time_point t1 = clock::now();
                        MDDataTree r = plain_group_by(n2.tree, nq, n2.schemas);
                        double match_ms = benchdetail::ms_since(t1);
                        (void)r;
                        emit(qd, m, rep, "normalize", norm_ms);
                        emit(qd, m, rep, "matching", match_ms);
                        emit(qd, m, rep, "total", norm_ms + match_ms);
                        break;
                    }
                    case BenchMode::PedersenWithoutOverhead: {
                        clock::time_point t0 = clock::now();
                        MDDataTree r = plain_group_by(norm.tree, nq, norm.schemas);
                        double match_ms = benchdetail::ms_since(t0);
                        (void)r;
                        emit(qd, m, rep, "matching", match_ms);
                        emit(qd, m, rep, "total", match_ms);
                        break;
                    }
                }
            }
        }
    }
}

inline std::vector<BenchRow> run_benchmarks(const std::vector<BenchConfig>& cfgs,
                                            const WarehouseSpec& spec) {
    std::vector<BenchRow> rows;
    for (const auto& c : cfgs) run_benchmark(c, spec, rows);
    return rows;
}

inline void write_csv(const std::vector<BenchRow>& rows, std::ostream& os) {
    os << kBenchCsvHeader << "\n";
    for (const auto& r : rows) os << bench_row_csv(r) << "\n";
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

inline double median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

struct BenchSummaryRow {
    std::string config_id;
    size_t facts = 0;
    InjectionKind kind = InjectionKind::None;
    int pct = 0;
    int query = 0;
    BenchMode mode = BenchMode::Qbs;
    std::string phase;
    double median_millis = 0;
};

/** Medians across repetitions, keyed by (config, query, mode, phase), in
 *  first-appearance order. */
inline std::vector<BenchSummaryRow> summarize(const std::vector<BenchRow>& rows) {
    std::vector<BenchSummaryRow> out;
    std::vector<std::vector<double>> samples;
    for (const auto& r : rows) {
        size_t i = 0;
        for (; i < out.size(); ++i) {
            const auto& s = out[i];
            if (s.config_id == r.config_id && s.query == r.query && s.mode == r.mode &&
                s.phase == r.phase)
                break;
        }
        if (i == out.size()) {
            out.push_back(BenchSummaryRow{r.config_id, r.facts, r.kind, r.pct, r.query, r.mode,
                                          r.phase, 0});
            samples.emplace_back();
        }
        samples[i].push_back(r.millis);
    }
    for (size_t i = 0; i < out.size(); ++i) out[i].median_millis = median(samples[i]);
    return out;
}

inline void write_summary(const std::vector<BenchSummaryRow>& rows, std::ostream& os) {
    os << "config_id,facts,kind,pct,query,mode,phase,median_millis\n";
    for (const auto& r : rows) {
        char ms[32];
        std::snprintf(ms, sizeof ms, "%.4f", r.median_millis);
        os << r.config_id << "," << r.facts << "," << injection_kind_name(r.kind) << "," << r.pct
           << "," << r.query << "," << bench_mode_name(r.mode) << "," << r.phase << "," << ms
           << "\n";
    }
}

/** Least-squares slope of log2(y) against log2(x): the growth exponent. */
inline double fit_log2_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        raise(Errc::InvalidConfig, "slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t n = x.size();
    for (size_t i = 0; i < n; ++i) {
        double lx = std::log2(std::max(x[i], 1e-9));
        double ly = std::log2(std::max(y[i], 1e-9));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double den = (double)n * sxx - sx * sx;
    if (den == 0) raise(Errc::InvalidConfig, "slope fit needs distinct sizes");
    return ((double)n * sxy - sx * sy) / den;
}

}  // namespace xolap
