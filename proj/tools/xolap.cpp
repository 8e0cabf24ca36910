// Command-line front end: generate, validate, query, roll up, normalize,
// and benchmark multidimensional XML warehouses.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xolap/xolap.hpp"

namespace {

using namespace xolap;

std::string read_stream(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string read_input(const std::string& path) {
    if (path == "-") return read_stream(std::cin);
    std::ifstream f(path, std::ios::binary);
    if (!f) raise(Errc::IoError, "cannot open '" + path + "' for reading");
    return read_stream(f);
}

void write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) raise(Errc::IoError, "cannot open '" + path + "' for writing");
    f << content;
    if (!f) raise(Errc::IoError, "write to '" + path + "' failed");
}

SchemaSet load_schemas(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(Errc::IoError, "cannot open schema '" + path + "'");
    return parse_schema(f);
}

MDDataTree load_warehouse(const std::string& path, const SchemaSet& schemas) {
    if (path == "-") {
        return parse_warehouse(read_stream(std::cin), schemas);
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) raise(Errc::IoError, "cannot open '" + path + "' for reading");
    return parse_warehouse(f, schemas);
}

TreePatternQuery load_query(const std::string& path, const SchemaSet& schemas) {
    std::ifstream f(path);
    if (!f) raise(Errc::IoError, "cannot open query '" + path + "'");
    return parse_query(f, schemas);
}

WarehouseSpec spec_by_name(const std::string& name) {
    if (name == "xweb") return xweb_spec();
    raise(Errc::InvalidConfig, "unknown spec '" + name + "' (available: xweb)");
}

int run(int argc, char** argv) {
    CLI::App app{"Query-time OLAP over multidimensional XML warehouses"};
    app.require_subcommand(1);

    std::string in_path = "-", out_path = "-", schema_path, spec_name = "xweb";

    // generate
    auto* g = app.add_subcommand("generate", "Generate a synthetic warehouse");
    size_t g_facts = 1000;
    std::string g_kind = "none", g_ledger, g_schema_out;
    int g_pct = 0;
    uint64_t g_seed = 0;
    g->add_option("--facts", g_facts, "Number of facts");
    g->add_option("--kind", g_kind, "Defect kind: none|nonstrict|incomplete|complex");
    g->add_option("--pct", g_pct, "Share of (fact, dimension) cells given a defect");
    g->add_option("--seed", g_seed, "Generation seed");
    g->add_option("--spec", spec_name, "Warehouse spec name");
    g->add_option("--out", out_path, "Warehouse output file (- for stdout)");
    g->add_option("--emit-ledger", g_ledger, "Write the defect ledger to this file");
    g->add_option("--emit-schema", g_schema_out, "Write the schema to this file");

    // validate
    auto* v = app.add_subcommand("validate", "Scan a warehouse for summarizability findings");
    v->add_option("--in", in_path, "Warehouse file (- for stdin)");
    v->add_option("--schema", schema_path, "Schema file")->required();

    // query
    auto* q = app.add_subcommand("query", "Group and aggregate a warehouse");
    std::vector<std::string> q_files;
    bool linear_scan = false, show_stats = false;
    q->add_option("--in", in_path, "Warehouse file (- for stdin)");
    q->add_option("--schema", schema_path, "Schema file")->required();
    q->add_option("--q", q_files, "Query file")->required();
    q->add_flag("--linear-scan", linear_scan, "Scan the group list instead of hashing");
    q->add_flag("--stats", show_stats, "Print phase timings to stderr");
    q->add_option("--out", out_path, "Result output file (- for stdout)");

    // rollup
    auto* r = app.add_subcommand("rollup", "Apply a chain of grouping queries");
    std::vector<std::string> r_files;
    bool r_linear = false, r_stats = false;
    r->add_option("--in", in_path, "Warehouse file (- for stdin)");
    r->add_option("--schema", schema_path, "Schema file")->required();
    r->add_option("--q", r_files, "Query files, one per stage, applied in order")
        ->required()
        ->expected(-1);
    r->add_flag("--linear-scan", r_linear, "Scan the group list instead of hashing");
    r->add_flag("--stats", r_stats, "Print per-stage phase timings to stderr");
    r->add_option("--out", out_path, "Result output file (- for stdout)");

    // normalize
    auto* n = app.add_subcommand("normalize", "Repair a warehouse for plain grouping");
    std::string n_step = "full", n_schema_out, n_actions_out;
    n->add_option("--in", in_path, "Warehouse file (- for stdin)");
    n->add_option("--schema", schema_path, "Schema file")->required();
    n->add_option("--step", n_step, "Repair step: onto|covering|strict|full");
    n->add_option("--out", out_path, "Repaired warehouse output file (- for stdout)");
    n->add_option("--emit-schema", n_schema_out, "Write the (possibly extended) schema here");
    n->add_option("--emit-actions", n_actions_out, "Write the repair action list here");

    // bench
    auto* b = app.add_subcommand("bench", "Compare grouping routes on generated warehouses");
    std::string b_config;
    b->add_option("--config", b_config, "Benchmark config file")->required();
    b->add_option("--spec", spec_name, "Warehouse spec name");
    b->add_option("--out", out_path, "Per-repetition CSV output file (- for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);       // prints help or the parse error
        return rc == 0 ? 0 : 2;     // usage errors exit 2, help exits 0
    }

    if (g->parsed()) {
        WarehouseSpec spec = spec_by_name(spec_name);
        GeneratorConfig cfg{g_facts, parse_injection_kind(g_kind), g_pct, g_seed};
        Generated gen = generate(spec, cfg);
        write_output(out_path, serialize_warehouse(gen.tree));
        if (!g_ledger.empty()) write_output(g_ledger, ledger_to_text(gen.ledger));
        if (!g_schema_out.empty()) write_output(g_schema_out, print_schema(spec.schema_set()));
        std::cerr << "generated " << g_facts << " facts, " << gen.ledger.size() << " defects\n";
        return 0;
    }
    if (v->parsed()) {
        SchemaSet schemas = load_schemas(schema_path);
        MDDataTree tree = load_warehouse(in_path, schemas);
        DiagnosticsReport rep = validate_summarizability(tree, schemas);
        std::cout << rep.to_text();
        std::cout << "findings: " << rep.findings.size() << "\n";
        return 0;
    }
    if (q->parsed()) {
        if (q_files.size() != 1)
            raise(Errc::QuerySyntax, "query takes exactly one --q (use rollup for chains)");
        SchemaSet schemas = load_schemas(schema_path);
        MDDataTree tree = load_warehouse(in_path, schemas);
        TreePatternQuery tq = load_query(q_files[0], schemas);
        QbsStats st{};
        MDDataTree res = qbs(tree, tq, schemas, QbsOptions{linear_scan, show_stats}, &st);
        write_output(out_path, serialize_warehouse(res));
        if (show_stats)
            std::cerr << "groups=" << st.group_count << " facts=" << st.facts_seen
                      << " summarizability_ms=" << (double)st.summarizability_ns / 1e6
                      << " matching_ms=" << (double)st.matching_ns / 1e6
                      << " total_ms=" << (double)st.total_ns / 1e6 << "\n";
        return 0;
    }
    if (r->parsed()) {
        SchemaSet schemas = load_schemas(schema_path);
        MDDataTree tree = load_warehouse(in_path, schemas);
        std::vector<TreePatternQuery> stages;
        for (const auto& f : r_files) stages.push_back(load_query(f, schemas));
        std::vector<QbsStats> st;
        MDDataTree res = rollup(tree, stages, schemas, QbsOptions{r_linear, r_stats},
                                r_stats ? &st : nullptr);
        write_output(out_path, serialize_warehouse(res));
        if (r_stats) {
            for (size_t i = 0; i < st.size(); ++i)
                std::cerr << "stage " << (i + 1) << ": groups=" << st[i].group_count
                          << " summarizability_ms=" << (double)st[i].summarizability_ns / 1e6
                          << " matching_ms=" << (double)st[i].matching_ns / 1e6
                          << " total_ms=" << (double)st[i].total_ns / 1e6 << "\n";
        }
        return 0;
    }
    if (n->parsed()) {
        SchemaSet schemas = load_schemas(schema_path);
        MDDataTree tree = load_warehouse(in_path, schemas);
        Normalized norm;
        if (n_step == "onto") norm = make_onto(tree, schemas);
        else if (n_step == "covering") norm = make_covering(tree, schemas);
        else if (n_step == "strict") norm = make_strict(tree, schemas);
        else if (n_step == "full") norm = normalize(tree, schemas);
        else raise(Errc::InvalidConfig, "unknown step '" + n_step + "'");
        write_output(out_path, serialize_warehouse(norm.tree));
        if (!n_schema_out.empty()) write_output(n_schema_out, print_schema(norm.schemas));
        if (!n_actions_out.empty()) {
            std::string text;
            for (const auto& a : norm.actions) {
                text += a;
                text += '\n';
            }
            write_output(n_actions_out, text);
        }
        std::cerr << "repairs: " << norm.actions.size() << "\n";
        return 0;
    }
    if (b->parsed()) {
        WarehouseSpec spec = spec_by_name(spec_name);
        std::ifstream f(b_config);
        if (!f) raise(Errc::IoError, "cannot open config '" + b_config + "'");
        std::vector<BenchConfig> cfgs = parse_bench_configs(f);
        std::vector<BenchRow> rows = run_benchmarks(cfgs, spec);
        std::ostringstream csv;
        write_csv(rows, csv);
        write_output(out_path, csv.str());
        std::ostringstream summary;
        write_summary(summarize(rows), summary);
        std::cerr << summary.str();
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const xolap::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
