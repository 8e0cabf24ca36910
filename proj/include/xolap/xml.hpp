#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xolap/model.hpp"

namespace xolap {

// ---------------------------------------------------------------------------
// Warehouse XML
// ---------------------------------------------------------------------------
//
// <w>
// <fact>
// <dim name="project-dim">
// <lvl name="Project" v="A">
// <lvl name="Team" v="1">
// <lvl name="Branch" v="I"/>
// </lvl>
// </lvl>
// </dim>
// <msr name="cost" v="1000"/>
// </fact>
// </w>
//
// Nesting inside a dimension runs from the level the fact is described at
// toward coarser levels; a level element may repeat under one parent when a
// value rolls up to several parents.  Result documents additionally contain
// <agg fn="sum" measure="cost" v="2500"/> nodes (avg carries sum=/count=).

// The reserved placeholder value for levels a roll-up path misses.
inline constexpr std::string_view kOtherToken = "Other";

/**
 * Domain admission used at parse time.  Besides plain domain membership it
 * admits the Other placeholder and fused values ("1-2"): result trees are
 * valid inputs for further querying.
 */
inline bool domain_admits(const Domain& d, std::string_view v) {
    if (d.kind == Domain::Kind::Open) return true;
    if (v == kOtherToken) return true;
    if (d.contains(v)) return true;
    // Fused encoding: dash-joined member values, every part admissible.
    if (v.find('-') == std::string_view::npos) return false;
    size_t start = 0;
    size_t parts = 0;
    for (size_t i = 0; i <= v.size(); ++i) {
        if (i == v.size() || v[i] == '-') {
            std::string_view part = v.substr(start, i - start);
            if (part.empty()) return false;
            if (part != kOtherToken && !d.contains(part)) return false;
            ++parts;
            start = i + 1;
        }
    }
    return parts >= 2;
}

namespace xmldetail {

struct Attr {
    std::string name, value;
};

struct Tag {
    std::string name;
    std::vector<Attr> attrs;
    bool closing = false;      // </name>
    bool self_closing = false; // <name/>

    const std::string* attr(std::string_view n) const {
        for (const auto& a : attrs)
            if (a.name == n) return &a.value;
        return nullptr;
    }
};

/**
 * Incremental tag scanner over an istream.  Reads in fixed-size chunks, so
 * memory use tracks the tree being built rather than the document length.
 * Only the element/attribute subset the warehouse format needs is handled;
 * comments and an XML prolog are skipped, DOCTYPE is rejected.
 */
class Scanner {
public:
    explicit Scanner(std::istream& in) : in_(in) {}

    // Returns false at end of input.  Non-whitespace text between tags is a
    // shape error: warehouse documents are element-only.
    bool next(Tag& tag) {
        for (;;) {
            int c = get();
            if (c < 0) return false;
            if (c == '<') break;
            if (c != ' ' && c != '\t' && c != '\r' && c != '\n')
                raise(Errc::ShapeViolation, "unexpected text content");
        }
        int c = get();
        if (c < 0) raise(Errc::XmlSyntax, "truncated tag");
        if (c == '?') {  // prolog: skip to '?>'
            int prev = 0;
            while ((c = get()) >= 0) {
                if (prev == '?' && c == '>') return next(tag);
                prev = c;
            }
            raise(Errc::XmlSyntax, "unterminated prolog");
        }
        if (c == '!') {  // comment or doctype
            if (get() == '-' && get() == '-') {
                int a = 0, b = 0;
                while ((c = get()) >= 0) {
                    if (a == '-' && b == '-' && c == '>') return next(tag);
                    a = b;
                    b = c;
                }
                raise(Errc::XmlSyntax, "unterminated comment");
            }
            raise(Errc::XmlSyntax, "unsupported markup declaration");
        }
        tag.attrs.clear();
        tag.closing = tag.self_closing = false;
        if (c == '/') {
            tag.closing = true;
            c = get();
        }
        tag.name.clear();
        while (c >= 0 && is_name_char((char)c)) {
            tag.name.push_back((char)c);
            c = get();
        }
        if (tag.name.empty()) raise(Errc::XmlSyntax, "empty tag name");
        for (;;) {
            while (c == ' ' || c == '\t' || c == '\r' || c == '\n') c = get();
            if (c < 0) raise(Errc::XmlSyntax, "truncated tag");
            if (c == '>') return true;
            if (c == '/') {
                if (get() != '>') raise(Errc::XmlSyntax, "expected '>' after '/'");
                if (tag.closing) raise(Errc::XmlSyntax, "malformed closing tag");
                tag.self_closing = true;
                return true;
            }
            if (tag.closing) raise(Errc::XmlSyntax, "attributes on closing tag");
            Attr a;
            while (c >= 0 && is_name_char((char)c)) {
                a.name.push_back((char)c);
                c = get();
            }
            if (a.name.empty()) raise(Errc::XmlSyntax, "bad attribute name");
            while (c == ' ' || c == '\t') c = get();
            if (c != '=') raise(Errc::XmlSyntax, "expected '=' after attribute name");
            c = get();
            while (c == ' ' || c == '\t') c = get();
            if (c != '"') raise(Errc::XmlSyntax, "attribute value must be double-quoted");
            for (;;) {
                c = get();
                if (c < 0) raise(Errc::XmlSyntax, "unterminated attribute value");
                if (c == '"') break;
                if (c == '&') {
                    a.value += decode_entity();
                    continue;
                }
                if (c == '<') raise(Errc::XmlSyntax, "'<' in attribute value");
                if (c < 0x20) raise(Errc::XmlSyntax, "control character in attribute value");
                a.value.push_back((char)c);
            }
            for (const auto& prev : tag.attrs)
                if (prev.name == a.name) raise(Errc::XmlSyntax, "duplicate attribute '" + a.name + "'");
            tag.attrs.push_back(std::move(a));
            c = get();
        }
    }

private:
    static bool is_name_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_' || c == '-' || c == ':' || c == '.';
    }

    std::string decode_entity() {
        std::string name;
        for (;;) {
            int c = get();
            if (c < 0) raise(Errc::XmlSyntax, "unterminated entity");
            if (c == ';') break;
            name.push_back((char)c);
            if (name.size() > 6) raise(Errc::XmlSyntax, "unknown entity '&" + name + "'");
        }
        if (name == "amp") return "&";
        if (name == "lt") return "<";
        if (name == "gt") return ">";
        if (name == "quot") return "\"";
        if (name == "apos") return "'";
        raise(Errc::XmlSyntax, "unknown entity '&" + name + ";'");
    }

    int get() {
        if (pos_ == end_) {
            in_.read(buf_, sizeof buf_);
            end_ = (size_t)in_.gcount();
            pos_ = 0;
            if (end_ == 0) return -1;
        }
        return (unsigned char)buf_[pos_++];
    }

    std::istream& in_;
    char buf_[65536];
    size_t pos_ = 0, end_ = 0;
};

}  // namespace xmldetail

/**
 * Parses a warehouse document, validating shape against the schema:
 * element kinds per depth, level names and strictly-coarsening nesting,
 * measure names, numeric measure values, and level-domain membership.
 */
inline MDDataTree parse_warehouse(std::istream& in, const SchemaSet& schemas) {
    xmldetail::Scanner sc(in);
    xmldetail::Tag tag;
    MDDataTree tree;

    struct Frame {
        NodeId id;
        std::string elem;               // w | fact | dim | lvl
        const HierarchySchema* dim = nullptr;
        int level_idx = -1;             // lvl frames
    };
    std::vector<Frame> stack;

    auto path_here = [&]() {
        std::vector<NodeId> chain;
        for (const auto& f : stack) chain.push_back(f.id);
        return node_path(tree, chain);
    };

    auto require_attr = [&](const xmldetail::Tag& t, std::string_view name) -> const std::string& {
        const std::string* v = t.attr(name);
        if (!v)
            raise(Errc::XmlSyntax, "<" + t.name + "> missing attribute '" + std::string(name) + "'");
        return *v;
    };

    if (!sc.next(tag)) raise(Errc::XmlSyntax, "empty document");
    if (tag.closing || tag.name != "w")
        raise(Errc::ShapeViolation, "document root must be <w>");
    if (tag.self_closing) {
        if (sc.next(tag)) raise(Errc::XmlSyntax, "content after document root");
        return tree;
    }
    stack.push_back({tree.root(), "w", nullptr, -1});

    while (sc.next(tag)) {
        if (tag.closing) {
            if (stack.empty() || stack.back().elem != tag.name)
                raise(Errc::XmlSyntax, "mismatched </" + tag.name + ">");
            stack.pop_back();
            if (stack.empty()) {
                if (sc.next(tag)) raise(Errc::XmlSyntax, "content after document root");
                return tree;
            }
            continue;
        }
        if (stack.empty()) raise(Errc::XmlSyntax, "content after document root");
        Frame& top = stack.back();

        if (tag.name == "fact") {
            if (top.elem != "w")
                raise(Errc::ShapeViolation, "<fact> must sit under <w>, at " + path_here());
            NodeId id = tree.add(top.id, Node{NodeKind::Fact, "fact", "", AggFn::Sum, "", ""});
            if (!tag.self_closing) stack.push_back({id, "fact", nullptr, -1});
        } else if (tag.name == "dim") {
            if (top.elem != "fact")
                raise(Errc::ShapeViolation, "<dim> must sit under <fact>, at " + path_here());
            const std::string& name = require_attr(tag, "name");
            const HierarchySchema* d = schemas.find_dim(name);
            if (!d)
                raise(Errc::ShapeViolation, "unknown dimension '" + name + "' at " + path_here());
            for (NodeId c : tree.children(top.id))
                if (tree.at(c).kind == NodeKind::Dimension && tree.at(c).label == name)
                    raise(Errc::ShapeViolation,
                          "duplicate dimension '" + name + "' under one fact at " + path_here());
            NodeId id = tree.add(top.id, Node{NodeKind::Dimension, name, "", AggFn::Sum, "", ""});
            if (!tag.self_closing) stack.push_back({id, "dim", d, -1});
        } else if (tag.name == "lvl") {
            if (top.elem != "dim" && top.elem != "lvl")
                raise(Errc::ShapeViolation, "<lvl> must sit under <dim> or <lvl>, at " + path_here());
            const HierarchySchema* d = top.dim;
            const std::string& name = require_attr(tag, "name");
            const std::string& value = require_attr(tag, "v");
            int idx = d->level_index(name);
            if (idx < 0)
                raise(Errc::ShapeViolation, "dimension '" + d->dimension + "' has no level '" +
                                                name + "' at " + path_here());
            if (top.elem == "lvl" && idx <= top.level_idx)
                raise(Errc::ShapeViolation, "level '" + name + "' does not roll up from '" +
                                                d->levels[top.level_idx].name + "' at " + path_here());
            if (!domain_admits(d->levels[idx].domain, value))
                raise(Errc::DomainViolation, "value '" + value + "' outside the domain of level '" +
                                                 name + "' at " + path_here());
            NodeId id = tree.add_level(top.id, name, value);
            if (!tag.self_closing) stack.push_back({id, "lvl", d, idx});
        } else if (tag.name == "msr") {
            if (top.elem != "fact")
                raise(Errc::ShapeViolation, "<msr> must sit under <fact>, at " + path_here());
            const std::string& name = require_attr(tag, "name");
            const std::string& value = require_attr(tag, "v");
            if (!schemas.has_measure(name))
                raise(Errc::ShapeViolation, "unknown measure '" + name + "' at " + path_here());
            auto num = Decimal::parse(value);
            if (!num)
                raise(Errc::DomainViolation,
                      "measure '" + name + "' value '" + value + "' is not a number");
            tree.add(top.id, Node{NodeKind::Measure, name, num->to_string(), AggFn::Sum, "", ""});
            if (!tag.self_closing) stack.push_back({(NodeId)(tree.nodes.size() - 1), "msr", nullptr, -1});
        } else if (tag.name == "agg") {
            if (top.elem != "fact")
                raise(Errc::ShapeViolation, "<agg> must sit under <fact>, at " + path_here());
            const std::string& fn_name = require_attr(tag, "fn");
            const std::string& measure = require_attr(tag, "measure");
            const std::string& value = require_attr(tag, "v");
            AggFn fn;
            if (fn_name == "sum") fn = AggFn::Sum;
            else if (fn_name == "count") fn = AggFn::Count;
            else if (fn_name == "min") fn = AggFn::Min;
            else if (fn_name == "max") fn = AggFn::Max;
            else if (fn_name == "avg") fn = AggFn::Avg;
            else raise(Errc::ShapeViolation, "unknown aggregate function '" + fn_name + "'");
            if (measure == "*") {
                if (fn != AggFn::Count)
                    raise(Errc::ShapeViolation, "'*' only aggregates with count");
            } else if (!schemas.has_measure(measure)) {
                raise(Errc::ShapeViolation, "unknown measure '" + measure + "' at " + path_here());
            }
            auto num = Decimal::parse(value);
            if (!num && !value.empty())  // empty means "no measure values in the group"
                raise(Errc::DomainViolation,
                      "aggregate value '" + value + "' is not a number");
            Node n{NodeKind::Aggregate, measure, num ? num->to_string() : "", fn, "", ""};
            if (fn == AggFn::Avg) {
                // Optional running state; without it the node cannot feed a
                // further avg stage.
                if (const std::string* s = tag.attr("sum")) {
                    auto sv = Decimal::parse(*s);
                    if (!sv) raise(Errc::DomainViolation, "avg sum state is not a number");
                    n.state_sum = sv->to_string();
                }
                if (const std::string* c = tag.attr("count")) {
                    auto cv = Decimal::parse(*c);
                    if (!cv || !cv->is_integer())
                        raise(Errc::DomainViolation, "avg count state is not an integer");
                    n.state_count = cv->to_string();
                }
            }
            tree.add(top.id, std::move(n));
            if (!tag.self_closing) stack.push_back({(NodeId)(tree.nodes.size() - 1), "agg", nullptr, -1});
        } else {
            raise(Errc::ShapeViolation, "unexpected element <" + tag.name + "> at " + path_here());
        }
    }
    raise(Errc::XmlSyntax, "unexpected end of input");
}

inline MDDataTree parse_warehouse(const std::string& text, const SchemaSet& schemas) {
    std::istringstream in(text);
    return parse_warehouse(in, schemas);
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------
//
// One element per line, no indentation, fixed attribute order, minimal
// escaping, trailing newline.  Structurally equal trees serialize to
// identical bytes, and parse(serialize(t)) reproduces t.

namespace xmldetail {

inline void escape_into(std::string& out, std::string_view v) {
    for (char c : v) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
}

inline void serialize_node(const MDDataTree& t, NodeId id, std::string& out) {
    const Node& n = t.at(id);
    bool leaf = t.children(id).empty();
    switch (n.kind) {
        case NodeKind::Warehouse:
            out += leaf ? "<w/" : "<w";
            break;
        case NodeKind::Fact:
            out += "<fact";
            break;
        case NodeKind::Dimension:
            out += "<dim name=\"";
            escape_into(out, n.label);
            out += '"';
            break;
        case NodeKind::HierarchyLevel:
            out += "<lvl name=\"";
            escape_into(out, n.label);
            out += "\" v=\"";
            escape_into(out, n.value);
            out += '"';
            break;
        case NodeKind::Measure:
            out += "<msr name=\"";
            escape_into(out, n.label);
            out += "\" v=\"";
            escape_into(out, n.value);
            out += '"';
            break;
        case NodeKind::Aggregate:
            out += "<agg fn=\"";
            out += agg_fn_name(n.fn);
            out += "\" measure=\"";
            escape_into(out, n.label);
            out += '"';
            if (n.fn == AggFn::Avg && !n.state_sum.empty()) {
                out += " sum=\"";
                escape_into(out, n.state_sum);
                out += "\" count=\"";
                escape_into(out, n.state_count);
                out += '"';
            }
            out += " v=\"";
            escape_into(out, n.value);
            out += '"';
            break;
    }
    if (leaf && n.kind != NodeKind::Warehouse) out += "/>\n";
    else if (leaf) out += ">\n";  // "<w/" already holds the slash
    else {
        out += ">\n";
        for (NodeId c : t.children(id)) serialize_node(t, c, out);
        out += "</";
        switch (n.kind) {
            case NodeKind::Warehouse: out += "w"; break;
            case NodeKind::Fact: out += "fact"; break;
            case NodeKind::Dimension: out += "dim"; break;
            case NodeKind::HierarchyLevel: out += "lvl"; break;
            case NodeKind::Measure: out += "msr"; break;
            case NodeKind::Aggregate: out += "agg"; break;
        }
        out += ">\n";
    }
}

}  // namespace xmldetail

inline std::string serialize_warehouse(const MDDataTree& t) {
    std::string out;
    xmldetail::serialize_node(t, t.root(), out);
    return out;
}

inline void serialize_warehouse(const MDDataTree& t, std::ostream& os) {
    os << serialize_warehouse(t);
}

}  // namespace xolap
