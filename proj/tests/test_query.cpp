#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace xolap;

static Errc query_code(const std::string& text, const SchemaSet& s) {
    try {
        parse_query(text, s);
    } catch (const Error& e) {
        return e.code;
    }
    FAIL("expected the query to be rejected");
    return Errc::QuerySyntax;
}

TEST_CASE("query files parse into grouping elements and aggregations") {
    SchemaSet s = testutil::pm_schemas();
    TreePatternQuery q = testutil::pm_q1(s);
    REQUIRE(q.group_by.size() == 2);
    CHECK(q.group_by[0].dimension == "project-dim");
    CHECK(q.group_by[0].level == "Team");
    CHECK(q.group_by[1].dimension == "customer-dim");
    REQUIRE(q.aggregations.size() == 1);
    CHECK(q.aggregations[0].fn == AggFn::Sum);
    CHECK(q.aggregations[0].measure == "cost");
    CHECK(q.predicate == nullptr);
    CHECK_FALSE(q.pass_through);
}

TEST_CASE("parse and print round-trip, including predicates") {
    SchemaSet s = testutil::pm_schemas();
    std::string text =
        "group project-dim.Team\n"
        "agg sum(cost)\n"
        "agg count(*)\n"
        "agg avg(cost)\n"
        "where (project-dim.Project = \"A\" or cost >= 200) and not customer-dim.Customer != "
        "\"alpha\"\n"
        "retain on\n";
    TreePatternQuery q = parse_query(text, s);
    std::string printed = print_query(q);
    TreePatternQuery q2 = parse_query(printed, s);
    CHECK(q.equal(q2));
    CHECK(print_query(q2) == printed);

    // Unquoted literals and extra whitespace normalize to the same query.
    TreePatternQuery q3 = parse_query(
        "group project-dim.Team\nagg sum(cost)\nagg count(*)\nagg avg(cost)\n"
        "where ( project-dim.Project = A or cost>=200 ) and not customer-dim.Customer!=alpha\n"
        "retain on\n",
        s);
    CHECK(q3.equal(q));
}

TEST_CASE("boolean operators bind: not, then and, then or") {
    SchemaSet s = testutil::pm_schemas();
    auto parse_where = [&](const std::string& w) {
        return parse_query("group customer-dim.Customer\nagg count(*)\nwhere " + w + "\n", s);
    };
    TreePatternQuery q = parse_where("cost = 1 and cost = 2 or cost = 3");
    REQUIRE(q.predicate);
    CHECK(q.predicate->op == Formula::Op::Or);
    CHECK(q.predicate->lhs->op == Formula::Op::And);

    TreePatternQuery qn = parse_where("not cost = 1 and cost = 2");
    CHECK(qn.predicate->op == Formula::Op::And);
    CHECK(qn.predicate->lhs->op == Formula::Op::Not);

    TreePatternQuery qp = parse_where("cost = 1 and (cost = 2 or cost = 3)");
    CHECK(qp.predicate->op == Formula::Op::And);
    CHECK(qp.predicate->rhs->op == Formula::Op::Or);

    CHECK(parse_where("not not cost = 1").predicate->lhs->op == Formula::Op::Not);
}

TEST_CASE("queries are validated against the schema") {
    SchemaSet s = testutil::pm_schemas();
    CHECK(query_code("agg sum(cost)\n", s) == Errc::QuerySyntax);               // no group
    CHECK(query_code("group project-dim.Team\n", s) == Errc::QuerySyntax);      // no agg
    CHECK(query_code("group project-dim\nagg sum(cost)\n", s) == Errc::QuerySyntax);
    CHECK(query_code("group nope.Team\nagg sum(cost)\n", s) == Errc::UnknownName);
    CHECK(query_code("group project-dim.Floor\nagg sum(cost)\n", s) == Errc::UnknownLevel);
    CHECK(query_code("group project-dim.Team\ngroup project-dim.Branch\nagg sum(cost)\n", s) ==
          Errc::QuerySyntax);  // one dimension grouped twice
    CHECK(query_code("group project-dim.Team\nagg total(cost)\n", s) == Errc::QuerySyntax);
    CHECK(query_code("group project-dim.Team\nagg sum(price)\n", s) == Errc::UnknownName);
    CHECK(query_code("group project-dim.Team\nagg sum(*)\n", s) == Errc::QuerySyntax);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nagg sum(cost)\n", s) ==
          Errc::QuerySyntax);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nwhere cost = 1\nwhere cost = 2\n",
                     s) == Errc::QuerySyntax);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nwhere nope.Team = 1\n", s) ==
          Errc::UnknownPath);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nwhere project-dim.Floor = 1\n", s) ==
          Errc::UnknownPath);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nwhere price = 1\n", s) ==
          Errc::UnknownPath);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nwhere cost = \n", s) ==
          Errc::QuerySyntax);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nwhere cost ! 1\n", s) ==
          Errc::QuerySyntax);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nwhere (cost = 1\n", s) ==
          Errc::QuerySyntax);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nwhere cost = \"x\n", s) ==
          Errc::QuerySyntax);
    CHECK(query_code("group project-dim.Team\nagg sum(cost)\nretain maybe\n", s) ==
          Errc::QuerySyntax);
    CHECK(query_code("fetch project-dim.Team\nagg sum(cost)\n", s) == Errc::QuerySyntax);
    CHECK(query_code("group project-dim.Team extra\nagg sum(cost)\n", s) == Errc::QuerySyntax);
}

TEST_CASE("count(*) is the one aggregation without a measure") {
    SchemaSet s = testutil::pm_schemas();
    TreePatternQuery q = parse_query("group project-dim.Team\nagg count(*)\n", s);
    CHECK(q.aggregations[0].fn == AggFn::Count);
    CHECK(q.aggregations[0].measure == "*");
    CHECK(print_query(q) == "group project-dim.Team\nagg count(*)\n");
}

TEST_CASE("predicates evaluate over fact subtrees") {
    SchemaSet s = testutil::pm_schemas();
    MDDataTree t = testutil::pm_tree(s);
    auto facts = t.facts();
    auto holds = [&](const std::string& w, NodeId f) {
        TreePatternQuery q =
            parse_query("group customer-dim.Customer\nagg count(*)\nwhere " + w + "\n", s);
        return eval_formula(t, f, *q.predicate);
    };

    // Level equality is exact string match, found at any depth of the chain.
    CHECK(holds("project-dim.Project = \"A\"", facts[0]));
    CHECK_FALSE(holds("project-dim.Project = \"A\"", facts[1]));
    CHECK(holds("project-dim.Branch = \"II\"", facts[0]));   // via either Team chain
    CHECK(holds("project-dim.Branch = \"I\"", facts[3]));    // below the level skip
    CHECK_FALSE(holds("project-dim.Team = \"1\"", facts[3]));  // absent level never matches

    // Level ordering compares numerically when both sides are numbers.
    CHECK(holds("project-dim.Team >= \"3\"", facts[1]));
    CHECK_FALSE(holds("project-dim.Team >= \"3\"", facts[0]));
    CHECK(holds("customer-dim.Customer < \"beta\"", facts[0]));  // byte order fallback

    // Measures compare as numbers; non-numeric literals never hold.
    CHECK(holds("cost > 900", facts[0]));
    CHECK_FALSE(holds("cost > 1000", facts[0]));
    CHECK(holds("cost <= 100", facts[3]));
    CHECK_FALSE(holds("cost = abc", facts[0]));
    CHECK(holds("not cost = abc", facts[0]));

    // Equality on levels is not numeric: "01" is not "1".
    CHECK_FALSE(holds("project-dim.Team = \"01\"", facts[0]));
    CHECK(holds("project-dim.Team != \"01\"", facts[0]));
}

TEST_CASE("pattern matching selects whole facts") {
    SchemaSet s = testutil::pm_schemas();
    MDDataTree t = testutil::pm_tree(s);
    TreePatternQuery q = parse_query(
        "group customer-dim.Customer\nagg count(*)\n"
        "where customer-dim.Customer = \"alpha\" or cost < 200\n",
        s);
    MDDataTree sel = match_pattern(t, q, s);
    REQUIRE(sel.facts().size() == 3);  // facts 1, 2 (alpha) and 4 (cost 100)
    // Selection preserves full subtrees and document order.
    CHECK(sel.equal_subtree(sel.facts()[0], t, t.facts()[0]));
    CHECK(sel.equal_subtree(sel.facts()[2], t, t.facts()[3]));

    TreePatternQuery all = parse_query("group customer-dim.Customer\nagg count(*)\n", s);
    CHECK(match_pattern(t, all, s).facts().size() == 4);
}
