#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace xolap;

static Errc rollup_code(const MDDataTree& t, const std::vector<TreePatternQuery>& stages,
                        const SchemaSet& s) {
    try {
        rollup(t, stages, s);
    } catch (const Error& e) {
        return e.code;
    }
    FAIL("expected the roll-up to be rejected");
    return Errc::QuerySyntax;
}

TEST_CASE("chained roll-up equals direct grouping at the coarser level") {
    SchemaSet s = testutil::pm_schemas();
    MDDataTree t = testutil::pm_tree(s);
    TreePatternQuery q1 = testutil::pm_q1(s);
    TreePatternQuery q2 = testutil::pm_q2(s);

    MDDataTree chained = rollup(t, {q1, q2}, s);
    MDDataTree direct = qbs(t, q2, s);
    CHECK(serialize_warehouse(chained) == serialize_warehouse(direct));
    CHECK(same_rows(chained, q2, direct, q2));

    auto rows = sorted_rows(result_rows(chained, q2));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == GroupRow{{"I", "gamma"}, {"100"}});
    CHECK(rows[1] == GroupRow{{"I-II", "alpha"}, {"2500"}});
    CHECK(rows[2] == GroupRow{{"II", "beta"}, {"500"}});
}

TEST_CASE("a single-stage roll-up is just a grouping") {
    SchemaSet s = testutil::pm_schemas();
    MDDataTree t = testutil::pm_tree(s);
    TreePatternQuery q1 = testutil::pm_q1(s);
    CHECK(serialize_warehouse(rollup(t, {q1}, s)) == serialize_warehouse(qbs(t, q1, s)));
    CHECK_THROWS_AS(rollup(t, {}, s), Error);
}

TEST_CASE("stage transitions must stay coarser over grouped dimensions") {
    SchemaSet s = testutil::pm_schemas();
    MDDataTree t = testutil::pm_tree(s);
    TreePatternQuery q1 = testutil::pm_q1(s);
    TreePatternQuery q2 = testutil::pm_q2(s);

    // Regrouping finer than the previous stage.
    CHECK(rollup_code(t, {q2, q1}, s) == Errc::QuerySyntax);

    // Grouping a dimension the previous stage dropped.
    TreePatternQuery team_only = parse_query("group project-dim.Team\nagg sum(cost)\n", s);
    CHECK(rollup_code(t, {team_only, q2}, s) == Errc::QuerySyntax);

    // Asking for an aggregate the previous stage never produced.
    TreePatternQuery q2min = parse_query(
        "group project-dim.Branch\ngroup customer-dim.Customer\nagg min(cost)\n", s);
    CHECK(rollup_code(t, {q1, q2min}, s) == Errc::QuerySyntax);

    // Same level again is fine (coarser-or-equal).
    TreePatternQuery q1b = testutil::pm_q1(s);
    CHECK(serialize_warehouse(rollup(t, {q1, q1b}, s)) ==
          serialize_warehouse(qbs(qbs(t, q1, s), q1b, s)));
}

TEST_CASE("count(*) refolds by summing stored group counts") {
    SchemaSet s = testutil::pm_schemas();
    MDDataTree t = testutil::pm_tree(s);
    TreePatternQuery c1 = parse_query(
        "group project-dim.Team\ngroup customer-dim.Customer\nagg count(*)\nagg sum(cost)\n", s);
    TreePatternQuery c2 = parse_query(
        "group customer-dim.Customer\nagg count(*)\nagg sum(cost)\n", s);
    MDDataTree r = rollup(t, {c1, c2}, s);
    auto rows = sorted_rows(result_rows(r, c2));
    REQUIRE(rows.size() == 3);
    // alpha collects two stage-1 groups of one fact each.
    CHECK(rows[0] == GroupRow{{"alpha"}, {"2", "2500"}});
    CHECK(rows[1] == GroupRow{{"beta"}, {"1", "500"}});
    CHECK(rows[2] == GroupRow{{"gamma"}, {"1", "100"}});

    // count(*) in a later stage without it in the earlier stage fails at
    // fold time: the stored counts do not exist.
    TreePatternQuery c1_nocount = parse_query(
        "group project-dim.Team\ngroup customer-dim.Customer\nagg sum(cost)\n", s);
    CHECK(rollup_code(t, {c1_nocount, c2}, s) == Errc::NonReaggregable);
}

TEST_CASE("avg refolds exactly from carried state across stages") {
    SchemaSet s = testutil::pm_schemas();
    MDDataTree t = testutil::pm_tree(s);
    TreePatternQuery a1 = parse_query(
        "group project-dim.Team\ngroup customer-dim.Customer\nagg avg(cost)\n", s);
    TreePatternQuery a2 = parse_query("group customer-dim.Customer\nagg avg(cost)\n", s);
    MDDataTree r = rollup(t, {a1, a2}, s);
    auto rows = sorted_rows(result_rows(r, a2));
    REQUIRE(rows.size() == 3);
    // alpha: (1000 + 1500) / 2, not the average of the two stage averages.
    CHECK(rows[0] == GroupRow{{"alpha"}, {"1250"}});
    CHECK(rows[1] == GroupRow{{"beta"}, {"500"}});
    CHECK(rows[2] == GroupRow{{"gamma"}, {"100"}});

    // Without the carried state (aggregate parsed from a bare value), the
    // refold refuses instead of computing an average of averages.
    std::string stripped =
        "<w>\n<fact>\n<dim name=\"customer-dim\">\n<lvl name=\"Customer\" v=\"alpha\"/>\n</dim>\n"
        "<agg fn=\"avg\" measure=\"cost\" v=\"1250\"/>\n</fact>\n</w>\n";
    MDDataTree ts = parse_warehouse(stripped, s);
    try {
        qbs(ts, a2, s);
        FAIL("expected the stateless refold to be refused");
    } catch (const Error& e) {
        CHECK(e.code == Errc::NonReaggregable);
    }
}

TEST_CASE("three-stage chains compose") {
    SchemaSet s = testutil::pm_schemas();
    MDDataTree t = testutil::pm_tree(s);
    TreePatternQuery s1 = parse_query(
        "group project-dim.Team\ngroup customer-dim.Customer\nagg sum(cost)\nagg count(*)\n", s);
    TreePatternQuery s2 = parse_query(
        "group project-dim.Branch\ngroup customer-dim.Customer\nagg sum(cost)\nagg count(*)\n", s);
    TreePatternQuery s3 = parse_query("group customer-dim.Customer\nagg sum(cost)\nagg count(*)\n", s);

    std::vector<QbsStats> st;
    QbsOptions opt;
    MDDataTree r = rollup(t, {s1, s2, s3}, s, opt, &st);
    REQUIRE(st.size() == 3);
    CHECK(st[0].group_count == 4);
    CHECK(st[1].group_count == 3);
    CHECK(st[2].group_count == 3);

    auto rows = sorted_rows(result_rows(r, s3));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == GroupRow{{"alpha"}, {"2500", "2"}});
    CHECK(rows[1] == GroupRow{{"beta"}, {"500", "1"}});
    CHECK(rows[2] == GroupRow{{"gamma"}, {"100", "1"}});
}
