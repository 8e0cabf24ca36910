#include <catch_amalgamated.hpp>

#include "xolap/decimal.hpp"

using xolap::Decimal;

static std::string parse_str(const std::string& s) {
    auto d = Decimal::parse(s);
    REQUIRE(d.has_value());
    return d->to_string();
}

TEST_CASE("decimal parses and canonicalizes") {
    CHECK(parse_str("0") == "0");
    CHECK(parse_str("-0") == "0");
    CHECK(parse_str("0.0") == "0");
    CHECK(parse_str("1000") == "1000");
    CHECK(parse_str("1.50") == "1.5");
    CHECK(parse_str("-0.5") == "-0.5");
    CHECK(parse_str("05") == "5");
    CHECK(parse_str("123.456") == "123.456");
    CHECK(parse_str("0.000001") == "0.000001");
    CHECK(parse_str("999999999999999999999999999999") == "999999999999999999999999999999");
}

TEST_CASE("decimal rejects malformed text") {
    CHECK_FALSE(Decimal::parse("").has_value());
    CHECK_FALSE(Decimal::parse("-").has_value());
    CHECK_FALSE(Decimal::parse("1.").has_value());
    CHECK_FALSE(Decimal::parse(".5").has_value());
    CHECK_FALSE(Decimal::parse("1.2.3").has_value());
    CHECK_FALSE(Decimal::parse("1e5").has_value());
    CHECK_FALSE(Decimal::parse("+1").has_value());
    CHECK_FALSE(Decimal::parse("1 0").has_value());
    CHECK_FALSE(Decimal::parse("abc").has_value());
    CHECK_FALSE(Decimal::parse("1234567890123456789012345678901").has_value());  // 31 digits
}

TEST_CASE("decimal addition is exact across scales") {
    auto add = [](const std::string& a, const std::string& b) {
        return Decimal::parse(a)->plus(*Decimal::parse(b)).to_string();
    };
    CHECK(add("1", "2") == "3");
    CHECK(add("0.1", "0.2") == "0.3");
    CHECK(add("1.05", "2.95") == "4");
    CHECK(add("-1.5", "1.5") == "0");
    CHECK(add("1000000000000000", "0.000000000000001") == "1000000000000000.000000000000001");
    CHECK(add("-0.3", "0.1") == "-0.2");
}

TEST_CASE("decimal comparison aligns scales") {
    auto cmp = [](const std::string& a, const std::string& b) {
        return Decimal::parse(a)->cmp(*Decimal::parse(b));
    };
    CHECK(cmp("1.5", "1.50") == 0);
    CHECK(cmp("2", "10") == -1);  // numeric, not lexicographic
    CHECK(cmp("-1", "1") == -1);
    CHECK(cmp("0.999", "1") == -1);
    CHECK(cmp("100", "99.9999") == 1);
    CHECK(Decimal::parse("42")->is_integer());
    CHECK_FALSE(Decimal::parse("42.5")->is_integer());
    CHECK(Decimal::parse("0.0")->is_zero());
}

TEST_CASE("decimal division rounds half-even at 12 significant digits") {
    auto div = [](const std::string& a, const std::string& b) {
        return Decimal::divide(*Decimal::parse(a), *Decimal::parse(b)).to_string();
    };
    CHECK(div("1000", "4") == "250");
    CHECK(div("2000", "2") == "1000");
    CHECK(div("1", "8") == "0.125");
    CHECK(div("25", "2") == "12.5");
    CHECK(div("1", "3") == "0.333333333333");
    CHECK(div("2", "3") == "0.666666666667");
    CHECK(div("-1", "3") == "-0.333333333333");
    CHECK(div("1", "-3") == "-0.333333333333");
    CHECK(div("0", "7") == "0");
    // Exact ties land on the even neighbor.
    CHECK(div("1000000000005", "1000000000000") == "1");
    CHECK(div("1000000000015", "1000000000000") == "1.00000000002");
    // Very small and very large quotients keep 12 significant digits.
    CHECK(div("1", "300") == "0.00333333333333");
    CHECK(div("1000000", "3") == "333333.333333");
}

TEST_CASE("decimal division carry propagates into an extra digit") {
    // 9.999999999999... rounds up to 10 and must not keep 13 digits.
    auto r = Decimal::divide(*Decimal::parse("999999999999999"), *Decimal::parse("100000000000000"));
    CHECK(r.to_string() == "10");
}
