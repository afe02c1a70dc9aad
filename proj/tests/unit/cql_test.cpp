#include <gtest/gtest.h>

#include <random>

#include "cim/errors.hpp"
#include "cim/fixtures.hpp"
#include "cim/query.hpp"

using namespace cim;

namespace {

const char* kWhistlerQuery =
    "AGGREGATE sum(TicketPrice) FROM Attends ROLLUP Date TO Weekend WHERE Venue.name = \"Whistler Olympic Park\"";

}  // namespace

TEST(Cql, ParsesTheWeekendQuery) {
    const CqlQuery q = parse_cql(kWhistlerQuery);
    EXPECT_EQ(q.factRelationship, "Attends");
    EXPECT_EQ(q.aggregation.fn, AggregateFn::Sum);
    EXPECT_EQ(q.aggregation.measure, "TicketPrice");
    EXPECT_EQ(q.rollups, (std::map<std::string, std::string>{{"Date", "Weekend"}}));
    ASSERT_EQ(q.conditions.size(), 1u);
    EXPECT_EQ(q.conditions[0], (QueryCondition{"Venue", "name", CompareOp::Equals, {Value("Whistler Olympic Park")}}));
}

TEST(Cql, KeywordsAreCaseInsensitive) {
    const CqlQuery q = parse_cql("aggregate COUNT() from Attends rollup Location to City where City.CityName in (\"A\", \"B\") and Venue.Capacity > 10");
    EXPECT_EQ(q.aggregation.fn, AggregateFn::Count);
    EXPECT_TRUE(q.aggregation.measure.empty());
    ASSERT_EQ(q.conditions.size(), 2u);
    EXPECT_EQ(q.conditions[0].op, CompareOp::In);
    EXPECT_EQ(q.conditions[0].values.size(), 2u);
    EXPECT_EQ(q.conditions[1].op, CompareOp::Greater);
    EXPECT_EQ(q.conditions[1].values[0], Value(10));
}

TEST(Cql, LiteralKinds) {
    const CqlQuery q = parse_cql(
        "AGGREGATE max(Quantity) FROM F WHERE L.a = -3 AND L.b = 2.50 AND L.c = TRUE AND L.d < \"say \\\"hi\\\"\"");
    EXPECT_EQ(q.conditions[0].values[0], Value(-3));
    EXPECT_EQ(q.conditions[1].values[0], Value(*Decimal::parse("2.5")));
    EXPECT_EQ(q.conditions[2].values[0], Value(true));
    EXPECT_EQ(q.conditions[3].values[0], Value("say \"hi\""));
}

TEST(Cql, SyntaxErrorsCarryPositions) {
    auto position = [](const std::string& text) {
        try {
            parse_cql(text);
        } catch (const ParseError& e) {
            return std::pair(e.line, e.column);
        }
        return std::pair<std::size_t, std::size_t>(0, 0);
    };
    using Pos = std::pair<std::size_t, std::size_t>;
    EXPECT_EQ(position("AGGREGATE sum(TicketPrice) FORM Attends" ), Pos(1, 28));
    EXPECT_EQ(position("AGGREGATE sum(TicketPrice)\nFROM Attends\nWHERE Venue.name = " ), Pos(3, 20));
    EXPECT_EQ(position("AGGREGATE median(X) FROM F" ), Pos(1, 11));
    EXPECT_EQ(position("AGGREGATE sum(X) FROM F WHERE L.p = \"open" ), Pos(1, 37));
    EXPECT_EQ(position("AGGREGATE sum(X) FROM F ROLLUP D TO A ROLLUP D TO B" ), Pos(1, 46));
    EXPECT_EQ(position("AGGREGATE sum(X) FROM F trailing" ), Pos(1, 25));
    EXPECT_EQ(position("AGGREGATE sum(X) FROM F WHERE L.p ! 3" ), Pos(1, 35));
}

TEST(Cql, TextRoundTrip) {
    const CqlQuery q = parse_cql(kWhistlerQuery);
    EXPECT_EQ(parse_cql(q.to_text()), q);
    EXPECT_EQ(q.to_text(), kWhistlerQuery);
}

TEST(Cql, JsonRoundTrip) {
    const CqlQuery q = parse_cql("AGGREGATE avg(TicketPrice) FROM Attends ROLLUP Date TO Month ROLLUP Location TO Country "
                                 "WHERE Month.MonthNumber IN (1, 2) AND Country.Code = \"CAN\"");
    EXPECT_EQ(CqlQuery::from_json(q.to_json()), q);
    EXPECT_EQ(CqlQuery::from_json(nlohmann::json::parse(q.to_json().dump())), q);
}

TEST(Cql, RandomQueriesRoundTripThroughTextAndJson) {
    std::mt19937_64 rng(11);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto in = fixtures::generate_random_instance(seed);
        for (int k = 0; k < 10; ++k) {
            const CqlQuery q = fixtures::random_query(in, rng);
            const CqlQuery via_text = parse_cql(q.to_text());
            EXPECT_EQ(via_text.to_text(), q.to_text());
            const CqlQuery via_json = CqlQuery::from_json(q.to_json());
            EXPECT_EQ(via_json.to_json(), q.to_json());
        }
    }
}

TEST(Cql, JsonDecodingIsStrict) {
    const auto ok = parse_cql(kWhistlerQuery).to_json();
    auto broken = [&](auto edit) {
        nlohmann::json j = ok;
        edit(j);
        try {
            CqlQuery::from_json(j);
        } catch (const QueryError& e) {
            return e.code;
        }
        return std::string("accepted");
    };
    EXPECT_EQ(broken([](auto& j) { j.erase("factRelationship"); }), "invalid-query");
    EXPECT_EQ(broken([](auto& j) { j["factRelationship"] = 3; }), "invalid-query");
    EXPECT_EQ(broken([](auto& j) { j["colour"] = "red"; }), "invalid-query");
    EXPECT_EQ(broken([](auto& j) { j["aggregation"]["function"] = "median"; }), "invalid-query");
    EXPECT_EQ(broken([](auto& j) { j["conditions"][0]["operator"] = "like"; }), "invalid-query");
    EXPECT_EQ(broken([](auto& j) { j["rollups"] = nlohmann::json::array(); }), "invalid-query");
    EXPECT_EQ(broken([](auto& j) { j = nlohmann::json::array(); }), "invalid-query");
    EXPECT_EQ(broken([](auto&) {}), "accepted");
}

TEST(Cql, JsonNumbersBecomeExactLiterals) {
    nlohmann::json j = parse_cql(kWhistlerQuery).to_json();
    j["conditions"][0]["values"] = nlohmann::json::parse("[12.75]");
    EXPECT_EQ(CqlQuery::from_json(j).conditions[0].values[0], Value(*Decimal::parse("12.75")));
    j["conditions"][0]["values"] = nlohmann::json::parse("[12]");
    EXPECT_EQ(CqlQuery::from_json(j).conditions[0].values[0], Value(12));
}

TEST(Cql, NameLikeProperties) {
    EXPECT_TRUE(is_name_like("name"));
    EXPECT_TRUE(is_name_like("NAME"));
    EXPECT_TRUE(is_name_like("CityName"));
    EXPECT_FALSE(is_name_like("Named"));
    EXPECT_FALSE(is_name_like("Name2"));
    EXPECT_FALSE(is_name_like("Capacity"));
}

TEST(Cql, SuggestionsRankByEditDistance) {
    const std::vector<std::string> pool = {"TicketPrice", "Quantity", "Channel"};
    EXPECT_EQ(suggest("TicketPrise", pool), (std::vector<std::string>{"TicketPrice"}));
    EXPECT_EQ(suggest("ticketprice", pool), (std::vector<std::string>{"TicketPrice"}));
    EXPECT_TRUE(suggest("Zebra", pool).empty());
}
