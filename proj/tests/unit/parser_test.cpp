#include <gtest/gtest.h>

#include <algorithm>

#include "cim/errors.hpp"
#include "cim/fixtures.hpp"
#include "cim/parser.hpp"
#include "support.hpp"

using namespace cim;

namespace {

std::string wrap_cdl(const std::string& body) {
    return "<cdlModel name=\"M\">" + body + "<dimensionSet/><factRelationshipSet/></cdlModel>";
}

}  // namespace

TEST(Parser, ReadsOlympicCdl) {
    const CdlModel& m = test::olympic().workspace.cdl;
    EXPECT_EQ(m.name, "Olympics");
    EXPECT_EQ(m.levels.size(), 13u);
    EXPECT_EQ(m.dimensions.size(), 4u);
    const ParentChildRel* city = m.find_relationship("City", "Country");
    ASSERT_NE(city, nullptr);
    EXPECT_EQ(city->childCard.to_string(), "(1,n)");
    EXPECT_EQ(city->parentCard.to_string(), "(1,1)");
    const ParentChildRel* weekend = m.find_relationship("Day", "Weekend");
    ASSERT_NE(weekend, nullptr);
    EXPECT_EQ(weekend->exclusiveGroup, "DayKind");
    EXPECT_EQ(m.find_fact("Attends")->find_measure("TicketPrice")->type, DataType::Decimal);
}

TEST(Parser, ReadsOlympicMappingConditions) {
    const MdlModel& m = test::olympic().workspace.mdl;
    const auto weekend = m.fragments_for(FragmentKind::Level, "Weekend");
    ASSERT_EQ(weekend.size(), 1u);
    EXPECT_EQ(weekend[0]->name, "S2");
    ASSERT_EQ(weekend[0]->conditions.size(), 1u);
    EXPECT_EQ(weekend[0]->conditions[0].values, (std::vector<std::string>{"Sat", "Sun"}));
    EXPECT_EQ(condition_label(weekend[0]->conditions[0]), "DayOfWeek ∈ {Sat,Sun}");
    EXPECT_EQ(m.fragments_for(FragmentKind::Level, "Year").size(), 2u);
}

TEST(Parser, OlympicRoundTrips) {
    const Workspace& w = test::olympic().workspace;
    EXPECT_TRUE(equivalent(parse_cdl(serialize(w.cdl)), w.cdl));
    EXPECT_TRUE(equivalent(parse_sdl(serialize(w.sdl)), w.sdl));
    EXPECT_TRUE(equivalent(parse_mdl(serialize(w.mdl)), w.mdl));
}

TEST(Parser, RandomInstancesRoundTrip) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto in = fixtures::generate_random_instance(seed);
        EXPECT_TRUE(equivalent(parse_cdl(serialize(in.cdl)), in.cdl)) << seed;
        EXPECT_TRUE(equivalent(parse_sdl(serialize(in.sdl)), in.sdl)) << seed;
        EXPECT_TRUE(equivalent(parse_mdl(serialize(in.mdl)), in.mdl)) << seed;
    }
}

TEST(Parser, SerializationIsAFixedPoint) {
    const Workspace& w = test::olympic().workspace;
    const std::string once = serialize(w.cdl);
    EXPECT_EQ(serialize(parse_cdl(once)), once);
}

TEST(Parser, EquivalenceIgnoresSetOrder) {
    CdlModel a = test::olympic().workspace.cdl;
    CdlModel b = a;
    std::reverse(b.levels.begin(), b.levels.end());
    EXPECT_TRUE(equivalent(a, b));
    b.levels.pop_back();
    EXPECT_FALSE(equivalent(a, b));
}

TEST(Parser, MalformedXmlReportsPosition) {
    try {
        parse_cdl("<cdlModel name=\"M\">\n  <levelSet>\n</cdlModel>");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 3u);
    }
}

TEST(Parser, StrictModeRejectsUnknownElements) {
    const std::string doc = wrap_cdl("<levelSet><level name=\"A\"><color/></level></levelSet>");
    EXPECT_THROW(parse_cdl(doc), ParseError);
    EXPECT_NO_THROW(parse_cdl(doc, ParseOptions{false}));
}

TEST(Parser, RejectsBadCardinality) {
    const std::string doc = wrap_cdl(
        "<hierarchySet><hierarchy name=\"H\"><parentChild child=\"A\" parent=\"B\" childCard=\"(2,n)\" "
        "parentCard=\"(1,1)\"/></hierarchy></hierarchySet>");
    EXPECT_THROW(parse_cdl(doc), ParseError);
}

TEST(Parser, RejectsWrongRootElement) {
    EXPECT_THROW(parse_cdl("<sdlModel name=\"x\"/>"), ParseError);
    EXPECT_THROW(parse_sdl(""), ParseError);
}

TEST(Parser, CardinalityParsing) {
    EXPECT_EQ(Cardinality::parse("(0,n)")->to_string(), "(0,n)");
    EXPECT_EQ(Cardinality::parse("(1,1)")->to_string(), "(1,1)");
    EXPECT_FALSE(Cardinality::parse("(1,2)"));
    EXPECT_TRUE(Cardinality::parse("(1,n)")->admits(5));
    EXPECT_FALSE(Cardinality::parse("(1,1)")->admits(2));
    EXPECT_FALSE(Cardinality::parse("(1,1)")->admits(0));
    EXPECT_TRUE(Cardinality::parse("(0,1)")->admits(0));
}

TEST(Graph, ExportsCityToCountryEdge) {
    const Workspace& w = test::olympic().workspace;
    const auto g = export_graph_json(w.cdl, w.sdl, w.mdl);
    bool found = false;
    for (const auto& e : g.at("edges"))
        if (e.at("kind") == "parentChild" && e.at("source") == "level:City" && e.at("target") == "level:Country")
            found = e.at("label") == "(1,n)-(1,1)";
    EXPECT_TRUE(found);
}
