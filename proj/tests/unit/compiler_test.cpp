#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "cim/fixtures.hpp"
#include "cim/parser.hpp"
#include "support.hpp"

using namespace cim;

namespace {

struct Mini {
    CdlModel cdl;
    SdlModel sdl;
    MdlModel mdl;
};

/// Two levels A -> B over tables built from `tables`, mapped by `mappings`.
Mini mini(const std::string& levels, const std::string& tables, const std::string& mappings,
          const std::string& facts = "") {
    Mini m;
    m.cdl = parse_cdl("<cdlModel name=\"mini\"><levelSet>" + levels +
                      "</levelSet><dimensionSet><dimension name=\"D\" bottomLevel=\"A\"/></dimensionSet>"
                      "<hierarchySet><hierarchy name=\"H\"><parentChild child=\"A\" parent=\"B\"/></hierarchy></hierarchySet>" +
                      (facts.empty() ? "<factRelationshipSet/>" : facts) + "</cdlModel>");
    m.sdl = parse_sdl("<sdlModel name=\"mini\"><dimensionTableSet>" + tables + "</dimensionTableSet></sdlModel>");
    m.mdl = parse_mdl("<mdlModel>" + mappings + "</mdlModel>");
    return m;
}

const std::string kLevels =
    "<level name=\"A\"><property name=\"AID\" type=\"integer\"/><property name=\"AName\" type=\"string\"/>"
    "<property name=\"Extra\" type=\"string\"/><key property=\"AID\"/></level>"
    "<level name=\"B\"><property name=\"BID\" type=\"integer\"/><key property=\"BID\"/></level>";

std::string table(const std::string& name, const std::string& columns, const std::string& pk, const std::string& fks = "") {
    return "<table name=\"" + name + "\">" + columns + "<primaryKey><columnRef name=\"" + pk + "\"/></primaryKey>" + fks +
           "</table>";
}
std::string col(const std::string& name, const std::string& type = "integer") {
    return "<column name=\"" + name + "\" type=\"" + type + "\"/>";
}
std::string fk(const std::string& column, const std::string& target, const std::string& target_column) {
    return "<foreignKey table=\"" + target + "\"><columnRef name=\"" + column + "\" target=\"" + target_column +
           "\"/></foreignKey>";
}
std::string pm(const std::string& property, const std::string& column) {
    return "<property-mapping property=\"" + property + "\" column=\"" + column + "\"/>";
}
std::string level_map(const std::string& level, const std::string& t, const std::string& body) {
    return "<level-mapping level=\"" + level + "\" table=\"" + t + "\">" + body + "</level-mapping>";
}

std::set<std::string> codes(const CompileResult& r) {
    std::set<std::string> out;
    for (const auto& d : r.diagnostics) out.insert(d.code);
    return out;
}

Relation project_day(const Store& s) {
    return s.evaluate(Plan::scan("Day").project(std::vector<std::string>{"DayID", "Date", "DayOfWeek"}));
}

}  // namespace

TEST(Compiler, OneViewPerMappedElement) {
    const Session& s = test::olympic();
    const CdlModel& cdl = s.workspace.cdl;
    EXPECT_TRUE(s.compiled.diagnostics.empty());
    std::size_t expected = cdl.relationships().size() + cdl.factRelationships.size();
    for (const auto& l : cdl.levels) expected += !s.workspace.mdl.fragments_for(FragmentKind::Level, l.name).empty();
    EXPECT_EQ(s.compiled.views.size(), expected);
    EXPECT_EQ(expected, 26u);
    for (const auto& l : cdl.levels) EXPECT_NE(s.compiled.views.level(l.name), nullptr) << l.name;
    for (const auto& r : cdl.relationships()) EXPECT_NE(s.compiled.views.parent_child(r.child, r.parent), nullptr) << r.id();
    EXPECT_NE(s.compiled.views.fact("Attends"), nullptr);
}

TEST(Compiler, WeekendViewHoldsOnlyWeekendDays) {
    const Session& s = test::olympic();
    const ViewDefinition* v = s.compiled.views.level("Weekend");
    ASSERT_NE(v, nullptr);
    const Relation r = s.store.evaluate(v->body);
    const auto dow = *r.index_of("DayOfWeek");
    ASSERT_FALSE(r.rows.empty());
    for (const auto& row : r.rows) EXPECT_TRUE(row[dow] == Value("Sat") || row[dow] == Value("Sun"));
    EXPECT_EQ(r.rows.size(), 104u);  // 52 weekends between 2009-07-01 and 2010-07-01
}

TEST(Compiler, WeekdayAndWeekendPartitionDays) {
    const Session& s = test::olympic();
    const std::vector<std::string> cols = {"DayID", "Date", "DayOfWeek"};
    const Relation weekday = s.store.evaluate(s.compiled.views.level("Weekday")->body.project(cols));
    const Relation weekend = s.store.evaluate(s.compiled.views.level("Weekend")->body.project(cols));
    Relation both = weekday;
    both.rows.insert(both.rows.end(), weekend.rows.begin(), weekend.rows.end());
    EXPECT_TRUE(same_bag(both, project_day(s.store)));
}

TEST(Compiler, WeekdayKeepsUnmappedPropertyAsNull) {
    const Session& s = test::olympic();
    const ViewDefinition* v = s.compiled.views.level("Weekday");
    EXPECT_EQ(v->columns.back(), (Column{"Description", DataType::String}));
    const Relation r = s.store.evaluate(v->body);
    for (const auto& row : r.rows) EXPECT_TRUE(row.back().is_null());
}

TEST(Compiler, YearViewJoinsBothFragments) {
    const Session& s = test::olympic();
    const ViewDefinition* v = s.compiled.views.level("Year");
    EXPECT_EQ(v->fragments, (std::vector<std::string>{"Y1", "Y2"}));
    const Relation r = s.store.evaluate(v->body);
    const Relation expected = test::rel({{"YearID", DataType::Integer}, {"YearNumber", DataType::Integer}, {"Granularity", DataType::String}},
                                        {{Value(1), Value(2009), Value("W")}, {Value(2), Value(2010), Value("M")}});
    EXPECT_TRUE(same_bag(r, expected));
}

TEST(Compiler, WeekAndMonthSplitOneTable) {
    const Session& s = test::olympic();
    const auto weeks = s.store.evaluate(s.compiled.views.level("Week")->body).rows.size();
    const auto months = s.store.evaluate(s.compiled.views.level("Month")->body).rows.size();
    EXPECT_EQ(weeks + months, s.store.find("WeekMonth")->rows.size());
    EXPECT_EQ(months, 7u);
}

TEST(Compiler, ParentChildViewsLinkMembers) {
    const Session& s = test::olympic();
    const ViewDefinition* v = s.compiled.views.parent_child("Venue", "City");
    ASSERT_NE(v, nullptr);
    EXPECT_EQ(v->columns[0].name, "Venue.VenueID");
    EXPECT_EQ(v->columns[1].name, "City.CityID");
    EXPECT_EQ(s.store.evaluate(v->body).rows.size(), s.store.find("Venue")->rows.size());
    // Weekend days in 2009 roll up to weeks, in 2010 to months.
    const auto to_week = s.store.evaluate(s.compiled.views.parent_child("Weekend", "Week")->body).rows.size();
    const auto to_month = s.store.evaluate(s.compiled.views.parent_child("Weekend", "Month")->body).rows.size();
    EXPECT_EQ(to_week + to_month, 104u);
    EXPECT_GT(to_week, 0u);
    EXPECT_GT(to_month, 0u);
}

TEST(Compiler, FactViewHasRoleKeysMeasuresAndProperties) {
    const Session& s = test::olympic();
    const ViewDefinition* v = s.compiled.views.fact("Attends");
    std::vector<std::string> names;
    for (const auto& c : v->columns) names.push_back(c.name);
    EXPECT_EQ(names, (std::vector<std::string>{"Location.VenueID", "Date.DayID", "Event.EventID", "Attendee.AttendeeID",
                                                "TicketPrice", "Quantity", "Channel"}));
    EXPECT_EQ(s.store.evaluate(v->body).rows.size(), 10000u);
}

TEST(Compiler, MaterializedViewsAnswerTheSame) {
    const Session& s = test::olympic();
    ViewSet views = s.compiled.views;
    views.materialize(s.store);
    EXPECT_TRUE(views.materialized());
    for (const auto& v : views.views())
        EXPECT_TRUE(same_bag(s.store.evaluate(views.reference(v), views.overlay()), s.store.evaluate(v.body))) << v.target.id();
}

TEST(Compiler, ViewSetJsonShowsWeekendCondition) {
    const auto j = test::olympic().compiled.views.to_json();
    EXPECT_EQ(j.at("formatVersion"), 1);
    bool found = false;
    for (const auto& v : j.at("views")) {
        if (v.at("id") != "level:Weekend") continue;
        found = true;
        EXPECT_EQ(v.at("fragments"), nlohmann::json::array({"S2"}));
        const std::string body = v.at("body").dump();
        EXPECT_NE(body.find("\"Sat\""), std::string::npos);
        EXPECT_NE(body.find("\"Sun\""), std::string::npos);
    }
    EXPECT_TRUE(found);
}

TEST(Compiler, EmptyMappingReportsEveryLevel) {
    const Workspace& w = test::olympic().workspace;
    const CompileResult r = compile(w.cdl, w.sdl, MdlModel{});
    EXPECT_FALSE(r.ok());
    std::size_t unmapped = 0;
    for (const auto& d : r.diagnostics) {
        if (d.code != "unmapped-level") continue;
        ++unmapped;
        EXPECT_EQ(d.message.rfind("unmapped level", 0), 0u);
    }
    EXPECT_EQ(unmapped, w.cdl.levels.size());
    EXPECT_TRUE(r.views.empty());
    EXPECT_EQ(to_json(r.diagnostics).size(), r.diagnostics.size());
}

TEST(Compiler, PartialMappingCompilesTheRest) {
    const Workspace& w = test::olympic().workspace;
    MdlModel m = w.mdl;
    std::erase_if(m.fragments, [](const MappingFragment& f) { return f.entity == "Sport"; });
    const CompileResult r = compile(w.cdl, w.sdl, m);
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(r.views.level("Sport"), nullptr);
    EXPECT_EQ(r.views.parent_child("Event", "Sport"), nullptr);
    EXPECT_NE(r.views.level("Discipline"), nullptr);
    EXPECT_EQ(r.views.size(), 24u);
    EXPECT_TRUE(codes(r).count("unmapped-relationship"));
}

TEST(Compiler, RandomInstancesCompileCleanly) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto in = fixtures::generate_random_instance(seed);
        const CompileResult r = compile(in.cdl, in.sdl, in.mdl);
        EXPECT_TRUE(r.diagnostics.empty()) << seed;
        EXPECT_EQ(r.views.size(), in.cdl.levels.size() + in.cdl.relationships().size() + 1) << seed;
    }
}

TEST(Compiler, SomeFragmentMustMapTheKey) {
    const Mini m = mini(kLevels,
                        table("TA", col("ID") + col("Name", "string") + col("BID"), "ID", fk("BID", "TB", "ID")) +
                            table("TA2", col("ID") + col("Note", "string") + col("AID"), "ID", fk("AID", "TA", "ID")) +
                            table("TB", col("ID"), "ID"),
                        level_map("A", "TA", pm("AName", "Name")) + level_map("A", "TA2", pm("Extra", "Note")) +
                            level_map("B", "TB", pm("BID", "ID")));
    ASSERT_TRUE(validate_all(m.cdl, m.sdl, m.mdl).empty());
    EXPECT_TRUE(codes(compile(m.cdl, m.sdl, m.mdl)).count("unmapped-key"));
}

TEST(Compiler, OverlappingFragmentsAcrossTables) {
    const Mini m = mini(kLevels,
                        table("TA", col("ID") + col("Name", "string") + col("BID"), "ID", fk("BID", "TB", "ID")) +
                            table("TA2", col("ID") + col("Name", "string") + col("AID"), "ID", fk("AID", "TA", "ID")) +
                            table("TB", col("ID"), "ID"),
                        level_map("A", "TA", pm("AID", "ID") + pm("AName", "Name")) +
                            level_map("A", "TA2", pm("AName", "Name") + pm("Extra", "Name")) +
                            level_map("B", "TB", pm("BID", "ID")));
    ASSERT_TRUE(validate_all(m.cdl, m.sdl, m.mdl).empty());
    EXPECT_TRUE(codes(compile(m.cdl, m.sdl, m.mdl)).count("overlapping-fragments"));
}

TEST(Compiler, NoJoinPathBetweenFragments) {
    const Mini m = mini(kLevels,
                        table("TA", col("ID") + col("Name", "string") + col("BID"), "ID", fk("BID", "TB", "ID")) +
                            table("TX", col("ID") + col("Note", "string"), "ID") + table("TB", col("ID"), "ID"),
                        level_map("A", "TA", pm("AID", "ID") + pm("AName", "Name")) +
                            level_map("A", "TX", pm("Extra", "Note")) + level_map("B", "TB", pm("BID", "ID")));
    ASSERT_TRUE(validate_all(m.cdl, m.sdl, m.mdl).empty());
    const CompileResult r = compile(m.cdl, m.sdl, m.mdl);
    EXPECT_TRUE(codes(r).count("no-join-path"));
    EXPECT_EQ(r.views.level("A"), nullptr);
    EXPECT_NE(r.views.level("B"), nullptr);
}

TEST(Compiler, AmbiguousJoinPath) {
    // Two foreign keys from TA to TB: the parent-child view has two equally short paths.
    const Mini m = mini(kLevels,
                        table("TA", col("ID") + col("Name", "string") + col("B1") + col("B2"), "ID",
                              fk("B1", "TB", "ID") + fk("B2", "TB", "ID")) +
                            table("TB", col("ID"), "ID"),
                        level_map("A", "TA", pm("AID", "ID") + pm("AName", "Name")) + level_map("B", "TB", pm("BID", "ID")));
    ASSERT_TRUE(validate_all(m.cdl, m.sdl, m.mdl).empty());
    const CompileResult r = compile(m.cdl, m.sdl, m.mdl);
    EXPECT_TRUE(codes(r).count("ambiguous-join-path"));
    EXPECT_EQ(r.views.parent_child("A", "B"), nullptr);
}

TEST(Compiler, ParentChildOverSharedTable) {
    // Child and parent on one table: the relationship is read from a single scan.
    const Mini m = mini(kLevels, table("T", col("ID") + col("Name", "string") + col("Grp"), "ID"),
                        level_map("A", "T", pm("AID", "ID") + pm("AName", "Name")) + level_map("B", "T", pm("BID", "Grp")));
    ASSERT_TRUE(validate_all(m.cdl, m.sdl, m.mdl).empty());
    const CompileResult r = compile(m.cdl, m.sdl, m.mdl);
    ASSERT_TRUE(r.ok());
    Store s(m.sdl);
    s.load_table("T", "ID,Name,Grp\n1,a,7\n2,b,7\n3,c,8\n");
    s.freeze();
    const Relation pc = s.evaluate(r.views.parent_child("A", "B")->body);
    EXPECT_TRUE(same_bag(pc, test::rel({{"A.AID", DataType::Integer}, {"B.BID", DataType::Integer}},
                                       {{Value(1), Value(7)}, {Value(2), Value(7)}, {Value(3), Value(8)}})));
    EXPECT_EQ(s.evaluate(r.views.level("B")->body).rows.size(), 2u);
}
