#include <gtest/gtest.h>

#include "cim/fixtures.hpp"
#include "cim/parser.hpp"
#include "support.hpp"

using namespace cim;

namespace {

Store load(const std::map<std::string, std::string>& csv) {
    const SdlModel& sdl = test::olympic().workspace.sdl;
    Store s(sdl);
    for (const auto& [table, text] : csv) s.load_table(table, text);
    s.freeze();
    return s;
}

}  // namespace

TEST(OlympicData, DeterministicPerSeed) {
    EXPECT_EQ(fixtures::generate_olympic_data(5, 300), fixtures::generate_olympic_data(5, 300));
    EXPECT_NE(fixtures::generate_olympic_data(5, 300).at("Attends"), fixtures::generate_olympic_data(6, 300).at("Attends"));
}

TEST(OlympicData, ShippedCsvMatchesGenerator) {
    const auto generated = fixtures::generate_olympic_data(2010, 10000);
    for (const auto& [table, text] : generated)
        EXPECT_EQ(read_file(test::olympic().workspace.manifest.data / (table + ".csv")), text) << table;
}

TEST(OlympicData, ScaleIsTheFactCount) {
    const Store s = load(fixtures::generate_olympic_data(1, 1234));
    EXPECT_EQ(s.find("Attends")->rows.size(), 1234u);
    EXPECT_TRUE(s.check_foreign_keys(s.sdl()).empty());
}

TEST(OlympicData, ScaleZeroKeepsDimensions) {
    const Store s = load(fixtures::generate_olympic_data(1, 0));
    EXPECT_TRUE(s.find("Attends")->rows.empty());
    EXPECT_EQ(s.find("Day")->rows.size(), 366u);
    EXPECT_FALSE(s.find("Venue")->rows.empty());
}

TEST(OlympicData, CalendarShape) {
    const Store& s = test::olympic().store;
    const Relation& day = *s.find("Day");
    EXPECT_EQ(day.rows.front()[1], Value(Date::from_ymd(2009, 7, 1)));
    EXPECT_EQ(day.rows.back()[1], Value(Date::from_ymd(2010, 7, 1)));
    std::size_t weekend = 0;
    for (const auto& row : day.rows) {
        const auto dow = row[2].as<std::string>();
        EXPECT_EQ(dow, std::vector<std::string>({"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"})[row[1].as<Date>().weekday()]);
        weekend += dow == "Sat" || dow == "Sun";
    }
    EXPECT_EQ(weekend, 104u);
    bool whistler = false;
    for (const auto& row : s.find("Venue")->rows) whistler |= row[1] == Value(fixtures::kWhistler);
    EXPECT_TRUE(whistler);
}

TEST(OlympicData, EventSportAgreesWithDiscipline) {
    const Store& s = test::olympic().store;
    std::map<Value, Value> sport_of;
    for (const auto& row : s.find("Discipline")->rows) sport_of[row[0]] = row[2];
    for (const auto& row : s.find("Event")->rows) EXPECT_EQ(sport_of.at(row[3]), row[4]);
}

TEST(RandomInstance, ReplayIsIdentical) {
    const auto a = fixtures::generate_random_instance(99);
    const auto b = fixtures::generate_random_instance(99);
    EXPECT_EQ(serialize(a.cdl), serialize(b.cdl));
    EXPECT_EQ(serialize(a.sdl), serialize(b.sdl));
    EXPECT_EQ(serialize(a.mdl), serialize(b.mdl));
    EXPECT_EQ(a.csv(), b.csv());
}

TEST(RandomInstance, RespectsSizeBounds) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto in = fixtures::generate_random_instance(seed);
        EXPECT_GE(in.cdl.dimensions.size(), 2u);
        EXPECT_LE(in.cdl.dimensions.size(), 3u);
        for (const auto& d : in.cdl.dimensions) {
            std::set<std::string> levels{d.bottomLevel};
            for (const auto& r : in.cdl.dimension_relationships(d)) levels.insert(r.parent);
            EXPECT_LE(levels.size(), 5u) << seed;
        }
    }
}

TEST(RandomInstance, ExerciseTheInterestingShapes) {
    std::size_t exclusive = 0;
    std::size_t multi_table = 0;
    std::size_t explicit_roles = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto in = fixtures::generate_random_instance(seed);
        bool ex = false;
        for (const auto& r : in.cdl.relationships()) ex |= r.exclusiveGroup.has_value();
        exclusive += ex;
        std::map<std::string, int> per_level;
        for (const auto& f : in.mdl.fragments) {
            if (f.kind == FragmentKind::Level) ++per_level[f.entity];
            for (const auto& pm : f.propertyMappings) explicit_roles += !pm.role.empty();
        }
        for (const auto& [_, n] : per_level) multi_table += n > 1;
    }
    EXPECT_GT(exclusive, 30u);
    EXPECT_GT(multi_table, 20u);
    EXPECT_GT(explicit_roles, 50u);
}
