#include <gtest/gtest.h>

#include <algorithm>

#include "cim/fixtures.hpp"
#include "support.hpp"

using namespace cim;

namespace {

std::vector<std::string> codes(const std::vector<Diagnostic>& ds) {
    std::vector<std::string> out;
    for (const auto& d : ds) out.push_back(d.code);
    return out;
}

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code) {
    const auto c = codes(ds);
    return std::find(c.begin(), c.end(), code) != c.end();
}

Level* level(CdlModel& m, const std::string& name) {
    for (auto& l : m.levels)
        if (l.name == name) return &l;
    return nullptr;
}

}  // namespace

TEST(Validation, OlympicIsClean) {
    const Workspace& w = test::olympic().workspace;
    EXPECT_TRUE(validate_all(w.cdl, w.sdl, w.mdl).empty());
}

TEST(Validation, RandomInstancesAreClean) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto in = fixtures::generate_random_instance(seed);
        const auto ds = validate_all(in.cdl, in.sdl, in.mdl);
        EXPECT_TRUE(ds.empty()) << "seed " << seed << ": " << (ds.empty() ? "" : to_string(ds.front()));
    }
}

TEST(Validation, KeyMustBeAProperty) {
    CdlModel m = test::olympic().workspace.cdl;
    level(m, "Venue")->key = {"VenueNumber"};
    const auto ds = validate_cdl(m);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].code, "key-not-a-property");
    EXPECT_EQ(ds[0].path, "cdl/level[Venue]/key[VenueNumber]");
}

TEST(Validation, UnresolvedReferences) {
    CdlModel m = test::olympic().workspace.cdl;
    m.dimensions[0].bottomLevel = "Arena";
    m.factRelationships[0].roles[0].dimension = "Place";
    const auto ds = validate_cdl(m);
    EXPECT_TRUE(has_code(ds, "unresolved-bottom-level"));
    EXPECT_TRUE(has_code(ds, "unresolved-dimension"));
}

TEST(Validation, HierarchyCycle) {
    CdlModel m = test::olympic().workspace.cdl;
    for (auto& h : m.hierarchies)
        if (h.name == "Geography") h.relationships.push_back({"Country", "Venue", {1, true}, {1, false}, std::nullopt});
    EXPECT_TRUE(has_code(validate_cdl(m), "hierarchy-cycle"));
}

TEST(Validation, SingletonExclusiveGroup) {
    CdlModel m = test::olympic().workspace.cdl;
    for (auto& h : m.hierarchies)
        if (h.name == "Geography") h.relationships[0].exclusiveGroup = "Lonely";
    EXPECT_TRUE(has_code(validate_cdl(m), "singleton-exclusive-group"));
}

TEST(Validation, DuplicateLevelName) {
    CdlModel m = test::olympic().workspace.cdl;
    m.levels.push_back(m.levels.front());
    EXPECT_TRUE(has_code(validate_cdl(m), "duplicate-name"));
}

TEST(Validation, ForeignKeyToUnknownTable) {
    SdlModel s = test::olympic().workspace.sdl;
    s.factTables[0].foreignKeys[0].table = "Arena";
    EXPECT_TRUE(has_code(validate_sdl(s), "unknown-fk-table"));
}

TEST(Validation, MissingPrimaryKey) {
    SdlModel s = test::olympic().workspace.sdl;
    s.dimensionTables[0].primaryKey.clear();
    EXPECT_TRUE(has_code(validate_sdl(s), "missing-primary-key"));
}

TEST(Validation, MappingToUnknownColumn) {
    const Workspace& w = test::olympic().workspace;
    MdlModel m = w.mdl;
    m.fragments[0].propertyMappings[1].column = "Title";
    const auto ds = validate_mdl(w.cdl, w.sdl, m);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].code, "unknown-column");
}

TEST(Validation, MappingTypeMismatch) {
    const Workspace& w = test::olympic().workspace;
    MdlModel m = w.mdl;
    m.fragments[0].propertyMappings[1].column = "Capacity";  // string property onto integer column
    EXPECT_TRUE(has_code(validate_mdl(w.cdl, w.sdl, m), "type-mismatch"));
}

TEST(Validation, ConditionValueMustFitColumn) {
    const Workspace& w = test::olympic().workspace;
    MdlModel m = w.mdl;
    for (auto& f : m.fragments)
        if (f.table == "Venue") f.conditions.push_back({"Capacity", ConditionOp::Equals, {"large"}});
    EXPECT_TRUE(has_code(validate_mdl(w.cdl, w.sdl, m), "condition-type-mismatch"));
}

TEST(Validation, RoleMappingMustNameBottomKey) {
    const Workspace& w = test::olympic().workspace;
    MdlModel m = w.mdl;
    for (auto& f : m.fragments)
        if (f.kind == FragmentKind::FactRelationship) f.propertyMappings[0].property = "Capacity";
    EXPECT_TRUE(has_code(validate_mdl(w.cdl, w.sdl, m), "unknown-property"));
}

TEST(Validation, UnknownMappedEntity) {
    const Workspace& w = test::olympic().workspace;
    MdlModel m = w.mdl;
    m.fragments[0].entity = "Stadium";
    EXPECT_TRUE(has_code(validate_mdl(w.cdl, w.sdl, m), "unknown-entity"));
}

TEST(Validation, MappingChecksSkippedWhenModelsAreBroken) {
    const Workspace& w = test::olympic().workspace;
    CdlModel c = w.cdl;
    c.levels.push_back(c.levels.front());
    MdlModel m = w.mdl;
    m.fragments[0].entity = "Stadium";
    const auto ds = validate_all(c, w.sdl, m);
    EXPECT_TRUE(has_code(ds, "duplicate-name"));
    EXPECT_FALSE(has_code(ds, "unknown-entity"));
}

TEST(Model, ImplicitHierarchyReachesEverythingAboveBottom) {
    const CdlModel& m = test::olympic().workspace.cdl;
    EXPECT_EQ(m.dimension_relationships(*m.find_dimension("Date")).size(), 8u);
    EXPECT_EQ(m.dimension_relationships(*m.find_dimension("Location")).size(), 2u);
    EXPECT_TRUE(m.dimension_relationships(*m.find_dimension("Attendee")).empty());
    EXPECT_EQ(m.dimension_relationships(*m.find_dimension("Event")).size(), 2u);
    EXPECT_EQ(m.exclusive_group("WeekOrMonth").size(), 4u);
}
