#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cim/value.hpp"

namespace cim {

// ============================================================================
// Diagnostics
// ============================================================================

enum class Severity { Error, Warning };

struct Diagnostic {
    std::string code;     ///< stable kebab-case identifier, e.g. "key-not-a-property"
    Severity severity = Severity::Error;
    std::string path;     ///< offending element, e.g. "cdl/level[Venue]/key[VenueID]"
    std::string message;

    friend auto operator<=>(const Diagnostic&, const Diagnostic&) = default;
};

std::string to_string(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

// ============================================================================
// Conceptual model (CDL)
// ============================================================================

struct Property {
    std::string name;
    DataType type = DataType::String;

    friend bool operator==(const Property&, const Property&) = default;
};

struct Level {
    std::string name;
    std::vector<Property> properties;
    std::vector<std::string> key;

    const Property* find_property(std::string_view property) const;
    friend bool operator==(const Level&, const Level&) = default;
};

/// Participation bound `(min,max)` with min in {0,1} and max in {1,n}.
struct Cardinality {
    unsigned min = 1;
    bool many = false;

    std::string to_string() const;
    static std::optional<Cardinality> parse(std::string_view text);
    bool admits(std::size_t count) const { return count >= min && (many || count <= 1); }
    friend bool operator==(const Cardinality&, const Cardinality&) = default;
};

/// `childCard` bounds the children per parent, `parentCard` the parents per child.
/// "City (1,n) to (1,1) Country" is childCard=(1,n), parentCard=(1,1).
struct ParentChildRel {
    std::string child;
    std::string parent;
    Cardinality childCard{1, true};
    Cardinality parentCard{1, false};
    std::optional<std::string> exclusiveGroup;

    /// "Child->Parent"; unique per model.
    std::string id() const { return child + "->" + parent; }
    friend bool operator==(const ParentChildRel&, const ParentChildRel&) = default;
};

struct Hierarchy {
    std::string name;
    std::vector<ParentChildRel> relationships;

    friend bool operator==(const Hierarchy&, const Hierarchy&) = default;
};

struct Dimension {
    std::string name;
    std::string bottomLevel;
    /// Empty means the implicit hierarchy: every relationship reachable from bottomLevel.
    std::vector<std::string> hierarchies;

    friend bool operator==(const Dimension&, const Dimension&) = default;
};

struct Role {
    std::string name;
    std::string dimension;

    friend bool operator==(const Role&, const Role&) = default;
};

struct FactRelationship {
    std::string name;
    std::vector<Role> roles;
    std::vector<Property> measures;
    std::vector<Property> properties;

    const Role* find_role(std::string_view role) const;
    const Role* role_for_dimension(std::string_view dimension) const;
    const Property* find_measure(std::string_view measure) const;
    /// Measure or property.
    const Property* find_attribute(std::string_view name) const;
    friend bool operator==(const FactRelationship&, const FactRelationship&) = default;
};

struct CdlModel {
    std::string name;
    std::vector<Level> levels;
    std::vector<Dimension> dimensions;
    std::vector<Hierarchy> hierarchies;
    std::vector<FactRelationship> factRelationships;

    const Level* find_level(std::string_view level) const;
    const Dimension* find_dimension(std::string_view dimension) const;
    const Hierarchy* find_hierarchy(std::string_view hierarchy) const;
    const FactRelationship* find_fact(std::string_view fact) const;

    /// Distinct parent-child relationships across all hierarchies, first declaration wins.
    std::vector<ParentChildRel> relationships() const;
    const ParentChildRel* find_relationship(std::string_view child, std::string_view parent) const;
    /// Relationships usable for roll-up in `dimension`: those of its listed
    /// hierarchies, or (implicit hierarchy) all relationships reachable from its bottom level.
    std::vector<ParentChildRel> dimension_relationships(const Dimension& dimension) const;
    /// Relationships that share `group`.
    std::vector<ParentChildRel> exclusive_group(std::string_view group) const;
};

// ============================================================================
// Store model (SDL)
// ============================================================================

struct Column {
    std::string name;
    DataType type = DataType::String;

    friend bool operator==(const Column&, const Column&) = default;
};

struct ForeignKey {
    std::vector<std::string> columns;
    std::string table;
    std::vector<std::string> targetColumns;

    friend bool operator==(const ForeignKey&, const ForeignKey&) = default;
};

struct Table {
    std::string name;
    std::vector<Column> columns;
    std::vector<std::string> primaryKey;
    std::vector<ForeignKey> foreignKeys;

    const Column* find_column(std::string_view column) const;
    std::optional<std::size_t> column_index(std::string_view column) const;
    friend bool operator==(const Table&, const Table&) = default;
};

struct SdlModel {
    std::string name;
    std::vector<Table> factTables;
    std::vector<Table> dimensionTables;

    const Table* find_table(std::string_view table) const;
    std::vector<const Table*> tables() const;
};

// ============================================================================
// Mapping model (MDL)
// ============================================================================

enum class FragmentKind { Level, FactRelationship };

/// One attribute association. `role` is set when the fragment is a fact
/// mapping and `property` names a key property of that role's bottom level.
struct PropertyMapping {
    std::string property;
    std::string column;
    std::string role;

    friend bool operator==(const PropertyMapping&, const PropertyMapping&) = default;
};

enum class ConditionOp { Equals, In };

/// Literal values are kept as text and typed against the column they restrict.
struct Condition {
    std::string column;
    ConditionOp op = ConditionOp::Equals;
    std::vector<std::string> values;

    friend bool operator==(const Condition&, const Condition&) = default;
};

struct MappingFragment {
    std::string name;  ///< optional label such as "S2"
    FragmentKind kind = FragmentKind::Level;
    std::string entity;
    std::string table;
    std::vector<PropertyMapping> propertyMappings;
    std::vector<Condition> conditions;

    const PropertyMapping* mapping_for(std::string_view property) const;
    const PropertyMapping* role_mapping_for(std::string_view role, std::string_view property) const;
    friend bool operator==(const MappingFragment&, const MappingFragment&) = default;
};

struct MdlModel {
    std::vector<MappingFragment> fragments;

    std::vector<const MappingFragment*> fragments_for(FragmentKind kind, std::string_view entity) const;
};

// ============================================================================
// Validation and equivalence
// ============================================================================

std::vector<Diagnostic> validate_cdl(const CdlModel& model);
std::vector<Diagnostic> validate_sdl(const SdlModel& model);
std::vector<Diagnostic> validate_mdl(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl);
/// All three plus cross-validation; MDL checks run only if CDL and SDL are clean.
std::vector<Diagnostic> validate_all(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl);

/// Semantic equality: named sets compare as sets, ordered lists in order.
bool equivalent(const CdlModel& a, const CdlModel& b);
bool equivalent(const SdlModel& a, const SdlModel& b);
bool equivalent(const MdlModel& a, const MdlModel& b);

}  // namespace cim
