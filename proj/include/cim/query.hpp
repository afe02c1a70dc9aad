#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cim/compiler.hpp"
#include "cim/model.hpp"
#include "cim/storage.hpp"

namespace cim {

struct QueryCondition {
    std::string level;
    std::string property;
    CompareOp op = CompareOp::Equals;
    std::vector<Value> values;

    friend bool operator==(const QueryCondition&, const QueryCondition&) = default;
};

struct Aggregation {
    AggregateFn fn = AggregateFn::Count;
    std::string measure;  ///< empty only for count()

    friend bool operator==(const Aggregation&, const Aggregation&) = default;
};

/// Aggregated fact relationship: a fact relationship rolled up along some
/// dimensions, filtered by level conditions, with one aggregated measure.
struct CqlQuery {
    std::string name = "query";
    std::string factRelationship;
    std::map<std::string, std::string> rollups;  ///< dimension -> target level
    std::vector<QueryCondition> conditions;
    Aggregation aggregation;

    std::string to_text() const;
    nlohmann::json to_json() const;
    static CqlQuery from_json(const nlohmann::json& j);  ///< throws QueryError("invalid-query")

    friend bool operator==(const CqlQuery&, const CqlQuery&) = default;
};

/// Parses the textual syntax (see docs/cql.md). Syntax errors throw ParseError.
CqlQuery parse_cql(std::string_view text);

// ============================================================================
// Resolution
// ============================================================================

struct ResolvedCondition {
    const Level* level = nullptr;
    const Property* property = nullptr;
    CompareOp op = CompareOp::Equals;
    std::vector<Value> values;  ///< coerced to the property type
};

/// A level whose members appear in the result: rollup targets and condition-bearing levels.
struct MentionedLevel {
    const Level* level = nullptr;
    std::vector<ResolvedCondition> conditions;
    std::vector<std::string> columns;  ///< key properties, then name-like properties
    std::string prefix;                ///< output column prefix, e.g. "Weekend."
};

struct ResolvedDimension {
    const Role* role = nullptr;
    const Dimension* dimension = nullptr;
    const Level* bottom = nullptr;
    const Level* target = nullptr;  ///< nullptr: no rollup
    /// Relationship chains from bottom to target; several only when they split
    /// at exclusive alternatives.
    std::vector<std::vector<ParentChildRel>> paths;
    std::vector<MentionedLevel> mentioned;  ///< bottom (if mentioned) before target
};

struct ResolvedQuery {
    const FactRelationship* fact = nullptr;
    std::vector<ResolvedDimension> dimensions;  ///< one per role, in role order
    AggregateFn fn = AggregateFn::Count;
    const Property* measure = nullptr;
    std::string aggregate_column;  ///< e.g. "sum(TicketPrice)"
};

struct QueryOptions {
    /// Keep unmentioned dimensions at their bottom level instead of rolling them to ALL.
    bool keepBottomGrain = false;
};

/// True for "name" (any case) and properties ending in "Name".
bool is_name_like(std::string_view property);

/// Binds names against the model. Throws QueryError with codes
/// "unresolved-name" (with candidates), "invalid-query" or "ambiguous-path".
ResolvedQuery resolve(const CqlQuery& query, const CdlModel& cdl, const QueryOptions& options = {});

/// Closest names by edit distance, best first.
std::vector<std::string> suggest(std::string_view name, const std::vector<std::string>& candidates);

// ============================================================================
// Evaluation
// ============================================================================

/// Plan over compiled views. Throws QueryError("unmapped-level") when a needed view is missing.
Plan rewrite(const CqlQuery& query, const ViewSet& views, const CdlModel& cdl, const QueryOptions& options = {});

Relation execute(const CqlQuery& query, const ViewSet& views, const CdlModel& cdl, const Store& store,
                 const QueryOptions& options = {});

/// Answers the query straight from the mappings and base tables with nested loops,
/// without compiled views. Used as the reference for `execute`.
Relation oracle_execute(const CqlQuery& query, const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl,
                        const Store& store, const QueryOptions& options = {});

/// {apiVersion, columns:[{name,type}], rows:[[...]]}; rows sorted, decimals and dates as strings.
nlohmann::json result_to_json(const Relation& result);
nlohmann::json value_to_json(const Value& value);
/// Aligned plain-text table.
std::string format_table(const Relation& result);

}  // namespace cim
