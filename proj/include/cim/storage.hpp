#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cim/model.hpp"
#include "cim/value.hpp"

namespace cim {

using Row = std::vector<Value>;

/// Bag of typed rows.
struct Relation {
    std::vector<Column> schema;
    std::vector<Row> rows;

    std::optional<std::size_t> index_of(std::string_view column) const;
    std::size_t arity() const { return schema.size(); }
    /// Rows sorted lexicographically; use for order-insensitive comparison.
    Relation sorted() const;
};

/// Same schema and same row multiset.
bool same_bag(const Relation& a, const Relation& b);

// ============================================================================
// Plans
// ============================================================================

enum class CompareOp { Equals, In, Less, Greater };

std::string_view to_string(CompareOp op);

/// `column op values`; null never matches.
struct Atom {
    std::string column;
    CompareOp op = CompareOp::Equals;
    std::vector<Value> values;
};

/// Conjunction of atoms; empty is `true`.
using Predicate = std::vector<Atom>;

bool matches(const Atom& atom, const Value& value);

enum class AggregateFn { Sum, Count, Avg, Min, Max };

std::string_view to_string(AggregateFn fn);
std::optional<AggregateFn> parse_aggregate_fn(std::string_view text);
/// Result type of `fn` over a column of `input` type (nullopt input: count over rows).
std::optional<DataType> aggregate_output_type(AggregateFn fn, std::optional<DataType> input);

struct AggregateSpec {
    AggregateFn fn = AggregateFn::Count;
    std::string column;  ///< empty for count over rows
    std::string output;
};

/// Output column taken from `source`, or a typed null column when `source` is empty.
struct ProjectItem {
    std::string output;
    std::optional<std::string> source;
    DataType type = DataType::String;
};

struct PlanNode;

/// Immutable relational-algebra tree; copies share structure.
class Plan {
public:
    static Plan scan(std::string table);
    Plan select(Predicate predicate) const;
    Plan project(std::vector<ProjectItem> items) const;
    /// Keep `columns` in the given order.
    Plan project(const std::vector<std::string>& columns) const;
    Plan rename(std::vector<std::pair<std::string, std::string>> renames) const;
    Plan join(Plan right, std::vector<std::pair<std::string, std::string>> on) const;
    Plan union_with(Plan right) const;
    Plan aggregate(std::vector<std::string> groupBy, std::vector<AggregateSpec> aggregates) const;
    /// Duplicate elimination expressed as a group-by over all `columns` with no aggregates.
    Plan distinct(std::vector<std::string> columns) const;

    const PlanNode& node() const { return *node_; }
    /// Number of operators in the tree.
    std::size_t size() const;
    nlohmann::json to_json() const;

private:
    explicit Plan(std::shared_ptr<const PlanNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const PlanNode> node_;
};

namespace op {
struct Scan {
    std::string table;
};
struct Select {
    Predicate predicate;
    Plan input;
};
struct Project {
    std::vector<ProjectItem> items;
    Plan input;
};
struct Rename {
    std::vector<std::pair<std::string, std::string>> renames;  ///< old -> new
    Plan input;
};
struct Join {
    Plan left;
    Plan right;
    std::vector<std::pair<std::string, std::string>> on;  ///< left column = right column
};
struct Union {
    Plan left;
    Plan right;
};
struct Aggregate {
    std::vector<std::string> groupBy;
    std::vector<AggregateSpec> aggregates;
    Plan input;
};
}  // namespace op

struct PlanNode {
    std::variant<op::Scan, op::Select, op::Project, op::Rename, op::Join, op::Union, op::Aggregate> variant;
};

/// Resolves a scanned name to its schema; nullopt when unknown.
using SchemaLookup = std::function<std::optional<std::vector<Column>>(std::string_view)>;

/// Output schema of `plan`; throws PlanError when a referenced column or table is missing.
std::vector<Column> output_schema(const Plan& plan, const SchemaLookup& lookup);

// ============================================================================
// Store
// ============================================================================

/// One integrity or instance-level finding.
struct Violation {
    std::string kind;     ///< e.g. "dangling-foreign-key", "non-strict"
    std::string subject;  ///< table, relationship, or group the finding is about
    std::string message;
    std::vector<std::string> witness;

    friend bool operator==(const Violation&, const Violation&) = default;
};

std::string to_string(const Violation& v);

/// Named relations that shadow store tables during evaluation (materialized views).
using RelationOverlay = std::map<std::string, Relation, std::less<>>;

/// In-memory warehouse. Loading needs exclusive access; after `freeze()` the
/// store is read-only and `evaluate` may run concurrently.
class Store {
public:
    Store() = default;
    /// Tables declared in `sdl` may be loaded.
    explicit Store(SdlModel sdl);

    /// Parses RFC-4180 CSV with a mandatory header row; returns the row count.
    std::size_t load_table(const Table& table, std::string_view csv);
    std::size_t load_table(std::string_view table, std::string_view csv);
    /// Loads an already-typed relation (schema must equal the table's columns).
    std::size_t load_relation(const Table& table, Relation relation);

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    const SdlModel& sdl() const { return sdl_; }
    const Relation* find(std::string_view table) const;
    const Table* table(std::string_view name) const;
    std::vector<std::string> loaded_tables() const;

    std::vector<Violation> check_foreign_keys(const SdlModel& sdl) const;
    Relation evaluate(const Plan& plan, const RelationOverlay* overlay = nullptr) const;
    /// SDL describing exactly the loaded tables.
    SdlModel derive_sdl(std::string name = "derived") const;

    SchemaLookup schema_lookup(const RelationOverlay* overlay = nullptr) const;

private:
    void require_mutable() const;

    SdlModel sdl_;
    bool declared_ = false;
    bool frozen_ = false;
    std::map<std::string, Table, std::less<>> tables_;
    std::map<std::string, Relation, std::less<>> data_;
};

// ============================================================================
// CSV
// ============================================================================

struct CsvRecord {
    std::vector<std::string> fields;
    std::vector<bool> quoted;
    std::size_t line = 0;
};

/// RFC-4180 reader (quoted fields, doubled quotes, CRLF or LF). Blank lines are skipped.
std::vector<CsvRecord> parse_csv(std::string_view text);
std::string csv_field(std::string_view text);
/// Header plus rows; nulls are empty fields.
std::string to_csv(const Relation& relation);

}  // namespace cim
