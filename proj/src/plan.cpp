#include <algorithm>
#include <set>

#include "cim/errors.hpp"
#include "cim/storage.hpp"

namespace cim {

using nlohmann::json;

namespace {

constexpr std::string_view kCompareNames[] = {"equals", "in", "less-than", "greater-than"};
constexpr std::string_view kAggregateNames[] = {"sum", "count", "avg", "min", "max"};

}  // namespace

std::string_view to_string(CompareOp op) { return kCompareNames[static_cast<int>(op)]; }
std::string_view to_string(AggregateFn fn) { return kAggregateNames[static_cast<int>(fn)]; }

std::optional<AggregateFn> parse_aggregate_fn(std::string_view text) {
    for (int i = 0; i < 5; ++i)
        if (kAggregateNames[i] == text) return static_cast<AggregateFn>(i);
    return std::nullopt;
}

bool matches(const Atom& atom, const Value& value) {
    if (value.is_null()) return false;
    switch (atom.op) {
        case CompareOp::Equals:
        case CompareOp::In:
            return std::find(atom.values.begin(), atom.values.end(), value) != atom.values.end();
        case CompareOp::Less:
            return !atom.values.empty() && !atom.values.front().is_null() && value < atom.values.front();
        case CompareOp::Greater:
            return !atom.values.empty() && !atom.values.front().is_null() && value > atom.values.front();
    }
    return false;
}

// ---------------------------------------------------------------- builders

Plan Plan::scan(std::string table) {
    return Plan(std::make_shared<const PlanNode>(PlanNode{op::Scan{std::move(table)}}));
}

Plan Plan::select(Predicate predicate) const {
    return Plan(std::make_shared<const PlanNode>(PlanNode{op::Select{std::move(predicate), *this}}));
}

Plan Plan::project(std::vector<ProjectItem> items) const {
    return Plan(std::make_shared<const PlanNode>(PlanNode{op::Project{std::move(items), *this}}));
}

Plan Plan::project(const std::vector<std::string>& columns) const {
    std::vector<ProjectItem> items;
    for (const auto& c : columns) items.push_back({c, c, DataType::String});
    return project(std::move(items));
}

Plan Plan::rename(std::vector<std::pair<std::string, std::string>> renames) const {
    return Plan(std::make_shared<const PlanNode>(PlanNode{op::Rename{std::move(renames), *this}}));
}

Plan Plan::join(Plan right, std::vector<std::pair<std::string, std::string>> on) const {
    return Plan(std::make_shared<const PlanNode>(PlanNode{op::Join{*this, std::move(right), std::move(on)}}));
}

Plan Plan::union_with(Plan right) const {
    return Plan(std::make_shared<const PlanNode>(PlanNode{op::Union{*this, std::move(right)}}));
}

Plan Plan::aggregate(std::vector<std::string> groupBy, std::vector<AggregateSpec> aggregates) const {
    return Plan(std::make_shared<const PlanNode>(
        PlanNode{op::Aggregate{std::move(groupBy), std::move(aggregates), *this}}));
}

Plan Plan::distinct(std::vector<std::string> columns) const { return aggregate(std::move(columns), {}); }

std::size_t Plan::size() const {
    return std::visit(
        [](const auto& n) -> std::size_t {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, op::Scan>) return 1;
            else if constexpr (std::is_same_v<T, op::Join> || std::is_same_v<T, op::Union>)
                return 1 + n.left.size() + n.right.size();
            else return 1 + n.input.size();
        },
        node_->variant);
}

// ---------------------------------------------------------------- json

namespace {

json value_json(const Value& v) {
    if (v.is_null()) return nullptr;
    if (v.is<bool>()) return v.as<bool>();
    if (v.is<std::int64_t>()) return v.as<std::int64_t>();
    return v.to_string();
}

json pairs_json(const std::vector<std::pair<std::string, std::string>>& pairs) {
    json out = json::array();
    for (const auto& [a, b] : pairs) out.push_back({a, b});
    return out;
}

}  // namespace

json Plan::to_json() const {
    return std::visit(
        [](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, op::Scan>) {
                return {{"op", "scan"}, {"table", n.table}};
            } else if constexpr (std::is_same_v<T, op::Select>) {
                json atoms = json::array();
                for (const auto& a : n.predicate) {
                    json vals = json::array();
                    for (const auto& v : a.values) vals.push_back(value_json(v));
                    atoms.push_back({{"column", a.column}, {"operator", to_string(a.op)}, {"values", vals}});
                }
                return {{"op", "select"}, {"predicate", atoms}, {"input", n.input.to_json()}};
            } else if constexpr (std::is_same_v<T, op::Project>) {
                json items = json::array();
                for (const auto& i : n.items) {
                    if (i.source) items.push_back({{"output", i.output}, {"source", *i.source}});
                    else items.push_back({{"output", i.output}, {"null", std::string(to_string(i.type))}});
                }
                return {{"op", "project"}, {"columns", items}, {"input", n.input.to_json()}};
            } else if constexpr (std::is_same_v<T, op::Rename>) {
                return {{"op", "rename"}, {"renames", pairs_json(n.renames)}, {"input", n.input.to_json()}};
            } else if constexpr (std::is_same_v<T, op::Join>) {
                return {{"op", "join"}, {"on", pairs_json(n.on)}, {"left", n.left.to_json()},
                        {"right", n.right.to_json()}};
            } else if constexpr (std::is_same_v<T, op::Union>) {
                return {{"op", "union"}, {"left", n.left.to_json()}, {"right", n.right.to_json()}};
            } else {
                json aggs = json::array();
                for (const auto& a : n.aggregates)
                    aggs.push_back({{"function", to_string(a.fn)}, {"column", a.column}, {"output", a.output}});
                return {{"op", "aggregate"}, {"groupBy", n.groupBy}, {"aggregates", aggs},
                        {"input", n.input.to_json()}};
            }
        },
        node_->variant);
}

// ---------------------------------------------------------------- typing

namespace {

const Column& column_of(const std::vector<Column>& schema, std::string_view name, std::string_view where) {
    for (const auto& c : schema)
        if (c.name == name) return c;
    std::string available;
    for (const auto& c : schema) available += (available.empty() ? "" : ", ") + c.name;
    throw PlanError(std::string(where) + ": unknown column '" + std::string(name) + "' (have: " + available + ")");
}

}  // namespace

std::optional<DataType> aggregate_output_type(AggregateFn fn, std::optional<DataType> input) {
    switch (fn) {
        case AggregateFn::Count: return DataType::Integer;
        case AggregateFn::Avg:
            if (input == DataType::Integer || input == DataType::Decimal) return DataType::Decimal;
            return std::nullopt;
        case AggregateFn::Sum:
            if (input == DataType::Integer || input == DataType::Decimal) return input;
            return std::nullopt;
        case AggregateFn::Min:
        case AggregateFn::Max: return input;
    }
    return std::nullopt;
}

std::vector<Column> output_schema(const Plan& plan, const SchemaLookup& lookup) {
    return std::visit(
        [&](const auto& n) -> std::vector<Column> {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, op::Scan>) {
                auto s = lookup(n.table);
                if (!s) throw PlanError("scan: unknown table '" + n.table + "'");
                return *s;
            } else if constexpr (std::is_same_v<T, op::Select>) {
                auto s = output_schema(n.input, lookup);
                for (const auto& a : n.predicate) {
                    const Column& c = column_of(s, a.column, "select");
                    for (const auto& v : a.values)
                        if (!coerce(v, c.type))
                            throw PlanError("select: literal " + v.to_literal() + " is not a valid " +
                                            std::string(to_string(c.type)) + " for column '" + c.name + "'");
                }
                return s;
            } else if constexpr (std::is_same_v<T, op::Project>) {
                auto s = output_schema(n.input, lookup);
                std::vector<Column> out;
                std::set<std::string> names;
                for (const auto& i : n.items) {
                    if (!names.insert(i.output).second) throw PlanError("project: duplicate column '" + i.output + "'");
                    out.push_back({i.output, i.source ? column_of(s, *i.source, "project").type : i.type});
                }
                return out;
            } else if constexpr (std::is_same_v<T, op::Rename>) {
                auto s = output_schema(n.input, lookup);
                for (const auto& [from, to] : n.renames) {
                    column_of(s, from, "rename");
                    for (auto& c : s)
                        if (c.name == from) c.name = to;
                }
                std::set<std::string> names;
                for (const auto& c : s)
                    if (!names.insert(c.name).second) throw PlanError("rename: duplicate column '" + c.name + "'");
                return s;
            } else if constexpr (std::is_same_v<T, op::Join>) {
                auto l = output_schema(n.left, lookup);
                auto r = output_schema(n.right, lookup);
                for (const auto& [a, b] : n.on) {
                    const Column& ca = column_of(l, a, "join(left)");
                    const Column& cb = column_of(r, b, "join(right)");
                    if (ca.type != cb.type)
                        throw PlanError("join: column '" + a + "' and '" + b + "' differ in type");
                }
                std::set<std::string> names;
                for (const auto& c : l) names.insert(c.name);
                for (const auto& c : r)
                    if (!names.insert(c.name).second)
                        throw PlanError("join: column '" + c.name + "' appears on both sides");
                l.insert(l.end(), r.begin(), r.end());
                return l;
            } else if constexpr (std::is_same_v<T, op::Union>) {
                auto l = output_schema(n.left, lookup);
                auto r = output_schema(n.right, lookup);
                if (l != r) throw PlanError("union: inputs have different schemas");
                return l;
            } else {
                auto s = output_schema(n.input, lookup);
                std::vector<Column> out;
                for (const auto& g : n.groupBy) out.push_back(column_of(s, g, "aggregate"));
                for (const auto& a : n.aggregates) {
                    std::optional<DataType> in;
                    if (!a.column.empty()) in = column_of(s, a.column, "aggregate").type;
                    else if (a.fn != AggregateFn::Count)
                        throw PlanError("aggregate: " + std::string(to_string(a.fn)) + " needs a column");
                    auto t = aggregate_output_type(a.fn, in);
                    if (!t)
                        throw PlanError("aggregate: " + std::string(to_string(a.fn)) + " is not defined on " +
                                        std::string(to_string(*in)) + " column '" + a.column + "'");
                    out.push_back({a.output, *t});
                }
                return out;
            }
        },
        plan.node().variant);
}

}  // namespace cim
