#include "cim/storage.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "cim/errors.hpp"

namespace cim {

namespace {

struct RowHash {
    std::size_t operator()(const Row& row) const {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (const auto& v : row) h = (h ^ ValueHash{}(v)) * 0x100000001b3ULL;
        return h;
    }
};

std::size_t index_or_throw(const std::vector<Column>& schema, std::string_view name, std::string_view where) {
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i].name == name) return i;
    throw PlanError(std::string(where) + ": unknown column '" + std::string(name) + "'");
}

std::string describe_key(const std::vector<std::string>& columns, const Row& values) {
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i)
        s += (i ? ", " : "") + columns[i] + "=" + values[i].to_literal();
    return s;
}

// Running state of one aggregate within one group.
struct Accumulator {
    std::int64_t rows = 0;
    std::int64_t non_null = 0;
    Value sum;
    Value min;
    Value max;

    void add(const Value& v) {
        ++rows;
        if (v.is_null()) return;
        ++non_null;
        if (v.is<std::int64_t>()) {
            sum = Value(sum.is_null() ? v.as<std::int64_t>() : sum.as<std::int64_t>() + v.as<std::int64_t>());
        } else if (v.is<Decimal>()) {
            sum = Value(sum.is_null() ? v.as<Decimal>() : sum.as<Decimal>() + v.as<Decimal>());
        }
        if (min.is_null() || v < min) min = v;
        if (max.is_null() || v > max) max = v;
    }

    Value result(AggregateFn fn) const {
        switch (fn) {
            case AggregateFn::Count: return Value(rows);
            case AggregateFn::Sum: return sum;
            case AggregateFn::Min: return min;
            case AggregateFn::Max: return max;
            case AggregateFn::Avg: {
                if (non_null == 0) return Value();
                const Decimal total = sum.is<Decimal>() ? sum.as<Decimal>() : Decimal(sum.as<std::int64_t>());
                return Value(total.divide(non_null));
            }
        }
        return Value();
    }
};

class Evaluator {
public:
    Evaluator(const Store& store, const RelationOverlay* overlay) : store_(store), overlay_(overlay) {}

    Relation run(const Plan& plan) const {
        return std::visit([&](const auto& n) { return eval(n); }, plan.node().variant);
    }

private:
    Relation eval(const op::Scan& n) const {
        if (overlay_)
            if (auto it = overlay_->find(n.table); it != overlay_->end()) return it->second;
        if (const Relation* r = store_.find(n.table)) return *r;
        if (store_.table(n.table) || store_.sdl().find_table(n.table))
            throw PlanError("scan: table '" + n.table + "' is not loaded");
        throw PlanError("scan: unknown table '" + n.table + "'");
    }

    Relation eval(const op::Select& n) const {
        Relation in = run(n.input);
        std::vector<std::pair<std::size_t, Atom>> atoms;
        for (const auto& a : n.predicate) {
            const std::size_t idx = index_or_throw(in.schema, a.column, "select");
            Atom typed{a.column, a.op, {}};
            for (const auto& v : a.values) {
                auto c = coerce(v, in.schema[idx].type);
                if (!c) throw PlanError("select: literal " + v.to_literal() + " does not fit column '" + a.column + "'");
                typed.values.push_back(std::move(*c));
            }
            atoms.emplace_back(idx, std::move(typed));
        }
        Relation out{in.schema, {}};
        for (auto& row : in.rows) {
            const bool keep = std::all_of(atoms.begin(), atoms.end(),
                                          [&](const auto& a) { return matches(a.second, row[a.first]); });
            if (keep) out.rows.push_back(std::move(row));
        }
        return out;
    }

    Relation eval(const op::Project& n) const {
        Relation in = run(n.input);
        Relation out;
        std::vector<std::optional<std::size_t>> src;
        for (const auto& item : n.items) {
            if (item.source) {
                const std::size_t idx = index_or_throw(in.schema, *item.source, "project");
                src.emplace_back(idx);
                out.schema.push_back({item.output, in.schema[idx].type});
            } else {
                src.emplace_back(std::nullopt);
                out.schema.push_back({item.output, item.type});
            }
        }
        out.rows.reserve(in.rows.size());
        for (const auto& row : in.rows) {
            Row r;
            r.reserve(src.size());
            for (const auto& s : src) r.push_back(s ? row[*s] : Value());
            out.rows.push_back(std::move(r));
        }
        return out;
    }

    Relation eval(const op::Rename& n) const {
        Relation in = run(n.input);
        for (const auto& [from, to] : n.renames) in.schema[index_or_throw(in.schema, from, "rename")].name = to;
        return in;
    }

    Relation eval(const op::Join& n) const {
        Relation left = run(n.left);
        Relation right = run(n.right);
        std::vector<std::size_t> lk;
        std::vector<std::size_t> rk;
        for (const auto& [a, b] : n.on) {
            lk.push_back(index_or_throw(left.schema, a, "join(left)"));
            rk.push_back(index_or_throw(right.schema, b, "join(right)"));
        }
        for (const auto& c : right.schema)
            if (left.index_of(c.name)) throw PlanError("join: column '" + c.name + "' appears on both sides");
        Relation out{left.schema, {}};
        out.schema.insert(out.schema.end(), right.schema.begin(), right.schema.end());

        std::unordered_map<Row, std::vector<std::size_t>, RowHash> build;
        for (std::size_t i = 0; i < right.rows.size(); ++i) {
            Row key;
            bool has_null = false;
            for (auto k : rk) {
                has_null |= right.rows[i][k].is_null();
                key.push_back(right.rows[i][k]);
            }
            if (!has_null) build[std::move(key)].push_back(i);
        }
        for (const auto& lrow : left.rows) {
            Row key;
            bool has_null = false;
            for (auto k : lk) {
                has_null |= lrow[k].is_null();
                key.push_back(lrow[k]);
            }
            if (has_null) continue;
            auto it = build.find(key);
            if (it == build.end()) continue;
            for (auto ri : it->second) {
                Row r = lrow;
                r.insert(r.end(), right.rows[ri].begin(), right.rows[ri].end());
                out.rows.push_back(std::move(r));
            }
        }
        return out;
    }

    Relation eval(const op::Union& n) const {
        Relation left = run(n.left);
        Relation right = run(n.right);
        if (left.schema != right.schema) throw PlanError("union: inputs have different schemas");
        left.rows.insert(left.rows.end(), std::make_move_iterator(right.rows.begin()),
                         std::make_move_iterator(right.rows.end()));
        return left;
    }

    Relation eval(const op::Aggregate& n) const {
        Relation in = run(n.input);
        std::vector<std::size_t> group_idx;
        Relation out;
        for (const auto& g : n.groupBy) {
            group_idx.push_back(index_or_throw(in.schema, g, "aggregate"));
            out.schema.push_back(in.schema[group_idx.back()]);
        }
        std::vector<std::optional<std::size_t>> agg_idx;
        for (const auto& a : n.aggregates) {
            std::optional<DataType> type;
            if (a.column.empty()) {
                agg_idx.emplace_back(std::nullopt);
            } else {
                agg_idx.emplace_back(index_or_throw(in.schema, a.column, "aggregate"));
                type = in.schema[*agg_idx.back()].type;
            }
            auto out_type = aggregate_output_type(a.fn, type);
            if (!out_type || (!type && a.fn != AggregateFn::Count))
                throw PlanError("aggregate: " + std::string(to_string(a.fn)) + " not defined on '" + a.column + "'");
            out.schema.push_back({a.output, *out_type});
        }

        std::map<Row, std::vector<Accumulator>> groups;
        for (const auto& row : in.rows) {
            Row key;
            key.reserve(group_idx.size());
            for (auto g : group_idx) key.push_back(row[g]);
            auto& accs = groups[std::move(key)];
            accs.resize(n.aggregates.size());
            for (std::size_t i = 0; i < accs.size(); ++i) accs[i].add(agg_idx[i] ? row[*agg_idx[i]] : Value(true));
        }
        if (groups.empty() && group_idx.empty()) groups[Row{}].resize(n.aggregates.size());
        for (const auto& [key, accs] : groups) {
            Row r = key;
            for (std::size_t i = 0; i < accs.size(); ++i) r.push_back(accs[i].result(n.aggregates[i].fn));
            out.rows.push_back(std::move(r));
        }
        return out;
    }

    const Store& store_;
    const RelationOverlay* overlay_;
};

}  // namespace

// ---------------------------------------------------------------- Relation

std::optional<std::size_t> Relation::index_of(std::string_view column) const {
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i].name == column) return i;
    return std::nullopt;
}

Relation Relation::sorted() const {
    Relation r = *this;
    std::sort(r.rows.begin(), r.rows.end());
    return r;
}

bool same_bag(const Relation& a, const Relation& b) {
    return a.schema == b.schema && a.rows.size() == b.rows.size() && a.sorted().rows == b.sorted().rows;
}

std::string to_string(const Violation& v) {
    std::string s = v.kind + " [" + v.subject + "]: " + v.message;
    if (!v.witness.empty()) {
        s += " (witness:";
        for (const auto& w : v.witness) s += " " + w;
        s += ")";
    }
    return s;
}

// ---------------------------------------------------------------- Store

Store::Store(SdlModel sdl) : sdl_(std::move(sdl)), declared_(true) {}

void Store::require_mutable() const {
    if (frozen_) throw Error("store is frozen; tables cannot be loaded after freeze()");
}

const Relation* Store::find(std::string_view table) const {
    auto it = data_.find(table);
    return it == data_.end() ? nullptr : &it->second;
}

const Table* Store::table(std::string_view name) const {
    auto it = tables_.find(name);
    return it == tables_.end() ? nullptr : &it->second;
}

std::vector<std::string> Store::loaded_tables() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : data_) out.push_back(name);
    return out;
}

SchemaLookup Store::schema_lookup(const RelationOverlay* overlay) const {
    return [this, overlay](std::string_view name) -> std::optional<std::vector<Column>> {
        if (overlay)
            if (auto it = overlay->find(name); it != overlay->end()) return it->second.schema;
        if (const Table* t = table(name)) return t->columns;
        if (const Table* t = sdl_.find_table(name)) return t->columns;
        return std::nullopt;
    };
}

std::size_t Store::load_table(std::string_view table, std::string_view csv) {
    const Table* t = sdl_.find_table(table);
    if (!t) throw LoadError("table '" + std::string(table) + "' is not declared in the active SDL model", 0);
    return load_table(*t, csv);
}

std::size_t Store::load_table(const Table& table, std::string_view csv) {
    require_mutable();
    const auto records = parse_csv(csv);
    if (records.empty()) throw LoadError("CSV for '" + table.name + "' has no header row", 1);

    const CsvRecord& header = records.front();
    std::vector<std::size_t> field_to_column;
    std::set<std::string> seen;
    for (const auto& name : header.fields) {
        auto idx = table.column_index(name);
        if (!idx) throw LoadError("CSV header column '" + name + "' is not a column of '" + table.name + "'", header.line);
        if (!seen.insert(name).second) throw LoadError("CSV header repeats column '" + name + "'", header.line);
        field_to_column.push_back(*idx);
    }
    if (seen.size() != table.columns.size()) {
        for (const auto& c : table.columns)
            if (!seen.count(c.name))
                throw LoadError("CSV header is missing column '" + c.name + "' of '" + table.name + "'", header.line);
    }

    Relation rel{table.columns, {}};
    rel.rows.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const CsvRecord& rec = records[r];
        if (rec.fields.size() != header.fields.size())
            throw LoadError("expected " + std::to_string(header.fields.size()) + " fields, found " +
                                std::to_string(rec.fields.size()),
                            rec.line);
        Row row(table.columns.size());
        for (std::size_t f = 0; f < rec.fields.size(); ++f) {
            const Column& col = table.columns[field_to_column[f]];
            const std::string& text = rec.fields[f];
            if (text.empty() && !(rec.quoted[f] && col.type == DataType::String)) continue;  // null
            auto v = parse_value(text, col.type);
            if (!v)
                throw LoadError("value '" + text + "' in column '" + col.name + "' is not a valid " +
                                    std::string(to_string(col.type)),
                                rec.line);
            row[field_to_column[f]] = std::move(*v);
        }
        rel.rows.push_back(std::move(row));
    }

    // Primary key: non-null and unique.
    std::vector<std::size_t> pk;
    for (const auto& c : table.primaryKey) {
        auto idx = table.column_index(c);
        if (!idx) throw LoadError("primary key column '" + c + "' is not a column of '" + table.name + "'", 0);
        pk.push_back(*idx);
    }
    std::unordered_set<Row, RowHash> keys;
    for (std::size_t r = 0; r < rel.rows.size(); ++r) {
        Row key;
        for (auto k : pk) key.push_back(rel.rows[r][k]);
        if (std::any_of(key.begin(), key.end(), [](const Value& v) { return v.is_null(); }))
            throw LoadError("null in primary key of '" + table.name + "'", records[r + 1].line);
        if (!keys.insert(key).second)
            throw LoadError("duplicate primary key (" + describe_key(table.primaryKey, key) + ") in '" + table.name + "'",
                            records[r + 1].line);
    }
    return load_relation(table, std::move(rel));
}

std::size_t Store::load_relation(const Table& table, Relation relation) {
    require_mutable();
    if (declared_) {
        const Table* declared = sdl_.find_table(table.name);
        if (!declared || !(*declared == table))
            throw LoadError("table '" + table.name + "' is not declared in the active SDL model", 0);
    }
    if (relation.schema != table.columns) throw LoadError("relation schema does not match table '" + table.name + "'", 0);
    for (const auto& row : relation.rows) {
        if (row.size() != table.columns.size()) throw LoadError("row arity mismatch in '" + table.name + "'", 0);
        for (std::size_t i = 0; i < row.size(); ++i)
            if (!row[i].conforms_to(table.columns[i].type))
                throw LoadError("value " + row[i].to_literal() + " does not conform to column '" +
                                    table.columns[i].name + "'",
                                0);
    }
    const std::size_t n = relation.rows.size();
    tables_.insert_or_assign(table.name, table);
    data_.insert_or_assign(table.name, std::move(relation));
    return n;
}

std::vector<Violation> Store::check_foreign_keys(const SdlModel& sdl) const {
    std::vector<Violation> out;
    for (const Table* t : sdl.tables()) {
        const Relation* child = find(t->name);
        if (!child) continue;
        for (const auto& fk : t->foreignKeys) {
            const Relation* parent = find(fk.table);
            const Table* target = sdl.find_table(fk.table);
            std::unordered_set<Row, RowHash> targets;
            if (parent && target) {
                std::vector<std::size_t> idx;
                for (const auto& c : fk.targetColumns) idx.push_back(*parent->index_of(c));
                for (const auto& row : parent->rows) {
                    Row key;
                    for (auto i : idx) key.push_back(row[i]);
                    targets.insert(std::move(key));
                }
            }
            std::vector<std::size_t> local;
            for (const auto& c : fk.columns) local.push_back(*child->index_of(c));
            std::string subject = t->name + "(";
            for (std::size_t i = 0; i < fk.columns.size(); ++i) subject += (i ? "," : "") + fk.columns[i];
            subject += ")->" + fk.table;
            for (const auto& row : child->rows) {
                Row key;
                for (auto i : local) key.push_back(row[i]);
                if (std::any_of(key.begin(), key.end(), [](const Value& v) { return v.is_null(); })) continue;
                if (!targets.count(key))
                    out.push_back({"dangling-foreign-key", subject,
                                   "no row of '" + fk.table + "' has key " + describe_key(fk.targetColumns, key),
                                   {describe_key(fk.columns, key)}});
            }
        }
    }
    return out;
}

SdlModel Store::derive_sdl(std::string name) const {
    SdlModel out;
    out.name = std::move(name);
    std::set<std::string> referenced;
    for (const auto& [tname, t] : tables_)
        for (const auto& fk : t.foreignKeys)
            if (fk.table != tname) referenced.insert(fk.table);
    for (const auto& [tname, t] : tables_) {
        const bool fact = !referenced.count(tname) && t.foreignKeys.size() >= 2;
        (fact ? out.factTables : out.dimensionTables).push_back(t);
    }
    return out;
}

Relation Store::evaluate(const Plan& plan, const RelationOverlay* overlay) const {
    return Evaluator(*this, overlay).run(plan);
}

// ---------------------------------------------------------------- CSV

std::vector<CsvRecord> parse_csv(std::string_view text) {
    std::vector<CsvRecord> out;
    CsvRecord rec;
    std::string field;
    bool quoted = false;
    bool in_quotes = false;
    bool any = false;  // record has content
    std::size_t line = 1;
    rec.line = 1;

    auto end_field = [&] {
        rec.fields.push_back(std::move(field));
        rec.quoted.push_back(quoted);
        field.clear();
        quoted = false;
    };
    auto end_record = [&] {
        if (any) {
            end_field();
            out.push_back(std::move(rec));
        }
        rec = CsvRecord{};
        field.clear();
        quoted = false;
        any = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                quoted = true;
                any = true;
                break;
            case ',':
                any = true;
                end_field();
                break;
            case '\r': break;
            case '\n':
                end_record();
                ++line;
                rec.line = line;
                break;
            default:
                any = true;
                field += c;
        }
    }
    if (in_quotes) throw LoadError("unterminated quoted field", line);
    end_record();
    return out;
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string to_csv(const Relation& relation) {
    std::string out;
    for (std::size_t i = 0; i < relation.schema.size(); ++i)
        out += (i ? "," : "") + csv_field(relation.schema[i].name);
    out += '\n';
    for (const auto& row : relation.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (row[i].is<std::string>() && row[i].as<std::string>().empty()) out += "\"\"";
            else out += csv_field(row[i].to_string());
        }
        out += '\n';
    }
    return out;
}

}  // namespace cim
