#include <algorithm>
#include <cctype>
#include <set>

#include "cim/errors.hpp"
#include "cim/query.hpp"

namespace cim {

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok { Ident, String, Number, Symbol, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<Token> lex(std::string_view text) {
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
            t.kind = Tok::Ident;
            t.text = std::string(text.substr(i, j - i));
            advance(j - i);
        } else if (c == '"') {
            t.kind = Tok::String;
            advance(1);
            bool closed = false;
            while (i < text.size()) {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    t.text.push_back(text[i + 1]);
                    advance(2);
                } else if (text[i] == '"') {
                    advance(1);
                    closed = true;
                    break;
                } else {
                    t.text.push_back(text[i]);
                    advance(1);
                }
            }
            if (!closed) throw ParseError("unterminated string literal", t.line, t.column);
        } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '-' && i + 1 < text.size() &&
                                                                   std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t j = i + 1;
            while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
            t.kind = Tok::Number;
            t.text = std::string(text.substr(i, j - i));
            advance(j - i);
        } else if (std::string_view("(),.=<>").find(c) != std::string_view::npos) {
            t.kind = Tok::Symbol;
            t.text = std::string(1, c);
            advance(1);
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

// ---------------------------------------------------------------- parser

class CqlParser {
public:
    explicit CqlParser(std::string_view text) : toks_(lex(text)) {}

    CqlQuery parse() {
        CqlQuery q;
        keyword("AGGREGATE");
        const Token& fn_tok = ident("aggregate function");
        auto fn = parse_aggregate_fn(lower(fn_tok.text));
        if (!fn) fail(fn_tok, "unknown aggregate function '" + fn_tok.text + "'");
        q.aggregation.fn = *fn;
        symbol("(");
        if (!peek_symbol(")")) q.aggregation.measure = ident("measure").text;
        symbol(")");
        keyword("FROM");
        q.factRelationship = ident("fact relationship").text;
        while (peek_keyword("ROLLUP")) {
            next();
            const Token& dim = ident("dimension");
            keyword("TO");
            const Token& level = ident("level");
            if (!q.rollups.emplace(dim.text, level.text).second)
                fail(dim, "duplicate ROLLUP for dimension '" + dim.text + "'");
        }
        if (peek_keyword("WHERE")) {
            next();
            q.conditions.push_back(condition());
            while (peek_keyword("AND")) {
                next();
                q.conditions.push_back(condition());
            }
        }
        if (cur().kind != Tok::End) fail(cur(), "unexpected '" + cur().text + "'");
        return q;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] static void fail(const Token& t, const std::string& message) {
        throw ParseError(message, t.line, t.column);
    }
    static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of query" : "'" + t.text + "'"; }

    bool peek_keyword(std::string_view kw) const { return cur().kind == Tok::Ident && upper(cur().text) == kw; }
    bool peek_symbol(std::string_view s) const { return cur().kind == Tok::Symbol && cur().text == s; }

    void keyword(std::string_view kw) {
        if (!peek_keyword(kw)) fail(cur(), "expected " + std::string(kw) + ", found " + describe(cur()));
        next();
    }
    void symbol(std::string_view s) {
        if (!peek_symbol(s)) fail(cur(), "expected '" + std::string(s) + "', found " + describe(cur()));
        next();
    }
    const Token& ident(std::string_view what) {
        if (cur().kind != Tok::Ident) fail(cur(), "expected " + std::string(what) + ", found " + describe(cur()));
        return next();
    }

    Value literal() {
        const Token& t = cur();
        if (t.kind == Tok::String) {
            next();
            return Value(t.text);
        }
        if (t.kind == Tok::Number) {
            next();
            if (t.text.find('.') == std::string::npos)
                if (auto v = parse_value(t.text, DataType::Integer)) return *v;
            if (auto d = Decimal::parse(t.text)) return Value(*d);
            fail(t, "malformed number '" + t.text + "'");
        }
        if (t.kind == Tok::Ident && (upper(t.text) == "TRUE" || upper(t.text) == "FALSE")) {
            next();
            return Value(upper(t.text) == "TRUE");
        }
        fail(t, "expected literal, found " + describe(t));
    }

    QueryCondition condition() {
        QueryCondition c;
        c.level = ident("level").text;
        symbol(".");
        c.property = ident("property").text;
        if (peek_symbol("=")) {
            c.op = CompareOp::Equals;
        } else if (peek_symbol("<")) {
            c.op = CompareOp::Less;
        } else if (peek_symbol(">")) {
            c.op = CompareOp::Greater;
        } else if (peek_keyword("IN")) {
            c.op = CompareOp::In;
        } else {
            fail(cur(), "expected =, <, > or IN, found " + describe(cur()));
        }
        next();
        if (c.op != CompareOp::In) {
            c.values.push_back(literal());
            return c;
        }
        symbol("(");
        c.values.push_back(literal());
        while (peek_symbol(",")) {
            next();
            c.values.push_back(literal());
        }
        symbol(")");
        return c;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

std::string literal_text(const Value& v) {
    if (v.is<std::string>() || v.is<Date>()) {
        std::string out = "\"";
        for (char c : v.to_string()) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        return out + "\"";
    }
    return v.to_string();
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> curr(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const bool same = std::tolower(static_cast<unsigned char>(a[i - 1])) ==
                              std::tolower(static_cast<unsigned char>(b[j - 1]));
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + (same ? 0 : 1)});
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

template <typename T>
std::vector<std::string> names_of(const std::vector<T>& items) {
    std::vector<std::string> out;
    for (const auto& i : items) out.push_back(i.name);
    return out;
}

[[noreturn]] void unresolved(const std::string& what, const std::string& name, const std::vector<std::string>& pool) {
    auto candidates = suggest(name, pool);
    std::string message = "unresolved " + what + " '" + name + "'";
    if (!candidates.empty()) {
        message += "; did you mean ";
        for (std::size_t i = 0; i < candidates.size(); ++i) message += (i ? ", '" : "'") + candidates[i] + "'";
        message += "?";
    }
    throw QueryError("unresolved-name", message, std::move(candidates));
}

/// All relationship chains from `from` up to `to` in the dimension's roll-up graph.
void chains(const std::vector<ParentChildRel>& rels, const std::string& from, const std::string& to,
            std::vector<ParentChildRel>& current, std::vector<std::vector<ParentChildRel>>& out) {
    if (from == to) {
        out.push_back(current);
        return;
    }
    for (const auto& r : rels) {
        if (r.child != from) continue;
        current.push_back(r);
        chains(rels, r.parent, to, current, out);
        current.pop_back();
    }
}

}  // namespace

// ---------------------------------------------------------------- CqlQuery

CqlQuery parse_cql(std::string_view text) { return CqlParser(text).parse(); }

std::string CqlQuery::to_text() const {
    std::string out = "AGGREGATE " + std::string(cim::to_string(aggregation.fn)) + "(" + aggregation.measure +
                      ") FROM " + factRelationship;
    for (const auto& [dim, level] : rollups) out += " ROLLUP " + dim + " TO " + level;
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        const auto& c = conditions[i];
        out += (i ? " AND " : " WHERE ") + c.level + "." + c.property;
        switch (c.op) {
            case CompareOp::Equals: out += " = "; break;
            case CompareOp::Less: out += " < "; break;
            case CompareOp::Greater: out += " > "; break;
            case CompareOp::In: out += " IN "; break;
        }
        if (c.op == CompareOp::In) {
            out += "(";
            for (std::size_t k = 0; k < c.values.size(); ++k) out += (k ? ", " : "") + literal_text(c.values[k]);
            out += ")";
        } else if (!c.values.empty()) {
            out += literal_text(c.values.front());
        }
    }
    return out;
}

nlohmann::json value_to_json(const Value& value) {
    if (value.is_null()) return nullptr;
    if (value.is<bool>()) return value.as<bool>();
    if (value.is<std::int64_t>()) return value.as<std::int64_t>();
    return value.to_string();
}

nlohmann::json CqlQuery::to_json() const {
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : conditions) {
        nlohmann::json values = nlohmann::json::array();
        for (const auto& v : c.values) values.push_back(value_to_json(v));
        conds.push_back({{"level", c.level},
                         {"property", c.property},
                         {"operator", cim::to_string(c.op)},
                         {"values", std::move(values)}});
    }
    nlohmann::json agg = {{"function", cim::to_string(aggregation.fn)}};
    if (!aggregation.measure.empty()) agg["measure"] = aggregation.measure;
    return {{"name", name},
            {"factRelationship", factRelationship},
            {"rollups", rollups},
            {"conditions", std::move(conds)},
            {"aggregation", std::move(agg)}};
}

CqlQuery CqlQuery::from_json(const nlohmann::json& j) {
    auto bad = [](const std::string& m) -> QueryError { return QueryError("invalid-query", m); };
    if (!j.is_object()) throw bad("query must be a JSON object");
    auto string_field = [&](const nlohmann::json& obj, const char* key, bool required) -> std::string {
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) throw bad(std::string("missing field '") + key + "'");
            return {};
        }
        if (!it->is_string()) throw bad(std::string("field '") + key + "' must be a string");
        return it->get<std::string>();
    };
    static const std::set<std::string> kFields = {"name", "factRelationship", "rollups", "conditions", "aggregation"};
    for (const auto& [k, v] : j.items())
        if (!kFields.count(k)) throw bad("unknown field '" + k + "'");

    CqlQuery q;
    if (j.contains("name")) q.name = string_field(j, "name", true);
    q.factRelationship = string_field(j, "factRelationship", true);
    if (auto it = j.find("rollups"); it != j.end()) {
        if (!it->is_object()) throw bad("'rollups' must map dimensions to levels");
        for (const auto& [dim, level] : it->items()) {
            if (!level.is_string()) throw bad("rollup target for '" + dim + "' must be a string");
            q.rollups[dim] = level.get<std::string>();
        }
    }
    if (auto it = j.find("conditions"); it != j.end()) {
        if (!it->is_array()) throw bad("'conditions' must be an array");
        for (const auto& c : *it) {
            if (!c.is_object()) throw bad("condition must be an object");
            QueryCondition qc;
            qc.level = string_field(c, "level", true);
            qc.property = string_field(c, "property", true);
            const std::string op = string_field(c, "operator", true);
            static const std::map<std::string, CompareOp> kOps = {{"equals", CompareOp::Equals},
                                                                  {"in", CompareOp::In},
                                                                  {"less-than", CompareOp::Less},
                                                                  {"greater-than", CompareOp::Greater}};
            auto o = kOps.find(op);
            if (o == kOps.end()) throw bad("unknown operator '" + op + "'");
            qc.op = o->second;
            auto vals = c.find("values");
            if (vals == c.end() || !vals->is_array() || vals->empty())
                throw bad("condition needs a non-empty 'values' array");
            for (const auto& v : *vals) {
                if (v.is_string()) qc.values.emplace_back(v.get<std::string>());
                else if (v.is_boolean()) qc.values.emplace_back(v.get<bool>());
                else if (v.is_number_integer()) qc.values.emplace_back(v.get<std::int64_t>());
                else if (v.is_number_float()) {
                    auto d = Decimal::parse(v.dump());
                    if (!d) throw bad("unrepresentable number " + v.dump());
                    qc.values.emplace_back(*d);
                } else {
                    throw bad("condition values must be strings, numbers or booleans");
                }
            }
            if (qc.op != CompareOp::In && qc.values.size() != 1)
                throw bad("operator '" + op + "' takes exactly one value");
            q.conditions.push_back(std::move(qc));
        }
    }
    auto agg = j.find("aggregation");
    if (agg == j.end() || !agg->is_object()) throw bad("missing object 'aggregation'");
    const std::string fn = string_field(*agg, "function", true);
    auto f = parse_aggregate_fn(fn);
    if (!f) throw bad("unknown aggregate function '" + fn + "'");
    q.aggregation.fn = *f;
    q.aggregation.measure = string_field(*agg, "measure", false);
    return q;
}

// ---------------------------------------------------------------- resolution

std::vector<std::string> suggest(std::string_view name, const std::vector<std::string>& candidates) {
    std::vector<std::pair<std::size_t, std::string>> scored;
    const std::size_t limit = std::max<std::size_t>(2, name.size() / 3);
    for (const auto& c : candidates) {
        const std::size_t d = edit_distance(name, c);
        if (d <= limit) scored.emplace_back(d, c);
    }
    std::sort(scored.begin(), scored.end());
    scored.erase(std::unique(scored.begin(), scored.end()), scored.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < scored.size() && i < 3; ++i) out.push_back(scored[i].second);
    return out;
}

bool is_name_like(std::string_view property) {
    if (lower(property) == "name") return true;
    return property.size() > 4 && property.substr(property.size() - 4) == "Name";
}

ResolvedQuery resolve(const CqlQuery& query, const CdlModel& cdl, const QueryOptions& options) {
    ResolvedQuery out;
    out.fact = cdl.find_fact(query.factRelationship);
    if (!out.fact) unresolved("fact relationship", query.factRelationship, names_of(cdl.factRelationships));
    const FactRelationship& fact = *out.fact;

    out.fn = query.aggregation.fn;
    if (query.aggregation.measure.empty()) {
        if (out.fn != AggregateFn::Count)
            throw QueryError("invalid-query", std::string(to_string(out.fn)) + "() needs a measure");
        out.aggregate_column = "count()";
    } else {
        out.measure = fact.find_measure(query.aggregation.measure);
        if (!out.measure) unresolved("measure", query.aggregation.measure, names_of(fact.measures));
        if (!aggregate_output_type(out.fn, out.measure->type))
            throw QueryError("invalid-query", std::string(to_string(out.fn)) + " is not defined on " +
                                                  std::string(to_string(out.measure->type)) + " measure '" +
                                                  out.measure->name + "'");
        out.aggregate_column = std::string(to_string(out.fn)) + "(" + out.measure->name + ")";
    }

    for (const auto& role : fact.roles) {
        ResolvedDimension d;
        d.role = &role;
        d.dimension = cdl.find_dimension(role.dimension);
        d.bottom = cdl.find_level(d.dimension->bottomLevel);
        out.dimensions.push_back(d);
    }
    std::vector<std::string> fact_dims;
    for (const auto& role : fact.roles) fact_dims.push_back(role.dimension);

    for (const auto& [dim, level] : query.rollups) {
        auto it = std::find_if(out.dimensions.begin(), out.dimensions.end(),
                               [&](const ResolvedDimension& d) { return d.dimension->name == dim; });
        if (it == out.dimensions.end()) {
            if (cdl.find_dimension(dim))
                throw QueryError("invalid-query",
                                 "dimension '" + dim + "' plays no role in fact relationship " + fact.name);
            unresolved("dimension", dim, fact_dims);
        }
        const auto rels = cdl.dimension_relationships(*it->dimension);
        std::vector<std::string> reachable{it->bottom->name};
        for (const auto& r : rels) reachable.push_back(r.parent);
        it->target = cdl.find_level(level);
        if (!it->target) unresolved("level", level, reachable);
        std::vector<ParentChildRel> current;
        chains(rels, it->bottom->name, level, current, it->paths);
        if (it->paths.empty())
            throw QueryError("invalid-query", "level '" + level + "' is not reachable from " + it->bottom->name +
                                                  " in dimension " + dim);
        if (it->paths.size() > 1) {
            // Chains may only split where a level branches into exclusive alternatives.
            std::map<std::string, std::set<std::string>> branches;
            std::map<std::string, std::set<std::string>> groups;
            for (const auto& path : it->paths)
                for (const auto& r : path) {
                    branches[r.child].insert(r.id());
                    groups[r.child].insert(r.exclusiveGroup.value_or("#" + r.id()));
                }
            for (const auto& [child, ids] : branches) {
                if (ids.size() < 2 || (groups[child].size() == 1 && groups[child].begin()->front() != '#')) continue;
                std::string list;
                for (const auto& id : ids) list += (list.empty() ? "" : ", ") + id;
                throw QueryError("ambiguous-path", "rollup " + dim + " TO " + level + " is ambiguous at " + child +
                                                       ": " + list + " are not exclusive alternatives");
            }
        }
    }

    std::map<const ResolvedDimension*, std::vector<ResolvedCondition>> bottom_conds;
    std::map<const ResolvedDimension*, std::vector<ResolvedCondition>> target_conds;
    for (const auto& c : query.conditions) {
        const Level* level = cdl.find_level(c.level);
        if (!level) unresolved("level", c.level, names_of(cdl.levels));
        std::vector<const ResolvedDimension*> as_target;
        std::vector<const ResolvedDimension*> as_bottom;
        for (const auto& d : out.dimensions) {
            if (d.target == level) as_target.push_back(&d);
            else if (d.bottom == level) as_bottom.push_back(&d);
        }
        const ResolvedDimension* owner = nullptr;
        bool on_target = false;
        if (as_target.size() == 1) {
            owner = as_target.front();
            on_target = true;
        } else if (as_target.empty() && as_bottom.size() == 1) {
            owner = as_bottom.front();
        } else if (as_target.empty() && as_bottom.empty()) {
            throw QueryError("invalid-query", "condition level '" + c.level +
                                                  "' is neither a rollup target nor the bottom level of a role");
        } else {
            throw QueryError("invalid-query", "condition level '" + c.level + "' occurs in several dimensions");
        }
        const Property* prop = level->find_property(c.property);
        if (!prop) unresolved("property", c.property, names_of(level->properties));
        if (c.values.empty() || (c.op != CompareOp::In && c.values.size() != 1))
            throw QueryError("invalid-query", "condition on " + c.level + "." + c.property + " has " +
                                                  std::to_string(c.values.size()) + " values");
        ResolvedCondition rc{level, prop, c.op, {}};
        for (const auto& v : c.values) {
            auto typed = coerce(v, prop->type);
            if (!typed)
                throw QueryError("invalid-query", "value " + v.to_literal() + " is not a valid " +
                                                      std::string(to_string(prop->type)) + " for " + c.level + "." +
                                                      c.property);
            rc.values.push_back(std::move(*typed));
        }
        (on_target ? target_conds : bottom_conds)[owner].push_back(std::move(rc));
    }

    auto mention = [](const Level* level, std::vector<ResolvedCondition> conds) {
        MentionedLevel m;
        m.level = level;
        m.conditions = std::move(conds);
        m.columns = level->key;
        for (const auto& p : level->properties)
            if (is_name_like(p.name) && std::find(level->key.begin(), level->key.end(), p.name) == level->key.end())
                m.columns.push_back(p.name);
        return m;
    };
    for (auto& d : out.dimensions) {
        const bool bottom_mentioned = bottom_conds.count(&d) || (options.keepBottomGrain && !d.target);
        if (bottom_mentioned) d.mentioned.push_back(mention(d.bottom, bottom_conds[&d]));
        if (d.target) d.mentioned.push_back(mention(d.target, target_conds[&d]));
    }
    std::map<std::string, int> uses;
    for (const auto& d : out.dimensions)
        for (const auto& m : d.mentioned) ++uses[m.level->name];
    for (auto& d : out.dimensions)
        for (auto& m : d.mentioned)
            m.prefix = (uses[m.level->name] > 1 ? d.dimension->name + "." : "") + m.level->name + ".";
    return out;
}

// ---------------------------------------------------------------- results

nlohmann::json result_to_json(const Relation& result) {
    nlohmann::json columns = nlohmann::json::array();
    for (const auto& c : result.schema) columns.push_back({{"name", c.name}, {"type", to_string(c.type)}});
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : result.sorted().rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& v : row) r.push_back(value_to_json(v));
        rows.push_back(std::move(r));
    }
    return {{"apiVersion", 1}, {"columns", std::move(columns)}, {"rows", std::move(rows)}};
}

std::string format_table(const Relation& result) {
    const Relation sorted = result.sorted();
    std::vector<std::size_t> width;
    for (const auto& c : sorted.schema) width.push_back(c.name.size());
    auto cell = [](const Value& v) { return v.is_null() ? std::string("NULL") : v.to_string(); };
    for (const auto& row : sorted.rows)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], cell(row[i]).size());
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out += cells[i];
            if (i + 1 < cells.size()) out += std::string(width[i] - cells[i].size() + 2, ' ');
        }
        out += "\n";
    };
    std::vector<std::string> header;
    std::vector<std::string> rule;
    for (std::size_t i = 0; i < sorted.schema.size(); ++i) {
        header.push_back(sorted.schema[i].name);
        rule.push_back(std::string(width[i], '-'));
    }
    line(header);
    line(rule);
    for (const auto& row : sorted.rows) {
        std::vector<std::string> cells;
        for (const auto& v : row) cells.push_back(cell(v));
        line(cells);
    }
    out += "(" + std::to_string(sorted.rows.size()) + (sorted.rows.size() == 1 ? " row)\n" : " rows)\n");
    return out;
}

}  // namespace cim
