#include "cim/parser.hpp"

#include <algorithm>

#include "cim/errors.hpp"
#include "cim/xml.hpp"

namespace cim {

namespace {

using xml::Element;

class Reader {
public:
    explicit Reader(ParseOptions options) : options_(options) {}

    [[noreturn]] void fail(const Element& e, const std::string& message) const {
        throw ParseError(message, e.line, e.column);
    }

    void check_attributes(const Element& e, std::initializer_list<std::string_view> allowed) const {
        if (!options_.strict) return;
        for (const auto& [k, _] : e.attributes)
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                fail(e, "unknown attribute '" + k + "' on <" + e.name + ">");
    }

    void unknown_child(const Element& child) const {
        if (options_.strict) fail(child, "unknown element <" + child.name + ">");
    }

    void expect_root(const Element& e, std::string_view name) const {
        if (e.name != name) fail(e, "expected root element <" + std::string(name) + ">, found <" + e.name + ">");
    }

    std::string required(const Element& e, std::string_view key) const {
        if (const auto* v = e.attribute(key)) return *v;
        fail(e, "missing attribute '" + std::string(key) + "' on <" + e.name + ">");
    }

    std::string optional(const Element& e, std::string_view key, std::string fallback = {}) const {
        if (const auto* v = e.attribute(key)) return *v;
        return fallback;
    }

    DataType type(const Element& e) const {
        const std::string t = required(e, "type");
        if (auto dt = parse_data_type(t)) return *dt;
        fail(e, "type mismatch: '" + t + "' is not a datatype");
    }

    Cardinality cardinality(const Element& e, std::string_view key, Cardinality fallback) const {
        const auto* v = e.attribute(key);
        if (!v) return fallback;
        if (auto c = Cardinality::parse(*v)) return *c;
        fail(e, "type mismatch: '" + *v + "' is not a cardinality of the form (0|1,1|n)");
    }

    Property property(const Element& e) const {
        check_attributes(e, {"name", "type"});
        for (const auto& c : e.children) unknown_child(c);
        return {required(e, "name"), type(e)};
    }

private:
    ParseOptions options_;
};

// ---------------------------------------------------------------- CDL

Level read_level(const Reader& r, const Element& e) {
    r.check_attributes(e, {"name"});
    Level level{r.required(e, "name"), {}, {}};
    for (const auto& c : e.children) {
        if (c.name == "property") level.properties.push_back(r.property(c));
        else if (c.name == "key") {
            r.check_attributes(c, {"property"});
            level.key.push_back(r.required(c, "property"));
        } else r.unknown_child(c);
    }
    return level;
}

Dimension read_dimension(const Reader& r, const Element& e) {
    r.check_attributes(e, {"name", "bottomLevel"});
    Dimension d{r.required(e, "name"), r.required(e, "bottomLevel"), {}};
    for (const auto& c : e.children) {
        if (c.name == "hierarchy") {
            r.check_attributes(c, {"name"});
            d.hierarchies.push_back(r.required(c, "name"));
        } else r.unknown_child(c);
    }
    return d;
}

Hierarchy read_hierarchy(const Reader& r, const Element& e) {
    r.check_attributes(e, {"name"});
    Hierarchy h{r.required(e, "name"), {}};
    for (const auto& c : e.children) {
        if (c.name != "parentChild") {
            r.unknown_child(c);
            continue;
        }
        r.check_attributes(c, {"child", "parent", "childCard", "parentCard", "exclusiveGroup"});
        ParentChildRel rel;
        rel.child = r.required(c, "child");
        rel.parent = r.required(c, "parent");
        rel.childCard = r.cardinality(c, "childCard", {1, true});
        rel.parentCard = r.cardinality(c, "parentCard", {1, false});
        if (const auto* g = c.attribute("exclusiveGroup")) rel.exclusiveGroup = *g;
        h.relationships.push_back(std::move(rel));
    }
    return h;
}

FactRelationship read_fact(const Reader& r, const Element& e) {
    r.check_attributes(e, {"name"});
    FactRelationship f{r.required(e, "name"), {}, {}, {}};
    for (const auto& c : e.children) {
        if (c.name == "role") {
            r.check_attributes(c, {"name", "dimension"});
            f.roles.push_back({r.required(c, "name"), r.required(c, "dimension")});
        } else if (c.name == "measure") f.measures.push_back(r.property(c));
        else if (c.name == "property") f.properties.push_back(r.property(c));
        else r.unknown_child(c);
    }
    return f;
}

// ---------------------------------------------------------------- SDL

std::vector<std::string> read_column_refs(const Reader& r, const Element& e,
                                          std::vector<std::string>* targets) {
    std::vector<std::string> out;
    for (const auto& c : e.children) {
        if (c.name != "columnRef") {
            r.unknown_child(c);
            continue;
        }
        if (targets) {
            r.check_attributes(c, {"name", "target"});
            targets->push_back(r.required(c, "target"));
        } else {
            r.check_attributes(c, {"name"});
        }
        out.push_back(r.required(c, "name"));
    }
    return out;
}

Table read_table(const Reader& r, const Element& e) {
    r.check_attributes(e, {"name"});
    Table t{r.required(e, "name"), {}, {}, {}};
    for (const auto& c : e.children) {
        if (c.name == "column") {
            r.check_attributes(c, {"name", "type"});
            for (const auto& g : c.children) r.unknown_child(g);
            t.columns.push_back({r.required(c, "name"), r.type(c)});
        } else if (c.name == "primaryKey") {
            r.check_attributes(c, {});
            auto cols = read_column_refs(r, c, nullptr);
            t.primaryKey.insert(t.primaryKey.end(), cols.begin(), cols.end());
        } else if (c.name == "foreignKey") {
            r.check_attributes(c, {"table"});
            ForeignKey fk;
            fk.table = r.required(c, "table");
            fk.columns = read_column_refs(r, c, &fk.targetColumns);
            t.foreignKeys.push_back(std::move(fk));
        } else r.unknown_child(c);
    }
    return t;
}

// ---------------------------------------------------------------- MDL

MappingFragment read_fragment(const Reader& r, const Element& e, FragmentKind kind) {
    const char* entity_attr = kind == FragmentKind::Level ? "level" : "factRelationship";
    r.check_attributes(e, {"name", entity_attr, "table"});
    MappingFragment f;
    f.kind = kind;
    f.name = r.optional(e, "name");
    f.entity = r.required(e, entity_attr);
    f.table = r.required(e, "table");
    for (const auto& c : e.children) {
        if (c.name == "property-mapping") {
            r.check_attributes(c, {"property", "column", "role"});
            for (const auto& g : c.children) r.unknown_child(g);
            f.propertyMappings.push_back({r.required(c, "property"), r.required(c, "column"), r.optional(c, "role")});
        } else if (c.name == "condition") {
            r.check_attributes(c, {"column", "operator"});
            Condition cond;
            cond.column = r.required(c, "column");
            const std::string op = r.optional(c, "operator", "equals");
            if (op == "equals") cond.op = ConditionOp::Equals;
            else if (op == "in") cond.op = ConditionOp::In;
            else r.fail(c, "type mismatch: unknown condition operator '" + op + "'");
            for (const auto& v : c.children) {
                if (v.name == "value") {
                    r.check_attributes(v, {});
                    cond.values.push_back(v.text);
                } else r.unknown_child(v);
            }
            f.conditions.push_back(std::move(cond));
        } else r.unknown_child(c);
    }
    return f;
}

const Element* find_child(const Element& e, std::string_view name) {
    for (const auto& c : e.children)
        if (c.name == name) return &c;
    return nullptr;
}

}  // namespace

CdlModel parse_cdl(std::string_view document, ParseOptions options) {
    const Reader r(options);
    const Element root = xml::parse(document);
    r.expect_root(root, "cdlModel");
    r.check_attributes(root, {"name"});
    CdlModel m;
    m.name = r.optional(root, "name");
    for (const char* required : {"levelSet", "dimensionSet", "factRelationshipSet"})
        if (!find_child(root, required)) r.fail(root, std::string("missing required <") + required + ">");
    for (const auto& set : root.children) {
        r.check_attributes(set, {});
        auto each = [&](std::string_view item, auto&& read) {
            for (const auto& c : set.children) {
                if (c.name == item) read(c);
                else r.unknown_child(c);
            }
        };
        if (set.name == "levelSet") each("level", [&](const Element& c) { m.levels.push_back(read_level(r, c)); });
        else if (set.name == "dimensionSet")
            each("dimension", [&](const Element& c) { m.dimensions.push_back(read_dimension(r, c)); });
        else if (set.name == "hierarchySet")
            each("hierarchy", [&](const Element& c) { m.hierarchies.push_back(read_hierarchy(r, c)); });
        else if (set.name == "factRelationshipSet")
            each("factRelationship", [&](const Element& c) { m.factRelationships.push_back(read_fact(r, c)); });
        else r.unknown_child(set);
    }
    return m;
}

SdlModel parse_sdl(std::string_view document, ParseOptions options) {
    const Reader r(options);
    const Element root = xml::parse(document);
    r.expect_root(root, "sdlModel");
    r.check_attributes(root, {"name"});
    SdlModel m;
    m.name = r.optional(root, "name");
    for (const auto& set : root.children) {
        std::vector<Table>* target = set.name == "factTableSet"        ? &m.factTables
                                     : set.name == "dimensionTableSet" ? &m.dimensionTables
                                                                       : nullptr;
        if (!target) {
            r.unknown_child(set);
            continue;
        }
        r.check_attributes(set, {});
        for (const auto& c : set.children) {
            if (c.name == "table") target->push_back(read_table(r, c));
            else r.unknown_child(c);
        }
    }
    return m;
}

MdlModel parse_mdl(std::string_view document, ParseOptions options) {
    const Reader r(options);
    const Element root = xml::parse(document);
    r.expect_root(root, "mdlModel");
    r.check_attributes(root, {});
    MdlModel m;
    for (const auto& c : root.children) {
        if (c.name == "level-mapping") m.fragments.push_back(read_fragment(r, c, FragmentKind::Level));
        else if (c.name == "factrel-mapping")
            m.fragments.push_back(read_fragment(r, c, FragmentKind::FactRelationship));
        else r.unknown_child(c);
    }
    return m;
}

AnyModel parse(DocumentKind kind, std::string_view document, ParseOptions options) {
    switch (kind) {
        case DocumentKind::CDL: return parse_cdl(document, options);
        case DocumentKind::SDL: return parse_sdl(document, options);
        case DocumentKind::MDL: return parse_mdl(document, options);
    }
    throw Error("unknown document kind");
}

// ---------------------------------------------------------------- serialize

std::string serialize(const CdlModel& model) {
    xml::Writer w;
    w.open("cdlModel", {{"name", model.name}});
    w.open("levelSet");
    for (const auto& l : model.levels) {
        w.open("level", {{"name", l.name}});
        for (const auto& p : l.properties) w.leaf("property", {{"name", p.name}, {"type", to_string(p.type)}});
        for (const auto& k : l.key) w.leaf("key", {{"property", k}});
        w.close();
    }
    w.close();
    w.open("dimensionSet");
    for (const auto& d : model.dimensions) {
        if (d.hierarchies.empty()) {
            w.leaf("dimension", {{"name", d.name}, {"bottomLevel", d.bottomLevel}});
            continue;
        }
        w.open("dimension", {{"name", d.name}, {"bottomLevel", d.bottomLevel}});
        for (const auto& h : d.hierarchies) w.leaf("hierarchy", {{"name", h}});
        w.close();
    }
    w.close();
    if (!model.hierarchies.empty()) {
        w.open("hierarchySet");
        for (const auto& h : model.hierarchies) {
            w.open("hierarchy", {{"name", h.name}});
            for (const auto& r : h.relationships) {
                const std::string cc = r.childCard.to_string();
                const std::string pc = r.parentCard.to_string();
                if (r.exclusiveGroup)
                    w.leaf("parentChild", {{"child", r.child}, {"parent", r.parent}, {"childCard", cc},
                                           {"parentCard", pc}, {"exclusiveGroup", *r.exclusiveGroup}});
                else
                    w.leaf("parentChild",
                           {{"child", r.child}, {"parent", r.parent}, {"childCard", cc}, {"parentCard", pc}});
            }
            w.close();
        }
        w.close();
    }
    w.open("factRelationshipSet");
    for (const auto& f : model.factRelationships) {
        w.open("factRelationship", {{"name", f.name}});
        for (const auto& r : f.roles) w.leaf("role", {{"name", r.name}, {"dimension", r.dimension}});
        for (const auto& p : f.measures) w.leaf("measure", {{"name", p.name}, {"type", to_string(p.type)}});
        for (const auto& p : f.properties) w.leaf("property", {{"name", p.name}, {"type", to_string(p.type)}});
        w.close();
    }
    w.close();
    w.close();
    return w.str();
}

std::string serialize(const SdlModel& model) {
    xml::Writer w;
    w.open("sdlModel", {{"name", model.name}});
    auto tables = [&](std::string_view set, const std::vector<Table>& ts) {
        w.open(set);
        for (const auto& t : ts) {
            w.open("table", {{"name", t.name}});
            for (const auto& c : t.columns) w.leaf("column", {{"name", c.name}, {"type", to_string(c.type)}});
            w.open("primaryKey");
            for (const auto& c : t.primaryKey) w.leaf("columnRef", {{"name", c}});
            w.close();
            for (const auto& fk : t.foreignKeys) {
                w.open("foreignKey", {{"table", fk.table}});
                for (std::size_t i = 0; i < fk.columns.size(); ++i)
                    w.leaf("columnRef", {{"name", fk.columns[i]},
                                         {"target", i < fk.targetColumns.size() ? fk.targetColumns[i] : ""}});
                w.close();
            }
            w.close();
        }
        w.close();
    };
    tables("factTableSet", model.factTables);
    tables("dimensionTableSet", model.dimensionTables);
    w.close();
    return w.str();
}

std::string serialize(const MdlModel& model) {
    xml::Writer w;
    w.open("mdlModel");
    for (const auto& f : model.fragments) {
        const bool level = f.kind == FragmentKind::Level;
        const char* tag = level ? "level-mapping" : "factrel-mapping";
        const char* entity_attr = level ? "level" : "factRelationship";
        if (f.name.empty()) w.open(tag, {{entity_attr, f.entity}, {"table", f.table}});
        else w.open(tag, {{"name", f.name}, {entity_attr, f.entity}, {"table", f.table}});
        for (const auto& pm : f.propertyMappings) {
            if (pm.role.empty()) w.leaf("property-mapping", {{"property", pm.property}, {"column", pm.column}});
            else
                w.leaf("property-mapping", {{"role", pm.role}, {"property", pm.property}, {"column", pm.column}});
        }
        for (const auto& c : f.conditions) {
            w.open("condition", {{"column", c.column}, {"operator", c.op == ConditionOp::In ? "in" : "equals"}});
            for (const auto& v : c.values) w.text_element("value", v);
            w.close();
        }
        w.close();
    }
    w.close();
    return w.str();
}

}  // namespace cim
