#include "cim/parser.hpp"

namespace cim {

using nlohmann::json;

std::string condition_label(const Condition& condition) {
    if (condition.op == ConditionOp::Equals && condition.values.size() == 1)
        return condition.column + " = " + condition.values.front();
    std::string s = condition.column + " ∈ {";
    for (std::size_t i = 0; i < condition.values.size(); ++i) {
        if (i) s += ',';
        s += condition.values[i];
    }
    return s + "}";
}

namespace {

json properties_json(const std::vector<Property>& props, const std::vector<std::string>& key = {}) {
    json out = json::array();
    for (const auto& p : props) {
        json j = {{"name", p.name}, {"type", std::string(to_string(p.type))}};
        if (!key.empty()) j["key"] = std::find(key.begin(), key.end(), p.name) != key.end();
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace

json export_graph_json(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl) {
    json nodes = json::array();
    json edges = json::array();

    for (const auto& l : cdl.levels)
        nodes.push_back({{"id", "level:" + l.name}, {"kind", "level"}, {"label", l.name},
                         {"properties", properties_json(l.properties, l.key)}});
    for (const auto& d : cdl.dimensions) {
        nodes.push_back({{"id", "dimension:" + d.name}, {"kind", "dimension"}, {"label", d.name}});
        edges.push_back({{"kind", "bottomLevel"}, {"source", "dimension:" + d.name},
                         {"target", "level:" + d.bottomLevel}, {"label", ""}});
        for (const auto& h : d.hierarchies)
            edges.push_back({{"kind", "hierarchy"}, {"source", "dimension:" + d.name},
                             {"target", "hierarchy:" + h}, {"label", ""}});
    }
    for (const auto& h : cdl.hierarchies) {
        // Hierarchy markers are drawn only when some dimension names them explicitly.
        const bool named = std::any_of(cdl.dimensions.begin(), cdl.dimensions.end(), [&](const Dimension& d) {
            return std::find(d.hierarchies.begin(), d.hierarchies.end(), h.name) != d.hierarchies.end();
        });
        json rels = json::array();
        for (const auto& r : h.relationships) rels.push_back(r.id());
        nodes.push_back({{"id", "hierarchy:" + h.name}, {"kind", "hierarchy"}, {"label", h.name},
                         {"explicit", named}, {"relationships", rels}});
    }
    for (const auto& r : cdl.relationships()) {
        edges.push_back({{"kind", "parentChild"},
                         {"source", "level:" + r.child},
                         {"target", "level:" + r.parent},
                         {"label", r.childCard.to_string() + "-" + r.parentCard.to_string()},
                         {"childCard", r.childCard.to_string()},
                         {"parentCard", r.parentCard.to_string()},
                         {"exclusiveGroup", r.exclusiveGroup ? json(*r.exclusiveGroup) : json(nullptr)}});
    }
    for (const auto& f : cdl.factRelationships) {
        nodes.push_back({{"id", "factRelationship:" + f.name}, {"kind", "factRelationship"}, {"label", f.name},
                         {"measures", properties_json(f.measures)}, {"properties", properties_json(f.properties)}});
        for (const auto& r : f.roles)
            edges.push_back({{"kind", "role"}, {"source", "factRelationship:" + f.name},
                             {"target", "dimension:" + r.dimension}, {"label", r.name}});
    }

    auto table_nodes = [&](const std::vector<Table>& tables, const char* kind) {
        for (const auto& t : tables) {
            json cols = json::array();
            for (const auto& c : t.columns)
                cols.push_back({{"name", c.name},
                                {"type", std::string(to_string(c.type))},
                                {"key", std::find(t.primaryKey.begin(), t.primaryKey.end(), c.name) != t.primaryKey.end()}});
            nodes.push_back({{"id", "table:" + t.name}, {"kind", "table"}, {"label", t.name},
                             {"tableKind", kind}, {"columns", cols}});
            for (const auto& fk : t.foreignKeys) {
                std::string label;
                for (const auto& c : fk.columns) label += (label.empty() ? "" : ",") + c;
                edges.push_back({{"kind", "foreignKey"}, {"source", "table:" + t.name},
                                 {"target", "table:" + fk.table}, {"label", label}});
            }
        }
    };
    table_nodes(sdl.factTables, "fact");
    table_nodes(sdl.dimensionTables, "dimension");

    for (const auto& f : mdl.fragments) {
        std::string label;
        for (const auto& c : f.conditions) label += (label.empty() ? "" : " ∧ ") + condition_label(c);
        json props = json::array();
        for (const auto& pm : f.propertyMappings) {
            json j = {{"property", pm.property}, {"column", pm.column}};
            if (!pm.role.empty()) j["role"] = pm.role;
            props.push_back(std::move(j));
        }
        const std::string source =
            (f.kind == FragmentKind::Level ? "level:" : "factRelationship:") + f.entity;
        edges.push_back({{"kind", "mapping"}, {"source", source}, {"target", "table:" + f.table},
                         {"fragment", f.name}, {"label", label}, {"propertyMappings", props}});
    }

    return {{"formatVersion", 1}, {"nodes", nodes}, {"edges", edges}};
}

}  // namespace cim
