#include "cim/model.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <tuple>

namespace cim {

namespace {

template <typename T>
const T* find_named(const std::vector<T>& items, std::string_view name) {
    auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.name == name; });
    return it == items.end() ? nullptr : &*it;
}

class Sink {
public:
    void error(std::string code, std::string path, std::string message) {
        out_.push_back({std::move(code), Severity::Error, std::move(path), std::move(message)});
    }
    std::vector<Diagnostic> take() {
        std::sort(out_.begin(), out_.end(), [](const Diagnostic& a, const Diagnostic& b) {
            return std::tie(a.path, a.code, a.message) < std::tie(b.path, b.code, b.message);
        });
        out_.erase(std::unique(out_.begin(), out_.end()), out_.end());
        return std::move(out_);
    }

private:
    std::vector<Diagnostic> out_;
};

template <typename T>
void check_unique_names(const std::vector<T>& items, const std::string& path, std::string_view what,
                        Sink& sink) {
    std::map<std::string, int> seen;
    for (const auto& x : items) ++seen[x.name];
    for (const auto& [name, n] : seen)
        if (n > 1)
            sink.error("duplicate-name", path + "[" + name + "]",
                       "duplicate " + std::string(what) + " name '" + name + "'");
}

std::string level_path(const std::string& name) { return "cdl/level[" + name + "]"; }

}  // namespace

std::string to_string(const Diagnostic& d) {
    return std::string(d.severity == Severity::Error ? "error" : "warning") + " [" + d.code + "] " +
           d.path + ": " + d.message;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

// ---------------------------------------------------------------- lookups

const Property* Level::find_property(std::string_view property) const {
    return find_named(properties, property);
}

std::string Cardinality::to_string() const {
    return "(" + std::to_string(min) + "," + (many ? "n" : "1") + ")";
}

std::optional<Cardinality> Cardinality::parse(std::string_view text) {
    if (text.size() != 5 || text[0] != '(' || text[2] != ',' || text[4] != ')') return std::nullopt;
    if (text[1] != '0' && text[1] != '1') return std::nullopt;
    if (text[3] != '1' && text[3] != 'n') return std::nullopt;
    return Cardinality{static_cast<unsigned>(text[1] - '0'), text[3] == 'n'};
}

const Role* FactRelationship::find_role(std::string_view role) const { return find_named(roles, role); }

const Role* FactRelationship::role_for_dimension(std::string_view dimension) const {
    auto it = std::find_if(roles.begin(), roles.end(),
                           [&](const Role& r) { return r.dimension == dimension; });
    return it == roles.end() ? nullptr : &*it;
}

const Property* FactRelationship::find_measure(std::string_view measure) const {
    return find_named(measures, measure);
}

const Property* FactRelationship::find_attribute(std::string_view name) const {
    if (const auto* m = find_named(measures, name)) return m;
    return find_named(properties, name);
}

const Level* CdlModel::find_level(std::string_view level) const { return find_named(levels, level); }
const Dimension* CdlModel::find_dimension(std::string_view d) const { return find_named(dimensions, d); }
const Hierarchy* CdlModel::find_hierarchy(std::string_view h) const { return find_named(hierarchies, h); }
const FactRelationship* CdlModel::find_fact(std::string_view f) const {
    return find_named(factRelationships, f);
}

std::vector<ParentChildRel> CdlModel::relationships() const {
    std::vector<ParentChildRel> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& h : hierarchies)
        for (const auto& r : h.relationships)
            if (seen.emplace(r.child, r.parent).second) out.push_back(r);
    return out;
}

const ParentChildRel* CdlModel::find_relationship(std::string_view child, std::string_view parent) const {
    for (const auto& h : hierarchies)
        for (const auto& r : h.relationships)
            if (r.child == child && r.parent == parent) return &r;
    return nullptr;
}

std::vector<ParentChildRel> CdlModel::dimension_relationships(const Dimension& dimension) const {
    std::vector<ParentChildRel> pool;
    if (dimension.hierarchies.empty()) {
        pool = relationships();
    } else {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& name : dimension.hierarchies)
            if (const auto* h = find_hierarchy(name))
                for (const auto& r : h->relationships)
                    if (seen.emplace(r.child, r.parent).second) pool.push_back(r);
    }
    // Keep only relationships reachable upward from the bottom level.
    std::set<std::string> reached{dimension.bottomLevel};
    std::deque<std::string> frontier{dimension.bottomLevel};
    while (!frontier.empty()) {
        const std::string level = frontier.front();
        frontier.pop_front();
        for (const auto& r : pool)
            if (r.child == level && reached.insert(r.parent).second) frontier.push_back(r.parent);
    }
    std::vector<ParentChildRel> out;
    for (const auto& r : pool)
        if (reached.count(r.child)) out.push_back(r);
    return out;
}

std::vector<ParentChildRel> CdlModel::exclusive_group(std::string_view group) const {
    std::vector<ParentChildRel> out;
    for (const auto& r : relationships())
        if (r.exclusiveGroup && *r.exclusiveGroup == group) out.push_back(r);
    return out;
}

const Column* Table::find_column(std::string_view column) const { return find_named(columns, column); }

std::optional<std::size_t> Table::column_index(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == column) return i;
    return std::nullopt;
}

const Table* SdlModel::find_table(std::string_view table) const {
    if (const auto* t = find_named(factTables, table)) return t;
    return find_named(dimensionTables, table);
}

std::vector<const Table*> SdlModel::tables() const {
    std::vector<const Table*> out;
    for (const auto& t : factTables) out.push_back(&t);
    for (const auto& t : dimensionTables) out.push_back(&t);
    return out;
}

const PropertyMapping* MappingFragment::mapping_for(std::string_view property) const {
    for (const auto& m : propertyMappings)
        if (m.role.empty() && m.property == property) return &m;
    return nullptr;
}

const PropertyMapping* MappingFragment::role_mapping_for(std::string_view role,
                                                         std::string_view property) const {
    for (const auto& m : propertyMappings)
        if (m.role == role && m.property == property) return &m;
    return nullptr;
}

std::vector<const MappingFragment*> MdlModel::fragments_for(FragmentKind kind,
                                                            std::string_view entity) const {
    std::vector<const MappingFragment*> out;
    for (const auto& f : fragments)
        if (f.kind == kind && f.entity == entity) out.push_back(&f);
    return out;
}

// ---------------------------------------------------------------- CDL validation

std::vector<Diagnostic> validate_cdl(const CdlModel& model) {
    Sink sink;
    check_unique_names(model.levels, "cdl/level", "level", sink);
    check_unique_names(model.dimensions, "cdl/dimension", "dimension", sink);
    check_unique_names(model.hierarchies, "cdl/hierarchy", "hierarchy", sink);
    check_unique_names(model.factRelationships, "cdl/factRelationship", "fact relationship", sink);

    for (const auto& level : model.levels) {
        const std::string path = level_path(level.name);
        check_unique_names(level.properties, path + "/property", "property", sink);
        if (level.key.empty()) sink.error("empty-key", path, "level has no key");
        for (const auto& k : level.key)
            if (!level.find_property(k))
                sink.error("key-not-a-property", path + "/key[" + k + "]",
                           "key not a property: '" + k + "' is not a property of level '" +
                               level.name + "'");
    }

    for (const auto& h : model.hierarchies) {
        const std::string path = "cdl/hierarchy[" + h.name + "]";
        if (h.relationships.empty()) {
            sink.error("empty-hierarchy", path, "hierarchy has no parent-child relationships");
            continue;
        }
        std::set<std::pair<std::string, std::string>> pairs;
        std::map<std::string, std::set<std::string>> up;
        for (const auto& r : h.relationships) {
            const std::string rpath = path + "/parentChild[" + r.id() + "]";
            if (!model.find_level(r.child))
                sink.error("unresolved-level", rpath, "unresolved child level '" + r.child + "'");
            if (!model.find_level(r.parent))
                sink.error("unresolved-level", rpath, "unresolved parent level '" + r.parent + "'");
            if (r.child == r.parent)
                sink.error("self-relationship", rpath, "child and parent level are the same");
            if (!pairs.emplace(r.child, r.parent).second)
                sink.error("duplicate-relationship", rpath, "relationship declared twice");
            up[r.child].insert(r.parent);
        }
        // Connectivity (undirected) over the relationship endpoints.
        std::map<std::string, std::set<std::string>> adj;
        for (const auto& r : h.relationships) {
            adj[r.child].insert(r.parent);
            adj[r.parent].insert(r.child);
        }
        std::set<std::string> seen{h.relationships.front().child};
        std::deque<std::string> q{h.relationships.front().child};
        while (!q.empty()) {
            auto cur = q.front();
            q.pop_front();
            for (const auto& n : adj[cur])
                if (seen.insert(n).second) q.push_back(n);
        }
        if (seen.size() != adj.size())
            sink.error("hierarchy-disconnected", path, "relationships do not form a connected graph");
        // Acyclicity via DFS colouring.
        std::map<std::string, int> colour;
        bool cyclic = false;
        auto visit = [&](auto&& self, const std::string& n) -> void {
            colour[n] = 1;
            for (const auto& p : up[n]) {
                if (colour[p] == 1) cyclic = true;
                else if (colour[p] == 0) self(self, p);
            }
            colour[n] = 2;
        };
        for (const auto& [n, _] : adj)
            if (colour[n] == 0) visit(visit, n);
        if (cyclic) sink.error("hierarchy-cycle", path, "child-to-parent relationships contain a cycle");
    }

    // Relationship declared in several hierarchies must agree.
    std::map<std::pair<std::string, std::string>, const ParentChildRel*> first;
    for (const auto& h : model.hierarchies)
        for (const auto& r : h.relationships) {
            auto [it, inserted] = first.emplace(std::pair{r.child, r.parent}, &r);
            if (!inserted && !(*it->second == r))
                sink.error("conflicting-relationship", "cdl/hierarchy[" + h.name + "]/parentChild[" + r.id() + "]",
                           "relationship redeclared with different cardinality or exclusive group");
        }

    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& r : model.relationships())
        if (r.exclusiveGroup) groups[*r.exclusiveGroup].push_back(r.id());
    for (const auto& [g, members] : groups)
        if (members.size() < 2)
            sink.error("singleton-exclusive-group", "cdl/exclusiveGroup[" + g + "]",
                       "exclusive group has a single relationship (" + members.front() + ")");

    for (const auto& d : model.dimensions) {
        const std::string path = "cdl/dimension[" + d.name + "]";
        if (!model.find_level(d.bottomLevel))
            sink.error("unresolved-bottom-level", path,
                       "unresolved bottomLevel '" + d.bottomLevel + "'");
        for (const auto& hn : d.hierarchies) {
            const Hierarchy* h = model.find_hierarchy(hn);
            if (!h) {
                sink.error("unresolved-hierarchy", path + "/hierarchy[" + hn + "]",
                           "unresolved hierarchy '" + hn + "'");
            } else if (!h->relationships.empty() && h->relationships.front().child != d.bottomLevel) {
                sink.error("hierarchy-not-at-bottom", path + "/hierarchy[" + hn + "]",
                           "hierarchy '" + hn + "' does not start at bottom level '" + d.bottomLevel + "'");
            }
        }
    }

    for (const auto& f : model.factRelationships) {
        const std::string path = "cdl/factRelationship[" + f.name + "]";
        if (f.roles.size() < 2) sink.error("too-few-roles", path, "fact relationship needs at least two roles");
        check_unique_names(f.roles, path + "/role", "role", sink);
        std::map<std::string, int> dims;
        for (const auto& r : f.roles) {
            if (!model.find_dimension(r.dimension))
                sink.error("unresolved-dimension", path + "/role[" + r.name + "]",
                           "unresolved dimension '" + r.dimension + "'");
            ++dims[r.dimension];
        }
        for (const auto& [dim, n] : dims)
            if (n > 1)
                sink.error("duplicate-role-dimension", path + "/role",
                           "dimension '" + dim + "' plays more than one role");
        std::vector<Property> attrs = f.measures;
        attrs.insert(attrs.end(), f.properties.begin(), f.properties.end());
        check_unique_names(attrs, path + "/measure", "measure or property", sink);
    }
    return sink.take();
}

// ---------------------------------------------------------------- SDL validation

std::vector<Diagnostic> validate_sdl(const SdlModel& model) {
    Sink sink;
    std::vector<Table> all = model.factTables;
    all.insert(all.end(), model.dimensionTables.begin(), model.dimensionTables.end());
    check_unique_names(all, "sdl/table", "table", sink);

    for (const auto& t : all) {
        const std::string path = "sdl/table[" + t.name + "]";
        check_unique_names(t.columns, path + "/column", "column", sink);
        if (t.primaryKey.empty()) sink.error("missing-primary-key", path, "missing primary key");
        for (const auto& c : t.primaryKey)
            if (!t.find_column(c))
                sink.error("unknown-column", path + "/primaryKey[" + c + "]",
                           "primary key column '" + c + "' is not a column");
        for (std::size_t i = 0; i < t.foreignKeys.size(); ++i) {
            const ForeignKey& fk = t.foreignKeys[i];
            const std::string fpath = path + "/foreignKey[" + std::to_string(i) + "->" + fk.table + "]";
            for (const auto& c : fk.columns)
                if (!t.find_column(c))
                    sink.error("unknown-column", fpath, "foreign key column '" + c + "' is not a column");
            const Table* target = model.find_table(fk.table);
            if (!target) {
                sink.error("unknown-fk-table", fpath, "foreign key references unknown table '" + fk.table + "'");
                continue;
            }
            if (fk.columns.size() != fk.targetColumns.size() || fk.columns.empty()) {
                sink.error("fk-arity", fpath, "foreign key column lists differ in length");
                continue;
            }
            if (std::set(fk.targetColumns.begin(), fk.targetColumns.end()) !=
                    std::set(target->primaryKey.begin(), target->primaryKey.end()) ||
                fk.targetColumns.size() != target->primaryKey.size())
                sink.error("fk-target-not-primary-key", fpath,
                           "FK target not primary key of '" + fk.table + "'");
            for (std::size_t k = 0; k < fk.columns.size(); ++k) {
                const Column* local = t.find_column(fk.columns[k]);
                const Column* remote = target->find_column(fk.targetColumns[k]);
                if (!remote)
                    sink.error("unknown-column", fpath,
                               "target column '" + fk.targetColumns[k] + "' is not a column of '" + fk.table + "'");
                else if (local && local->type != remote->type)
                    sink.error("fk-type-mismatch", fpath,
                               "column '" + local->name + "' and '" + remote->name + "' differ in type");
            }
        }
    }
    return sink.take();
}

// ---------------------------------------------------------------- MDL validation

std::vector<Diagnostic> validate_mdl(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl) {
    Sink sink;
    std::map<std::string, int> names;
    for (const auto& f : mdl.fragments)
        if (!f.name.empty()) ++names[f.name];
    for (const auto& [n, c] : names)
        if (c > 1) sink.error("duplicate-name", "mdl/fragment[" + n + "]", "duplicate fragment name '" + n + "'");

    for (std::size_t i = 0; i < mdl.fragments.size(); ++i) {
        const MappingFragment& f = mdl.fragments[i];
        const std::string label = f.name.empty() ? f.entity + "@" + f.table : f.name;
        const std::string path = "mdl/fragment[" + label + "]";
        const bool is_level = f.kind == FragmentKind::Level;
        const Level* level = is_level ? cdl.find_level(f.entity) : nullptr;
        const FactRelationship* fact = is_level ? nullptr : cdl.find_fact(f.entity);
        if (!level && !fact)
            sink.error("unknown-entity", path,
                       std::string("unknown ") + (is_level ? "level" : "fact relationship") + " '" + f.entity + "'");
        const Table* table = sdl.find_table(f.table);
        if (!table) sink.error("unknown-table", path, "unknown table '" + f.table + "'");
        if (f.propertyMappings.empty())
            sink.error("empty-fragment", path, "fragment has no property mappings");

        std::set<std::pair<std::string, std::string>> mapped;
        for (const auto& pm : f.propertyMappings) {
            const std::string ppath = path + "/property-mapping[" + (pm.role.empty() ? "" : pm.role + ".") + pm.property + "]";
            if (!mapped.emplace(pm.role, pm.property).second)
                sink.error("duplicate-property-mapping", ppath, "property mapped twice in one fragment");
            const Property* prop = nullptr;
            if (!pm.role.empty()) {
                if (is_level) {
                    sink.error("unexpected-role", ppath, "role mappings are only valid in factrel-mapping");
                } else if (fact) {
                    const Role* role = fact->find_role(pm.role);
                    const Dimension* dim = role ? cdl.find_dimension(role->dimension) : nullptr;
                    const Level* bottom = dim ? cdl.find_level(dim->bottomLevel) : nullptr;
                    if (!role) sink.error("unknown-role", ppath, "unknown role '" + pm.role + "'");
                    else if (bottom) {
                        if (std::find(bottom->key.begin(), bottom->key.end(), pm.property) == bottom->key.end())
                            sink.error("unknown-property", ppath,
                                       "'" + pm.property + "' is not a key property of bottom level '" + bottom->name + "'");
                        else prop = bottom->find_property(pm.property);
                    }
                }
            } else if (level || fact) {
                prop = level ? level->find_property(pm.property) : fact->find_attribute(pm.property);
                if (!prop)
                    sink.error("unknown-property", ppath,
                               "'" + pm.property + "' is not a property of '" + f.entity + "'");
            }
            if (table) {
                const Column* col = table->find_column(pm.column);
                if (!col)
                    sink.error("unknown-column", ppath,
                               "unknown column '" + pm.column + "' in table '" + f.table + "'");
                else if (prop && prop->type != col->type)
                    sink.error("type-mismatch", ppath,
                               "property type " + std::string(to_string(prop->type)) + " differs from column type " +
                                   std::string(to_string(col->type)));
            }
        }

        for (const auto& c : f.conditions) {
            const std::string cpath = path + "/condition[" + c.column + "]";
            if (c.values.empty()) sink.error("empty-condition", cpath, "condition has no values");
            if (c.op == ConditionOp::Equals && c.values.size() > 1)
                sink.error("condition-arity", cpath, "'equals' condition takes exactly one value");
            if (!table) continue;
            const Column* col = table->find_column(c.column);
            if (!col) {
                sink.error("unknown-condition-column", cpath,
                           "unknown condition column '" + c.column + "' in table '" + f.table + "'");
                continue;
            }
            for (const auto& v : c.values)
                if (!parse_value(v, col->type))
                    sink.error("condition-type-mismatch", cpath,
                               "value '" + v + "' is not a valid " + std::string(to_string(col->type)));
        }
    }
    return sink.take();
}

std::vector<Diagnostic> validate_all(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl) {
    auto out = validate_cdl(cdl);
    auto s = validate_sdl(sdl);
    out.insert(out.end(), s.begin(), s.end());
    if (!has_errors(out)) {
        auto m = validate_mdl(cdl, sdl, mdl);
        out.insert(out.end(), m.begin(), m.end());
    }
    return out;
}

// ---------------------------------------------------------------- equivalence

namespace {

template <typename T>
std::vector<T> sorted_by_name(std::vector<T> v) {
    std::stable_sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.name < b.name; });
    return v;
}

auto fragment_key(const MappingFragment& f) {
    return std::tie(f.name, f.entity, f.table);
}

}  // namespace

bool equivalent(const CdlModel& a, const CdlModel& b) {
    return a.name == b.name && sorted_by_name(a.levels) == sorted_by_name(b.levels) &&
           sorted_by_name(a.dimensions) == sorted_by_name(b.dimensions) &&
           sorted_by_name(a.hierarchies) == sorted_by_name(b.hierarchies) &&
           sorted_by_name(a.factRelationships) == sorted_by_name(b.factRelationships);
}

bool equivalent(const SdlModel& a, const SdlModel& b) {
    return a.name == b.name && sorted_by_name(a.factTables) == sorted_by_name(b.factTables) &&
           sorted_by_name(a.dimensionTables) == sorted_by_name(b.dimensionTables);
}

bool equivalent(const MdlModel& a, const MdlModel& b) {
    auto sort = [](std::vector<MappingFragment> v) {
        std::stable_sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
            return fragment_key(x) < fragment_key(y);
        });
        return v;
    };
    return sort(a.fragments) == sort(b.fragments);
}

}  // namespace cim
