#include "cim/compiler.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "cim/errors.hpp"

namespace cim {

std::string_view to_string(ViewKind kind) {
    switch (kind) {
        case ViewKind::Level: return "level";
        case ViewKind::ParentChild: return "parentChild";
        case ViewKind::FactRelationship: return "factRelationship";
    }
    return "";
}

std::string ViewTarget::id() const { return std::string(to_string(kind)) + ":" + name; }

namespace {

// ---------------------------------------------------------------- FK graph

struct Step {
    const Table* from;
    const Table* to;
    const ForeignKey* fk;
    bool forward;  ///< fk is declared on `from`

    /// Column pairs (from-side, to-side).
    std::vector<std::pair<std::string, std::string>> pairs() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (std::size_t i = 0; i < fk->columns.size(); ++i)
            out.emplace_back(forward ? fk->columns[i] : fk->targetColumns[i],
                             forward ? fk->targetColumns[i] : fk->columns[i]);
        return out;
    }
};

using Path = std::vector<Step>;

struct PathSearch {
    std::optional<std::size_t> length;  ///< nullopt: unreachable
    std::size_t count = 0;              ///< number of distinct shortest paths
    Path path;                          ///< set when count == 1
};

class JoinGraph {
public:
    explicit JoinGraph(const SdlModel& sdl) {
        for (const Table* t : sdl.tables()) {
            for (const auto& fk : t->foreignKeys) {
                const Table* target = sdl.find_table(fk.table);
                if (!target || target == t) continue;
                adj_[t].push_back({t, target, &fk, true});
                adj_[target].push_back({target, t, &fk, false});
            }
        }
    }

    PathSearch shortest(const Table* from, const Table* to) const {
        PathSearch out;
        if (from == to) {
            out.length = 0;
            out.count = 1;
            return out;
        }
        std::map<const Table*, std::size_t> dist{{from, 0}};
        std::map<const Table*, std::size_t> count{{from, 1}};
        std::map<const Table*, std::vector<const Step*>> pred;
        std::deque<const Table*> queue{from};
        while (!queue.empty()) {
            const Table* u = queue.front();
            queue.pop_front();
            auto it = adj_.find(u);
            if (it == adj_.end()) continue;
            for (const Step& s : it->second) {
                auto d = dist.find(s.to);
                if (d == dist.end()) {
                    dist[s.to] = dist[u] + 1;
                    count[s.to] = count[u];
                    pred[s.to].push_back(&s);
                    queue.push_back(s.to);
                } else if (d->second == dist[u] + 1) {
                    count[s.to] += count[u];
                    pred[s.to].push_back(&s);
                }
            }
        }
        auto d = dist.find(to);
        if (d == dist.end()) return out;
        out.length = d->second;
        out.count = count[to];
        if (out.count == 1) {
            for (const Table* v = to; v != from;) {
                const Step* s = pred[v].front();
                out.path.push_back(*s);
                v = s->from;
            }
            std::reverse(out.path.begin(), out.path.end());
        }
        return out;
    }

private:
    std::map<const Table*, std::vector<Step>> adj_;
};

// ---------------------------------------------------------------- level sources

/// One table's contribution to a level: rows filtered by `conditions`.
struct Unit {
    const Table* table = nullptr;
    std::vector<Condition> conditions;
    std::vector<PropertyMapping> mappings;
    std::vector<std::string> fragments;

    const PropertyMapping* mapping_for(std::string_view property) const {
        for (const auto& m : mappings)
            if (m.property == property) return &m;
        return nullptr;
    }
    std::set<std::string> properties() const {
        std::set<std::string> out;
        for (const auto& m : mappings) out.insert(m.property);
        return out;
    }
    bool maps_key(const Level& level) const {
        return std::all_of(level.key.begin(), level.key.end(),
                           [&](const std::string& k) { return mapping_for(k) != nullptr; });
    }
    /// True when the level key columns include the table's primary key, so each row is one member.
    bool key_is_unique(const Level& level) const {
        std::set<std::string> columns;
        for (const auto& k : level.key)
            if (const auto* m = mapping_for(k)) columns.insert(m->column);
        return std::all_of(table->primaryKey.begin(), table->primaryKey.end(),
                           [&](const std::string& c) { return columns.count(c) > 0; });
    }
};

/// Units joined along FK paths to the anchor (units[anchor]).
struct Alternative {
    std::vector<Unit> units;
    std::size_t anchor = 0;
    std::vector<Path> paths;  ///< paths[i]: anchor table to units[i] table (empty for the anchor)

    /// Units that map the full key and can therefore stand for the level's members.
    std::vector<const Unit*> anchors(const Level& level) const {
        std::vector<const Unit*> out;
        for (const auto& u : units)
            if (u.maps_key(level)) out.push_back(&u);
        return out;
    }
};

/// Members of a level: the bag union of its alternatives.
struct LevelSource {
    const Level* level = nullptr;
    std::vector<Alternative> alternatives;
};

std::string fragment_label(const MappingFragment& f, std::size_t index) {
    return f.name.empty() ? f.entity + "#" + std::to_string(index + 1) : f.name;
}

/// Body is replaced before the view is published.
ViewDefinition blank_view(ViewTarget target) { return {std::move(target), Plan::scan(""), {}, {}}; }

std::string level_path(const Level& level) { return "mdl/level[" + level.name + "]"; }

class Compiler {
public:
    Compiler(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl)
        : cdl_(cdl), sdl_(sdl), mdl_(mdl), graph_(sdl) {}

    CompileResult run() {
        std::vector<ViewDefinition> views;
        for (const auto& level : cdl_.levels)
            if (const LevelSource* src = source(level.name)) views.push_back(level_view(*src));
        for (const auto& rel : cdl_.relationships())
            if (auto v = parent_child_view(rel)) views.push_back(std::move(*v));
        for (const auto& fact : cdl_.factRelationships)
            if (auto v = fact_view(fact)) views.push_back(std::move(*v));
        std::sort(diags_.begin(), diags_.end());
        diags_.erase(std::unique(diags_.begin(), diags_.end()), diags_.end());
        return {ViewSet(std::move(views)), std::move(diags_)};
    }

private:
    void error(std::string code, std::string path, std::string message) {
        diags_.push_back({std::move(code), Severity::Error, std::move(path), std::move(message)});
    }
    void warning(std::string code, std::string path, std::string message) {
        diags_.push_back({std::move(code), Severity::Warning, std::move(path), std::move(message)});
    }

    // ------------------------------------------------------------ aliasing

    std::string fresh_prefix() { return "t" + std::to_string(alias_counter_++) + "."; }

    Plan aliased_scan(const Table& table, const std::string& prefix) const {
        std::vector<std::pair<std::string, std::string>> renames;
        for (const auto& c : table.columns) renames.emplace_back(c.name, prefix + c.name);
        return Plan::scan(table.name).rename(std::move(renames));
    }

    Predicate predicate(const std::vector<Condition>& conditions, const Table& table,
                        const std::string& prefix) const {
        Predicate out;
        for (const auto& c : conditions) {
            const Column* col = table.find_column(c.column);
            if (!col) throw PlanError("unknown condition column '" + c.column + "' on table " + table.name);
            Atom atom{prefix + c.column, c.op == ConditionOp::In ? CompareOp::In : CompareOp::Equals, {}};
            for (const auto& text : c.values) {
                auto v = parse_value(text, col->type);
                if (!v) throw PlanError("condition value '" + text + "' is not a " + std::string(to_string(col->type)));
                atom.values.push_back(std::move(*v));
            }
            out.push_back(std::move(atom));
        }
        return out;
    }

    Plan filtered_scan(const Unit& unit, const std::string& prefix) const {
        Plan p = aliased_scan(*unit.table, prefix);
        if (!unit.conditions.empty()) p = p.select(predicate(unit.conditions, *unit.table, prefix));
        return p;
    }

    /// Joins the tables of `path` onto `plan` (whose start table carries `start_prefix`).
    /// The last table is filtered by `last_conditions`. Returns the last table's prefix.
    std::string extend(Plan& plan, const std::string& start_prefix, const Path& path,
                       const std::vector<Condition>& last_conditions) {
        std::string prefix = start_prefix;
        for (std::size_t i = 0; i < path.size(); ++i) {
            const Step& s = path[i];
            const std::string next = fresh_prefix();
            Plan right = aliased_scan(*s.to, next);
            if (i + 1 == path.size() && !last_conditions.empty())
                right = right.select(predicate(last_conditions, *s.to, next));
            std::vector<std::pair<std::string, std::string>> on;
            for (const auto& [l, r] : s.pairs()) on.emplace_back(prefix + l, next + r);
            plan = plan.join(right, std::move(on));
            prefix = next;
        }
        return prefix;
    }

    // ------------------------------------------------------------ level analysis

    const LevelSource* source(const std::string& name) {
        if (auto it = sources_.find(name); it != sources_.end()) return it->second ? &*it->second : nullptr;
        auto& slot = sources_[name];
        slot = analyze(name);
        return slot ? &*slot : nullptr;
    }

    std::optional<LevelSource> analyze(const std::string& name) {
        const Level* level = cdl_.find_level(name);
        if (!level) return std::nullopt;
        const std::string path = level_path(*level);
        const auto fragments = mdl_.fragments_for(FragmentKind::Level, name);
        if (fragments.empty()) {
            error("unmapped-level", path, "unmapped level: no mapping fragment for level '" + name + "'");
            return std::nullopt;
        }

        // Same-table fragments: union when they map the same properties, else intersect.
        std::vector<std::vector<std::pair<const MappingFragment*, std::size_t>>> by_table;
        for (std::size_t i = 0; i < fragments.size(); ++i) {
            auto it = std::find_if(by_table.begin(), by_table.end(),
                                   [&](const auto& g) { return g.front().first->table == fragments[i]->table; });
            if (it == by_table.end()) by_table.push_back({{fragments[i], i}});
            else it->push_back({fragments[i], i});
        }
        std::vector<Unit> units;
        for (const auto& group : by_table) {
            auto to_unit = [&](const MappingFragment& f, std::size_t i) {
                Unit u;
                u.table = sdl_.find_table(f.table);
                u.conditions = f.conditions;
                u.mappings = f.propertyMappings;
                u.fragments = {fragment_label(f, i)};
                return u;
            };
            std::vector<Unit> separate;
            for (const auto& [f, i] : group) separate.push_back(to_unit(*f, i));
            const bool same = std::all_of(separate.begin(), separate.end(), [&](const Unit& u) {
                return u.properties() == separate.front().properties();
            });
            if (same) {
                for (auto& u : separate) units.push_back(std::move(u));
                continue;
            }
            Unit merged = std::move(separate.front());
            for (std::size_t k = 1; k < separate.size(); ++k) {
                Unit& u = separate[k];
                merged.conditions.insert(merged.conditions.end(), u.conditions.begin(), u.conditions.end());
                for (auto& m : u.mappings)
                    if (!merged.mapping_for(m.property)) merged.mappings.push_back(m);
                merged.fragments.push_back(u.fragments.front());
            }
            units.push_back(std::move(merged));
        }
        for (const auto& u : units)
            if (!u.table) return std::nullopt;  // validation reports unknown tables

        LevelSource src;
        src.level = level;
        const bool identical = std::all_of(units.begin(), units.end(), [&](const Unit& u) {
            return u.properties() == units.front().properties();
        });
        if (identical) {
            for (auto& u : units) {
                if (!u.maps_key(*level)) {
                    error("unmapped-key", path, "unmapped key: fragment " + u.fragments.front() +
                                                    " does not map every key property of '" + name + "'");
                    return std::nullopt;
                }
                Alternative alt;
                alt.units.push_back(std::move(u));
                alt.paths.emplace_back();
                src.alternatives.push_back(std::move(alt));
            }
            return src;
        }

        // Joined fragments must split the non-key properties between them.
        const std::set<std::string> key(level->key.begin(), level->key.end());
        std::map<std::string, std::string> owner;
        for (const auto& u : units) {
            for (const auto& p : u.properties()) {
                if (key.count(p)) continue;
                auto [it, fresh] = owner.emplace(p, u.fragments.front());
                if (!fresh) {
                    error("overlapping-fragments", path,
                          "fragments " + it->second + " and " + u.fragments.front() + " both map '" + p +
                              "' but map different property sets");
                    return std::nullopt;
                }
            }
        }
        Alternative alt;
        alt.units = std::move(units);
        auto anchor = std::find_if(alt.units.begin(), alt.units.end(),
                                   [&](const Unit& u) { return u.maps_key(*level); });
        if (anchor == alt.units.end()) {
            error("unmapped-key", path, "unmapped key: no fragment maps every key property of '" + name + "'");
            return std::nullopt;
        }
        alt.anchor = static_cast<std::size_t>(anchor - alt.units.begin());
        for (std::size_t i = 0; i < alt.units.size(); ++i) {
            if (i == alt.anchor) {
                alt.paths.emplace_back();
                continue;
            }
            PathSearch ps = graph_.shortest(alt.units[alt.anchor].table, alt.units[i].table);
            const std::string between = alt.units[alt.anchor].table->name + " and " + alt.units[i].table->name;
            if (!ps.length) {
                error("no-join-path", path, "no join path: no foreign-key path between " + between);
                return std::nullopt;
            }
            if (ps.count > 1) {
                error("ambiguous-join-path", path,
                      std::to_string(ps.count) + " foreign-key paths of length " + std::to_string(*ps.length) +
                          " between " + between);
                return std::nullopt;
            }
            alt.paths.push_back(std::move(ps.path));
        }
        src.alternatives.push_back(std::move(alt));
        return src;
    }

    // ------------------------------------------------------------ level views

    ViewDefinition level_view(const LevelSource& src) {
        const Level& level = *src.level;
        alias_counter_ = 0;
        ViewDefinition view = blank_view({ViewKind::Level, level.name, {}, {}});
        for (const auto& p : level.properties) view.columns.push_back({p.name, p.type});

        std::optional<Plan> body;
        for (const auto& alt : src.alternatives) {
            std::map<std::string, std::string> column_of;  // property -> prefixed column
            const std::string anchor_prefix = fresh_prefix();
            const Unit& anchor = alt.units[alt.anchor];
            Plan p = filtered_scan(anchor, anchor_prefix);
            for (const auto& m : anchor.mappings) column_of.emplace(m.property, anchor_prefix + m.column);
            for (std::size_t i = 0; i < alt.units.size(); ++i) {
                if (i == alt.anchor) continue;
                const Unit& u = alt.units[i];
                const std::string prefix = extend(p, anchor_prefix, alt.paths[i], u.conditions);
                for (const auto& m : u.mappings) column_of.emplace(m.property, prefix + m.column);
            }
            std::vector<ProjectItem> items;
            for (const auto& prop : level.properties) {
                auto it = column_of.find(prop.name);
                items.push_back({prop.name, it == column_of.end() ? std::nullopt : std::optional(it->second),
                                 prop.type});
            }
            p = p.project(std::move(items));
            if (alt.units.size() > 1 || !anchor.key_is_unique(level)) {
                std::vector<std::string> all;
                for (const auto& prop : level.properties) all.push_back(prop.name);
                p = p.distinct(std::move(all));
            }
            for (const auto& u : alt.units)
                view.fragments.insert(view.fragments.end(), u.fragments.begin(), u.fragments.end());
            body = body ? body->union_with(p) : p;
        }
        view.body = *body;
        return view;
    }

    // ------------------------------------------------------------ parent-child views

    struct AnchorChoice {
        const Unit* child = nullptr;
        const Unit* parent = nullptr;
        Path path;
    };

    std::optional<ViewDefinition> parent_child_view(const ParentChildRel& rel) {
        const std::string path = "cdl/parentChild[" + rel.id() + "]";
        const LevelSource* child = source(rel.child);
        const LevelSource* parent = source(rel.parent);
        if (!child || !parent) {
            warning("unmapped-relationship", path,
                    "relationship " + rel.id() + " has no view because '" + (child ? rel.parent : rel.child) +
                        "' is unmapped");
            return std::nullopt;
        }
        const Level& cl = *child->level;
        const Level& pl = *parent->level;

        alias_counter_ = 0;
        ViewDefinition view = blank_view({ViewKind::ParentChild, rel.id(), rel.child, rel.parent});
        for (const auto& k : cl.key) view.columns.push_back({cl.name + "." + k, cl.find_property(k)->type});
        for (const auto& k : pl.key) view.columns.push_back({pl.name + "." + k, pl.find_property(k)->type});

        std::optional<Plan> body;
        for (const auto& ca : child->alternatives) {
            for (const auto& pa : parent->alternatives) {
                std::optional<std::size_t> best;
                std::size_t ties = 0;
                AnchorChoice choice;
                for (const Unit* cu : ca.anchors(cl)) {
                    for (const Unit* pu : pa.anchors(pl)) {
                        PathSearch ps = graph_.shortest(cu->table, pu->table);
                        if (!ps.length) continue;
                        if (!best || *ps.length < *best) {
                            best = ps.length;
                            ties = ps.count;
                            choice = {cu, pu, ps.path};
                        } else if (*ps.length == *best) {
                            ties += ps.count;
                        }
                    }
                }
                if (!best) {
                    error("no-join-path", path,
                          "no join path: no foreign-key path links the tables of " + rel.child + " and " + rel.parent);
                    return std::nullopt;
                }
                if (ties > 1) {
                    error("ambiguous-join-path", path,
                          "several foreign-key paths of length " + std::to_string(*best) + " link " + rel.child +
                              " and " + rel.parent);
                    return std::nullopt;
                }
                const std::string cp = fresh_prefix();
                Plan p = filtered_scan(*choice.child, cp);
                std::string pp = cp;
                if (choice.path.empty()) {
                    if (!choice.parent->conditions.empty())
                        p = p.select(predicate(choice.parent->conditions, *choice.parent->table, cp));
                } else {
                    pp = extend(p, cp, choice.path, choice.parent->conditions);
                }
                std::vector<ProjectItem> items;
                for (const auto& k : cl.key)
                    items.push_back({cl.name + "." + k, cp + choice.child->mapping_for(k)->column,
                                     cl.find_property(k)->type});
                for (const auto& k : pl.key)
                    items.push_back({pl.name + "." + k, pp + choice.parent->mapping_for(k)->column,
                                     pl.find_property(k)->type});
                p = p.project(std::move(items));
                for (const Unit* u : {choice.child, choice.parent})
                    for (const auto& f : u->fragments)
                        if (std::find(view.fragments.begin(), view.fragments.end(), f) == view.fragments.end())
                            view.fragments.push_back(f);
                body = body ? body->union_with(p) : p;
            }
        }
        view.body = *body;
        return view;
    }

    // ------------------------------------------------------------ fact views

    std::optional<ViewDefinition> fact_view(const FactRelationship& fact) {
        const std::string path = "mdl/factrel[" + fact.name + "]";
        const auto fragments = mdl_.fragments_for(FragmentKind::FactRelationship, fact.name);
        if (fragments.empty()) {
            warning("unmapped-fact-relationship", path, "fact relationship '" + fact.name + "' has no mapping fragment");
            return std::nullopt;
        }
        if (fragments.size() > 1) {
            error("multi-fragment-fact", path,
                  "fact relationship '" + fact.name + "' is mapped by " + std::to_string(fragments.size()) +
                      " fragments; only one is supported");
            return std::nullopt;
        }
        const MappingFragment& f = *fragments.front();
        const Table* table = sdl_.find_table(f.table);
        if (!table) return std::nullopt;

        alias_counter_ = 0;
        ViewDefinition view = blank_view({ViewKind::FactRelationship, fact.name, {}, {}});
        view.fragments.push_back(fragment_label(f, 0));

        const std::string fp = fresh_prefix();
        Plan p = aliased_scan(*table, fp);
        if (!f.conditions.empty()) p = p.select(predicate(f.conditions, *table, fp));
        std::vector<ProjectItem> items;

        for (const auto& role : fact.roles) {
            const Dimension* dim = cdl_.find_dimension(role.dimension);
            const Level* bottom = dim ? cdl_.find_level(dim->bottomLevel) : nullptr;
            if (!bottom) return std::nullopt;
            const std::string rpath = path + "/role[" + role.name + "]";
            std::size_t explicit_count = 0;
            for (const auto& k : bottom->key) explicit_count += f.role_mapping_for(role.name, k) != nullptr;
            if (explicit_count == bottom->key.size()) {
                for (const auto& k : bottom->key)
                    items.push_back({role.name + "." + k, fp + f.role_mapping_for(role.name, k)->column,
                                     bottom->find_property(k)->type});
                continue;
            }
            if (explicit_count > 0) {
                error("unmapped-key", rpath, "unmapped key: role '" + role.name + "' maps only part of the key of " +
                                                 bottom->name);
                return std::nullopt;
            }
            auto columns = infer_role(p, fp, *table, role, *bottom, rpath);
            if (!columns) return std::nullopt;
            for (std::size_t i = 0; i < bottom->key.size(); ++i)
                items.push_back({role.name + "." + bottom->key[i], (*columns)[i],
                                 bottom->find_property(bottom->key[i])->type});
        }
        auto attribute = [&](const Property& prop) {
            const PropertyMapping* m = f.mapping_for(prop.name);
            items.push_back({prop.name, m ? std::optional(fp + m->column) : std::nullopt, prop.type});
        };
        for (const auto& m : fact.measures) attribute(m);
        for (const auto& a : fact.properties) attribute(a);
        for (const auto& item : items) view.columns.push_back({item.output, item.type});
        view.body = p.project(std::move(items));
        return view;
    }

    /// Resolves a role to bottom-level key columns by following FKs from the fact table
    /// to the table that identifies the bottom level's members.
    std::optional<std::vector<std::string>> infer_role(Plan& plan, const std::string& fp, const Table& table,
                                                       const Role& role, const Level& bottom,
                                                       const std::string& rpath) {
        const LevelSource* src = source(bottom.name);
        if (!src) {
            error("unmapped-level", rpath, "unmapped level: role '" + role.name + "' needs a mapping for " + bottom.name);
            return std::nullopt;
        }
        std::optional<std::size_t> best;
        std::size_t ties = 0;
        const Unit* anchor = nullptr;
        Path best_path;
        for (const auto& alt : src->alternatives) {
            for (const Unit* u : alt.anchors(bottom)) {
                PathSearch ps = graph_.shortest(&table, u->table);
                if (!ps.length) continue;
                if (!best || *ps.length < *best) {
                    best = ps.length;
                    ties = ps.count;
                    anchor = u;
                    best_path = ps.path;
                } else if (*ps.length == *best) {
                    ties += ps.count;
                }
            }
        }
        if (!best) {
            error("no-join-path", rpath,
                  "no join path: no foreign-key path from " + table.name + " to the table of " + bottom.name);
            return std::nullopt;
        }
        if (ties > 1) {
            error("ambiguous-join-path", rpath,
                  "several foreign-key paths of length " + std::to_string(*best) + " from " + table.name +
                      " to the table of " + bottom.name + "; map the role explicitly");
            return std::nullopt;
        }
        std::vector<std::string> out;
        if (best_path.empty()) {
            if (!anchor->conditions.empty()) plan = plan.select(predicate(anchor->conditions, table, fp));
            for (const auto& k : bottom.key) out.push_back(fp + anchor->mapping_for(k)->column);
            return out;
        }
        const std::string last = extend(plan, fp, best_path, anchor->conditions);
        for (const auto& k : bottom.key) out.push_back(last + anchor->mapping_for(k)->column);
        return out;
    }

    const CdlModel& cdl_;
    const SdlModel& sdl_;
    const MdlModel& mdl_;
    JoinGraph graph_;
    std::map<std::string, std::optional<LevelSource>> sources_;
    std::vector<Diagnostic> diags_;
    std::size_t alias_counter_ = 0;
};

nlohmann::json columns_json(const std::vector<Column>& columns) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : columns) out.push_back({{"name", c.name}, {"type", to_string(c.type)}});
    return out;
}

}  // namespace

// ---------------------------------------------------------------- ViewSet

ViewSet::ViewSet(std::vector<ViewDefinition> views) : views_(std::move(views)) {}

const ViewDefinition* ViewSet::find(ViewKind kind, std::string_view name) const {
    for (const auto& v : views_)
        if (v.target.kind == kind && v.target.name == name) return &v;
    return nullptr;
}

const ViewDefinition* ViewSet::level(std::string_view name) const { return find(ViewKind::Level, name); }

const ViewDefinition* ViewSet::parent_child(std::string_view child, std::string_view parent) const {
    return find(ViewKind::ParentChild, std::string(child) + "->" + std::string(parent));
}

const ViewDefinition* ViewSet::fact(std::string_view name) const { return find(ViewKind::FactRelationship, name); }

void ViewSet::materialize(const Store& store) {
    auto overlay = std::make_shared<RelationOverlay>();
    for (const auto& v : views_) overlay->emplace("view:" + v.target.id(), store.evaluate(v.body));
    overlay_ = std::move(overlay);
}

Plan ViewSet::reference(const ViewDefinition& view) const {
    return overlay_ ? Plan::scan("view:" + view.target.id()) : view.body;
}

nlohmann::json ViewSet::to_json() const {
    nlohmann::json views = nlohmann::json::array();
    for (const auto& v : views_) {
        nlohmann::json target = {{"kind", to_string(v.target.kind)}, {"name", v.target.name}};
        if (v.target.kind == ViewKind::ParentChild) {
            target["child"] = v.target.child;
            target["parent"] = v.target.parent;
        }
        views.push_back({{"id", v.target.id()},
                         {"target", std::move(target)},
                         {"columns", columns_json(v.columns)},
                         {"fragments", v.fragments},
                         {"body", v.body.to_json()}});
    }
    return {{"formatVersion", 1}, {"materialized", materialized()}, {"views", std::move(views)}};
}

nlohmann::json to_json(const std::vector<Diagnostic>& diagnostics) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : diagnostics)
        out.push_back({{"code", d.code},
                       {"severity", d.severity == Severity::Error ? "error" : "warning"},
                       {"path", d.path},
                       {"message", d.message}});
    return out;
}

CompileResult compile(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl) {
    return Compiler(cdl, sdl, mdl).run();
}

}  // namespace cim
