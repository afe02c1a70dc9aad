#include <algorithm>
#include <map>
#include <set>

#include "cim/errors.hpp"
#include "cim/query.hpp"

namespace cim {

namespace {

using Key = std::vector<Value>;

bool has_null(const Key& k) {
    return std::any_of(k.begin(), k.end(), [](const Value& v) { return v.is_null(); });
}

/// One FK traversal: rows of `from` connect to rows of `to` where from[a] = to[b] for all pairs.
struct Hop {
    const Table* from;
    const Table* to;
    std::vector<std::pair<std::size_t, std::size_t>> columns;  ///< column indexes (from, to)
};

using Route = std::vector<Hop>;

/// Fragment rows on one table, restricted by conditions.
struct Source {
    const Table* table = nullptr;
    std::vector<Condition> conditions;
    std::map<std::string, std::string> columns;  ///< property -> column
    bool identical_to(const Source& o) const {
        if (columns.size() != o.columns.size()) return false;
        for (const auto& [p, c] : columns)
            if (!o.columns.count(p)) return false;
        return true;
    }
    bool maps(const std::vector<std::string>& props) const {
        return std::all_of(props.begin(), props.end(), [&](const auto& p) { return columns.count(p) > 0; });
    }
};

/// Sources joined to `sources[0]`, which maps the key.
struct Population {
    std::vector<Source> sources;
};

class Oracle {
public:
    Oracle(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl, const Store& store)
        : cdl_(cdl), sdl_(sdl), mdl_(mdl), store_(store) {}

    Relation run(const CqlQuery& query, const QueryOptions& options) {
        const ResolvedQuery r = resolve(query, cdl_, options);
        const auto facts = fact_rows(*r.fact);

        struct Dim {
            const ResolvedDimension* d;
            std::size_t role_index;
            std::map<Key, std::set<Key>> ancestors;
            std::vector<std::map<Key, std::vector<Key>>> members;  // per mentioned level: key -> projections
        };
        std::vector<Dim> dims;
        for (std::size_t i = 0; i < r.dimensions.size(); ++i) {
            const auto& d = r.dimensions[i];
            if (d.mentioned.empty()) continue;
            Dim dim{&d, i, {}, {}};
            if (d.target && d.target != d.bottom) dim.ancestors = ancestors(d);
            for (const auto& m : d.mentioned) dim.members.push_back(members(m));
            dims.push_back(std::move(dim));
        }

        std::map<Key, Accumulator> groups;
        for (const auto& f : facts) {
            // Every combination of member projections the fact reaches.
            std::vector<Key> combos{{}};
            for (const auto& dim : dims) {
                const Key& bottom_key = f.roles[dim.role_index];
                if (has_null(bottom_key)) {
                    combos.clear();
                    break;
                }
                std::vector<Key> targets;
                const auto* d = dim.d;
                if (d->target && d->target != d->bottom) {
                    auto it = dim.ancestors.find(bottom_key);
                    if (it != dim.ancestors.end()) targets.assign(it->second.begin(), it->second.end());
                } else {
                    targets.push_back(bottom_key);
                }
                std::vector<Key> local;
                for (const Key& t : targets) {
                    std::vector<Key> partial{{}};
                    for (std::size_t m = 0; m < d->mentioned.size(); ++m) {
                        const Key& k = d->mentioned[m].level == d->target ? t : bottom_key;
                        auto it = dim.members[m].find(k);
                        std::vector<Key> next;
                        if (it != dim.members[m].end())
                            for (const Key& p : partial)
                                for (const Key& proj : it->second) {
                                    Key x = p;
                                    x.insert(x.end(), proj.begin(), proj.end());
                                    next.push_back(std::move(x));
                                }
                        partial = std::move(next);
                    }
                    local.insert(local.end(), partial.begin(), partial.end());
                }
                std::vector<Key> next;
                for (const Key& c : combos)
                    for (const Key& l : local) {
                        Key x = c;
                        x.insert(x.end(), l.begin(), l.end());
                        next.push_back(std::move(x));
                    }
                combos = std::move(next);
            }
            for (const Key& c : combos) groups[c].add(r.measure ? f.measures.at(r.measure->name) : Value(true));
        }

        Relation out;
        for (const auto& dim : dims)
            for (const auto& m : dim.d->mentioned)
                for (const auto& c : m.columns) out.schema.push_back({m.prefix + c, m.level->find_property(c)->type});
        std::optional<DataType> in;
        if (r.measure) in = r.measure->type;
        out.schema.push_back({r.aggregate_column, *aggregate_output_type(r.fn, in)});
        if (groups.empty() && dims.empty()) groups[{}];
        for (const auto& [key, acc] : groups) {
            Row row = key;
            row.push_back(acc.result(r.fn));
            out.rows.push_back(std::move(row));
        }
        return out;
    }

private:
    struct Accumulator {
        std::size_t rows = 0;
        std::size_t non_null = 0;
        Value sum;
        Value min;
        Value max;

        void add(const Value& v) {
            ++rows;
            if (v.is_null()) return;
            ++non_null;
            if (v.is<std::int64_t>()) {
                sum = sum.is_null() ? v : Value(sum.as<std::int64_t>() + v.as<std::int64_t>());
            } else if (v.is<Decimal>()) {
                sum = sum.is_null() ? v : Value(sum.as<Decimal>() + v.as<Decimal>());
            }
            if (min.is_null() || v < min) min = v;
            if (max.is_null() || max < v) max = v;
        }

        Value result(AggregateFn fn) const {
            switch (fn) {
                case AggregateFn::Count: return Value(static_cast<std::int64_t>(rows));
                case AggregateFn::Sum: return sum;
                case AggregateFn::Min: return min;
                case AggregateFn::Max: return max;
                case AggregateFn::Avg:
                    if (non_null == 0) return Value();
                    if (sum.is<std::int64_t>())
                        return Value(Decimal(sum.as<std::int64_t>()).divide(static_cast<std::int64_t>(non_null)));
                    return Value(sum.as<Decimal>().divide(static_cast<std::int64_t>(non_null)));
            }
            return Value();
        }
    };

    [[noreturn]] static void unmapped(const std::string& message) {
        throw QueryError("unmapped-level", "unmapped level: " + message);
    }

    const Relation& data(const Table& t) const {
        const Relation* r = store_.find(t.name);
        if (!r) throw PlanError("table '" + t.name + "' is not loaded");
        return *r;
    }

    static std::size_t col(const Table& t, std::string_view name) { return *t.column_index(name); }

    bool satisfies(const Table& t, const Row& row, const std::vector<Condition>& conditions) const {
        for (const auto& c : conditions) {
            const Value& v = row[col(t, c.column)];
            if (v.is_null()) return false;
            bool any = false;
            for (const auto& text : c.values)
                if (parse_value(text, t.find_column(c.column)->type) == v) any = true;
            if (!any) return false;
        }
        return true;
    }

    // ------------------------------------------------------------ routes

    /// Every simple FK route of exactly `length` hops from `at` to `to`.
    void routes(const Table* at, const Table* to, std::size_t length, std::set<const Table*>& visited, Route& current,
                std::vector<Route>& out) const {
        if (current.size() == length) {
            if (at == to) out.push_back(current);
            return;
        }
        for (const Table* t : sdl_.tables()) {
            for (const auto& fk : t->foreignKeys) {
                const Table* target = sdl_.find_table(fk.table);
                if (target == t) continue;
                for (int dir = 0; dir < 2; ++dir) {
                    const Table* from = dir == 0 ? t : target;
                    const Table* next = dir == 0 ? target : t;
                    if (from != at || visited.count(next)) continue;
                    Hop hop{from, next, {}};
                    for (std::size_t i = 0; i < fk.columns.size(); ++i) {
                        const std::size_t a = col(*t, fk.columns[i]);
                        const std::size_t b = col(*target, fk.targetColumns[i]);
                        hop.columns.emplace_back(dir == 0 ? a : b, dir == 0 ? b : a);
                    }
                    visited.insert(next);
                    current.push_back(std::move(hop));
                    routes(next, to, length, visited, current, out);
                    current.pop_back();
                    visited.erase(next);
                }
            }
        }
    }

    /// Shortest routes between two tables (empty vector: none).
    std::vector<Route> shortest(const Table* from, const Table* to) const {
        const std::size_t n = sdl_.tables().size();
        for (std::size_t len = 0; len < n; ++len) {
            std::vector<Route> out;
            std::set<const Table*> visited{from};
            Route current;
            routes(from, to, len, visited, current, out);
            if (!out.empty()) return out;
        }
        return {};
    }

    /// Rows of the route's last table reachable from `start`.
    std::vector<const Row*> walk(const Row& start, const Route& route) const {
        std::vector<const Row*> frontier{&start};
        for (const Hop& hop : route) {
            std::vector<const Row*> next;
            for (const Row* a : frontier)
                for (const Row& b : data(*hop.to).rows) {
                    bool match = true;
                    for (const auto& [x, y] : hop.columns)
                        if ((*a)[x].is_null() || (*a)[x] != b[y]) match = false;
                    if (match) next.push_back(&b);
                }
            frontier = std::move(next);
        }
        return frontier;
    }

    // ------------------------------------------------------------ levels

    std::vector<Population> populations(const Level& level) const {
        const auto fragments = mdl_.fragments_for(FragmentKind::Level, level.name);
        if (fragments.empty()) unmapped("no mapping fragment for level '" + level.name + "'");
        std::vector<std::string> tables;
        for (const auto* f : fragments)
            if (std::find(tables.begin(), tables.end(), f->table) == tables.end()) tables.push_back(f->table);
        std::vector<Source> sources;
        for (const auto& name : tables) {
            std::vector<Source> here;
            for (const auto* f : fragments) {
                if (f->table != name) continue;
                Source s;
                s.table = sdl_.find_table(name);
                s.conditions = f->conditions;
                for (const auto& m : f->propertyMappings) s.columns.emplace(m.property, m.column);
                here.push_back(std::move(s));
            }
            bool same = true;
            for (const auto& s : here) same = same && s.identical_to(here.front());
            if (same) {
                sources.insert(sources.end(), here.begin(), here.end());
            } else {
                Source merged = here.front();
                for (std::size_t i = 1; i < here.size(); ++i) {
                    merged.conditions.insert(merged.conditions.end(), here[i].conditions.begin(),
                                             here[i].conditions.end());
                    for (const auto& [p, c] : here[i].columns) merged.columns.emplace(p, c);
                }
                sources.push_back(std::move(merged));
            }
        }
        bool same = true;
        for (const auto& s : sources) same = same && s.identical_to(sources.front());
        std::vector<Population> out;
        if (same) {
            for (auto& s : sources) {
                if (!s.maps(level.key)) unmapped("key of '" + level.name + "' is not mapped");
                out.push_back({{std::move(s)}});
            }
            return out;
        }
        auto anchor = std::find_if(sources.begin(), sources.end(), [&](const Source& s) { return s.maps(level.key); });
        if (anchor == sources.end()) unmapped("key of '" + level.name + "' is not mapped");
        std::rotate(sources.begin(), anchor, anchor + 1);
        out.push_back({std::move(sources)});
        return out;
    }

    /// Property tuples of the level's members (declaration order, null where unmapped).
    std::vector<Key> level_rows(const Level& level) const {
        std::vector<Key> out;
        for (const auto& pop : populations(level)) {
            const Source& anchor = pop.sources.front();
            std::vector<Route> paths;
            for (std::size_t i = 1; i < pop.sources.size(); ++i) {
                auto found = shortest(anchor.table, pop.sources[i].table);
                if (found.size() != 1)
                    unmapped("cannot join the tables of '" + level.name + "' (" + std::to_string(found.size()) +
                             " shortest routes)");
                paths.push_back(found.front());
            }
            std::set<Key> distinct;
            for (const Row& row : data(*anchor.table).rows) {
                if (!satisfies(*anchor.table, row, anchor.conditions)) continue;
                // Each source contributes the rows it reaches; members are all combinations.
                std::vector<std::map<std::string, Value>> partial{{}};
                for (const auto& [p, c] : anchor.columns) partial.front()[p] = row[col(*anchor.table, c)];
                for (std::size_t i = 1; i < pop.sources.size(); ++i) {
                    const Source& s = pop.sources[i];
                    std::vector<std::map<std::string, Value>> next;
                    for (const Row* reached : walk(row, paths[i - 1])) {
                        if (!satisfies(*s.table, *reached, s.conditions)) continue;
                        for (const auto& base : partial) {
                            auto x = base;
                            for (const auto& [p, c] : s.columns) x.emplace(p, (*reached)[col(*s.table, c)]);
                            next.push_back(std::move(x));
                        }
                    }
                    partial = std::move(next);
                }
                for (const auto& values : partial) {
                    Key k;
                    for (const auto& prop : level.properties) {
                        auto it = values.find(prop.name);
                        k.push_back(it == values.end() ? Value() : it->second);
                    }
                    if (pop.sources.size() > 1) distinct.insert(k);
                    else out.push_back(std::move(k));
                }
            }
            out.insert(out.end(), distinct.begin(), distinct.end());
        }
        return out;
    }

    std::map<Key, std::vector<Key>> members(const MentionedLevel& m) const {
        const Level& level = *m.level;
        auto index = [&](const std::string& p) {
            return static_cast<std::size_t>(
                std::find_if(level.properties.begin(), level.properties.end(),
                             [&](const Property& x) { return x.name == p; }) -
                level.properties.begin());
        };
        std::map<Key, std::set<Key>> sets;
        for (const Key& row : level_rows(level)) {
            bool ok = true;
            for (const auto& c : m.conditions) {
                Atom atom{c.property->name, c.op, c.values};
                ok = ok && matches(atom, row[index(c.property->name)]);
            }
            if (!ok) continue;
            Key key;
            for (const auto& k : level.key) key.push_back(row[index(k)]);
            if (has_null(key)) continue;
            Key proj;
            for (const auto& c : m.columns) proj.push_back(row[index(c)]);
            sets[key].insert(proj);
        }
        std::map<Key, std::vector<Key>> out;
        for (auto& [k, s] : sets) out[k].assign(s.begin(), s.end());
        return out;
    }

    // ------------------------------------------------------------ relationships

    std::map<Key, std::set<Key>> parents(const ParentChildRel& rel) const {
        const Level& cl = *cdl_.find_level(rel.child);
        const Level& pl = *cdl_.find_level(rel.parent);
        std::map<Key, std::set<Key>> out;
        for (const auto& cp : populations(cl)) {
            for (const auto& pp : populations(pl)) {
                const Source* child = nullptr;
                const Source* parent = nullptr;
                std::vector<Route> best;
                std::size_t ties = 0;
                for (const auto& cs : cp.sources) {
                    if (!cs.maps(cl.key)) continue;
                    for (const auto& ps : pp.sources) {
                        if (!ps.maps(pl.key)) continue;
                        auto found = shortest(cs.table, ps.table);
                        if (found.empty()) continue;
                        if (best.empty() || found.front().size() < best.front().size()) {
                            best = found;
                            ties = found.size();
                            child = &cs;
                            parent = &ps;
                        } else if (found.front().size() == best.front().size()) {
                            ties += found.size();
                        }
                    }
                }
                if (ties != 1) unmapped("no unique join route between '" + rel.child + "' and '" + rel.parent + "'");
                for (const Row& row : data(*child->table).rows) {
                    if (!satisfies(*child->table, row, child->conditions)) continue;
                    Key ck;
                    for (const auto& k : cl.key) ck.push_back(row[col(*child->table, child->columns.at(k))]);
                    if (has_null(ck)) continue;
                    for (const Row* reached : walk(row, best.front())) {
                        if (!satisfies(*parent->table, *reached, parent->conditions)) continue;
                        Key pk;
                        for (const auto& k : pl.key) pk.push_back((*reached)[col(*parent->table, parent->columns.at(k))]);
                        if (!has_null(pk)) out[ck].insert(pk);
                    }
                }
            }
        }
        return out;
    }

    std::map<Key, std::set<Key>> ancestors(const ResolvedDimension& d) const {
        std::map<std::string, std::map<Key, std::set<Key>>> cache;
        std::map<Key, std::set<Key>> out;
        for (const auto& path : d.paths) {
            std::map<Key, std::set<Key>> reach;
            for (std::size_t i = 0; i < path.size(); ++i) {
                auto it = cache.find(path[i].id());
                if (it == cache.end()) it = cache.emplace(path[i].id(), parents(path[i])).first;
                const auto& step = it->second;
                if (i == 0) {
                    reach = step;
                    continue;
                }
                std::map<Key, std::set<Key>> next;
                for (const auto& [b, mids] : reach)
                    for (const Key& m : mids)
                        if (auto s = step.find(m); s != step.end()) next[b].insert(s->second.begin(), s->second.end());
                reach = std::move(next);
            }
            for (auto& [b, ts] : reach) out[b].insert(ts.begin(), ts.end());
        }
        return out;
    }

    // ------------------------------------------------------------ facts

    struct FactRow {
        std::vector<Key> roles;
        std::map<std::string, Value> measures;
    };

    std::vector<FactRow> fact_rows(const FactRelationship& fact) const {
        const auto fragments = mdl_.fragments_for(FragmentKind::FactRelationship, fact.name);
        if (fragments.size() != 1)
            unmapped("fact relationship '" + fact.name + "' has " + std::to_string(fragments.size()) + " fragments");
        const MappingFragment& f = *fragments.front();
        const Table& table = *sdl_.find_table(f.table);

        // Per role: explicit columns, or a route to the table identifying the bottom level.
        struct RoleSource {
            std::vector<std::size_t> columns;
            const Source* anchor = nullptr;
            Route route;
            std::vector<Population> pops;
        };
        std::vector<RoleSource> sources(fact.roles.size());
        for (std::size_t i = 0; i < fact.roles.size(); ++i) {
            const Role& role = fact.roles[i];
            const Level& bottom = *cdl_.find_level(cdl_.find_dimension(role.dimension)->bottomLevel);
            bool all = true;
            for (const auto& k : bottom.key)
                if (auto* m = f.role_mapping_for(role.name, k)) sources[i].columns.push_back(col(table, m->column));
                else all = false;
            if (all) continue;
            sources[i].columns.clear();
            sources[i].pops = populations(bottom);
            std::size_t ties = 0;
            for (const auto& pop : sources[i].pops) {
                for (const auto& s : pop.sources) {
                    if (!s.maps(bottom.key)) continue;
                    auto found = shortest(&table, s.table);
                    if (found.empty()) continue;
                    if (!sources[i].anchor || found.front().size() < sources[i].route.size()) {
                        sources[i].anchor = &s;
                        sources[i].route = found.front();
                        ties = found.size();
                    } else if (found.front().size() == sources[i].route.size()) {
                        ties += found.size();
                    }
                }
            }
            if (ties != 1) unmapped("no unique route from " + table.name + " to " + bottom.name);
        }

        std::vector<FactRow> out;
        for (const Row& row : data(table).rows) {
            if (!satisfies(table, row, f.conditions)) continue;
            std::vector<FactRow> expanded(1);
            for (const auto& m : fact.measures) {
                const auto* pm = f.mapping_for(m.name);
                expanded.front().measures[m.name] = pm ? row[col(table, pm->column)] : Value();
            }
            for (std::size_t i = 0; i < fact.roles.size(); ++i) {
                const Level& bottom = *cdl_.find_level(cdl_.find_dimension(fact.roles[i].dimension)->bottomLevel);
                std::vector<Key> keys;
                if (!sources[i].columns.empty()) {
                    Key k;
                    for (auto c : sources[i].columns) k.push_back(row[c]);
                    keys.push_back(std::move(k));
                } else {
                    const Source& a = *sources[i].anchor;
                    for (const Row* reached : walk(row, sources[i].route)) {
                        if (!satisfies(*a.table, *reached, a.conditions)) continue;
                        Key k;
                        for (const auto& kp : bottom.key) k.push_back((*reached)[col(*a.table, a.columns.at(kp))]);
                        keys.push_back(std::move(k));
                    }
                }
                std::vector<FactRow> next;
                for (const auto& e : expanded)
                    for (const auto& k : keys) {
                        FactRow x = e;
                        x.roles.push_back(k);
                        next.push_back(std::move(x));
                    }
                expanded = std::move(next);
            }
            out.insert(out.end(), expanded.begin(), expanded.end());
        }
        return out;
    }

    const CdlModel& cdl_;
    const SdlModel& sdl_;
    const MdlModel& mdl_;
    const Store& store_;
};

}  // namespace

Relation oracle_execute(const CqlQuery& query, const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl,
                        const Store& store, const QueryOptions& options) {
    return Oracle(cdl, sdl, mdl, store).run(query, options);
}

}  // namespace cim
