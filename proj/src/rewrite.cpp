#include "cim/errors.hpp"
#include "cim/query.hpp"

namespace cim {

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

Pairs zip(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    Pairs out;
    for (std::size_t i = 0; i < a.size(); ++i) out.emplace_back(a[i], b[i]);
    return out;
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

[[noreturn]] void missing_view(const std::string& what) {
    throw QueryError("unmapped-level", "unmapped level: " + what + " has no compiled view");
}

/// Distinct (bottom key, target key) pairs linked by any of the dimension's chains.
/// Columns: `prefix`b0.., `prefix`t0..
Plan ancestor_pairs(const ResolvedDimension& d, const ViewSet& views, const CdlModel& cdl,
                    const std::string& prefix) {
    const auto bottom_cols = numbered(prefix + "b", d.bottom->key.size());
    const auto target_cols = numbered(prefix + "t", d.target->key.size());
    std::optional<Plan> all;
    for (const auto& path : d.paths) {
        std::optional<Plan> chain;
        std::vector<std::string> first;
        std::vector<std::string> top;
        for (std::size_t i = 0; i < path.size(); ++i) {
            const ParentChildRel& rel = path[i];
            const ViewDefinition* v = views.parent_child(rel.child, rel.parent);
            if (!v) missing_view("relationship " + rel.id() + " on the rollup path");
            const std::size_t split = cdl.find_level(rel.child)->key.size();
            const std::string s = prefix + "s" + std::to_string(i) + ".";
            Pairs renames;
            std::vector<std::string> child_cols;
            std::vector<std::string> parent_cols;
            for (std::size_t k = 0; k < v->columns.size(); ++k) {
                auto& side = k < split ? child_cols : parent_cols;
                const std::string name = s + (k < split ? "c" : "p") + std::to_string(side.size());
                renames.emplace_back(v->columns[k].name, name);
                side.push_back(name);
            }
            Plan step = views.reference(*v).rename(std::move(renames));
            chain = chain ? chain->join(step, zip(top, child_cols)) : step;
            if (i == 0) first = child_cols;
            top = parent_cols;
        }
        std::vector<ProjectItem> items;
        for (std::size_t k = 0; k < first.size(); ++k)
            items.push_back({bottom_cols[k], first[k], d.bottom->find_property(d.bottom->key[k])->type});
        for (std::size_t k = 0; k < top.size(); ++k)
            items.push_back({target_cols[k], top[k], d.target->find_property(d.target->key[k])->type});
        Plan p = chain->project(std::move(items));
        all = all ? all->union_with(p) : p;
    }
    std::vector<std::string> cols = bottom_cols;
    cols.insert(cols.end(), target_cols.begin(), target_cols.end());
    return all->distinct(std::move(cols));
}

Predicate level_predicate(const std::vector<ResolvedCondition>& conditions) {
    Predicate out;
    for (const auto& c : conditions) out.push_back({c.property->name, c.op, c.values});
    return out;
}

}  // namespace

Plan rewrite(const CqlQuery& query, const ViewSet& views, const CdlModel& cdl, const QueryOptions& options) {
    const ResolvedQuery r = resolve(query, cdl, options);
    const ViewDefinition* fv = views.fact(r.fact->name);
    if (!fv) missing_view("fact relationship " + r.fact->name);

    Pairs fact_renames;
    for (const auto& c : fv->columns) fact_renames.emplace_back(c.name, "f." + c.name);
    Plan plan = views.reference(*fv).rename(std::move(fact_renames));

    std::vector<std::string> group_by;
    Pairs outputs;
    std::size_t n = 0;
    for (const auto& d : r.dimensions) {
        if (d.mentioned.empty()) continue;
        const std::string dp = "d" + std::to_string(n++) + ".";
        std::vector<std::string> bottom_cols;
        for (const auto& k : d.bottom->key) bottom_cols.push_back("f." + d.role->name + "." + k);
        std::vector<std::string> target_cols = bottom_cols;
        if (d.target && d.target != d.bottom) {
            plan = plan.join(ancestor_pairs(d, views, cdl, dp), zip(bottom_cols, numbered(dp + "b", bottom_cols.size())));
            target_cols = numbered(dp + "t", d.target->key.size());
        }
        for (std::size_t m = 0; m < d.mentioned.size(); ++m) {
            const MentionedLevel& ml = d.mentioned[m];
            const ViewDefinition* lv = views.level(ml.level->name);
            if (!lv) missing_view("level " + ml.level->name);
            Plan level = views.reference(*lv);
            if (!ml.conditions.empty()) level = level.select(level_predicate(ml.conditions));
            const std::string lp = dp + "l" + std::to_string(m) + ".";
            Pairs renames;
            for (const auto& c : ml.columns) renames.emplace_back(c, lp + c);
            level = level.project(ml.columns).distinct(ml.columns).rename(std::move(renames));
            std::vector<std::string> key_cols;
            for (const auto& k : ml.level->key) key_cols.push_back(lp + k);
            const auto& source = ml.level == d.target ? target_cols : bottom_cols;
            plan = plan.join(level, zip(source, key_cols));
            for (const auto& c : ml.columns) {
                group_by.push_back(lp + c);
                outputs.emplace_back(lp + c, ml.prefix + c);
            }
        }
    }
    AggregateSpec spec{r.fn, r.measure ? "f." + r.measure->name : std::string(), r.aggregate_column};
    return plan.aggregate(std::move(group_by), {std::move(spec)}).rename(std::move(outputs));
}

Relation execute(const CqlQuery& query, const ViewSet& views, const CdlModel& cdl, const Store& store,
                 const QueryOptions& options) {
    return store.evaluate(rewrite(query, views, cdl, options), views.overlay());
}

}  // namespace cim
