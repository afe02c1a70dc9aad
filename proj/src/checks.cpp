#include <algorithm>
#include <map>
#include <set>

#include "cim/compiler.hpp"

namespace cim {

namespace {

using Key = std::vector<Value>;

std::string describe(const std::vector<std::string>& names, const Key& key) {
    std::string out;
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (i) out += ",";
        out += names[i] + "=" + key[i].to_string();
    }
    return out;
}

Relation evaluate(const ViewSet& views, const ViewDefinition& view, const Store& store) {
    return store.evaluate(views.reference(view), views.overlay());
}

/// Child-to-parents and parent-to-children adjacency of one relationship's instances.
struct Edges {
    std::vector<std::string> child_names;
    std::vector<std::string> parent_names;
    std::map<Key, std::set<Key>> parents_of;
    std::map<Key, std::set<Key>> children_of;
};

Edges edges(const CdlModel& cdl, const ViewSet& views, const ViewDefinition& pc, const Store& store) {
    Edges e;
    const Level* child = cdl.find_level(pc.target.child);
    const Level* parent = cdl.find_level(pc.target.parent);
    e.child_names = child->key;
    e.parent_names = parent->key;
    const std::size_t nc = child->key.size();
    for (const Row& row : evaluate(views, pc, store).rows) {
        Key c(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(nc));
        Key p(row.begin() + static_cast<std::ptrdiff_t>(nc), row.end());
        if (std::any_of(c.begin(), c.end(), [](const Value& v) { return v.is_null(); })) continue;
        if (std::any_of(p.begin(), p.end(), [](const Value& v) { return v.is_null(); })) continue;
        e.parents_of[c].insert(p);
        e.children_of[p].insert(c);
    }
    return e;
}

/// Distinct non-null keys of a level's members.
std::set<Key> members(const CdlModel& cdl, const ViewSet& views, std::string_view level, const Store& store) {
    std::set<Key> out;
    const ViewDefinition* v = views.level(level);
    const Level* l = cdl.find_level(level);
    if (!v || !l) return out;
    const Relation r = evaluate(views, *v, store);
    std::vector<std::size_t> idx;
    for (const auto& k : l->key) idx.push_back(*r.index_of(k));
    for (const Row& row : r.rows) {
        Key k;
        for (auto i : idx) k.push_back(row[i]);
        if (std::none_of(k.begin(), k.end(), [](const Value& x) { return x.is_null(); })) out.insert(std::move(k));
    }
    return out;
}

}  // namespace

std::vector<Violation> check_exclusivity(const CdlModel& cdl, const ViewSet& views, const Store& store) {
    std::vector<Violation> out;
    std::set<std::string> groups;
    for (const auto& rel : cdl.relationships())
        if (rel.exclusiveGroup) groups.insert(*rel.exclusiveGroup);
    for (const auto& group : groups) {
        // Keys of different child levels are compared as value tuples: exclusive
        // alternatives over one table share the identifying columns.
        std::map<Key, std::vector<std::string>> seen;
        std::map<Key, std::vector<std::string>> names;
        for (const auto& rel : cdl.exclusive_group(group)) {
            const ViewDefinition* pc = views.parent_child(rel.child, rel.parent);
            if (!pc) continue;
            const Edges e = edges(cdl, views, *pc, store);
            for (const auto& [child, parents] : e.parents_of) {
                auto& rels = seen[child];
                rels.push_back(rel.id());
                names.emplace(child, e.child_names);
            }
        }
        for (const auto& [child, rels] : seen) {
            if (rels.size() < 2) continue;
            Violation v{"exclusivity", group, {}, {describe(names[child], child)}};
            v.witness.insert(v.witness.end(), rels.begin(), rels.end());
            std::string joined;
            for (const auto& r : rels) joined += (joined.empty() ? "" : ", ") + r;
            v.message = "instance " + v.witness.front() + " takes part in " + std::to_string(rels.size()) +
                        " relationships of exclusive group " + group + ": " + joined;
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::vector<Violation> check_cardinalities(const CdlModel& cdl, const ViewSet& views, const Store& store) {
    std::vector<Violation> out;
    for (const auto& rel : cdl.relationships()) {
        const ViewDefinition* pc = views.parent_child(rel.child, rel.parent);
        if (!pc) continue;
        const Edges e = edges(cdl, views, *pc, store);
        for (const Key& c : members(cdl, views, rel.child, store)) {
            auto it = e.parents_of.find(c);
            const std::size_t n = it == e.parents_of.end() ? 0 : it->second.size();
            if (rel.parentCard.admits(n)) continue;
            out.push_back({"cardinality", rel.id(),
                           rel.child + " " + describe(e.child_names, c) + " has " + std::to_string(n) + " " +
                               rel.parent + " parent(s); allowed " + rel.parentCard.to_string(),
                           {describe(e.child_names, c)}});
        }
        for (const Key& p : members(cdl, views, rel.parent, store)) {
            auto it = e.children_of.find(p);
            const std::size_t n = it == e.children_of.end() ? 0 : it->second.size();
            if (rel.childCard.admits(n)) continue;
            out.push_back({"cardinality", rel.id(),
                           rel.parent + " " + describe(e.parent_names, p) + " has " + std::to_string(n) + " " +
                               rel.child + " child(ren); allowed " + rel.childCard.to_string(),
                           {describe(e.parent_names, p)}});
        }
    }
    return out;
}

bool SummarizabilityReport::summarizable() const {
    return std::all_of(hierarchies.begin(), hierarchies.end(), [](const auto& h) { return h.summarizable; });
}

std::vector<Violation> SummarizabilityReport::violations() const {
    std::vector<Violation> out;
    for (const auto& h : hierarchies) out.insert(out.end(), h.witnesses.begin(), h.witnesses.end());
    return out;
}

SummarizabilityReport check_summarizability(const CdlModel& cdl, const ViewSet& views, const Store& store) {
    SummarizabilityReport report;
    for (const auto& h : cdl.hierarchies) {
        HierarchySummary s;
        s.hierarchy = h.name;
        // Relationships sharing a child and an exclusive group cover that child jointly.
        std::map<std::pair<std::string, std::string>, std::vector<const ParentChildRel*>> covers;
        std::map<std::string, Edges> edge_cache;
        for (const auto& rel : h.relationships) {
            const ViewDefinition* pc = views.parent_child(rel.child, rel.parent);
            if (!pc) continue;
            const Edges& e = edge_cache.emplace(rel.id(), edges(cdl, views, *pc, store)).first->second;
            for (const auto& [child, parents] : e.parents_of) {
                if (parents.size() < 2) continue;
                Violation v{"non-strict", h.name,
                            rel.child + " " + describe(e.child_names, child) + " has " +
                                std::to_string(parents.size()) + " " + rel.parent + " parents",
                            {describe(e.child_names, child)}};
                for (const auto& p : parents) v.witness.push_back(describe(e.parent_names, p));
                s.witnesses.push_back(std::move(v));
            }
            if (rel.exclusiveGroup) covers[{rel.child, *rel.exclusiveGroup}].push_back(&rel);
            else if (rel.parentCard.min == 1) covers[{rel.child, "#" + rel.id()}].push_back(&rel);
        }
        for (const auto& [key, rels] : covers) {
            const std::string& child = key.first;
            std::set<Key> reached;
            std::vector<std::string> names;
            std::string targets;
            for (const ParentChildRel* rel : rels) {
                const Edges& e = edge_cache.at(rel->id());
                names = e.child_names;
                for (const auto& [c, parents] : e.parents_of) reached.insert(c);
                targets += (targets.empty() ? "" : "/") + rel->parent;
            }
            for (const Key& c : members(cdl, views, child, store)) {
                if (reached.count(c)) continue;
                const Level* l = cdl.find_level(child);
                s.witnesses.push_back({"non-covering", h.name,
                                       child + " " + describe(l->key, c) + " has no " + targets + " parent",
                                       {describe(l->key, c)}});
            }
        }
        s.summarizable = s.witnesses.empty();
        report.hierarchies.push_back(std::move(s));
    }
    return report;
}

}  // namespace cim
