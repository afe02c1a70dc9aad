#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cim/model.hpp"
#include "cim/storage.hpp"

namespace cim {

enum class ViewKind { Level, ParentChild, FactRelationship };

std::string_view to_string(ViewKind kind);

/// The conceptual element a view populates.
struct ViewTarget {
    ViewKind kind = ViewKind::Level;
    std::string name;    ///< level / fact relationship name, or "Child->Parent"
    std::string child;   ///< parent-child only
    std::string parent;  ///< parent-child only

    std::string id() const;
};

/// A relational expression over store tables whose rows all belong to `target`.
///
/// Column layout:
///   level         one column per level property, named after the property
///   parent-child  "<Child>.<key>" columns followed by "<Parent>.<key>" columns
///   fact          "<Role>.<key>" per role bottom-level key, then measures and properties
struct ViewDefinition {
    ViewTarget target;
    Plan body;
    std::vector<Column> columns;
    std::vector<std::string> fragments;  ///< contributing mapping fragments
};

/// Compiled views keyed by target, optionally materialized against a store.
class ViewSet {
public:
    ViewSet() = default;
    explicit ViewSet(std::vector<ViewDefinition> views);

    const std::vector<ViewDefinition>& views() const { return views_; }
    std::size_t size() const { return views_.size(); }
    bool empty() const { return views_.empty(); }

    const ViewDefinition* level(std::string_view name) const;
    const ViewDefinition* parent_child(std::string_view child, std::string_view parent) const;
    const ViewDefinition* fact(std::string_view name) const;

    /// Evaluates every view once and serves later references from the snapshot.
    void materialize(const Store& store);
    bool materialized() const { return overlay_ != nullptr; }
    /// Plan to reference `view` from a larger plan: its body, or a scan of its snapshot.
    Plan reference(const ViewDefinition& view) const;
    const RelationOverlay* overlay() const { return overlay_.get(); }

    nlohmann::json to_json() const;

private:
    const ViewDefinition* find(ViewKind kind, std::string_view name) const;

    std::vector<ViewDefinition> views_;
    std::shared_ptr<const RelationOverlay> overlay_;
};

struct CompileResult {
    ViewSet views;
    /// Best-effort: elements that fail to compile are reported here and left without a view.
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return !has_errors(diagnostics); }
};

/// One view per mapped level, parent-child relationship and fact relationship.
/// Inputs must validate cleanly.
CompileResult compile(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl);

nlohmann::json to_json(const std::vector<Diagnostic>& diagnostics);

// ============================================================================
// Instance-level checks over compiled views
// ============================================================================

/// Child instances that appear in more than one relationship of an exclusive group.
std::vector<Violation> check_exclusivity(const CdlModel& cdl, const ViewSet& views, const Store& store);

/// Members whose parent (or child) count falls outside the relationship's bounds.
std::vector<Violation> check_cardinalities(const CdlModel& cdl, const ViewSet& views, const Store& store);

struct HierarchySummary {
    std::string hierarchy;
    bool summarizable = true;
    std::vector<Violation> witnesses;  ///< kinds "non-strict" and "non-covering"
};

struct SummarizabilityReport {
    std::vector<HierarchySummary> hierarchies;

    bool summarizable() const;
    std::vector<Violation> violations() const;
};

/// Strictness (at most one parent per child per relationship) and covering
/// (mandatory relationships, and exclusive alternatives jointly, reach a parent).
SummarizabilityReport check_summarizability(const CdlModel& cdl, const ViewSet& views, const Store& store);

}  // namespace cim
