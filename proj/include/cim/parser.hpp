#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "cim/model.hpp"

namespace cim {

enum class DocumentKind { CDL, SDL, MDL };

struct ParseOptions {
    /// Reject unknown elements/attributes (with position) instead of skipping them.
    bool strict = true;
};

using AnyModel = std::variant<CdlModel, SdlModel, MdlModel>;

CdlModel parse_cdl(std::string_view document, ParseOptions options = {});
SdlModel parse_sdl(std::string_view document, ParseOptions options = {});
MdlModel parse_mdl(std::string_view document, ParseOptions options = {});
AnyModel parse(DocumentKind kind, std::string_view document, ParseOptions options = {});

std::string serialize(const CdlModel& model);
std::string serialize(const SdlModel& model);
std::string serialize(const MdlModel& model);

/// Node/edge picture of the three models for diagram rendering.
/// Layout documented in docs/graph-format.md.
nlohmann::json export_graph_json(const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl);

/// Human-readable condition label, e.g. "DayOfWeek ∈ {Sat,Sun}".
std::string condition_label(const Condition& condition);

}  // namespace cim
