#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "cim/workspace.hpp"

namespace cim::test {

inline std::filesystem::path olympic_dir() { return std::filesystem::path(CIM_FIXTURE_DIR) / "olympic"; }

/// Olympic workspace loaded and compiled once per test binary.
inline const Session& olympic() {
    static const std::shared_ptr<const Session> session = Session::open(olympic_dir());
    return *session;
}

inline Relation rel(std::vector<Column> schema, std::vector<Row> rows) { return Relation{std::move(schema), std::move(rows)}; }

}  // namespace cim::test
