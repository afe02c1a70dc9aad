#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "cim/compiler.hpp"
#include "cim/errors.hpp"
#include "cim/model.hpp"
#include "cim/storage.hpp"

namespace cim {

/// Missing or unreadable file, bad manifest, unwritable output.
struct IoError : Error {
    using Error::Error;
};

/// Contents of `cim.toml`: `key = "value"` lines naming the model files and data
/// directory, relative to the workspace. Keys: cdl, sdl, mdl, data. Defaults:
/// cdl.xml, sdl.xml, mdl.xml, data.
struct Manifest {
    std::filesystem::path root;
    std::filesystem::path cdl;
    std::filesystem::path sdl;
    std::filesystem::path mdl;
    std::filesystem::path data;

    /// `location` is a workspace directory or a manifest file.
    static Manifest read(const std::filesystem::path& location);
    static Manifest parse(std::string_view text, const std::filesystem::path& root);
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// The three parsed models of a workspace.
struct Workspace {
    Manifest manifest;
    CdlModel cdl;
    SdlModel sdl;
    MdlModel mdl;

    /// Throws IoError or ParseError.
    static Workspace open(const std::filesystem::path& location);

    std::vector<Diagnostic> validate() const;
    /// One CSV per table, `<data>/<Table>.csv`; a table without a file loads empty.
    /// Throws LoadError on malformed data. The store is frozen.
    Store load_store() const;
};

/// A workspace with its data loaded and views compiled: what queries and checks run against.
struct Session {
    Workspace workspace;
    Store store;
    /// Validation diagnostics instead, when the models do not validate.
    CompileResult compiled;

    static std::shared_ptr<const Session> open(const std::filesystem::path& location, bool materialize = false);
};

}  // namespace cim
