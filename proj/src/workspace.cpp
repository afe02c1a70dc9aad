#include "cim/workspace.hpp"

#include <fstream>
#include <sstream>

#include "cim/parser.hpp"

namespace cim {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw IoError("cannot write " + path.string());
}

Manifest Manifest::parse(std::string_view text, const fs::path& root) {
    Manifest m{root, root / "cdl.xml", root / "sdl.xml", root / "mdl.xml", root / "data"};
    std::size_t line_no = 0;
    std::istringstream lines{std::string(text)};
    for (std::string line; std::getline(lines, line);) {
        ++line_no;
        const std::string content = trim(line.substr(0, line.find('#')));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        const std::string where = "cim.toml line " + std::to_string(line_no);
        if (eq == std::string::npos) throw IoError(where + ": expected key = \"value\"");
        const std::string key = trim(content.substr(0, eq));
        std::string value = trim(content.substr(eq + 1));
        if (value.size() < 2 || value.front() != '"' || value.back() != '"')
            throw IoError(where + ": value must be a double-quoted string");
        value = value.substr(1, value.size() - 2);
        fs::path* slot = key == "cdl" ? &m.cdl : key == "sdl" ? &m.sdl : key == "mdl" ? &m.mdl : key == "data" ? &m.data : nullptr;
        if (!slot) throw IoError(where + ": unknown key '" + key + "'");
        *slot = root / value;
    }
    return m;
}

Manifest Manifest::read(const fs::path& location) {
    std::error_code ec;
    if (fs::is_directory(location, ec)) {
        const fs::path file = location / "cim.toml";
        if (!fs::exists(file, ec)) return parse("", location);
        return parse(read_file(file), location);
    }
    if (!fs::exists(location, ec)) throw IoError("no such workspace: " + location.string());
    return parse(read_file(location), location.parent_path());
}

Workspace Workspace::open(const fs::path& location) {
    Workspace w;
    w.manifest = Manifest::read(location);
    w.cdl = parse_cdl(read_file(w.manifest.cdl));
    w.sdl = parse_sdl(read_file(w.manifest.sdl));
    w.mdl = parse_mdl(read_file(w.manifest.mdl));
    return w;
}

std::vector<Diagnostic> Workspace::validate() const { return validate_all(cdl, sdl, mdl); }

Store Workspace::load_store() const {
    Store store(sdl);
    for (const Table* t : sdl.tables()) {
        const fs::path file = manifest.data / (t->name + ".csv");
        std::error_code ec;
        if (!fs::exists(file, ec)) {
            store.load_relation(*t, Relation{t->columns, {}});
            continue;
        }
        try {
            store.load_table(*t, read_file(file));
        } catch (const LoadError& e) {
            throw LoadError(file.filename().string() + ": " + e.what(), 0);
        }
    }
    store.freeze();
    return store;
}

std::shared_ptr<const Session> Session::open(const fs::path& location, bool materialize) {
    auto s = std::make_shared<Session>();
    s->workspace = Workspace::open(location);
    s->store = s->workspace.load_store();
    auto diagnostics = s->workspace.validate();
    if (has_errors(diagnostics)) s->compiled.diagnostics = std::move(diagnostics);
    else s->compiled = compile(s->workspace.cdl, s->workspace.sdl, s->workspace.mdl);
    if (materialize) s->compiled.views.materialize(s->store);
    return s;
}

}  // namespace cim
